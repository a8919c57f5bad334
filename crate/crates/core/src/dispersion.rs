//! Temperature-dependent refractive index of the nonlinear medium.
//!
//! The bulk index comes from a Sellmeier coefficient set; the waveguide
//! index adds a constant (optionally per-band) offset on top of it.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, invalid, Result};

const CONGRUENT_LN_E: &str = include_str!("../data/congruent_ln_e.json");

/// Functional form a coefficient list is evaluated with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureForm {
    /// Extraordinary index of congruent LiNbO3, ten coefficients `a1..a6, b1..b4`:
    ///
    /// `n² = a1 + b1·f + (a2 + b2·f)/(λ² − (a3 + b3·f)²) + (a4 + b4·f)/(λ² − a5²) − a6·λ²`
    ///
    /// with `f = (T − 24.5)(T + 570.82)`, λ in µm and T in °C.
    Jundt1997,
}

impl TemperatureForm {
    fn n_coefficients(self) -> usize {
        match self {
            TemperatureForm::Jundt1997 => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierModel {
    pub name: String,
    pub temperature_form: TemperatureForm,
    pub coefficients: Vec<f64>,
    pub valid_wavelength_um: [f64; 2],
    pub valid_temperature_c: [f64; 2],
}

impl Default for SellmeierModel {
    fn default() -> Self {
        Self::congruent_ln_e()
    }
}

impl SellmeierModel {
    /// Built-in extraordinary-index set for congruent lithium niobate.
    pub fn congruent_ln_e() -> Self {
        Self::from_json(CONGRUENT_LN_E).expect("built-in coefficient set is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SellmeierModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.temperature_form.n_coefficients();
        if self.coefficients.len() != expected {
            return Err(invalid(
                "coefficients",
                format!(
                    "{:?} needs {} coefficients, got {}",
                    self.temperature_form,
                    expected,
                    self.coefficients.len()
                ),
            ));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients", "all coefficients must be finite"));
        }
        let [wl_lo, wl_hi] = self.valid_wavelength_um;
        if !(wl_lo > 0.0 && wl_hi > wl_lo) {
            return Err(invalid("valid_wavelength_um", "expected 0 < min < max"));
        }
        let [t_lo, t_hi] = self.valid_temperature_c;
        if !(t_hi > t_lo) {
            return Err(invalid("valid_temperature_c", "expected min < max"));
        }
        Ok(())
    }

    /// Refractive index at `wavelength_um` (µm) and `temperature_c` (°C).
    pub fn refractive_index(&self, wavelength_um: f64, temperature_c: f64) -> Result<f64> {
        check_range("wavelength_um", wavelength_um, self.valid_wavelength_um)?;
        check_range("temperature_c", temperature_c, self.valid_temperature_c)?;
        let n = self.evaluate(wavelength_um, temperature_c);
        if n.is_finite() {
            Ok(n)
        } else {
            Err(invalid(
                "wavelength_um",
                format!("{} lies on a pole of {}", wavelength_um, self.name),
            ))
        }
    }

    fn evaluate(&self, wavelength_um: f64, temperature_c: f64) -> f64 {
        match self.temperature_form {
            TemperatureForm::Jundt1997 => {
                let c = &self.coefficients;
                let f = (temperature_c - 24.5) * (temperature_c + 570.82);
                let l2 = wavelength_um * wavelength_um;
                let uv_pole = c[2] + c[8] * f;
                let n2 = c[0] + c[6] * f + (c[1] + c[7] * f) / (l2 - uv_pole * uv_pole)
                    + (c[3] + c[9] * f) / (l2 - c[4] * c[4])
                    - c[5] * l2;
                n2.sqrt()
            }
        }
    }
}

/// Constant index offset applied to wavelengths in `[min_um, max_um)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandOffset {
    pub min_um: f64,
    pub max_um: f64,
    pub delta_n: f64,
}

/// Effective waveguide index: bulk Sellmeier index plus an additive offset.
///
/// Band offsets take precedence over the flat `delta_n`; the first band
/// containing the wavelength wins.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideIndexModel {
    #[serde(default)]
    pub bulk: SellmeierModel,
    #[serde(default)]
    pub delta_n: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub band_offsets: Vec<BandOffset>,
}

pub const MAX_DELTA_N: f64 = 0.1;

impl WaveguideIndexModel {
    pub fn bulk(bulk: SellmeierModel) -> Self {
        Self {
            bulk,
            delta_n: 0.0,
            band_offsets: Vec::new(),
        }
    }

    pub fn flat(bulk: SellmeierModel, delta_n: f64) -> Result<Self> {
        let model = Self {
            bulk,
            delta_n,
            band_offsets: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_band(mut self, min_um: f64, max_um: f64, delta_n: f64) -> Result<Self> {
        self.band_offsets.push(BandOffset {
            min_um,
            max_um,
            delta_n,
        });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.bulk.validate()?;
        let limits = [-MAX_DELTA_N, MAX_DELTA_N];
        check_range("delta_n", self.delta_n, limits)?;
        for band in &self.band_offsets {
            check_range("delta_n", band.delta_n, limits)?;
            if !(band.max_um > band.min_um) {
                return Err(invalid(
                    "band_offsets",
                    format!("empty band [{}, {})", band.min_um, band.max_um),
                ));
            }
        }
        Ok(())
    }

    pub fn offset_at(&self, wavelength_um: f64) -> f64 {
        self.band_offsets
            .iter()
            .find(|b| wavelength_um >= b.min_um && wavelength_um < b.max_um)
            .map_or(self.delta_n, |b| b.delta_n)
    }

    pub fn effective_index(&self, wavelength_um: f64, temperature_c: f64) -> Result<f64> {
        let n = self.bulk.refractive_index(wavelength_um, temperature_c)?;
        Ok(n + self.offset_at(wavelength_um))
    }
}

pub fn refractive_index(model: &SellmeierModel, wavelength_um: f64, temperature_c: f64) -> Result<f64> {
    model.refractive_index(wavelength_um, temperature_c)
}

pub fn effective_index(
    model: &WaveguideIndexModel,
    wavelength_um: f64,
    temperature_c: f64,
) -> Result<f64> {
    model.effective_index(wavelength_um, temperature_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    // Golden values from an independent numpy evaluation of the same
    // coefficient set.
    #[test]
    fn golden_indices() {
        let ln = SellmeierModel::congruent_ln_e();
        let n1550 = ln.refractive_index(1.550, 24.5).unwrap();
        let n600 = ln.refractive_index(0.600, 24.5).unwrap();
        let n980 = ln.refractive_index(0.980, 24.5).unwrap();
        assert!((n1550 - 2.137_861).abs() < 1e-6, "{n1550}");
        assert!((n600 - 2.211_004).abs() < 1e-6, "{n600}");
        assert!((n980 - 2.160_650).abs() < 1e-6, "{n980}");
        assert!((n1550 - 2.138).abs() < 0.002);
    }

    #[test]
    fn normal_dispersion_at_1550() {
        let ln = SellmeierModel::congruent_ln_e();
        let a = ln.refractive_index(1.550, 24.5).unwrap();
        let b = ln.refractive_index(1.551, 24.5).unwrap();
        assert!(a > b);
    }

    #[test]
    fn strictly_decreasing_on_grid() {
        let ln = SellmeierModel::congruent_ln_e();
        for &t in &[20.0, 25.0, 100.0, 200.0] {
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let wl = 0.5 + 1.5 * i as f64 / 999.0;
                let n = ln.refractive_index(wl, t).unwrap();
                assert!(n > 1.0 && n < 4.0);
                assert!(n < prev, "not decreasing at {wl} µm, {t} °C");
                prev = n;
            }
        }
    }

    #[test]
    fn continuous_in_temperature() {
        let ln = SellmeierModel::congruent_ln_e();
        for &wl in &[0.6, 0.98, 1.55] {
            let mut prev = ln.refractive_index(wl, 20.0).unwrap();
            for i in 1..=1800 {
                let t = 20.0 + 0.1 * i as f64;
                let n = ln.refractive_index(wl, t).unwrap();
                assert!((n - prev).abs() < 1e-4);
                prev = n;
            }
        }
    }

    #[test]
    fn out_of_range_names_parameter() {
        let ln = SellmeierModel::congruent_ln_e();
        let err = ln.refractive_index(0.2, 25.0).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { param: "wavelength_um", .. }));
        assert!(err.to_string().contains("wavelength_um"));
        let err = ln.refractive_index(1.55, 400.0).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { param: "temperature_c", .. }));
        assert!(ln.refractive_index(f64::NAN, 25.0).is_err());
    }

    #[test]
    fn effective_index_offsets() {
        let ln = SellmeierModel::congruent_ln_e();
        let bulk = ln.refractive_index(0.98, 30.0).unwrap();

        let zero = WaveguideIndexModel::bulk(ln.clone());
        assert_eq!(zero.effective_index(0.98, 30.0).unwrap(), bulk);

        let flat = WaveguideIndexModel::flat(ln.clone(), 0.01).unwrap();
        assert!((flat.effective_index(0.98, 30.0).unwrap() - (bulk + 0.01)).abs() < 1e-15);

        let banded = WaveguideIndexModel::bulk(ln.clone())
            .with_band(0.9, 1.1, 0.02)
            .unwrap();
        assert!((banded.effective_index(0.98, 30.0).unwrap() - (bulk + 0.02)).abs() < 1e-15);
        let n1550 = ln.refractive_index(1.55, 30.0).unwrap();
        assert_eq!(banded.effective_index(1.55, 30.0).unwrap(), n1550);
    }

    #[test]
    fn rejects_large_offsets() {
        let ln = SellmeierModel::congruent_ln_e();
        assert!(WaveguideIndexModel::flat(ln.clone(), 0.2).is_err());
        assert!(WaveguideIndexModel::bulk(ln).with_band(0.5, 0.7, -0.11).is_err());
    }

    #[test]
    fn coefficient_json_roundtrip_and_validation() {
        let ln = SellmeierModel::congruent_ln_e();
        let text = serde_json::to_string(&ln).unwrap();
        assert_eq!(SellmeierModel::from_json(&text).unwrap(), ln);

        let short = text.replace("5.35583,", "");
        assert!(SellmeierModel::from_json(&short).is_err());
        let extra = text.replacen('{', "{\"colour\":1,", 1);
        assert!(SellmeierModel::from_json(&extra).is_err());
    }
}
