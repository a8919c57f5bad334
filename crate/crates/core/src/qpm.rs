//! Quasi-phase-matching condition for sum-frequency generation.
//!
//! The phase mismatch is
//!
//! ```text
//! Δk = 2π · [ n(uc)/λuc − n(s)/λs − n(p)/λp − m/Λ ]      (λ, Λ in µm)
//! ```
//!
//! and an interaction is quasi-phase matched when `Δk = 0`. Wavelengths
//! enter the public API in nm; the index model works in µm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion::WaveguideIndexModel;
use crate::error::{invalid, Error, Result};
use crate::roots::{find_root, RootOptions};

const NM_PER_UM: f64 = 1000.0;
const UM_PER_CM: f64 = 1.0e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSpec {
    pub length_cm: f64,
    pub poling_period_um: f64,
    pub qpm_order: u32,
    pub temperature_c: f64,
    /// Normalized conversion efficiency in W⁻¹·cm⁻² (5.0 means 500 %/W/cm²).
    pub normalized_efficiency: f64,
    #[serde(default)]
    pub index_model: WaveguideIndexModel,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_cm > 0.0 && self.length_cm.is_finite()) {
            return Err(invalid("length_cm", "must be positive"));
        }
        if !(self.poling_period_um > 0.0 && self.poling_period_um.is_finite()) {
            return Err(invalid("poling_period_um", "must be positive"));
        }
        if self.qpm_order < 1 {
            return Err(invalid("qpm_order", "must be at least 1"));
        }
        if !(self.normalized_efficiency > 0.0 && self.normalized_efficiency.is_finite()) {
            return Err(invalid("normalized_efficiency", "must be positive"));
        }
        self.index_model.validate()
    }

    pub fn length_um(&self) -> f64 {
        self.length_cm * UM_PER_CM
    }

    pub fn with_temperature(&self, temperature_c: f64) -> Self {
        Self {
            temperature_c,
            ..self.clone()
        }
    }

    pub fn with_poling_period(&self, poling_period_um: f64) -> Self {
        Self {
            poling_period_um,
            ..self.clone()
        }
    }

    pub fn with_order(&self, qpm_order: u32) -> Self {
        Self {
            qpm_order,
            ..self.clone()
        }
    }
}

/// Wavelength triple of one three-wave interaction, in nm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionPoint {
    pub signal_nm: f64,
    pub pump_nm: f64,
    pub upconverted_nm: f64,
    pub temperature_c: f64,
}

impl InteractionPoint {
    pub fn new(signal_nm: f64, pump_nm: f64, temperature_c: f64) -> Result<Self> {
        Ok(Self {
            signal_nm,
            pump_nm,
            upconverted_nm: upconverted_wavelength(signal_nm, pump_nm)?,
            temperature_c,
        })
    }

    /// Relative residual of `1/uc − 1/s − 1/p`.
    pub fn energy_residual(&self) -> f64 {
        let lhs = 1.0 / self.upconverted_nm;
        let rhs = 1.0 / self.signal_nm + 1.0 / self.pump_nm;
        (lhs - rhs).abs() / lhs
    }

    /// `uc < pump < signal`, the ordering of a telecom signal up-converted
    /// by a shorter-wavelength pump.
    pub fn is_sfg_ordered(&self) -> bool {
        self.upconverted_nm < self.pump_nm && self.pump_nm < self.signal_nm
    }
}

/// Sum-frequency wavelength `1/(1/signal + 1/pump)`.
pub fn upconverted_wavelength(signal_nm: f64, pump_nm: f64) -> Result<f64> {
    if !(signal_nm > 0.0 && signal_nm.is_finite()) {
        return Err(invalid("signal_nm", format!("must be positive, got {signal_nm}")));
    }
    if !(pump_nm > 0.0 && pump_nm.is_finite()) {
        return Err(invalid("pump_nm", format!("must be positive, got {pump_nm}")));
    }
    Ok(1.0 / (1.0 / signal_nm + 1.0 / pump_nm))
}

/// `n(uc)/λuc − n(s)/λs − n(p)/λp` in µm⁻¹, the material part of the mismatch.
fn material_mismatch(
    model: &WaveguideIndexModel,
    signal_nm: f64,
    pump_nm: f64,
    temperature_c: f64,
) -> Result<f64> {
    let uc_um = upconverted_wavelength(signal_nm, pump_nm)? / NM_PER_UM;
    let s_um = signal_nm / NM_PER_UM;
    let p_um = pump_nm / NM_PER_UM;
    let n_uc = model.effective_index(uc_um, temperature_c)?;
    let n_s = model.effective_index(s_um, temperature_c)?;
    let n_p = model.effective_index(p_um, temperature_c)?;
    Ok(n_uc / uc_um - n_s / s_um - n_p / p_um)
}

/// Phase mismatch Δk in rad/µm.
pub fn phase_mismatch(signal_nm: f64, pump_nm: f64, crystal: &CrystalSpec) -> Result<f64> {
    let material = material_mismatch(
        &crystal.index_model,
        signal_nm,
        pump_nm,
        crystal.temperature_c,
    )?;
    let grating = crystal.qpm_order as f64 / crystal.poling_period_um;
    Ok(2.0 * PI * (material - grating))
}

fn check_bracket(bracket: [f64; 2]) -> Result<()> {
    if bracket[0].is_finite() && bracket[1].is_finite() && bracket[1] > bracket[0] {
        Ok(())
    } else {
        Err(invalid(
            "bracket",
            format!("expected finite lo < hi, got {bracket:?}"),
        ))
    }
}

/// Signal wavelength phase matched to `pump_nm`, searched inside `bracket` (nm).
pub fn solve_signal(pump_nm: f64, crystal: &CrystalSpec, bracket: [f64; 2]) -> Result<f64> {
    check_bracket(bracket)?;
    find_root(
        "signal",
        |s| phase_mismatch(s, pump_nm, crystal),
        bracket[0],
        bracket[1],
        RootOptions::default(),
    )
}

/// Pump wavelength phase matched to `signal_nm`, searched inside `bracket` (nm).
pub fn solve_pump(signal_nm: f64, crystal: &CrystalSpec, bracket: [f64; 2]) -> Result<f64> {
    check_bracket(bracket)?;
    find_root(
        "pump",
        |p| phase_mismatch(signal_nm, p, crystal),
        bracket[0],
        bracket[1],
        RootOptions::default(),
    )
}

/// Poling period (µm) that phase matches the given interaction at order `order`.
pub fn solve_poling(
    signal_nm: f64,
    pump_nm: f64,
    temperature_c: f64,
    order: u32,
    index_model: &WaveguideIndexModel,
) -> Result<f64> {
    if order < 1 {
        return Err(invalid("qpm_order", "must be at least 1"));
    }
    let material = material_mismatch(index_model, signal_nm, pump_nm, temperature_c)?;
    if material <= 0.0 {
        return Err(Error::NotPhaseMatchable { mismatch: material });
    }
    Ok(order as f64 / material)
}

/// Crystal temperature (°C) at which the interaction is phase matched.
pub fn solve_temperature(
    signal_nm: f64,
    pump_nm: f64,
    crystal: &CrystalSpec,
    bracket: [f64; 2],
) -> Result<f64> {
    check_bracket(bracket)?;
    find_root(
        "temperature",
        |t| phase_mismatch(signal_nm, pump_nm, &crystal.with_temperature(t)),
        bracket[0],
        bracket[1],
        RootOptions::default(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningVariable {
    PumpWavelength,
    Temperature,
}

/// Central-difference derivative of the phase-matched signal wavelength
/// with respect to pump wavelength (nm/nm) or temperature (nm/K).
pub fn tuning_slope(
    pump_nm: f64,
    crystal: &CrystalSpec,
    variable: TuningVariable,
    step: f64,
    signal_bracket: [f64; 2],
) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", "must be positive"));
    }
    let (up, down) = match variable {
        TuningVariable::PumpWavelength => (
            solve_signal(pump_nm + step, crystal, signal_bracket)?,
            solve_signal(pump_nm - step, crystal, signal_bracket)?,
        ),
        TuningVariable::Temperature => (
            solve_signal(
                pump_nm,
                &crystal.with_temperature(crystal.temperature_c + step),
                signal_bracket,
            )?,
            solve_signal(
                pump_nm,
                &crystal.with_temperature(crystal.temperature_c - step),
                signal_bracket,
            )?,
        ),
    };
    Ok((up - down) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::device_crystal;
    use crate::dispersion::SellmeierModel;

    fn bulk_crystal() -> CrystalSpec {
        CrystalSpec {
            length_cm: 2.2,
            poling_period_um: 10.0,
            qpm_order: 1,
            temperature_c: 25.0,
            normalized_efficiency: 5.0,
            index_model: WaveguideIndexModel::bulk(SellmeierModel::congruent_ln_e()),
        }
    }

    #[test]
    fn upconverted_closed_form() {
        assert!((upconverted_wavelength(1550.0, 980.0).unwrap() - 600.395_257).abs() < 1e-3);
        assert!((upconverted_wavelength(1536.0, 980.0).unwrap() - 598.282_989).abs() < 1e-3);
        assert_eq!(upconverted_wavelength(1000.0, 1000.0).unwrap(), 500.0);
        assert!(upconverted_wavelength(0.0, 980.0).is_err());
        assert!(upconverted_wavelength(1550.0, -1.0).is_err());
    }

    #[test]
    fn interaction_point_invariants() {
        let p = InteractionPoint::new(1550.0, 980.0, 25.0).unwrap();
        assert!(p.energy_residual() < 1e-12);
        assert!(p.is_sfg_ordered());
    }

    #[test]
    fn order_shifts_mismatch_by_grating_vector() {
        let c = bulk_crystal();
        let d1 = phase_mismatch(1550.0, 980.0, &c).unwrap();
        let d2 = phase_mismatch(1550.0, 980.0, &c.with_order(2)).unwrap();
        assert!((d2 - d1 + 2.0 * PI / c.poling_period_um).abs() < 1e-12);
    }

    // Golden values frozen from an independent numpy/brentq evaluation and a
    // sign-change scan of Δk over Λ ∈ [3, 12] µm.
    #[test]
    fn bulk_poling_period() {
        let model = WaveguideIndexModel::default();
        let m1 = solve_poling(1550.0, 980.0, 25.0, 1, &model).unwrap();
        assert!((m1 - 10.162_870).abs() < 1e-5, "{m1}");
        let m2 = solve_poling(1550.0, 980.0, 25.0, 2, &model).unwrap();
        assert!((m2 - 2.0 * m1).abs() < 1e-12);
        let c = bulk_crystal().with_poling_period(m1);
        assert!(phase_mismatch(1550.0, 980.0, &c).unwrap().abs() < 1e-9);
    }

    #[test]
    fn poling_scan_agrees_with_closed_form() {
        let model = WaveguideIndexModel::default();
        let closed = solve_poling(1550.0, 980.0, 25.0, 1, &model).unwrap();
        let c = bulk_crystal();
        let mut last = None;
        let mut crossing = None;
        for i in 0..=9000 {
            let period = 3.0 + i as f64 * 1e-3;
            let dk = phase_mismatch(1550.0, 980.0, &c.with_poling_period(period)).unwrap();
            if let Some((p0, d0)) = last {
                if f64::signum(d0) != f64::signum(dk) {
                    crossing = Some(0.5 * (p0 + period));
                }
            }
            last = Some((period, dk));
        }
        assert!((crossing.unwrap() - closed).abs() < 1e-3);
    }

    #[test]
    fn unmatchable_period() {
        // A strongly negative visible-band offset flips the material mismatch.
        let model = WaveguideIndexModel::default().with_band(0.4, 0.7, -0.1).unwrap();
        let err = solve_poling(1550.0, 980.0, 25.0, 1, &model).unwrap_err();
        assert!(matches!(err, Error::NotPhaseMatchable { .. }));
        assert!(solve_poling(1550.0, 980.0, 25.0, 0, &model).is_err());
    }

    #[test]
    fn solve_signal_round_trip() {
        let c = bulk_crystal();
        let period = solve_poling(1550.0, 980.0, c.temperature_c, 1, &c.index_model).unwrap();
        let c = c.with_poling_period(period);
        let s = solve_signal(980.0, &c, [1400.0, 1700.0]).unwrap();
        assert!((s - 1550.0).abs() < 1e-3);
        assert!(phase_mismatch(s, 980.0, &c).unwrap().abs() < 1e-10);
        let p = solve_pump(s, &c, [900.0, 1100.0]).unwrap();
        assert!((p - 980.0).abs() < 1e-3);
        assert!((900.0..=1100.0).contains(&p));
    }

    #[test]
    fn mismatch_single_sign_change_near_root() {
        let c = device_crystal();
        let root = solve_signal(980.0, &c, [1400.0, 1700.0]).unwrap();
        let mut changes = 0;
        let mut prev = phase_mismatch(root - 5.0, 980.0, &c).unwrap();
        for i in 1..=10_000 {
            let s = root - 5.0 + 10.0 * i as f64 / 10_000.0;
            let dk = phase_mismatch(s, 980.0, &c).unwrap();
            assert!(dk < prev, "Δk not monotonic at {s}");
            if dk.signum() != prev.signum() {
                changes += 1;
            }
            prev = dk;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn signal_shift_has_constant_sign() {
        let c = device_crystal();
        let solved: Vec<f64> = (0..=8)
            .map(|i| solve_signal(978.0 + 0.5 * i as f64, &c, [1400.0, 1700.0]).unwrap())
            .collect();
        assert_ne!(solved[2], solved[4]);
        assert!(solved.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn no_root_in_bracket() {
        let c = device_crystal();
        let err = solve_signal(980.0, &c, [1600.0, 1700.0]).unwrap_err();
        assert!(matches!(err, Error::NoRoot { variable: "signal", .. }));
        assert!(err.to_string().contains("no phase-matched signal"));
    }

    #[test]
    fn temperature_round_trip() {
        let c = device_crystal();
        let t = solve_temperature(1552.0, 980.0, &c, [20.0, 80.0]).unwrap();
        assert!((20.0..=80.0).contains(&t));
        let hot = c.with_temperature(t);
        assert!(phase_mismatch(1552.0, 980.0, &hot).unwrap().abs() < 1e-10);
        let s = solve_signal(980.0, &hot, [1400.0, 1700.0]).unwrap();
        assert!((s - 1552.0).abs() < 1e-3);
    }

    // Oracle (numpy/brentq): pump slope −1.996 nm/nm, temperature slope
    // 0.214 nm/K for the bundled device configuration.
    #[test]
    fn tuning_slopes() {
        let c = device_crystal();
        let b = [1400.0, 1700.0];
        let pump = tuning_slope(980.0, &c, TuningVariable::PumpWavelength, 1.0, b).unwrap();
        assert!((pump + 1.996).abs() < 2e-3, "{pump}");
        assert!((1.0..=4.0).contains(&pump.abs()));
        let half = tuning_slope(980.0, &c, TuningVariable::PumpWavelength, 0.5, b).unwrap();
        assert!(((pump - half) / pump).abs() < 0.01);

        let temp = tuning_slope(980.0, &c, TuningVariable::Temperature, 1.0, b).unwrap();
        assert!((temp - 0.2142).abs() < 1e-3, "{temp}");
        assert!((0.15..=0.8).contains(&temp));
        let half = tuning_slope(980.0, &c, TuningVariable::Temperature, 0.5, b).unwrap();
        assert!(((temp - half) / temp).abs() < 0.01);
    }

    #[test]
    fn crystal_validation() {
        let mut c = bulk_crystal();
        assert!(c.validate().is_ok());
        c.qpm_order = 0;
        assert!(c.validate().is_err());
        let mut c = bulk_crystal();
        c.length_cm = -1.0;
        assert!(c.validate().is_err());
    }
}
