//! Pump-power dependent detection efficiency and noise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qpm::CrystalSpec;

/// Loss and detector parameters downstream of the nonlinear conversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorChain {
    pub coupling_efficiency: f64,
    pub filter_transmission: f64,
    pub apd_quantum_efficiency: f64,
    pub intrinsic_dark_rate_hz: f64,
    pub dead_time_ns: f64,
    pub jitter_fwhm_ps: f64,
}

impl Default for DetectorChain {
    /// Product of the three fractions is 0.12. Only the product matters;
    /// the split is arbitrary. Dead time and dark rate are placeholders.
    fn default() -> Self {
        Self {
            coupling_efficiency: 0.48,
            filter_transmission: 0.50,
            apd_quantum_efficiency: 0.50,
            intrinsic_dark_rate_hz: 100.0,
            dead_time_ns: 50.0,
            jitter_fwhm_ps: 50.0,
        }
    }
}

fn check_fraction(param: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(param, format!("must be in (0, 1], got {v}")))
    }
}

fn check_non_negative(param: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(param, format!("must be finite and >= 0, got {v}")))
    }
}

impl DetectorChain {
    pub fn validate(&self) -> Result<()> {
        check_fraction("coupling_efficiency", self.coupling_efficiency)?;
        check_fraction("filter_transmission", self.filter_transmission)?;
        check_fraction("apd_quantum_efficiency", self.apd_quantum_efficiency)?;
        check_non_negative("intrinsic_dark_rate_hz", self.intrinsic_dark_rate_hz)?;
        check_non_negative("dead_time_ns", self.dead_time_ns)?;
        check_non_negative("jitter_fwhm_ps", self.jitter_fwhm_ps)
    }

    pub fn transmission(&self) -> f64 {
        self.coupling_efficiency * self.filter_transmission * self.apd_quantum_efficiency
    }

    /// Gaussian sigma corresponding to `jitter_fwhm_ps`.
    pub fn jitter_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA
    }
}

/// `2·sqrt(2·ln 2)`.
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Noise count rate `dark + linear·P + quadratic·P²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub dark_offset_hz: f64,
    pub linear_coeff_hz_per_w: f64,
    #[serde(default)]
    pub quadratic_coeff_hz_per_w2: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("dark_offset_hz", self.dark_offset_hz)?;
        check_non_negative("linear_coeff_hz_per_w", self.linear_coeff_hz_per_w)?;
        check_non_negative("quadratic_coeff_hz_per_w2", self.quadratic_coeff_hz_per_w2)
    }
}

fn check_power(pump_power_w: f64) -> Result<()> {
    if pump_power_w >= 0.0 && pump_power_w.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            param: "pump_power_w",
            value: pump_power_w,
            min: 0.0,
            max: f64::INFINITY,
        })
    }
}

/// `sin²(L·sqrt(η_nor·P))` with L in cm and η_nor in W⁻¹cm⁻².
pub fn internal_conversion_efficiency(pump_power_w: f64, crystal: &CrystalSpec) -> Result<f64> {
    check_power(pump_power_w)?;
    let phase = crystal.length_cm * (crystal.normalized_efficiency * pump_power_w).sqrt();
    Ok(phase.sin().powi(2))
}

/// Pump power of the `k`-th full-conversion maximum, `((2k+1)π/2)²/(η_nor·L²)`.
pub fn full_conversion_power(crystal: &CrystalSpec, k: u32) -> f64 {
    let phase = (2 * k + 1) as f64 * std::f64::consts::FRAC_PI_2;
    phase * phase / (crystal.normalized_efficiency * crystal.length_cm * crystal.length_cm)
}

pub fn overall_efficiency(
    pump_power_w: f64,
    crystal: &CrystalSpec,
    chain: &DetectorChain,
) -> Result<f64> {
    Ok(internal_conversion_efficiency(pump_power_w, crystal)? * chain.transmission())
}

pub fn noise_rate(pump_power_w: f64, model: &NoiseModel) -> Result<f64> {
    check_power(pump_power_w)?;
    Ok(model.dark_offset_hz
        + model.linear_coeff_hz_per_w * pump_power_w
        + model.quadratic_coeff_hz_per_w2 * pump_power_w * pump_power_w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCalibration {
    pub model: NoiseModel,
    /// Set when the unconstrained fit produced a negative coefficient that
    /// was clamped to zero.
    pub clamped: bool,
}

/// Least-squares fit of the pump-dependent part of the noise with the dark
/// offset held at `fixed_dark_hz`.
pub fn calibrate_noise(
    points: &[(f64, f64)],
    fixed_dark_hz: f64,
    use_quadratic: bool,
) -> Result<NoiseCalibration> {
    check_non_negative("fixed_dark_hz", fixed_dark_hz).map_err(|e| Error::Fit(e.to_string()))?;
    let needed = if use_quadratic { 2 } else { 1 };
    if points.len() < needed {
        return Err(Error::Fit(format!(
            "need at least {needed} points, got {}",
            points.len()
        )));
    }
    for &(p, y) in points {
        if !(p > 0.0 && p.is_finite() && y.is_finite()) {
            return Err(Error::Fit(format!("invalid point ({p} W, {y} Hz)")));
        }
    }
    let mut powers: Vec<f64> = points.iter().map(|&(p, _)| p).collect();
    powers.sort_by(f64::total_cmp);
    if powers.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("pump powers must be distinct".into()));
    }

    // Moments of the design matrix [P, P²] against y − dark.
    let (mut s2, mut s3, mut s4, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(p, y) in points {
        let r = y - fixed_dark_hz;
        s2 += p * p;
        s3 += p * p * p;
        s4 += p * p * p * p;
        s1y += p * r;
        s2y += p * p * r;
    }
    let linear_only = s1y / s2;
    let quadratic_only = s2y / s4;

    let (mut linear, mut quadratic, mut clamped) = (linear_only, 0.0, false);
    if use_quadratic {
        let det = s2 * s4 - s3 * s3;
        if det.abs() <= 1e-12 * s2 * s4 {
            return Err(Error::Fit("degenerate design matrix".into()));
        }
        linear = (s1y * s4 - s2y * s3) / det;
        quadratic = (s2 * s2y - s3 * s1y) / det;
        if quadratic < 0.0 {
            linear = linear_only;
            quadratic = 0.0;
            clamped = true;
        } else if linear < 0.0 {
            linear = 0.0;
            quadratic = quadratic_only;
            clamped = true;
        }
    }
    if linear < 0.0 {
        linear = 0.0;
        clamped = true;
    }
    if quadratic < 0.0 {
        quadratic = 0.0;
        clamped = true;
    }
    Ok(NoiseCalibration {
        model: NoiseModel {
            dark_offset_hz: fixed_dark_hz,
            linear_coeff_hz_per_w: linear,
            quadratic_coeff_hz_per_w2: quadratic,
        },
        clamped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub power_w: f64,
    pub efficiency: f64,
    pub noise_hz: f64,
}

pub fn efficiency_noise_curve(
    power_grid: &[f64],
    crystal: &CrystalSpec,
    chain: &DetectorChain,
    noise: &NoiseModel,
) -> Result<Vec<CurveRow>> {
    if power_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("power_grid", "must be sorted ascending"));
    }
    power_grid
        .iter()
        .map(|&p| {
            Ok(CurveRow {
                power_w: p,
                efficiency: overall_efficiency(p, crystal, chain)?,
                noise_hz: noise_rate(p, noise)?,
            })
        })
        .collect()
}

/// CSV with header `power_W,efficiency,noise_hz`.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("power_W,efficiency,noise_hz\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.power_w, r.efficiency, r.noise_hz);
    }
    out
}
