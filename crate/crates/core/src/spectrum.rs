//! Acceptance spectra, peak widths and pump-tuning envelopes.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qpm::{phase_mismatch, solve_signal, CrystalSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub signal_nm: f64,
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSpectrum {
    pub pump_nm: f64,
    pub samples: Vec<SpectrumSample>,
}

impl AcceptanceSpectrum {
    pub fn wavelengths(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.signal_nm).collect()
    }

    pub fn efficiencies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.efficiency).collect()
    }

    /// CSV with header `signal_nm,efficiency`.
    pub fn to_csv(&self) -> String {
        samples_csv(&self.samples)
    }
}

pub(crate) fn samples_csv(samples: &[SpectrumSample]) -> String {
    let mut out = String::from("signal_nm,efficiency\n");
    for s in samples {
        let _ = writeln!(out, "{},{}", s.signal_nm, s.efficiency);
    }
    out
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Uniform grid from `min` to `max` inclusive with spacing close to `step`.
pub fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && max > min) {
        return Err(invalid("grid", format!("expected min < max, got [{min}, {max}]")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", "must be positive"));
    }
    let n = ((max - min) / step).round().max(1.0) as usize;
    Ok((0..=n)
        .map(|i| if i == n { max } else { min + (max - min) * i as f64 / n as f64 })
        .collect())
}

fn check_sorted(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("signal_grid", "empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("signal_grid", "must be strictly ascending"));
    }
    Ok(())
}

/// Normalized conversion efficiency `sinc²(Δk·L/2)` over `signal_grid`.
pub fn acceptance_spectrum(
    pump_nm: f64,
    crystal: &CrystalSpec,
    signal_grid: &[f64],
) -> Result<AcceptanceSpectrum> {
    check_sorted(signal_grid)?;
    let half_length = 0.5 * crystal.length_um();
    let samples = signal_grid
        .iter()
        .map(|&s| {
            let dk = phase_mismatch(s, pump_nm, crystal)?;
            Ok(SpectrumSample {
                signal_nm: s,
                efficiency: sinc(dk * half_length).powi(2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AcceptanceSpectrum { pump_nm, samples })
}

fn argmax(ys: &[f64]) -> Option<usize> {
    ys.iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &y)| match best {
            Some((_, b)) if b >= y => best,
            _ => Some((i, y)),
        })
        .map(|(i, _)| i)
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        x0
    } else {
        x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    }
}

/// Width at half the global maximum, linearly interpolated.
///
/// With `main_lobe_only`, the walk outwards from the peak stops with an
/// error if the curve turns back up before dropping to half maximum.
pub fn half_max_width(xs: &[f64], ys: &[f64], main_lobe_only: bool) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(invalid("spectrum", "x and y lengths differ"));
    }
    let peak = argmax(ys).ok_or_else(|| invalid("spectrum", "no finite samples"))?;
    if !(ys[peak] > 0.0) {
        return Err(invalid("spectrum", "no positive peak"));
    }
    let half = 0.5 * ys[peak];

    let mut i = peak;
    let left = loop {
        if i == 0 {
            return Err(Error::GridTooNarrow("no half-maximum crossing below the peak".into()));
        }
        let j = i - 1;
        if ys[j] <= half {
            break crossing(xs[j], ys[j], xs[i], ys[i], half);
        }
        if main_lobe_only && ys[j] > ys[i] {
            return Err(Error::GridTooNarrow(
                "main lobe minimum lies above half maximum".into(),
            ));
        }
        i = j;
    };

    let mut i = peak;
    let right = loop {
        if i + 1 == xs.len() {
            return Err(Error::GridTooNarrow("no half-maximum crossing above the peak".into()));
        }
        let j = i + 1;
        if ys[j] <= half {
            break crossing(xs[i], ys[i], xs[j], ys[j], half);
        }
        if main_lobe_only && ys[j] > ys[i] {
            return Err(Error::GridTooNarrow(
                "main lobe minimum lies above half maximum".into(),
            ));
        }
        i = j;
    };
    Ok(right - left)
}

/// FWHM (nm) of the main lobe of an acceptance spectrum.
pub fn fwhm(spectrum: &AcceptanceSpectrum) -> Result<f64> {
    half_max_width(&spectrum.wavelengths(), &spectrum.efficiencies(), true)
}

/// Distance between the outermost half-maximum crossings.
fn outer_half_max_span(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let peak = argmax(ys).ok_or_else(|| invalid("spectrum", "no finite samples"))?;
    if !(ys[peak] > 0.0) {
        return Err(invalid("spectrum", "no positive peak"));
    }
    let half = 0.5 * ys[peak];
    let first = ys.iter().position(|&y| y >= half).unwrap_or(peak);
    let last = ys.iter().rposition(|&y| y >= half).unwrap_or(peak);
    if first == 0 || last + 1 == ys.len() {
        return Err(Error::GridTooNarrow(
            "envelope does not fall to half maximum inside the grid".into(),
        ));
    }
    let left = crossing(xs[first - 1], ys[first - 1], xs[first], ys[first], half);
    let right = crossing(xs[last], ys[last], xs[last + 1], ys[last + 1], half);
    Ok(right - left)
}

/// Pointwise maximum of several acceptance spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningEnvelope {
    pub pumps_nm: Vec<f64>,
    pub samples: Vec<SpectrumSample>,
    /// Span between the outermost half-maximum crossings, nm.
    pub span_nm: f64,
}

impl TuningEnvelope {
    pub fn to_csv(&self) -> String {
        samples_csv(&self.samples)
    }
}

/// `n` pump wavelengths equally spaced over `range`; a single pump sits at
/// the middle.
pub fn pump_positions(range: [f64; 2], n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (range[0] + range[1])],
        _ => (0..n)
            .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn tuning_envelope(
    pump_range: [f64; 2],
    crystal: &CrystalSpec,
    n_pumps: usize,
    signal_grid: &[f64],
) -> Result<TuningEnvelope> {
    if n_pumps < 1 {
        return Err(invalid("n_pumps", "must be at least 1"));
    }
    if !(pump_range[1] >= pump_range[0]) {
        return Err(invalid("pump_range", "expected min <= max"));
    }
    let pumps = pump_positions(pump_range, n_pumps);
    let mut samples: Vec<SpectrumSample> = signal_grid
        .iter()
        .map(|&s| SpectrumSample {
            signal_nm: s,
            efficiency: 0.0,
        })
        .collect();
    for &p in &pumps {
        let spectrum = acceptance_spectrum(p, crystal, signal_grid)?;
        for (env, s) in samples.iter_mut().zip(&spectrum.samples) {
            env.efficiency = env.efficiency.max(s.efficiency);
        }
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.signal_nm).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.efficiency).collect();
    let span_nm = outer_half_max_span(&xs, &ys)?;
    Ok(TuningEnvelope {
        pumps_nm: pumps,
        samples,
        span_nm,
    })
}

/// Signal grid covering the main lobe of the acceptance peak at `pump_nm`,
/// `points` samples wide and centred on the phase-matched signal.
pub fn main_lobe_grid(
    pump_nm: f64,
    crystal: &CrystalSpec,
    signal_bracket: [f64; 2],
    points: usize,
) -> Result<Vec<f64>> {
    let center = solve_signal(pump_nm, crystal, signal_bracket)?;
    let h = 1e-2;
    let slope = (phase_mismatch(center + h, pump_nm, crystal)?
        - phase_mismatch(center - h, pump_nm, crystal)?)
        / (2.0 * h);
    if slope == 0.0 {
        return Err(invalid("crystal", "phase mismatch is flat in signal wavelength"));
    }
    // First zeros of sinc² sit at Δk·L/2 = ±π.
    let lobe = 2.0 * PI / (crystal.length_um() * slope.abs());
    let half_span = 1.2 * lobe;
    let n = points.max(3) | 1;
    let mid = n / 2;
    Ok((0..n)
        .map(|i| center + half_span * (i as f64 - mid as f64) / mid as f64)
        .collect())
}

/// FWHM (nm) of the single acceptance peak at `pump_nm`.
pub fn single_peak_fwhm(pump_nm: f64, crystal: &CrystalSpec, signal_bracket: [f64; 2]) -> Result<f64> {
    let grid = main_lobe_grid(pump_nm, crystal, signal_bracket, 4001)?;
    fwhm(&acceptance_spectrum(pump_nm, crystal, &grid)?)
}
