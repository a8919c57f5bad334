//! Monte Carlo photon counting for a free-running detector.
//!
//! Pipeline: Poisson signal arrivals (or a given pulse train), binomial
//! thinning by the detection efficiency, merge with Poisson dark events,
//! non-paralyzable dead time, then Gaussian timing jitter.
//!
//! Every stage draws from its own ChaCha8 stream derived from the seed, so
//! changing the jitter leaves the pre-jitter event stream untouched.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::response::GAUSSIAN_FWHM_PER_SIGMA;
use crate::spectrum::half_max_width;

pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64";

const STREAM_SIGNAL: u64 = 0;
const STREAM_THINNING: u64 = 1;
const STREAM_DARK: u64 = 2;
const STREAM_JITTER: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub duration_s: f64,
    /// Photon rate at the detector input.
    pub signal_rate_hz: f64,
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub dead_time_ns: f64,
    pub jitter_sigma_ps: f64,
    /// When set, signal photons arrive exactly at these times instead of
    /// as a Poisson process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_pulse_times_s: Option<Vec<f64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration_s: 1.0,
            signal_rate_hz: 1e6,
            efficiency: 0.06,
            dark_rate_hz: 5e4,
            dead_time_ns: 50.0,
            jitter_sigma_ps: 50.0 / GAUSSIAN_FWHM_PER_SIGMA,
            true_pulse_times_s: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(invalid("duration_s", "must be positive"));
        }
        for (name, v) in [
            ("signal_rate_hz", self.signal_rate_hz),
            ("dark_rate_hz", self.dark_rate_hz),
            ("dead_time_ns", self.dead_time_ns),
            ("jitter_sigma_ps", self.jitter_sigma_ps),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(invalid("efficiency", "must be in [0, 1]"));
        }
        if let Some(pulses) = &self.true_pulse_times_s {
            if pulses.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("true_pulse_times_s", "must be strictly increasing"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub rng: String,
    pub timestamps_s: Vec<f64>,
    /// Signal photons reaching the detector, before thinning.
    pub n_generated: u64,
    pub n_dark_generated: u64,
    pub n_detected: u64,
    pub n_dead_time_lost: u64,
}

impl CountRecord {
    /// CSV with header `t_seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * self.timestamps_s.len() + 10);
        out.push_str("t_seconds\n");
        for t in &self.timestamps_s {
            let _ = writeln!(out, "{t}");
        }
        out
    }

    pub fn count_rate_hz(&self, duration_s: f64) -> f64 {
        self.n_detected as f64 / duration_s
    }
}

/// Full simulation output including the event stream before jitter.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub record: CountRecord,
    pub pre_jitter_s: Vec<f64>,
}

fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson_arrivals(rng: &mut ChaCha8Rng, rate_hz: f64, duration_s: f64) -> Vec<f64> {
    if rate_hz <= 0.0 {
        return Vec::new();
    }
    let gap = Exp::new(rate_hz).expect("positive rate");
    let mut out = Vec::with_capacity((rate_hz * duration_s * 1.01) as usize + 16);
    let mut t = gap.sample(rng);
    while t < duration_s {
        out.push(t);
        t += gap.sample(rng);
    }
    out
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Non-paralyzable dead time: an event is dropped when it falls within
/// `dead_time_s` of the last accepted event. Returns kept events and the
/// number lost.
pub fn apply_dead_time(sorted_events: &[f64], dead_time_s: f64) -> (Vec<f64>, u64) {
    let mut kept = Vec::with_capacity(sorted_events.len());
    let mut lost = 0;
    let mut last: Option<f64> = None;
    for &t in sorted_events {
        match last {
            Some(l) if t - l < dead_time_s || t <= l => lost += 1,
            _ => {
                kept.push(t);
                last = Some(t);
            }
        }
    }
    (kept, lost)
}

pub fn simulate(config: &SimConfig) -> Result<Simulation> {
    config.validate()?;

    let arrivals = match &config.true_pulse_times_s {
        Some(pulses) => pulses.clone(),
        None => poisson_arrivals(
            &mut stage_rng(config.seed, STREAM_SIGNAL),
            config.signal_rate_hz,
            config.duration_s,
        ),
    };
    let n_generated = arrivals.len() as u64;

    let mut thin = stage_rng(config.seed, STREAM_THINNING);
    let detected: Vec<f64> = arrivals
        .into_iter()
        .filter(|_| thin.random::<f64>() < config.efficiency)
        .collect();

    let dark = poisson_arrivals(
        &mut stage_rng(config.seed, STREAM_DARK),
        config.dark_rate_hz,
        config.duration_s,
    );
    let n_dark_generated = dark.len() as u64;

    let merged = merge_sorted(&detected, &dark);
    let (pre_jitter, n_dead_time_lost) = apply_dead_time(&merged, config.dead_time_ns * 1e-9);

    let mut timestamps = pre_jitter.clone();
    if config.jitter_sigma_ps > 0.0 {
        let normal = Normal::new(0.0, config.jitter_sigma_ps * 1e-12)
            .map_err(|e| invalid("jitter_sigma_ps", e.to_string()))?;
        let mut rng = stage_rng(config.seed, STREAM_JITTER);
        for t in &mut timestamps {
            *t += normal.sample(&mut rng);
        }
        timestamps.sort_by(f64::total_cmp);
    }

    Ok(Simulation {
        record: CountRecord {
            rng: RNG_ALGORITHM.to_string(),
            n_detected: timestamps.len() as u64,
            timestamps_s: timestamps,
            n_generated,
            n_dark_generated,
            n_dead_time_lost,
        },
        pre_jitter_s: pre_jitter,
    })
}

pub fn simulate_counts(config: &SimConfig) -> Result<CountRecord> {
    simulate(config).map(|s| s.record)
}

/// `count` pulses spaced by `period_s`, starting at `period_s / 2`.
pub fn pulse_train(period_s: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| (i as f64 + 0.5) * period_s).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterHistogram {
    pub bin_ps: f64,
    /// (bin centre in ps, count)
    pub bins: Vec<(f64, u64)>,
    pub fwhm_ps: f64,
}

impl JitterHistogram {
    /// CSV with header `dt_ps,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt_ps,count\n");
        for (dt, n) in &self.bins {
            let _ = writeln!(out, "{dt},{n}");
        }
        out
    }
}

/// Histogram of detection time minus the nearest true pulse time.
pub fn jitter_histogram(
    record: &CountRecord,
    true_pulse_times_s: &[f64],
    bin_ps: f64,
) -> Result<JitterHistogram> {
    if record.timestamps_s.is_empty() {
        return Err(Error::Empty("no detections to histogram".into()));
    }
    if true_pulse_times_s.is_empty() {
        return Err(Error::Empty("no true pulse times".into()));
    }
    if !(bin_ps > 0.0 && bin_ps.is_finite()) {
        return Err(invalid("bin_ps", "must be positive"));
    }
    let pulses = true_pulse_times_s;
    let nearest = |t: f64| {
        let i = pulses.partition_point(|&p| p < t);
        match (i.checked_sub(1).map(|k| pulses[k]), pulses.get(i)) {
            (Some(a), Some(&b)) => {
                if t - a <= b - t {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!("pulses is non-empty"),
        }
    };
    let indices: Vec<i64> = record
        .timestamps_s
        .iter()
        .map(|&t| ((t - nearest(t)) * 1e12 / bin_ps).round() as i64)
        .collect();
    let lo = indices.iter().copied().min().unwrap() - 1;
    let hi = indices.iter().copied().max().unwrap() + 1;
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for i in indices {
        counts[(i - lo) as usize] += 1;
    }
    let bins: Vec<(f64, u64)> = counts
        .iter()
        .enumerate()
        .map(|(k, &n)| ((lo + k as i64) as f64 * bin_ps, n))
        .collect();
    let xs: Vec<f64> = bins.iter().map(|b| b.0).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.1 as f64).collect();
    let fwhm_ps = half_max_width(&xs, &ys, false)?;
    Ok(JitterHistogram {
        bin_ps,
        bins,
        fwhm_ps,
    })
}

/// Poisson-limited SNR `ηR·g / sqrt(ηR·g + D·g)`.
pub fn snr_estimate(signal_rate_hz: f64, efficiency: f64, dark_rate_hz: f64, gate_s: f64) -> Result<f64> {
    if !(gate_s > 0.0 && gate_s.is_finite()) {
        return Err(invalid("gate_s", "must be positive"));
    }
    let signal = efficiency * signal_rate_hz * gate_s;
    let total = signal + dark_rate_hz * gate_s;
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(signal / total.sqrt())
}
