//! Multi-pump channel layouts covering a target signal band.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qpm::{solve_pump, solve_signal, CrystalSpec};
use crate::spectrum::single_peak_fwhm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSource {
    pub center_nm: f64,
    pub tuning_halfwidth_nm: f64,
    pub power_w: f64,
}

impl PumpSource {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_nm > 0.0 && self.center_nm.is_finite()) {
            return Err(invalid("center_nm", "must be positive"));
        }
        if !(self.tuning_halfwidth_nm >= 0.0 && self.tuning_halfwidth_nm.is_finite()) {
            return Err(invalid("tuning_halfwidth_nm", "must be >= 0"));
        }
        if !(self.power_w > 0.0 && self.power_w.is_finite()) {
            return Err(invalid("power_w", "must be positive"));
        }
        Ok(())
    }

    pub fn tuning_range(&self) -> [f64; 2] {
        [
            self.center_nm - self.tuning_halfwidth_nm,
            self.center_nm + self.tuning_halfwidth_nm,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub index: usize,
    pub signal_band_nm: [f64; 2],
    pub pump_center_nm: f64,
}

/// Channels share one crystal (and hence one temperature).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    pub channels: Vec<Channel>,
    pub covered_band_nm: [f64; 2],
    pub crystal: CrystalSpec,
}

impl ChannelPlan {
    pub fn covers(&self, signal_nm: f64) -> bool {
        self.channels
            .iter()
            .any(|c| signal_nm >= c.signal_band_nm[0] && signal_nm <= c.signal_band_nm[1])
    }

    /// Plain-text table: channel, band edges and pump centre.
    pub fn table(&self) -> String {
        let mut out = String::from("channel,signal_min_nm,signal_max_nm,pump_center_nm\n");
        for c in &self.channels {
            let _ = writeln!(
                out,
                "{},{:.3},{:.3},{:.3}",
                c.index, c.signal_band_nm[0], c.signal_band_nm[1], c.pump_center_nm
            );
        }
        out
    }
}

/// Signal bandwidth (nm) one pump can serve: the spread of phase-matched
/// signals across the pump tuning range plus the single-peak FWHM.
pub fn channel_width(crystal: &CrystalSpec, pump: &PumpSource, signal_bracket: [f64; 2]) -> Result<f64> {
    let [lo, hi] = pump.tuning_range();
    let spread = if pump.tuning_halfwidth_nm > 0.0 {
        (solve_signal(hi, crystal, signal_bracket)? - solve_signal(lo, crystal, signal_bracket)?).abs()
    } else {
        0.0
    };
    Ok(spread + single_peak_fwhm(pump.center_nm, crystal, signal_bracket)?)
}

/// `ceil(band / width)`, tolerant of float error on exact multiples.
pub fn channel_count(band_width: f64, per_channel_width: f64) -> usize {
    let ratio = band_width / per_channel_width;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest.max(1.0) as usize
    } else {
        ratio.ceil().max(1.0) as usize
    }
}

/// Equal-width channels tiled left to right from the lower edge of `target`.
pub fn tile_band(target_nm: [f64; 2], per_channel_width: f64) -> Result<Vec<[f64; 2]>> {
    let [lo, hi] = target_nm;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(invalid("target", format!("expected min < max, got {target_nm:?}")));
    }
    if !(per_channel_width > 0.0 && per_channel_width.is_finite()) {
        return Err(invalid("per_channel_width", "must be positive"));
    }
    let n = channel_count(hi - lo, per_channel_width);
    Ok((0..n)
        .map(|i| {
            let a = lo + i as f64 * per_channel_width;
            let b = if i + 1 == n {
                (lo + n as f64 * per_channel_width).max(hi)
            } else {
                lo + (i + 1) as f64 * per_channel_width
            };
            [a, b]
        })
        .collect())
}

pub fn plan_band(
    target_nm: [f64; 2],
    per_channel_width: f64,
    crystal: &CrystalSpec,
    pump_bracket: [f64; 2],
) -> Result<ChannelPlan> {
    let bands = tile_band(target_nm, per_channel_width)?;
    let channels = bands
        .iter()
        .enumerate()
        .map(|(index, &band)| {
            let center = 0.5 * (band[0] + band[1]);
            let pump_center_nm =
                solve_pump(center, crystal, pump_bracket).map_err(|e| Error::Channel {
                    index,
                    lo: band[0],
                    hi: band[1],
                    source: Box::new(e),
                })?;
            Ok(Channel {
                index,
                signal_band_nm: band,
                pump_center_nm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let covered_band_nm = [bands[0][0], bands[bands.len() - 1][1]];
    Ok(ChannelPlan {
        channels,
        covered_band_nm,
        crystal: crystal.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub channel: usize,
    pub pump_center_nm: f64,
    pub allowed_nm: [f64; 2],
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "channel {} needs pump {:.3} nm outside [{:.3}, {:.3}] nm",
            self.channel, self.pump_center_nm, self.allowed_nm[0], self.allowed_nm[1]
        )
    }
}

/// Channels whose pump centre lies outside the tuning range of `pump`.
pub fn validate_plan(plan: &ChannelPlan, pump: &PumpSource) -> Vec<Violation> {
    let allowed = pump.tuning_range();
    plan.channels
        .iter()
        .filter(|c| c.pump_center_nm < allowed[0] || c.pump_center_nm > allowed[1])
        .map(|c| Violation {
            channel: c.index,
            pump_center_nm: c.pump_center_nm,
            allowed_nm: allowed,
        })
        .collect()
}
