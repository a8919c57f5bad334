//! JSON run configuration and the bundled device configuration.

use serde::{Deserialize, Serialize};

use crate::counting::SimConfig;
use crate::error::{invalid, Result};
use crate::planner::PumpSource;
use crate::qpm::CrystalSpec;
use crate::response::{DetectorChain, NoiseModel};

/// The bundled device description: 2.2 cm PPLN waveguide with a 9 µm
/// period, 500 %/W/cm², 980 nm pump tunable over ±1 nm, chain product 0.12
/// and a noise model through (25.5 mW, 50 kHz).
///
/// Bulk lithium niobate phase matches 1550 + 980 nm at a first-order period
/// of about 10.16 µm. The 9 µm period is reconciled with a +0.007633 index
/// offset on the visible band (0.5-0.7 µm), which puts the 980 nm pump's
/// phase-matched signal at 1549.995 nm.
pub const DEVICE_CONFIG_JSON: &str = include_str!("../data/device.json");

/// Pump power of the 6 % / 50 kHz operating point.
pub const OPERATING_POWER_W: f64 = 0.0255;

pub const SIGNAL_BRACKET: [f64; 2] = [1400.0, 1700.0];
pub const PUMP_BRACKET: [f64; 2] = [900.0, 1100.0];
pub const TEMPERATURE_BRACKET: [f64; 2] = [20.0, 200.0];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crystal: Option<CrystalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<DetectorChain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
}

fn missing(section: &'static str) -> crate::error::Error {
    invalid(section, "section missing from config")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn device() -> Self {
        Self::from_json(DEVICE_CONFIG_JSON).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.crystal {
            c.validate()?;
        }
        if let Some(p) = &self.pump {
            p.validate()?;
        }
        if let Some(c) = &self.chain {
            c.validate()?;
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if let Some(s) = &self.sim {
            s.validate()?;
        }
        Ok(())
    }

    pub fn crystal(&self) -> Result<&CrystalSpec> {
        self.crystal.as_ref().ok_or_else(|| missing("crystal"))
    }

    pub fn pump(&self) -> Result<&PumpSource> {
        self.pump.as_ref().ok_or_else(|| missing("pump"))
    }

    pub fn chain(&self) -> Result<&DetectorChain> {
        self.chain.as_ref().ok_or_else(|| missing("chain"))
    }

    pub fn noise(&self) -> Result<&NoiseModel> {
        self.noise.as_ref().ok_or_else(|| missing("noise"))
    }

    pub fn sim(&self) -> Result<&SimConfig> {
        self.sim.as_ref().ok_or_else(|| missing("sim"))
    }
}

pub fn device_crystal() -> CrystalSpec {
    RunConfig::device().crystal.expect("bundled crystal")
}

pub fn device_pump() -> PumpSource {
    RunConfig::device().pump.expect("bundled pump")
}

pub fn device_chain() -> DetectorChain {
    RunConfig::device().chain.expect("bundled chain")
}

pub fn device_noise() -> NoiseModel {
    RunConfig::device().noise.expect("bundled noise")
}
