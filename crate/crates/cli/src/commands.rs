use std::fs;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use upconv_core::config::{RunConfig, PUMP_BRACKET, SIGNAL_BRACKET, TEMPERATURE_BRACKET};
use upconv_core::counting::{jitter_histogram, pulse_train, simulate_counts, SimConfig};
use upconv_core::dispersion::SellmeierModel;
use upconv_core::planner::{plan_band, validate_plan, ChannelPlan};
use upconv_core::qpm::{
    solve_poling, solve_pump, solve_signal, solve_temperature, tuning_slope, CrystalSpec,
    TuningVariable,
};
use upconv_core::response::{
    calibrate_noise, curve_csv, efficiency_noise_curve, noise_rate, overall_efficiency,
};
use upconv_core::spectrum::{acceptance_spectrum, fwhm, linear_grid, tuning_envelope};

use crate::args::*;

struct Output {
    target: String,
    format: Format,
}

impl Output {
    fn write(&self, text: &str) -> Result<()> {
        if self.target == "-" {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        } else {
            fs::write(&self.target, text).with_context(|| format!("writing {}", self.target))?;
        }
        Ok(())
    }

    fn emit<T: Serialize>(&self, csv: impl FnOnce() -> String, value: &T) -> Result<()> {
        match self.format {
            Format::Csv => self.write(&csv()),
            Format::Json => {
                let mut text = serde_json::to_string_pretty(value)?;
                text.push('\n');
                self.write(&text)
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
        }
        None => Ok(RunConfig::device()),
    }
}

fn bracket(arg: &Option<Vec<f64>>, default: [f64; 2]) -> [f64; 2] {
    match arg.as_deref() {
        Some([lo, hi]) => [*lo, *hi],
        _ => default,
    }
}

fn crystal_with(config: &RunConfig, o: &CrystalOverrides) -> Result<CrystalSpec> {
    let mut c = config.crystal()?.clone();
    if let Some(t) = o.temperature_c {
        c.temperature_c = t;
    }
    if let Some(p) = o.poling_um {
        c.poling_period_um = p;
    }
    if let Some(m) = o.order {
        c.qpm_order = m;
    }
    if let Some(l) = o.length_cm {
        c.length_cm = l;
    }
    c.validate()?;
    Ok(c)
}

fn pump_or_config(config: &RunConfig, pump: Option<f64>) -> Result<f64> {
    match pump {
        Some(p) => Ok(p),
        None => Ok(config.pump()?.center_nm),
    }
}

fn scalar(out: &Output, name: &str, value: f64) -> Result<()> {
    out.emit(|| format!("{name}\n{value}\n"), &json!({ name: value }))
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let out = |default: Format| Output {
        target: cli.out.clone(),
        format: cli.format.unwrap_or(default),
    };

    match &cli.command {
        Command::Index(a) => {
            let index = if a.effective {
                if a.coefficients.is_some() {
                    bail!("--effective uses the configured crystal; drop --coefficients");
                }
                config
                    .crystal()?
                    .index_model
                    .effective_index(a.wavelength_um, a.temperature_c)?
            } else {
                let model = match &a.coefficients {
                    Some(path) => SellmeierModel::from_json(
                        &fs::read_to_string(path)
                            .with_context(|| format!("reading {}", path.display()))?,
                    )?,
                    None => SellmeierModel::congruent_ln_e(),
                };
                model.refractive_index(a.wavelength_um, a.temperature_c)?
            };
            out(Format::Csv).emit(
                || {
                    format!(
                        "wavelength_um,temperature_c,index\n{},{},{}\n",
                        a.wavelength_um, a.temperature_c, index
                    )
                },
                &json!({
                    "wavelength_um": a.wavelength_um,
                    "temperature_c": a.temperature_c,
                    "index": index,
                }),
            )
        }

        Command::Qpm(QpmCommand::Solve(cmd)) => match cmd {
            SolveCommand::Signal {
                pump,
                bracket: b,
                crystal,
            } => {
                let c = crystal_with(&config, crystal)?;
                let p = pump_or_config(&config, *pump)?;
                let s = solve_signal(p, &c, bracket(b, SIGNAL_BRACKET))?;
                scalar(&out(Format::Csv), "signal_nm", s)
            }
            SolveCommand::Pump {
                signal,
                bracket: b,
                crystal,
            } => {
                let c = crystal_with(&config, crystal)?;
                let p = solve_pump(*signal, &c, bracket(b, PUMP_BRACKET))?;
                scalar(&out(Format::Csv), "pump_nm", p)
            }
            SolveCommand::Poling {
                signal,
                pump,
                crystal,
            } => {
                let c = crystal_with(&config, crystal)?;
                let p = pump_or_config(&config, *pump)?;
                let period = solve_poling(*signal, p, c.temperature_c, c.qpm_order, &c.index_model)?;
                scalar(&out(Format::Csv), "poling_period_um", period)
            }
            SolveCommand::Temperature {
                signal,
                pump,
                bracket: b,
                crystal,
            } => {
                let c = crystal_with(&config, crystal)?;
                let p = pump_or_config(&config, *pump)?;
                let t = solve_temperature(*signal, p, &c, bracket(b, TEMPERATURE_BRACKET))?;
                scalar(&out(Format::Csv), "temperature_c", t)
            }
        },

        Command::Qpm(QpmCommand::Acceptance {
            pump,
            min,
            max,
            step,
            crystal,
        }) => {
            let c = crystal_with(&config, crystal)?;
            let p = pump_or_config(&config, *pump)?;
            let spectrum = acceptance_spectrum(p, &c, &linear_grid(*min, *max, *step)?)?;
            if let Ok(w) = fwhm(&spectrum) {
                eprintln!("fwhm_nm = {w}");
            }
            out(Format::Csv).emit(|| spectrum.to_csv(), &spectrum)
        }

        Command::Qpm(QpmCommand::TuneSlope {
            pump,
            variable,
            step,
            bracket: b,
            crystal,
        }) => {
            let c = crystal_with(&config, crystal)?;
            let p = pump_or_config(&config, *pump)?;
            let (var, name, unit) = match variable {
                SlopeVariable::Pump => (TuningVariable::PumpWavelength, "pump", "nm/nm"),
                SlopeVariable::Temperature => (TuningVariable::Temperature, "temperature", "nm/K"),
            };
            let slope = tuning_slope(p, &c, var, *step, bracket(b, SIGNAL_BRACKET))?;
            out(Format::Csv).emit(
                || format!("variable,step,slope,unit\n{name},{step},{slope},{unit}\n"),
                &json!({ "variable": name, "step": step, "slope": slope, "unit": unit }),
            )
        }

        Command::Qpm(QpmCommand::Envelope {
            pump_min,
            pump_max,
            n_pumps,
            min,
            max,
            step,
            crystal,
        }) => {
            let c = crystal_with(&config, crystal)?;
            let range = match (pump_min, pump_max) {
                (Some(lo), Some(hi)) => [*lo, *hi],
                (None, None) => config.pump()?.tuning_range(),
                _ => bail!("give both --pump-min and --pump-max, or neither"),
            };
            let env = tuning_envelope(range, &c, *n_pumps, &linear_grid(*min, *max, *step)?)?;
            eprintln!("span_nm = {}", env.span_nm);
            out(Format::Csv).emit(|| env.to_csv(), &env)
        }

        Command::Response(ResponseCommand::Curve {
            p_min,
            p_max,
            points,
        }) => {
            if *points < 1 {
                bail!("--points must be at least 1");
            }
            let grid: Vec<f64> = if *points == 1 {
                vec![*p_min]
            } else {
                (0..*points)
                    .map(|i| p_min + (p_max - p_min) * i as f64 / (*points - 1) as f64)
                    .collect()
            };
            let rows =
                efficiency_noise_curve(&grid, config.crystal()?, config.chain()?, config.noise()?)?;
            out(Format::Csv).emit(|| curve_csv(&rows), &rows)
        }

        Command::Response(ResponseCommand::Calibrate {
            points,
            dark,
            quadratic,
        }) => {
            let parsed = points
                .iter()
                .map(|s| parse_point(s))
                .collect::<Result<Vec<_>>>()?;
            let cal = calibrate_noise(&parsed, *dark, *quadratic)?;
            if cal.clamped {
                eprintln!("warning: negative fit coefficient clamped to zero");
            }
            let m = &cal.model;
            out(Format::Json).emit(
                || {
                    format!(
                        "dark_offset_hz,linear_coeff_hz_per_w,quadratic_coeff_hz_per_w2,clamped\n{},{},{},{}\n",
                        m.dark_offset_hz, m.linear_coeff_hz_per_w, m.quadratic_coeff_hz_per_w2, cal.clamped
                    )
                },
                &cal,
            )
        }

        Command::Sim(SimCommand::Counts { sim }) => {
            let cfg = sim_config(cli, &config, sim)?;
            let record = simulate_counts(&cfg)?;
            eprintln!(
                "detected {} events ({} Hz)",
                record.n_detected,
                record.count_rate_hz(cfg.duration_s)
            );
            out(Format::Csv).emit(|| record.to_csv(), &record)
        }

        Command::Sim(SimCommand::Jitter {
            pulses,
            period_ns,
            bin_ps,
            sim,
        }) => {
            let mut cfg = sim_config(cli, &config, sim)?;
            let train = pulse_train(period_ns * 1e-9, *pulses);
            cfg.duration_s = *pulses as f64 * period_ns * 1e-9;
            cfg.true_pulse_times_s = Some(train.clone());
            let record = simulate_counts(&cfg)?;
            let hist = jitter_histogram(&record, &train, *bin_ps)?;
            eprintln!("fwhm_ps = {}", hist.fwhm_ps);
            out(Format::Csv).emit(|| hist.to_csv(), &hist)
        }

        Command::Plan(PlanCommand::Band {
            min,
            max,
            width,
            pump_bracket,
        }) => {
            let plan = plan_band(
                [*min, *max],
                *width,
                config.crystal()?,
                bracket(pump_bracket, PUMP_BRACKET),
            )?;
            out(Format::Json).emit(|| plan.table(), &plan)
        }

        Command::Plan(PlanCommand::Validate { plan }) => {
            let text = fs::read_to_string(plan)
                .with_context(|| format!("reading plan {}", plan.display()))?;
            let plan: ChannelPlan = serde_json::from_str(&text)
                .with_context(|| format!("parsing plan {}", plan.display()))?;
            let violations = validate_plan(&plan, config.pump()?);
            for v in &violations {
                eprintln!("{v}");
            }
            out(Format::Json).emit(
                || {
                    let mut s = String::from("channel,pump_center_nm,allowed_min_nm,allowed_max_nm\n");
                    for v in &violations {
                        s.push_str(&format!(
                            "{},{},{},{}\n",
                            v.channel, v.pump_center_nm, v.allowed_nm[0], v.allowed_nm[1]
                        ));
                    }
                    s
                },
                &json!({ "feasible": violations.is_empty(), "violations": violations }),
            )
        }
    }
}

fn parse_point(s: &str) -> Result<(f64, f64)> {
    let (p, r) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("point `{s}` is not POWER_W,RATE_HZ"))?;
    Ok((
        p.trim().parse().with_context(|| format!("power in `{s}`"))?,
        r.trim().parse().with_context(|| format!("rate in `{s}`"))?,
    ))
}

/// Simulation settings: the config's `sim` section if present, otherwise
/// derived from the pump power, detector chain and noise model.
fn sim_config(cli: &Cli, config: &RunConfig, o: &SimOverrides) -> Result<SimConfig> {
    let mut cfg = match &config.sim {
        Some(sim) => sim.clone(),
        None => {
            let pump = config.pump()?;
            let chain = config.chain()?;
            SimConfig {
                efficiency: overall_efficiency(pump.power_w, config.crystal()?, chain)?,
                dark_rate_hz: noise_rate(pump.power_w, config.noise()?)?,
                dead_time_ns: chain.dead_time_ns,
                jitter_sigma_ps: chain.jitter_sigma_ps(),
                ..SimConfig::default()
            }
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(v) = o.duration {
        cfg.duration_s = v;
    }
    if let Some(v) = o.signal_rate {
        cfg.signal_rate_hz = v;
    }
    if let Some(v) = o.efficiency {
        cfg.efficiency = v;
    }
    if let Some(v) = o.dark_rate {
        cfg.dark_rate_hz = v;
    }
    if let Some(v) = o.dead_time_ns {
        cfg.dead_time_ns = v;
    }
    if let Some(v) = o.jitter_sigma_ps {
        cfg.jitter_sigma_ps = v;
    }
    cfg.validate()?;
    Ok(cfg)
}
