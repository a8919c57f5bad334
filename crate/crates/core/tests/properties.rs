use std::f64::consts::PI;

use proptest::prelude::*;

use upconv_core::config::{device_chain, device_crystal, PUMP_BRACKET, SIGNAL_BRACKET};
use upconv_core::counting::{simulate, SimConfig};
use upconv_core::qpm::{
    phase_mismatch, solve_poling, solve_pump, solve_signal, InteractionPoint,
};
use upconv_core::response::{
    calibrate_noise, full_conversion_power, internal_conversion_efficiency, noise_rate,
    overall_efficiency, NoiseModel,
};
use upconv_core::spectrum::acceptance_spectrum;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_conservation(s in 1200.0f64..1700.0, p in 700.0f64..1100.0) {
        let point = InteractionPoint::new(s, p, 25.0).unwrap();
        prop_assert!(point.energy_residual() < 1e-9);
        prop_assert!(point.is_sfg_ordered());
    }

    #[test]
    fn order_step_is_grating_vector(s in 1500.0f64..1600.0, p in 960.0f64..1000.0, m in 1u32..5) {
        let c = device_crystal().with_order(m);
        let next = c.with_order(m + 1);
        let d = phase_mismatch(s, p, &next).unwrap() - phase_mismatch(s, p, &c).unwrap();
        prop_assert!((d + 2.0 * PI / c.poling_period_um).abs() < 1e-12);
    }

    #[test]
    fn signal_pump_round_trip(p in 975.0f64..985.0) {
        let c = device_crystal();
        let s = solve_signal(p, &c, SIGNAL_BRACKET).unwrap();
        prop_assert!(phase_mismatch(s, p, &c).unwrap().abs() < 1e-9);
        let back = solve_pump(s, &c, PUMP_BRACKET).unwrap();
        prop_assert!((back - p).abs() < 1e-3);
    }

    #[test]
    fn pump_signal_round_trip(s in 1530.0f64..1570.0) {
        let c = device_crystal();
        let p = solve_pump(s, &c, PUMP_BRACKET).unwrap();
        let back = solve_signal(p, &c, SIGNAL_BRACKET).unwrap();
        prop_assert!((back - s).abs() < 1e-3);
    }

    #[test]
    fn poling_then_signal(s in 1500.0f64..1600.0, p in 970.0f64..990.0, t in 20.0f64..120.0) {
        let c = device_crystal().with_temperature(t);
        let period = solve_poling(s, p, t, 1, &c.index_model).unwrap();
        let c = c.with_poling_period(period);
        prop_assert!(phase_mismatch(s, p, &c).unwrap().abs() < 1e-9);
        let solved = solve_signal(p, &c, [s - 50.0, s + 50.0]).unwrap();
        prop_assert!((solved - s).abs() < 1e-3);
    }

    #[test]
    fn acceptance_bounded(p in 975.0f64..985.0, lo in 1500.0f64..1590.0) {
        let c = device_crystal();
        let grid: Vec<f64> = (0..200).map(|i| lo + 0.05 * i as f64).collect();
        let spec = acceptance_spectrum(p, &c, &grid).unwrap();
        for s in &spec.samples {
            prop_assert!((0.0..=1.0).contains(&s.efficiency));
            if s.efficiency > 1.0 - 1e-12 {
                prop_assert!(phase_mismatch(s.signal_nm, p, &c).unwrap().abs() < 1e-4);
            }
        }
    }

    #[test]
    fn efficiency_bounded_by_chain(power in 0.0f64..2.0) {
        let c = device_crystal();
        let chain = device_chain();
        let eta = overall_efficiency(power, &c, &chain).unwrap();
        prop_assert!(eta >= 0.0);
        prop_assert!(eta <= chain.transmission() + 1e-15);
        prop_assert!(chain.transmission() <= 1.0);
    }

    #[test]
    fn full_conversion_at_odd_quarter_periods(k in 0u32..20) {
        let c = device_crystal();
        let eta = internal_conversion_efficiency(full_conversion_power(&c, k), &c).unwrap();
        prop_assert!((eta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_non_decreasing(
        dark in 0.0f64..1e4, lin in 0.0f64..1e7, quad in 0.0f64..1e8,
        a in 0.0f64..1.0, b in 0.0f64..1.0,
    ) {
        let m = NoiseModel { dark_offset_hz: dark, linear_coeff_hz_per_w: lin, quadratic_coeff_hz_per_w2: quad };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(noise_rate(lo, &m).unwrap() <= noise_rate(hi, &m).unwrap());
    }

    #[test]
    fn calibration_recovers_model(
        dark in 0.0f64..1e4, lin in 1e3f64..1e7, quad in 1e3f64..1e8,
    ) {
        let truth = NoiseModel { dark_offset_hz: dark, linear_coeff_hz_per_w: lin, quadratic_coeff_hz_per_w2: quad };
        let points: Vec<(f64, f64)> = [0.005, 0.02, 0.05, 0.1, 0.15]
            .iter()
            .map(|&p| (p, noise_rate(p, &truth).unwrap()))
            .collect();
        let cal = calibrate_noise(&points, dark, true).unwrap();
        prop_assert!(!cal.clamped);
        prop_assert!(((cal.model.linear_coeff_hz_per_w - lin) / lin).abs() < 1e-6);
        prop_assert!(((cal.model.quadratic_coeff_hz_per_w2 - quad) / quad).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_deterministic_and_dead_time_respected(seed in any::<u64>(), dead in 0.0f64..500.0) {
        let cfg = SimConfig {
            seed,
            duration_s: 0.01,
            signal_rate_hz: 2e6,
            efficiency: 0.5,
            dark_rate_hz: 1e5,
            dead_time_ns: dead,
            jitter_sigma_ps: 30.0,
            true_pulse_times_s: None,
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        prop_assert_eq!(a.record.to_csv(), b.record.to_csv());
        let min_gap = a.pre_jitter_s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        prop_assert!(min_gap >= dead * 1e-9);
        prop_assert!(a.record.timestamps_s.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(a.record.n_detected as usize, a.record.timestamps_s.len());
    }
}
