use displaced_core::kick::{
    find_minimum, gaussian_segment_model, integrate_eom, sweep_alpha_vs_voltage, KickTemplate, LowPassFilter, TrapModel,
    TrapSpec, VoltageWaveform,
};
use displaced_core::Error;
use proptest::prelude::*;

fn trap() -> TrapModel {
    gaussian_segment_model(&TrapSpec::default()).unwrap()
}

/// Unit step response of `order` identical first-order stages.
fn cascade_step(order: u32, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..order {
        if j > 0 {
            term *= u / j as f64;
        }
        sum += term;
    }
    1.0 - (-u).exp() * sum
}

fn crossing(f: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn step_response_matches_cascade_formula() {
    let filter = LowPassFilter::new(300e3, 1).unwrap();
    let tau = filter.time_constant();
    let dt = tau / 2000.0;
    let len = 30_000;
    let mut samples = vec![1.0; len];
    samples[0] = 0.0;
    let step = VoltageWaveform::new(0.0, dt, samples).unwrap();
    for order in 1..=5 {
        let f = LowPassFilter::new(300e3, order).unwrap();
        let out = f.apply(&step).unwrap();
        // the input ramps over the first sample, i.e. a step delayed by dt/2
        for (i, y) in out.samples().iter().enumerate() {
            let u = (i as f64 * dt - 0.5 * dt) / tau;
            assert!((y - cascade_step(order, u)).abs() < 1e-5, "order {order} sample {i}");
        }
        let samples = out.samples();
        let idx = samples.iter().position(|&y| y >= 0.9).unwrap();
        let (y0, y1) = (samples[idx - 1], samples[idx]);
        let t90 = ((idx - 1) as f64 + (0.9 - y0) / (y1 - y0)) * dt - 0.5 * dt;
        let exact = crossing(|u| cascade_step(order, u), 0.9, 0.0, 50.0) * tau;
        assert!((t90 / exact - 1.0).abs() < 0.01, "order {order}: {t90} vs {exact}");
    }
}

#[test]
fn under_sampled_waveform_rejected() {
    let w = VoltageWaveform::constant(1.0, 1e-6, 10).unwrap();
    let err = LowPassFilter::new(300e3, 2).unwrap().apply(&w).unwrap_err();
    assert!(matches!(err, Error::Aliasing { .. }));
}

#[test]
fn unit_dc_gain() {
    let w = VoltageWaveform::constant(2.5, 1e-9, 500).unwrap();
    let out = LowPassFilter::new(300e3, 5).unwrap().apply(&w).unwrap();
    assert!(out.samples().iter().all(|&y| (y - 2.5).abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filter_is_causal(samples in prop::collection::vec(-3.0f64..3.0, 20..200), cut in 0.1f64..0.9, order in 1u32..6) {
        let dt = 1e-8;
        let w = VoltageWaveform::new(0.0, dt, samples.clone()).unwrap();
        let m = ((samples.len() as f64 * cut) as usize).max(1);
        let head = w.truncated_at((m - 1) as f64 * dt).unwrap();
        let filter = LowPassFilter::new(300e3, order).unwrap();
        let full = filter.apply(&w).unwrap();
        let part = filter.apply(&head).unwrap();
        prop_assert_eq!(&full.samples()[..part.len()], part.samples());
    }
}

/// `|α|` reached by an instantaneous, permanent step of `volts` on segment B
/// in the harmonic limit.
fn sudden_step_alpha(trap: &TrapModel, volts: f64) -> f64 {
    let field = trap.kick_field_per_volt(0.0) * volts;
    let shift = trap.charge * field / (trap.mass * trap.omega_ax * trap.omega_ax);
    shift.abs() * trap.alpha_per_meter()
}

fn square_kick(trap: &TrapModel, volts: f64, periods: f64) -> (f64, f64) {
    let period = trap.period();
    let dt = period / 400.0;
    let total = 12.0 * period;
    let w = VoltageWaveform::square(volts, 2.0 * period, periods * period, dt, total).unwrap();
    let r = integrate_eom(trap, trap.holding_voltage, &w, w.end_time() - w.t0(), 256).unwrap();
    (r.alpha_abs(), r.alpha_abs_energy())
}

#[test]
fn sudden_limit_cases() {
    let trap = trap();
    let volts = 0.01;
    let reference = sudden_step_alpha(&trap, volts);

    let period = trap.period();
    let dt = period / 400.0;
    let mut samples = vec![0.0; 4000];
    samples[800..].iter_mut().for_each(|v| *v = volts);
    let step = VoltageWaveform::new(0.0, dt, samples).unwrap();
    let r = integrate_eom(&trap, trap.holding_voltage, &step, step.end_time(), 256).unwrap();
    assert!((r.alpha_abs() / reference - 1.0).abs() < 0.01, "step {} vs {reference}", r.alpha_abs());
    assert!((r.alpha_abs_energy() / reference - 1.0).abs() < 0.01);

    let (full, full_e) = square_kick(&trap, volts, 1.0);
    assert!(full < 0.01 * reference && full_e < 0.01 * reference, "full period {full} {full_e}");

    let (half, half_e) = square_kick(&trap, volts, 0.5);
    assert!((half / (2.0 * reference) - 1.0).abs() < 0.01, "half period {half}");
    assert!((half_e / (2.0 * reference) - 1.0).abs() < 0.01);

    for periods in [0.1, 0.3, 0.7] {
        let expected = 2.0 * (std::f64::consts::PI * periods).sin().abs() * reference;
        let (a, _) = square_kick(&trap, volts, periods);
        assert!((a / expected - 1.0).abs() < 0.01, "{periods} periods: {a} vs {expected}");
    }

    let (single, _) = square_kick(&trap, volts, 0.3);
    let (double, _) = square_kick(&trap, 2.0 * volts, 0.3);
    assert!((double / (2.0 * single) - 1.0).abs() < 0.01);
}

#[test]
fn static_shift_follows_linear_response() {
    let trap = trap();
    for volts in [0.05, 0.1, -0.1] {
        let x = find_minimum(&trap, trap.holding_voltage, volts, 0.0).unwrap();
        let field = trap.kick_field_per_volt(0.0) * volts;
        let expected = trap.charge * field / (trap.mass * trap.omega_ax * trap.omega_ax);
        assert!((x / expected - 1.0).abs() < 0.05, "{volts} V: {x} vs {expected}");
    }
}

#[test]
fn methods_agree_and_sweep_is_monotone() {
    let trap = trap();
    let volts: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
    let sweep = sweep_alpha_vs_voltage(&trap, &KickTemplate::default(), &volts).unwrap();
    for p in &sweep.points {
        let scale = p.alpha_abs.max(p.alpha_abs_energy);
        assert!((p.alpha_abs - p.alpha_abs_energy).abs() <= 0.02 * scale + 1e-6, "{p:?}");
    }
    assert!(sweep.points.windows(2).all(|w| w[1].alpha_abs > w[0].alpha_abs));
    let fit = sweep.fit.unwrap();
    assert!(fit.rms_residual < 0.05);
    assert!(fit.eval(0.0).abs() < 1e-15);
}
