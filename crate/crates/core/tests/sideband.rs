use displaced_core::fock::{dns_ppd, DnsParams, PhononDistribution};
use displaced_core::oracle::displacement_operator_oracle;
use displaced_core::sideband::{expected_dataset, matrix_element, rabi_signal, synthesize_dataset, Branch, CouplingConfig, ThetaGrid};
use displaced_core::Complex64;
use proptest::prelude::*;

#[test]
fn blue_ladder_matches_oracle_ratios() {
    let eta = 0.21;
    let d = displacement_operator_oracle(Complex64::new(0.0, eta), 40).unwrap();
    let m0 = matrix_element(0, 1, eta).unwrap();
    let a0 = d.amplitude(1, 0).norm();
    for k in 0..=10 {
        let ratio = matrix_element(k, 1, eta).unwrap().abs() / m0;
        let oracle = d.amplitude(k + 1, k).norm() / a0;
        assert!((ratio - oracle).abs() < 1e-8, "k={k}: {ratio} vs {oracle}");
        let carrier = matrix_element(k, 0, eta).unwrap().abs();
        assert!((carrier - d.amplitude(k, k).norm()).abs() < 1e-8);
    }
}

#[test]
fn red_sideband_of_ground_state_never_flops() {
    assert_eq!(matrix_element(0, -1, 0.21).unwrap(), 0.0);
    let config = CouplingConfig::default();
    let ground = PhononDistribution::pure(0, 6).unwrap();
    for theta in [0.3, 5.0, 70.0] {
        assert_eq!(rabi_signal(&ground, -1, theta, &config).unwrap(), 1.0);
    }
}

#[test]
fn invalid_branch_rejected() {
    let ppd = PhononDistribution::pure(0, 6).unwrap();
    assert!(rabi_signal(&ppd, 2, 1.0, &CouplingConfig::default()).is_err());
    assert!(matrix_element(0, -2, 0.21).is_err());
}

#[test]
fn synthesis_mean_within_three_standard_errors() {
    let config = CouplingConfig { readout_fidelity: 0.97, ..Default::default() };
    let ppd = dns_ppd(DnsParams::real(1, 0.8).unwrap(), 6).unwrap().renormalized_to(6).unwrap();
    let shots = 1_000_000;
    let grid = ThetaGrid::default_for(config.eta);
    let data = synthesize_dataset(&ppd, &config, &grid, shots, 123).unwrap();
    for (branch, point) in data.records() {
        let p = rabi_signal(&ppd, branch.delta_n(), point.theta, &config).unwrap();
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        let observed = point.up_counts as f64 / shots as f64;
        assert!((observed - p).abs() <= 3.0 * se, "{branch:?} theta={}: {observed} vs {p}", point.theta);
    }
}

#[test]
fn synthesis_is_seeded() {
    let config = CouplingConfig::default();
    let ppd = PhononDistribution::from_weights(&[0.5, 0.3, 0.2]).unwrap();
    let grid = ThetaGrid::uniform(10, 30.0);
    let a = synthesize_dataset(&ppd, &config, &grid, 200, 9).unwrap();
    let b = synthesize_dataset(&ppd, &config, &grid, 200, 9).unwrap();
    let c = synthesize_dataset(&ppd, &config, &grid, 200, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn expected_dataset_rounds_mean() {
    let config = CouplingConfig::default();
    let ppd = PhononDistribution::from_weights(&[0.5, 0.5]).unwrap();
    let data = expected_dataset(&ppd, &config, &ThetaGrid::uniform(5, 10.0), 200).unwrap();
    for (branch, point) in data.records() {
        let p = rabi_signal(&ppd, branch.delta_n(), point.theta, &config).unwrap();
        assert_eq!(point.up_counts, (200.0 * p).round() as u32);
    }
}

fn distribution(len: usize) -> impl Strategy<Value = PhononDistribution> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("zero weights", |w| PhononDistribution::from_weights(&w).ok())
}

proptest! {
    #[test]
    fn sideband_couplings_are_symmetric(k in 0usize..30, eta in 0.0f64..0.6) {
        let up = matrix_element(k, 1, eta).unwrap();
        let down = matrix_element(k + 1, -1, eta).unwrap();
        prop_assert!((up - down).abs() < 1e-14);
    }

    #[test]
    fn signal_is_a_probability(ppd in distribution(8), theta in 0.0f64..200.0, f in 0.5f64..=1.0, dn in -1i32..=1) {
        let config = CouplingConfig { readout_fidelity: f, ..Default::default() };
        let p = rabi_signal(&ppd, dn, theta, &config).unwrap();
        prop_assert!(p >= 1.0 - f - 1e-15 && p <= 1.0);
    }

    #[test]
    fn signal_is_affine_in_distribution(a in distribution(7), b in distribution(7), w in 0.0f64..1.0, theta in 0.0f64..100.0, dn in -1i32..=1) {
        let config = CouplingConfig { readout_fidelity: 0.93, ..Default::default() };
        let mix: Vec<f64> = a.probs().iter().zip(b.probs()).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        let mix = PhononDistribution::from_weights(&mix).unwrap();
        let pa = rabi_signal(&a, dn, theta, &config).unwrap();
        let pb = rabi_signal(&b, dn, theta, &config).unwrap();
        let pm = rabi_signal(&mix, dn, theta, &config).unwrap();
        prop_assert!((pm - (w * pa + (1.0 - w) * pb)).abs() < 1e-12);
    }

    #[test]
    fn zero_area_gives_readout_fidelity(ppd in distribution(7), dn in -1i32..=1, f in 0.5f64..=1.0) {
        let config = CouplingConfig { readout_fidelity: f, ..Default::default() };
        let p = rabi_signal(&ppd, dn, 0.0, &config).unwrap();
        prop_assert!((p - f).abs() < 1e-12);
    }
}

#[test]
fn branch_round_trips_through_integer() {
    for b in Branch::ALL {
        assert_eq!(Branch::try_from(b.delta_n()).unwrap(), b);
    }
}
