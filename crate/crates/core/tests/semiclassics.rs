use displaced_core::fock::count_ppd_zeros;
use displaced_core::semiclassics::{
    compare_minima, enclosed_area, enclosed_area_phase, intersecting_range, predict_minima, PhaseSpaceBand,
};
use proptest::prelude::*;

fn mean_error(n: usize, k: usize) -> f64 {
    let rows = compare_minima(n, k).unwrap();
    rows.iter().map(|r| r.relative_error).sum::<f64>() / rows.len() as f64
}

#[test]
fn predicted_minima_near_exact_zeros() {
    for (n, k) in [(1, 1), (2, 2), (1, 2), (2, 3)] {
        let rows = compare_minima(n, k).unwrap();
        assert_eq!(rows.len(), count_ppd_zeros(n.min(k), n.max(k)).unwrap());
        for r in rows {
            assert!(r.relative_error < 0.15, "{r:?}");
        }
    }
}

#[test]
fn minima_count_bounded_by_fock_number() {
    for n in 0..=3 {
        let (_, hi) = intersecting_range(n, n);
        assert!(predict_minima(n, n, (0.0, hi)).unwrap().len() <= n);
    }
    assert_eq!(predict_minima(2, 2, (0.0, 4.0)).unwrap().len(), 2);
}

#[test]
fn agreement_improves_with_excitation() {
    assert!(mean_error(3, 3) <= mean_error(2, 2));
    assert!(mean_error(2, 3) <= mean_error(1, 2));
}

#[test]
fn band_energies() {
    let band = PhaseSpaceBand::prepared(2, 1.0).unwrap();
    assert_eq!(band.center_energy_quanta(), 2.5);
    assert!((band.radius() - 5f64.sqrt()).abs() < 1e-15);
    assert_eq!(PhaseSpaceBand::analysis(0).center(), 0.0);
    assert!(PhaseSpaceBand::prepared(1, -1.0).is_err());
}

proptest! {
    #[test]
    fn area_non_negative_and_increasing(n in 0usize..5, k in 0usize..5, s in 0.02f64..0.98, ds in 0.001f64..0.02) {
        let (lo, hi) = intersecting_range(n, k);
        let a = lo + s * (hi - lo);
        let b = (a + ds * (hi - lo)).min(hi - 1e-9);
        let ba = enclosed_area(n, k, a).unwrap();
        prop_assert!(ba >= 0.0);
        prop_assert!(enclosed_area(n, k, b).unwrap() > ba);
        prop_assert!(enclosed_area_phase(n, k, b).unwrap() > enclosed_area_phase(n, k, a).unwrap());
    }
}
