use lvpatch::{example51, validate_params, QuasiPeriodicCoefficient, Term};
use proptest::prelude::*;

#[test]
fn dense_grid_reaches_amplitude_bounds() {
    let c = QuasiPeriodicCoefficient::sin_pair(5.0, 0.5);
    let (lo, hi) = c.empirical_extrema(1e4, 1e-3).unwrap();
    assert!((4.0..=4.01).contains(&lo), "{lo}");
    assert!((5.99..=6.0).contains(&hi), "{hi}");
    assert_eq!((c.inf_bound(), c.sup_bound()), (4.0, 6.0));
}

#[test]
fn sine_extrema_on_short_horizon() {
    let c = QuasiPeriodicCoefficient::new(0.0, vec![Term::sin(1.0, 1.0)]).unwrap();
    let (lo, hi) = c.empirical_extrema(10.0, 1e-3).unwrap();
    assert!((lo + 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5, "{lo} {hi}");
}

#[test]
fn extrema_tighten_monotonically_on_refined_grids() {
    // Power-of-two steps keep every coarser grid inside the next finer one.
    let grids = [(10.0, 0.125), (100.0, 0.0625), (1000.0, 0.03125), (10000.0, 0.015625)];
    for (name, coef) in example51().named() {
        let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
        for (horizon, step) in grids {
            let (lo, hi) = coef.empirical_extrema(horizon, step).unwrap();
            assert!(lo <= prev.0 && hi >= prev.1, "{name} at horizon {horizon}");
            assert!(lo >= coef.inf_bound() - 1e-12 && hi <= coef.sup_bound() + 1e-12, "{name}");
            prev = (lo, hi);
        }
        let gap = (prev.0 - coef.inf_bound()).max(coef.sup_bound() - prev.1);
        assert!(gap < 0.02 * coef.amplitude_sum().max(1e-12) + 1e-12, "{name}: gap {gap}");
    }
}

fn coefficient() -> impl Strategy<Value = QuasiPeriodicCoefficient> {
    let term = (-3.0..3.0f64, 0.05..5.0f64, any::<bool>())
        .prop_map(|(a, w, sin)| if sin { Term::sin(a, w) } else { Term::cos(a, w) });
    (-5.0..10.0f64, prop::collection::vec(term, 0..5))
        .prop_map(|(c, terms)| QuasiPeriodicCoefficient::new(c, terms).unwrap())
}

proptest! {
    #[test]
    fn eval_lies_between_bounds(c in coefficient(), t in -1e4..1e4f64) {
        let v = c.eval(t);
        prop_assert!(c.inf_bound() - 1e-12 <= v && v <= c.sup_bound() + 1e-12);
    }

    #[test]
    fn admitted_coefficients_are_nonnegative(c in coefficient(), ts in prop::collection::vec(0.0..1e4f64, 32)) {
        // Constant equal to the amplitude sum sits exactly on the boundary.
        let shifted = QuasiPeriodicCoefficient::new(c.amplitude_sum(), c.terms.clone()).unwrap();
        for coef in [&c, &shifted] {
            if coef.is_nonnegative() {
                for &t in &ts {
                    prop_assert!(coef.eval(t) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn validator_admits_exactly_nonnegative_inf_bounds(c in coefficient()) {
        let mut p = example51();
        p.b21 = c.clone();
        prop_assert_eq!(validate_params(&p).is_ok(), c.inf_bound() >= 0.0);
    }

    #[test]
    fn json_round_trip(c in coefficient()) {
        let text = serde_json::to_string(&c).unwrap();
        let back: QuasiPeriodicCoefficient = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
