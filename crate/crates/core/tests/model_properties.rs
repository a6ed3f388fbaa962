use datadump::model::{
    grad_values, hessians, lambda_star, lambda_star_bounds, value_delta, value_l, value_s,
    Database, ModelParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (-1.0f64..1.0, 0.0f64..=1.0).prop_map(|(e, lambda)| {
        let s = 10f64.powf(e);
        ModelParams::new(s, 0.01 * s * s, lambda).unwrap()
    })
}

fn db() -> impl Strategy<Value = Database> {
    (0.0f64..20.0, 0.0f64..20.0).prop_map(|(a, b)| Database::new(a, b).unwrap())
}

proptest! {
    #[test]
    fn values_bounded_by_prior_variance(d in db(), p in params()) {
        let (vl, vs) = (value_l(d, &p), value_s(d, &p));
        prop_assert!(vl >= 0.0 && vs >= vl);
        prop_assert!(vl <= p.sigma_mu_sq * (1.0 + 1e-12));
        prop_assert!(vs <= p.sigma_mu_sq + 1.0 + 1e-12);
    }

    #[test]
    fn forecaster_value_is_symmetric(d in db(), p in params()) {
        prop_assert_eq!(value_l(d, &p), value_l(d.swapped(), &p));
    }

    #[test]
    fn nowcaster_prefers_current_data(x in 0.0f64..10.0, gap in 1e-3f64..10.0, p in params()) {
        let d = Database::new(x, x + gap).unwrap();
        prop_assert!(value_s(d, &p) > value_s(d.swapped(), &p));
    }

    #[test]
    fn strict_monotonicity_and_concavity(a in 1e-3f64..20.0, b in 1e-3f64..20.0, p in params()) {
        let d = Database::new(a, b).unwrap();
        let (gl, gs) = grad_values(d, &p);
        prop_assert!(gl.d_n0 > 0.0 && gl.d_n1 > 0.0 && gs.d_n0 > 0.0 && gs.d_n1 > 0.0);
        let (hl, hs) = hessians(d, &p);
        prop_assert!(hl.is_negative_definite() && hs.is_negative_definite());
    }

    #[test]
    fn gap_shrinks_with_history(a in 0.0f64..20.0, b in 1e-2f64..20.0, step in 1e-2f64..5.0, p in params()) {
        let d = Database::new(a, b).unwrap();
        let more = Database::new(a + step, b).unwrap();
        prop_assert!(value_delta(more, &p) < value_delta(d, &p));
        prop_assert!(value_delta(d, &p) > 0.0);
    }

    #[test]
    fn threshold_within_bounds_and_decreasing(n0 in 0.0f64..1e3, step in 1e-3f64..10.0, p in params()) {
        let (lo, hi) = lambda_star_bounds(&p);
        let (a, b) = (lambda_star(n0, &p), lambda_star(n0 + step, &p));
        prop_assert!(lo <= b && b <= a && a <= hi);
    }
}

#[test]
fn worked_values() {
    let p = ModelParams::new(1.0, 0.04, 0.5).unwrap();
    let d = Database::new(1.0, 1.0).unwrap();
    assert!((value_l(d, &p) - 0.5).abs() < 1e-15);
    assert!((value_s(d, &p) - 1.375).abs() < 1e-15);
    assert_eq!(value_l(Database::EMPTY, &p), 0.0);
    assert_eq!(value_s(Database::EMPTY, &p), 0.0);
}
