use datadump::model::{value_l, value_s, Database, ModelParams};
use datadump::posterior::{conditional_value_via_covariance, monte_carlo_value, McConfig, TargetKind};
use proptest::prelude::*;

fn unit() -> ModelParams {
    ModelParams::new(1.0, 0.04, 0.5).unwrap()
}

fn cfg(draws: u64, seed: u64) -> McConfig {
    McConfig { draws, seed }
}

#[test]
fn monte_carlo_worked_examples() {
    let p = unit();
    let one = Database::new(1.0, 1.0).unwrap();
    let est = monte_carlo_value(TargetKind::Forecaster, one, &p, &cfg(1_000_000, 0)).unwrap();
    assert!((est.estimate - 0.5).abs() <= 3.0 * est.std_error, "{est:?}");
    let current = Database::new(0.0, 1.0).unwrap();
    let est = monte_carlo_value(TargetKind::Nowcaster, current, &p, &cfg(1_000_000, 0)).unwrap();
    assert!((est.estimate - 4.0 / 3.0).abs() <= 3.0 * est.std_error, "{est:?}");
    for target in TargetKind::ALL {
        let est = monte_carlo_value(target, Database::EMPTY, &p, &cfg(10, 0)).unwrap();
        assert_eq!(est.estimate, 0.0);
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    let d = Database::new(0.7, 2.5).unwrap();
    let a = monte_carlo_value(TargetKind::Nowcaster, d, &unit(), &cfg(50_000, 11)).unwrap();
    let b = monte_carlo_value(TargetKind::Nowcaster, d, &unit(), &cfg(50_000, 11)).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let c = monte_carlo_value(TargetKind::Nowcaster, d, &unit(), &cfg(50_000, 12)).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn thread_count_does_not_change_estimate() {
    let d = Database::new(1.5, 0.5).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_value(TargetKind::Forecaster, d, &unit(), &cfg(200_000, 3)).unwrap())
    };
    assert_eq!(run(1).estimate.to_bits(), run(4).estimate.to_bits());
}

#[test]
fn standard_error_halves_when_draws_quadruple() {
    let d = Database::new(2.0, 3.0).unwrap();
    for target in TargetKind::ALL {
        let small = monte_carlo_value(target, d, &unit(), &cfg(250_000, 5)).unwrap();
        let large = monte_carlo_value(target, d, &unit(), &cfg(1_000_000, 5)).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() <= 0.4, "{target:?}: ratio {ratio}");
    }
}

#[test]
fn nowcaster_estimate_dominates_forecaster() {
    let p = ModelParams::new(2.0, 0.1, 0.5).unwrap();
    for (n0, n1) in [(0.5, 0.5), (3.0, 1.0), (0.0, 2.0), (5.0, 0.2)] {
        let d = Database::new(n0, n1).unwrap();
        let s = monte_carlo_value(TargetKind::Nowcaster, d, &p, &cfg(200_000, 1)).unwrap();
        let l = monte_carlo_value(TargetKind::Forecaster, d, &p, &cfg(200_000, 1)).unwrap();
        let joint = (s.std_error.powi(2) + l.std_error.powi(2)).sqrt();
        assert!(s.estimate >= l.estimate - 3.0 * joint);
    }
}

proptest! {
    #[test]
    fn conditioning_matches_closed_forms(n0 in 0.0f64..10.0, n1 in 0.0f64..10.0, s in 0.1f64..10.0) {
        let p = ModelParams::new(s, 0.01, 0.5).unwrap();
        let d = Database::new(n0, n1).unwrap();
        let l = conditional_value_via_covariance(TargetKind::Forecaster, d, &p).unwrap();
        let n = conditional_value_via_covariance(TargetKind::Nowcaster, d, &p).unwrap();
        let tol = |v: f64| 1e-10 * v.abs().max(1e-300);
        prop_assert!((l - value_l(d, &p)).abs() <= tol(l));
        prop_assert!((n - value_s(d, &p)).abs() <= tol(n));
    }
}
