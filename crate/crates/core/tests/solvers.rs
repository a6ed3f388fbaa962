use datadump::beta::{solve_beta_first_best, solve_beta_second_best, BetaParams};
use datadump::first_best::{fb_profit, solve_first_best, FirstBestRegime, DEFAULT_TOL};
use datadump::model::{Database, ModelParams};
use datadump::second_best::{menu_for_database, sb_profit, solve_second_best, SecondBestRegime};
use datadump::verify::{
    beta_grid_check, check_menu_constraints, grid_best_database, GridObjective, GridSpec,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (-1.0f64..1.0, 0.0f64..1.0, 0.0f64..=1.0).prop_map(|(e, u, lambda)| {
        let s = 10f64.powf(e);
        // cost log-uniform on [1e-4, s^2]
        let c = 10f64.powf(-4.0 + u * ((s * s).log10() + 4.0));
        ModelParams::new(s, c, lambda).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn first_best_beats_coarse_grid(p in params()) {
        let fb = solve_first_best(&p, DEFAULT_TOL).unwrap();
        let spec = GridSpec::for_params(&p, 60, 2).unwrap();
        let (_, grid) = grid_best_database(&p, GridObjective::FirstBest, &spec).unwrap();
        prop_assert!(fb.profit >= grid - 1e-6);
        prop_assert!((fb.profit - fb_profit(fb.db, &p)).abs() < 1e-12);
        if fb.regime == FirstBestRegime::Shutdown {
            prop_assert_eq!(fb.db, Database::EMPTY);
        }
    }

    #[test]
    fn second_best_beats_coarse_grid_and_is_feasible(p in params()) {
        let sb = solve_second_best(&p, false, DEFAULT_TOL).unwrap();
        let spec = GridSpec::for_params(&p, 60, 2).unwrap();
        let (_, grid) = grid_best_database(&p, GridObjective::SecondBest, &spec).unwrap();
        prop_assert!(sb.profit >= grid - 1e-6);
        prop_assert!((sb.profit - sb_profit(sb.db, &p)).abs() < 1e-12);
        let report = check_menu_constraints(&sb.menu, sb.db, &p, 1e-9);
        prop_assert!(report.pass, "{:?}", report);
        match sb.regime {
            SecondBestRegime::Pooling => prop_assert!(sb.menu.is_pooled()),
            SecondBestRegime::Shutdown => prop_assert_eq!(sb.db, Database::EMPTY),
            _ => prop_assert_eq!(sb.menu.plan_l.q1, 0.0),
        }
    }

    #[test]
    fn second_best_never_beats_first_best(p in params()) {
        let fb = solve_first_best(&p, DEFAULT_TOL).unwrap();
        let sb = solve_second_best(&p, false, DEFAULT_TOL).unwrap();
        prop_assert!(sb.profit <= fb.profit + 1e-9);
    }

    #[test]
    fn markov_constraint_keeps_history_below_current(p in params()) {
        let tied = solve_second_best(&p, true, DEFAULT_TOL).unwrap();
        let free = solve_second_best(&p, false, DEFAULT_TOL).unwrap();
        prop_assert!(tied.db.n0 <= tied.db.n1);
        prop_assert!(tied.profit <= free.profit + 1e-12);
        if free.db.n0 <= free.db.n1 {
            prop_assert_eq!(tied.db, free.db);
        } else {
            prop_assert_eq!(tied.db.n0, tied.db.n1);
        }
    }

    #[test]
    fn menus_satisfy_constraints_everywhere(a in 0.0f64..10.0, b in 0.0f64..10.0, p in params()) {
        let db = Database::new(a, b).unwrap();
        let menu = menu_for_database(db, &p);
        let report = check_menu_constraints(&menu, db, &p, 1e-9);
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn beta_second_best_is_certified(
        a in 0.0f64..0.5, b in 0.0f64..0.5, p_r in 0.0f64..0.5,
        sigma_sq in 0.1f64..4.0, e in -4.0f64..-1.0,
    ) {
        let bp = BetaParams::new(a.min(b), a.max(b), p_r, sigma_sq, 10f64.powf(e));
        prop_assume!(bp.is_ok());
        let bp = bp.unwrap();
        let fb = solve_beta_first_best(&bp, DEFAULT_TOL).unwrap();
        let sb = solve_beta_second_best(&bp, DEFAULT_TOL).unwrap();
        prop_assert!(fb.n_star == 0.0 || sb.n_store < fb.n_star);
        prop_assert!(sb.profit <= fb.profit + 1e-12);
        prop_assert!(beta_grid_check(&bp, 51).unwrap().pass);
    }
}

#[test]
fn invalid_tolerance_is_rejected() {
    let p = ModelParams::new(1.0, 0.04, 0.5).unwrap();
    assert!(solve_first_best(&p, 0.0).is_err());
    assert!(solve_second_best(&p, false, f64::NAN).is_err());
}
