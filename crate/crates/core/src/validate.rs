//! Self-check suite behind the `validate` subcommand.
//!
//! Every check pits a solver or closed form against an independent oracle
//! on fixed or seeded random inputs. Sizes are kept small enough for an
//! interactive run; the test suite repeats the same checks at full scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{solve_beta_first_best, solve_beta_second_best, BetaParams, BetaRegime};
use crate::error::Result;
use crate::first_best::{solve_first_best, FirstBestRegime, DEFAULT_TOL};
use crate::model::{
    grad_values, hessians, lambda_star, lambda_star_bounds, value_delta, value_l, value_s,
    Database, ModelParams,
};
use crate::posterior::{conditional_value_via_covariance, monte_carlo_value, McConfig, TargetKind};
use crate::second_best::{
    menu_for_database, solve_second_best, sweep, SecondBestRegime, SweepAxis,
    discrimination_is_monotone_in_lambda,
};
use crate::verify::{beta_grid_check, brute_force_menu, grid_best_database, GridObjective, GridSpec};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub seed: u64,
    pub draws: u64,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

type CheckResult = std::result::Result<String, String>;
type Check = fn(&McConfig) -> CheckResult;

const CHECKS: &[(&str, Check)] = &[
    ("closed forms match Gaussian conditioning", check_conditioning),
    ("Monte Carlo within 3 standard errors", check_monte_carlo),
    ("value function properties", check_value_properties),
    ("first best favours current data", check_first_best_composition),
    ("optimal menu matches grid search", check_menus),
    ("bang-bang regimes in the nowcaster share", check_regimes),
    ("screening shifts storage toward history", check_distortion),
    ("composition reversal example", check_reversal),
    ("over-storage example", check_over_storage),
    ("solvers dominate grid search", check_grid_certificates),
    ("four-type model", check_beta),
    ("Markov constraint binds", check_markov),
];

/// Runs every check concurrently; results keep the order above.
pub fn run_validation(cfg: &McConfig) -> Result<ValidationSummary> {
    cfg.validate()?;
    let checks: Vec<CheckOutcome> = CHECKS
        .par_iter()
        .map(|&(name, check)| {
            let (pass, detail) = match check(cfg) {
                Ok(detail) => (true, detail),
                Err(detail) => (false, detail),
            };
            CheckOutcome { name, pass, detail }
        })
        .collect();
    Ok(ValidationSummary {
        seed: cfg.seed,
        draws: cfg.draws,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Seeded stream for a check; distinct checks get distinct streams.
fn rng_for(cfg: &McConfig, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    rng
}

fn random_params(rng: &mut impl Rng) -> ModelParams {
    let s = 10f64.powf(rng.random_range(-1.0..1.0));
    let cost = 10f64.powf(rng.random_range(-4.0..(s * s).log10()));
    ModelParams::new(s, cost, rng.random_range(0.0..=1.0)).expect("sampled in range")
}

fn random_db(rng: &mut impl Rng) -> Database {
    Database::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)).expect("nonnegative")
}

fn check_conditioning(_: &McConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        for j in 1..=10 {
            for &s in &[0.25, 1.0, 4.0] {
                let p = ModelParams::new(s, 0.1, 0.5).map_err(|e| e.to_string())?;
                let db = Database { n0: i as f64, n1: j as f64 };
                for (target, closed) in [
                    (TargetKind::Nowcaster, value_s(db, &p)),
                    (TargetKind::Forecaster, value_l(db, &p)),
                ] {
                    let v = conditional_value_via_covariance(target, db, &p).map_err(|e| e.to_string())?;
                    worst = worst.max((v - closed).abs() / closed);
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("max relative gap {worst:e}"))?;
    Ok(format!("max relative gap {worst:.2e}"))
}

fn check_monte_carlo(cfg: &McConfig) -> CheckResult {
    let cases = [(1.0, 1.0, 1.0), (0.5, 3.0, 2.0), (4.0, 0.5, 0.25)];
    let mut worst: f64 = 0.0;
    for (n0, n1, s) in cases {
        let p = ModelParams::new(s, 0.1, 0.5).map_err(|e| e.to_string())?;
        let db = Database { n0, n1 };
        for target in TargetKind::ALL {
            let mc = monte_carlo_value(target, db, &p, cfg).map_err(|e| e.to_string())?;
            let exact = match target {
                TargetKind::Nowcaster => value_s(db, &p),
                TargetKind::Forecaster => value_l(db, &p),
            };
            worst = worst.max((mc.estimate - exact).abs() / mc.std_error);
        }
    }
    ensure(worst < 3.0, || format!("worst z-score {worst:.2}"))?;
    Ok(format!("worst z-score {worst:.2}"))
}

fn check_value_properties(cfg: &McConfig) -> CheckResult {
    let mut rng = rng_for(cfg, 1);
    let h = 1e-6;
    for _ in 0..300 {
        let db = Database {
            n0: rng.random_range(0.01..10.0),
            n1: rng.random_range(0.01..10.0),
        };
        let p = ModelParams::new(rng.random_range(0.05..5.0), 0.1, 0.5).expect("valid");
        let (gl, gs) = grad_values(db, &p);
        let partials = [gl.d_n0, gl.d_n1, gs.d_n0, gs.d_n1];
        ensure(partials.iter().all(|&g| g > 0.0), || format!("non-positive gradient at {db:?}"))?;
        // Central difference and the rounding error it inherits from the
        // two function values.
        let fd = |f: fn(Database, &ModelParams) -> f64, d0: f64, d1: f64| {
            let up = Database { n0: db.n0 + d0 * h, n1: db.n1 + d1 * h };
            let down = Database { n0: db.n0 - d0 * h, n1: db.n1 - d1 * h };
            let (fu, fd) = (f(up, &p), f(down, &p));
            ((fu - fd) / (2.0 * h), f64::EPSILON * (fu.abs() + fd.abs()) / h)
        };
        let numeric = [
            fd(value_l, 1.0, 0.0),
            fd(value_l, 0.0, 1.0),
            fd(value_s, 1.0, 0.0),
            fd(value_s, 0.0, 1.0),
        ];
        for (a, (n, rounding)) in partials.iter().zip(numeric) {
            ensure((a - n).abs() <= 1e-5 * a.abs() + rounding, || {
                format!("gradient {a} vs finite difference {n}")
            })?;
        }
        let (hl, hs) = hessians(db, &p);
        ensure(hl.is_negative_definite() && hs.is_negative_definite(), || {
            format!("Hessian not negative definite at {db:?}")
        })?;
        ensure(value_l(db, &p) == value_l(db.swapped(), &p), || "V_L not symmetric".into())?;
        let (lo, hi) = if db.n0 < db.n1 { (db, db.swapped()) } else { (db.swapped(), db) };
        if lo.n0 < lo.n1 {
            ensure(value_s(lo, &p) > value_s(hi, &p), || format!("V_S ordering fails at {lo:?}"))?;
        }
        ensure(gs.d_n1 > gl.d_n1 && gl.d_n0 > gs.d_n0, || format!("marginal ordering fails at {db:?}"))?;
        let step = 1e-3;
        let delta = value_delta(db, &p);
        ensure(
            value_delta(Database { n0: db.n0 + step, ..db }, &p) < delta
                && value_delta(Database { n1: db.n1 + step, ..db }, &p) > delta,
            || format!("valuation gap monotonicity fails at {db:?}"),
        )?;
    }
    Ok("300 random points".into())
}

fn check_first_best_composition(cfg: &McConfig) -> CheckResult {
    let mut rng = rng_for(cfg, 2);
    for _ in 0..300 {
        let p = random_params(&mut rng);
        let sol = solve_first_best(&p, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let ok = if sol.db.n0 > 0.0 {
            sol.db.n1 > sol.db.n0
        } else {
            sol.db.n1 >= sol.db.n0
        };
        ensure(ok, || format!("n1 < n0 at {p:?}: {:?}", sol.db))?;
    }
    Ok("300 random parameter sets".into())
}

fn check_menus(cfg: &McConfig) -> CheckResult {
    let mut rng = rng_for(cfg, 3);
    for _ in 0..8 {
        let p = random_params(&mut rng);
        let db = random_db(&mut rng);
        let exact = menu_for_database(db, &p);
        let grid = brute_force_menu(db, &p, 41).map_err(|e| e.to_string())?;
        let same_allocation = |a: &crate::model::AccessPlan, b: &crate::model::AccessPlan| {
            a.q0 == b.q0 && a.q1 == b.q1
        };
        ensure(
            same_allocation(&exact.plan_s, &grid.plan_s) && same_allocation(&exact.plan_l, &grid.plan_l),
            || format!("allocations differ at {p:?}, {db:?}"),
        )?;
        let gap = (exact.revenue(p.lambda) - grid.revenue(p.lambda)).abs();
        ensure(gap < 1e-6, || format!("revenue gap {gap:e}"))?;
    }
    for _ in 0..300 {
        let p = random_params(&mut rng);
        let (lo, hi) = lambda_star_bounds(&p);
        let l = lambda_star(rng.random_range(0.0..100.0), &p);
        ensure(lo <= l && l <= hi, || format!("threshold {l} outside [{lo}, {hi}]"))?;
    }
    Ok("8 menus, 300 thresholds".into())
}

fn check_regimes(_: &McConfig) -> CheckResult {
    let base = ModelParams::new(1.0, 0.04, 0.5).map_err(|e| e.to_string())?;
    let corner = solve_second_best(&base.with_lambda(0.99), false, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure(corner.db.n0 == 0.0 && !corner.menu.is_pooled(), || format!("no corner at 0.99: {corner:?}"))?;
    let (lower, _) = lambda_star_bounds(&base);
    let pooled = solve_second_best(&base.with_lambda(0.9 * lower), false, DEFAULT_TOL)
        .map_err(|e| e.to_string())?;
    ensure(
        pooled.regime == SecondBestRegime::Pooling && pooled.db.n0 == pooled.db.n1 && pooled.menu.is_pooled(),
        || format!("no symmetric pooling below threshold: {pooled:?}"),
    )?;
    let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let rows = sweep(&base, SweepAxis::Lambda, &grid, false).map_err(|e| e.to_string())?;
    ensure(discrimination_is_monotone_in_lambda(&rows), || "sweep not monotone".into())?;
    Ok("corner, pooling, monotone sweep".into())
}

fn check_distortion(cfg: &McConfig) -> CheckResult {
    let mut rng = rng_for(cfg, 4);
    let mut checked = 0;
    while checked < 100 {
        let p = random_params(&mut rng);
        let fb = solve_first_best(&p, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let sb = solve_second_best(&p, false, DEFAULT_TOL).map_err(|e| e.to_string())?;
        if fb.regime != FirstBestRegime::Interior || sb.regime != SecondBestRegime::Discrimination {
            continue;
        }
        checked += 1;
        ensure(sb.db.n0 - fb.db.n0 > -1e-8 && sb.db.n1 - fb.db.n1 < 1e-8, || {
            format!("no historical shift at {p:?}: fb {:?}, sb {:?}", fb.db, sb.db)
        })?;
    }
    Ok(format!("{checked} interior parameter sets"))
}

fn check_reversal(_: &McConfig) -> CheckResult {
    for lambda in [0.26, 0.27, 0.28, 0.29] {
        let p = ModelParams::from_sigma_mu(1.2, 0.3, lambda).map_err(|e| e.to_string())?;
        let sb = solve_second_best(&p, false, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(sb.db.n0 > sb.db.n1, || format!("no reversal at lambda {lambda}: {:?}", sb.db))?;
    }
    Ok("lambda 0.26..0.29".into())
}

fn check_over_storage(_: &McConfig) -> CheckResult {
    for lambda in [0.45, 0.5, 0.6] {
        let p = ModelParams::new(2.0, 0.1, lambda).map_err(|e| e.to_string())?;
        let fb = solve_first_best(&p, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let sb = solve_second_best(&p, false, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(sb.db.total() > fb.db.total(), || format!("no over-storage at lambda {lambda}"))?;
    }
    Ok("lambda 0.45, 0.5, 0.6".into())
}

fn check_grid_certificates(cfg: &McConfig) -> CheckResult {
    let mut rng = rng_for(cfg, 5);
    for _ in 0..5 {
        let p = random_params(&mut rng);
        let spec = GridSpec::for_params(&p, 100, 3).map_err(|e| e.to_string())?;
        let fb = solve_first_best(&p, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let sb = solve_second_best(&p, false, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let (_, grid_fb) = grid_best_database(&p, GridObjective::FirstBest, &spec).map_err(|e| e.to_string())?;
        let (_, grid_sb) = grid_best_database(&p, GridObjective::SecondBest, &spec).map_err(|e| e.to_string())?;
        ensure(fb.profit >= grid_fb - 1e-6 && sb.profit >= grid_sb - 1e-6, || {
            format!("grid beats solver at {p:?}")
        })?;
    }
    Ok("5 random parameter sets".into())
}

fn check_beta(cfg: &McConfig) -> CheckResult {
    for (p_r, regime) in [(0.25, BetaRegime::FullAccess), (0.40, BetaRegime::Exclusion)] {
        let bp = BetaParams::new(0.1, 0.4, p_r, 1.0, 0.01).map_err(|e| e.to_string())?;
        let report = beta_grid_check(&bp, 51).map_err(|e| e.to_string())?;
        ensure(report.regime == regime && report.pass, || format!("grid check failed: {report:?}"))?;
    }
    let mut rng = rng_for(cfg, 6);
    for _ in 0..200 {
        let r = rng.random_range(0.0..0.5);
        let s = rng.random_range(r..0.5);
        let Ok(bp) = BetaParams::new(
            r,
            s,
            rng.random_range(0.0..0.5),
            rng.random_range(0.1..4.0),
            10f64.powf(rng.random_range(-4.0..-1.0)),
        ) else {
            continue;
        };
        let fb = solve_beta_first_best(&bp, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let sb = solve_beta_second_best(&bp, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(fb.n_star == 0.0 || sb.n_store < fb.n_star, || format!("N** >= N* at {bp:?}"))?;
    }
    Ok("worked examples and 200 random sets".into())
}

fn check_markov(_: &McConfig) -> CheckResult {
    let p = ModelParams::from_sigma_mu(1.2, 0.3, 0.27).map_err(|e| e.to_string())?;
    let free = solve_second_best(&p, false, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let constrained = solve_second_best(&p, true, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure(
        constrained.db.n0 == constrained.db.n1 && constrained.profit <= free.profit,
        || format!("constraint not binding: {:?}", constrained.db),
    )?;
    Ok(format!("n0 = n1 = {:.6}", constrained.db.n0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_with_small_sample() {
        let summary = run_validation(&McConfig { draws: 200_000, seed: 0 }).unwrap();
        for c in &summary.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        assert!(summary.pass);
        assert_eq!(summary.checks.len(), CHECKS.len());
    }

    #[test]
    fn rejects_zero_draws() {
        assert!(run_validation(&McConfig { draws: 0, seed: 0 }).is_err());
    }
}
