//! Screening under private types.
//!
//! For a fixed database the optimal menu gives both types full historical
//! access and nowcasters full current access; forecasters get either full
//! current access (pooling) or none (discrimination), depending on whether
//! the nowcaster share exceeds [`lambda_star`]. The database problem then
//! splits into two strictly concave branches, each solved in closed form or
//! by a scalar root find.

mod curves;
mod statics;

pub use curves::{iso_marginal_curves, CurvePoint, CurveSet};
pub use statics::{
    compare_fb_sb, discrimination_is_monotone_in_lambda, sweep, DistortionReport, SweepAxis,
    SweepRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::first_best::{check_tol, size_bound, PROFIT_TIE_TOL};
use crate::model::{
    lambda_star, value_delta, value_l, value_s, AccessPlan, Database, Menu, ModelParams,
};
use crate::numeric::{bisect_decreasing, expand_upper_bracket, golden_section_max};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondBestRegime {
    Pooling,
    Discrimination,
    DiscriminationCornerN0Zero,
    Shutdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondBestSolution {
    pub db: Database,
    pub menu: Menu,
    pub profit: f64,
    pub regime: SecondBestRegime,
    pub lambda_star_at_solution: f64,
}

/// Revenue-maximizing menu for a fixed database.
///
/// The forecaster's participation and the nowcaster's incentive constraint
/// bind; the forecaster's current-data access is bang-bang in `lambda`.
/// Ties at `lambda == lambda_star(n0)` go to full access.
pub fn menu_for_database(db: Database, p: &ModelParams) -> Menu {
    let q1_l = if p.lambda <= lambda_star(db.n0, p) {
        db.n1
    } else {
        0.0
    };
    let low_access = Database {
        n0: db.n0,
        n1: q1_l,
    };
    let fee_l = value_l(low_access, p);
    let fee_s = if low_access == db {
        fee_l
    } else {
        value_s(db, p) - value_delta(low_access, p)
    };
    let menu = Menu {
        plan_s: AccessPlan {
            q0: db.n0,
            q1: db.n1,
            fee: fee_s,
        },
        plan_l: AccessPlan {
            q0: db.n0,
            q1: q1_l,
            fee: fee_l,
        },
    };
    debug_assert!(crate::verify::check_menu_constraints(&menu, db, p, 1e-9).pass);
    menu
}

/// Second-best profit at a fixed database:
/// `max{V_L(n0, n1), lambda V_S(n0, n1) + (1 - lambda) V_L(n0, 0)} - c (n0 + n1)`.
pub fn sb_profit(db: Database, p: &ModelParams) -> f64 {
    pooling_revenue(db, p).max(discrimination_revenue(db, p)) - p.cost * db.total()
}

fn pooling_revenue(db: Database, p: &ModelParams) -> f64 {
    value_l(db, p)
}

fn discrimination_revenue(db: Database, p: &ModelParams) -> f64 {
    let historical_only = Database { n0: db.n0, n1: 0.0 };
    p.lambda * value_s(db, p) + (1.0 - p.lambda) * value_l(historical_only, p)
}

/// Optimum of the pooling branch: symmetric, from `s^2 / (1 + n(1 + 2s))^2 = c`.
fn pooling_candidate(p: &ModelParams) -> Database {
    let s = p.sigma_mu_sq;
    let n = ((s / p.cost.sqrt() - 1.0) / (1.0 + 2.0 * s)).max(0.0);
    Database { n0: n, n1: n }
}

/// Current sample size solving the nowcaster's first-order condition
/// `lambda dV_S/dn1 = c` for given `n0`.
fn discrimination_n1(n0: f64, p: &ModelParams) -> f64 {
    let s = p.sigma_mu_sq;
    let k = 1.0 + n0 + s * (1.0 + 2.0 * n0);
    (p.lambda / p.cost).sqrt() - (1.0 + n0 * (1.0 + s)) / k
}

/// Historical first-order condition with the current sample substituted
/// out, minus `c`. Strictly decreasing in `n0`.
fn discrimination_n0_residual(n0: f64, p: &ModelParams) -> f64 {
    let (s, c, lambda) = (p.sigma_mu_sq, p.cost, p.lambda);
    let a = 1.0 + n0 * (1.0 + s);
    let k = 1.0 + n0 + s * (1.0 + 2.0 * n0);
    (1.0 - lambda) * s * s / (a * a) + c * s * s / (k * k) - c
}

fn discrimination_n0_residual_slope(n0: f64, p: &ModelParams) -> f64 {
    let (s, c, lambda) = (p.sigma_mu_sq, p.cost, p.lambda);
    let a = 1.0 + n0 * (1.0 + s);
    let k = 1.0 + n0 + s * (1.0 + 2.0 * n0);
    -2.0 * (1.0 - lambda) * s * s * (1.0 + s) / a.powi(3) - 2.0 * c * s * s * (1.0 + 2.0 * s) / k.powi(3)
}

/// Optimum of the discrimination branch, or `None` when that branch would
/// store no current data (it then coincides with pooling).
fn discrimination_candidate(p: &ModelParams) -> Result<Option<Database>> {
    if p.lambda == 0.0 {
        return Ok(None);
    }
    let residual = |n0: f64| discrimination_n0_residual(n0, p);
    let n0 = if residual(0.0) <= 0.0 {
        0.0
    } else {
        let start = p.sigma_mu_sq / p.cost.sqrt();
        let hi = expand_upper_bracket(residual, start, 1e15).ok_or(Error::NonConvergence {
            solver: "discrimination bracket",
            iterations: 200,
        })?;
        let root = bisect_decreasing(residual, 0.0, hi, 1e-12)?;
        let polished = root - residual(root) / discrimination_n0_residual_slope(root, p);
        if polished >= 0.0 && residual(polished).abs() < residual(root).abs() {
            polished
        } else {
            root
        }
    };
    let n1 = discrimination_n1(n0, p);
    Ok((n1 > 0.0).then_some(Database { n0, n1 }))
}

/// Best point of the discrimination branch on the diagonal `n0 = n1`.
fn discrimination_on_diagonal(p: &ModelParams) -> Database {
    let objective = |n: f64| {
        let db = Database { n0: n, n1: n };
        discrimination_revenue(db, p) - p.cost * db.total()
    };
    let (n, _) = golden_section_max(objective, 0.0, size_bound(p), 1e-13);
    Database { n0: n, n1: n }
}

fn classify(db: Database, p: &ModelParams) -> SecondBestRegime {
    if db.is_empty() {
        SecondBestRegime::Shutdown
    } else if p.lambda <= lambda_star(db.n0, p) {
        SecondBestRegime::Pooling
    } else if db.n0 == 0.0 {
        SecondBestRegime::DiscriminationCornerN0Zero
    } else {
        SecondBestRegime::Discrimination
    }
}

fn solution(db: Database, p: &ModelParams) -> SecondBestSolution {
    SecondBestSolution {
        db,
        menu: menu_for_database(db, p),
        profit: sb_profit(db, p),
        regime: classify(db, p),
        lambda_star_at_solution: lambda_star(db.n0, p),
    }
}

/// Highest-profit candidate; earlier candidates win ties.
fn pick_best(candidates: &[Database], p: &ModelParams) -> Database {
    let mut best = candidates[0];
    let mut best_profit = sb_profit(best, p);
    for &db in &candidates[1..] {
        let v = sb_profit(db, p);
        if v > best_profit + PROFIT_TIE_TOL {
            best = db;
            best_profit = v;
        }
    }
    best
}

/// Solves the second-best database and menu problem.
///
/// With `markov_constraint` the historical sample may not exceed the current
/// one. Each branch is concave, so its constrained optimum is either its
/// unconstrained optimum or lies on the diagonal.
pub fn solve_second_best(
    p: &ModelParams,
    markov_constraint: bool,
    tol: f64,
) -> Result<SecondBestSolution> {
    p.validate()?;
    check_tol(tol)?;

    let mut candidates = vec![pooling_candidate(p)];
    if let Some(db) = discrimination_candidate(p)? {
        candidates.push(db);
    }
    candidates.push(Database::EMPTY);

    let mut best = pick_best(&candidates, p);
    if markov_constraint && best.n0 > best.n1 {
        candidates.retain(|db| db.n0 <= db.n1);
        candidates.push(discrimination_on_diagonal(p));
        best = pick_best(&candidates, p);
    }
    Ok(solution(best, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::first_best::DEFAULT_TOL;
    use approx::assert_relative_eq;

    fn params(lambda: f64) -> ModelParams {
        ModelParams::new(1.0, 0.04, lambda).unwrap()
    }

    fn db(n0: f64, n1: f64) -> Database {
        Database::new(n0, n1).unwrap()
    }

    #[test]
    fn menu_discriminates_above_threshold() {
        let menu = menu_for_database(db(1.0, 1.0), &params(0.5));
        assert_eq!((menu.plan_l.q0, menu.plan_l.q1), (1.0, 0.0));
        assert_relative_eq!(menu.plan_l.fee, 1.0 / 3.0, max_relative = 1e-14);
        assert_eq!((menu.plan_s.q0, menu.plan_s.q1), (1.0, 1.0));
        assert_relative_eq!(menu.plan_s.fee, 1.375, max_relative = 1e-14);
    }

    #[test]
    fn menu_pools_below_threshold() {
        let menu = menu_for_database(db(1.0, 1.0), &params(0.10));
        assert!(menu.is_pooled());
        assert_eq!((menu.plan_l.q0, menu.plan_l.q1), (1.0, 1.0));
        assert_relative_eq!(menu.plan_l.fee, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn menu_without_current_data_is_pooled() {
        for lambda in [0.0, 0.3, 0.9, 1.0] {
            let menu = menu_for_database(db(2.5, 0.0), &params(lambda));
            assert!(menu.is_pooled());
            assert_eq!(menu.plan_s.fee, value_l(db(2.5, 0.0), &params(lambda)));
        }
    }

    #[test]
    fn menu_tie_goes_to_pooling() {
        // lambda_star(1) = 0.16 at s = 1.
        let p = params(lambda_star(1.0, &params(0.0)));
        assert!(menu_for_database(db(1.0, 2.0), &p).is_pooled());
    }

    #[test]
    fn profit_examples() {
        assert_eq!(sb_profit(Database::EMPTY, &params(0.3)), 0.0);
        let v = sb_profit(db(1.0, 1.0), &params(0.5));
        assert_relative_eq!(v, 0.5 * 1.375 + 0.5 / 3.0 - 0.08, max_relative = 1e-14);
        let v = sb_profit(db(1.0, 1.0), &params(0.10));
        assert_relative_eq!(v, 0.42, max_relative = 1e-14);
    }

    #[test]
    fn profit_matches_menu_revenue() {
        for lambda in [0.05, 0.16, 0.3, 0.8] {
            let p = params(lambda);
            for d in [db(0.3, 2.0), db(1.0, 1.0), db(4.0, 0.5)] {
                let menu = menu_for_database(d, &p);
                assert_relative_eq!(
                    sb_profit(d, &p),
                    menu.revenue(lambda) - p.cost * d.total(),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn pooling_solution_below_lower_threshold() {
        let sol = solve_second_best(&params(0.05), false, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, SecondBestRegime::Pooling);
        assert_relative_eq!(sol.db.n0, 4.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(sol.db.n1, 4.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(sol.menu.plan_l.fee, 56.0 / 105.0, max_relative = 1e-12);
        assert!(sol.menu.is_pooled());
    }

    #[test]
    fn discrimination_solution() {
        let sol = solve_second_best(&params(0.5), false, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, SecondBestRegime::Discrimination);
        assert!((sol.db.n0 - 1.293).abs() < 1e-2);
        assert!((sol.db.n1 - 2.926).abs() < 1e-2);
        assert_eq!(sol.menu.plan_l.q1, 0.0);
        // Both first-order conditions of the branch hold.
        let n0 = sol.db.n0;
        let lhs = 0.5 / (2.0 * n0 + 1.0).powi(2) + 0.04 / (3.0 * n0 + 2.0).powi(2);
        assert!((lhs - 0.04).abs() < 1e-12);
    }

    #[test]
    fn corner_when_nowcasters_dominate() {
        // The historical marginal value at n0 = 0 is (1 - lambda) s^2 + c s^2 / (1 + s)^2.
        let sol = solve_second_best(&params(0.99), false, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, SecondBestRegime::DiscriminationCornerN0Zero);
        assert_eq!(sol.db.n0, 0.0);
        assert_relative_eq!(sol.db.n1, (0.99f64 / 0.04).sqrt() - 0.5, max_relative = 1e-14);
        let sol = solve_second_best(&params(0.95), false, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, SecondBestRegime::Discrimination);
        assert!(sol.db.n0 > 0.1);
    }

    #[test]
    fn shutdown_when_storage_too_expensive() {
        let p = ModelParams::new(1.0, 5.0, 0.3).unwrap();
        let sol = solve_second_best(&p, false, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, SecondBestRegime::Shutdown);
        assert_eq!(sol.profit, 0.0);
    }

    #[test]
    fn composition_reversal_and_markov_constraint() {
        let p = ModelParams::from_sigma_mu(1.2, 0.3, 0.27).unwrap();
        let free = solve_second_best(&p, false, DEFAULT_TOL).unwrap();
        assert_eq!(free.regime, SecondBestRegime::Discrimination);
        assert!(free.db.n0 > free.db.n1);
        let constrained = solve_second_best(&p, true, DEFAULT_TOL).unwrap();
        assert_eq!(constrained.db.n0, constrained.db.n1);
        assert!(constrained.profit <= free.profit);
    }
}
