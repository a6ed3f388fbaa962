//! Full-information benchmark: the seller observes types, grants full
//! access, and charges each type its willingness to pay.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{grad_values, hessians, value_l, value_s, Database, Gradient2, ModelParams};
use crate::numeric::linspace;

pub const DEFAULT_TOL: f64 = 1e-9;
/// Profit differences below this are ties.
pub const PROFIT_TIE_TOL: f64 = 1e-10;

const MAX_NEWTON_STEPS: usize = 200;
const START_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstBestRegime {
    Interior,
    CornerN0Zero,
    Shutdown,
}

/// Fee charged to each type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeFees {
    pub nowcaster: f64,
    pub forecaster: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstBestSolution {
    pub db: Database,
    pub profit: f64,
    pub regime: FirstBestRegime,
    pub fees: TypeFees,
}

/// `lambda V_S + (1 - lambda) V_L - c (n0 + n1)`.
pub fn fb_profit(db: Database, p: &ModelParams) -> f64 {
    p.lambda * value_s(db, p) + (1.0 - p.lambda) * value_l(db, p) - p.cost * db.total()
}

/// Gradient of the gross (pre-cost) first-best objective.
pub fn fb_marginal_values(db: Database, p: &ModelParams) -> Gradient2 {
    let (gl, gs) = grad_values(db, p);
    Gradient2 {
        d_n0: p.lambda * gs.d_n0 + (1.0 - p.lambda) * gl.d_n0,
        d_n1: p.lambda * gs.d_n1 + (1.0 - p.lambda) * gl.d_n1,
    }
}

/// Upper bound on either coordinate of any optimal database: beyond
/// `max(1, sigma_mu_sq) / sqrt(c)` every marginal value is below `c`.
pub fn size_bound(p: &ModelParams) -> f64 {
    p.sigma_mu_sq.max(1.0) / p.cost.sqrt() + 1.0
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(invalid("tol", format!("must be finite and > 0, got {tol}")))
    }
}

fn classify(db: Database) -> FirstBestRegime {
    if db.is_empty() {
        FirstBestRegime::Shutdown
    } else if db.n0 == 0.0 {
        FirstBestRegime::CornerN0Zero
    } else {
        FirstBestRegime::Interior
    }
}

fn solution(db: Database, p: &ModelParams) -> FirstBestSolution {
    FirstBestSolution {
        db,
        profit: fb_profit(db, p),
        regime: classify(db),
        fees: TypeFees {
            nowcaster: value_s(db, p),
            forecaster: value_l(db, p),
        },
    }
}

/// Largest KKT violation at `db`: `|g - c|` on free coordinates and the
/// positive part of `g - c` on coordinates pinned at zero.
pub fn kkt_residual(db: Database, p: &ModelParams) -> f64 {
    let g = fb_marginal_values(db, p);
    [(db.n0, g.d_n0), (db.n1, g.d_n1)]
        .iter()
        .map(|&(x, gi)| {
            let excess = gi - p.cost;
            if x > 0.0 {
                excess.abs()
            } else {
                excess.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Damped Newton ascent on the strictly concave objective with an active
/// set for coordinates held at zero.
fn projected_newton(p: &ModelParams, start: Database, tol: f64) -> Option<Database> {
    let mut x = [start.n0.max(0.0), start.n1.max(0.0)];
    let as_db = |x: [f64; 2]| Database { n0: x[0], n1: x[1] };
    for _ in 0..MAX_NEWTON_STEPS {
        let db = as_db(x);
        if kkt_residual(db, p) < tol {
            return Some(db);
        }
        let g = fb_marginal_values(db, p);
        let g = [g.d_n0 - p.cost, g.d_n1 - p.cost];
        let free = [x[0] > 0.0 || g[0] > 0.0, x[1] > 0.0 || g[1] > 0.0];
        let (hl, hs) = hessians(db, p);
        let h = hs.scaled(p.lambda).add(&hl.scaled(1.0 - p.lambda)).as_array();
        let dir = match free {
            [true, true] => {
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                [
                    -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                    -(-h[1][0] * g[0] + h[0][0] * g[1]) / det,
                ]
            }
            [true, false] => [-g[0] / h[0][0], 0.0],
            [false, true] => [0.0, -g[1] / h[1][1]],
            [false, false] => return Some(db),
        };
        let f0 = fb_profit(db, p);
        let slack = 1e-15 * f0.abs().max(1.0);
        let mut step = 1.0;
        loop {
            let cand = [
                (x[0] + step * dir[0]).max(0.0),
                (x[1] + step * dir[1]).max(0.0),
            ];
            if fb_profit(as_db(cand), p) >= f0 - slack {
                x = cand;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return None;
            }
        }
    }
    let db = as_db(x);
    (kkt_residual(db, p) < tol).then_some(db)
}

fn starting_points(p: &ModelParams) -> Vec<Database> {
    let s = p.sigma_mu_sq;
    let sqrt_c = p.cost.sqrt();
    let symmetric = ((s / sqrt_c - 1.0) / (1.0 + 2.0 * s)).max(0.0);
    let marginal_n1_at_zero = p.lambda * (1.0 + s).powi(2) + (1.0 - p.lambda) * s * s;
    let corner_n1 = (((marginal_n1_at_zero / p.cost).sqrt() - 1.0) / (1.0 + s)).max(0.0);

    let grid = linspace(0.0, size_bound(p), START_GRID_POINTS);
    let mut grid_best = Database::EMPTY;
    let mut best = f64::NEG_INFINITY;
    for &n0 in &grid {
        for &n1 in &grid {
            let db = Database { n0, n1 };
            let v = fb_profit(db, p);
            if v > best {
                best = v;
                grid_best = db;
            }
        }
    }
    vec![
        Database {
            n0: symmetric,
            n1: symmetric,
        },
        Database {
            n0: 0.0,
            n1: corner_n1,
        },
        grid_best,
    ]
}

/// Picks the better of two candidates: higher profit, then the
/// lexicographically smaller database.
pub(crate) fn better(a: (Database, f64), b: (Database, f64)) -> (Database, f64) {
    if b.1 > a.1 + PROFIT_TIE_TOL {
        b
    } else if a.1 > b.1 + PROFIT_TIE_TOL {
        a
    } else if (b.0.n0, b.0.n1) < (a.0.n0, a.0.n1) {
        b
    } else {
        a
    }
}

/// Solves the first-best database problem.
///
/// The objective is strictly concave, so any KKT point is the global
/// optimum. Several starts are tried anyway and the best converged one is
/// kept.
pub fn solve_first_best(p: &ModelParams, tol: f64) -> Result<FirstBestSolution> {
    p.validate()?;
    check_tol(tol)?;

    if kkt_residual(Database::EMPTY, p) == 0.0 {
        return Ok(solution(Database::EMPTY, p));
    }

    let best = starting_points(p)
        .into_iter()
        .filter_map(|start| projected_newton(p, start, tol))
        .map(|db| (db, fb_profit(db, p)))
        .reduce(better);

    match best {
        Some((db, _)) => Ok(solution(db, p)),
        None => Err(Error::NonConvergence {
            solver: "first-best Newton",
            iterations: MAX_NEWTON_STEPS,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn profit_examples() {
        let p = ModelParams::new(1.0, 0.04, 0.0).unwrap();
        assert_eq!(fb_profit(Database::EMPTY, &p), 0.0);
        let n = 4.0 / 3.0;
        let db = Database::new(n, n).unwrap();
        assert_relative_eq!(fb_profit(db, &p), 56.0 / 105.0 - 8.0 / 75.0, max_relative = 1e-14);
        let p1 = p.with_lambda(1.0);
        let db = Database::new(0.0, 4.5).unwrap();
        assert_relative_eq!(fb_profit(db, &p1), 1.8 - 0.18, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_interior_for_forecasters_only() {
        let p = ModelParams::new(1.0, 0.04, 0.0).unwrap();
        let sol = solve_first_best(&p, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, FirstBestRegime::Interior);
        assert_relative_eq!(sol.db.n0, 4.0 / 3.0, max_relative = 1e-8);
        assert_relative_eq!(sol.db.n1, 4.0 / 3.0, max_relative = 1e-8);
        assert_relative_eq!(sol.fees.forecaster, 56.0 / 105.0, max_relative = 1e-8);
    }

    #[test]
    fn corner_for_nowcasters_only() {
        let p = ModelParams::new(1.0, 0.04, 1.0).unwrap();
        let sol = solve_first_best(&p, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, FirstBestRegime::CornerN0Zero);
        assert_eq!(sol.db.n0, 0.0);
        assert_relative_eq!(sol.db.n1, 4.5, max_relative = 1e-9);
        let g = fb_marginal_values(sol.db, &p);
        assert_relative_eq!(g.d_n0, 0.01, max_relative = 1e-8);
    }

    #[test]
    fn shutdown_when_storage_too_expensive() {
        let p = ModelParams::new(1.0, 2.0, 0.0).unwrap();
        let sol = solve_first_best(&p, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, FirstBestRegime::Shutdown);
        assert_eq!(sol.profit, 0.0);
        // Nowcasters value the first current observation at (1 + s)^2 = 4 > 2.
        let sol = solve_first_best(&p.with_lambda(1.0), DEFAULT_TOL).unwrap();
        assert_ne!(sol.regime, FirstBestRegime::Shutdown);
        assert!(sol.profit > 0.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let p = ModelParams::new(1.0, 0.04, 0.3).unwrap();
        assert!(solve_first_best(&p, 0.0).is_err());
        assert!(solve_first_best(&p, f64::NAN).is_err());
    }

    #[test]
    fn interior_solution_satisfies_first_order_conditions() {
        let p = ModelParams::new(2.0, 0.1, 0.5).unwrap();
        let sol = solve_first_best(&p, DEFAULT_TOL).unwrap();
        assert_eq!(sol.regime, FirstBestRegime::Interior);
        let g = fb_marginal_values(sol.db, &p);
        assert!((g.d_n0 - p.cost).abs() < DEFAULT_TOL);
        assert!((g.d_n1 - p.cost).abs() < DEFAULT_TOL);
        assert!(sol.db.n1 > sol.db.n0);
    }
}
