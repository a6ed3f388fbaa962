//! Brute-force oracles that certify the analytic solvers.
//!
//! Everything here is built from the value functions alone: no first-order
//! conditions, thresholds or closed forms from the solvers are reused. The
//! one shortcut is that menu prices are restricted to the two binding
//! patterns (low type's participation plus high type's incentive constraint,
//! or the mirror image), which is without loss for a two-type screening
//! problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{solve_beta_second_best, u_beta, BetaParams, BetaRegime};
use crate::error::{invalid, Error, Result};
use crate::model::{value_l, value_s, AccessPlan, Database, Menu, ModelParams};

/// Slack used while enumerating grid menus; the winner is re-checked at a
/// looser tolerance.
const SCAN_TOL: f64 = 1e-12;
const MENU_TOL: f64 = 1e-9;
/// Largest constraint violation accepted for closed-form beta menus.
pub const BETA_CONSTRAINT_TOL: f64 = 1e-10;
/// Profit slack for grid certificates.
pub const GRID_PROFIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_max: f64,
    pub points_per_axis: usize,
    pub refinement_rounds: usize,
}

impl GridSpec {
    pub fn new(n_max: f64, points_per_axis: usize, refinement_rounds: usize) -> Result<Self> {
        let spec = Self {
            n_max,
            points_per_axis,
            refinement_rounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A grid whose box contains every first- and second-best optimum:
    /// beyond `max(1, sigma_mu_sq) / sqrt(c)` no marginal value exceeds `c`.
    pub fn for_params(p: &ModelParams, points_per_axis: usize, refinement_rounds: usize) -> Result<Self> {
        p.validate()?;
        Self::new(
            p.sigma_mu_sq.max(1.0) / p.cost.sqrt() + 1.0,
            points_per_axis,
            refinement_rounds,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_max.is_finite() && self.n_max > 0.0) {
            return Err(invalid("n_max", format!("must be finite and > 0, got {}", self.n_max)));
        }
        if self.points_per_axis < 2 {
            return Err(invalid(
                "points_per_axis",
                format!("must be >= 2, got {}", self.points_per_axis),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridObjective {
    FirstBest,
    SecondBest,
}

fn objective_value(objective: GridObjective, db: Database, p: &ModelParams) -> f64 {
    let vl = value_l(db, p);
    let vs = value_s(db, p);
    let gross = match objective {
        GridObjective::FirstBest => p.lambda * vs + (1.0 - p.lambda) * vl,
        GridObjective::SecondBest => {
            let vl_historical = value_l(Database { n0: db.n0, n1: 0.0 }, p);
            vl.max(p.lambda * vs + (1.0 - p.lambda) * vl_historical)
        }
    };
    gross - p.cost * db.total()
}

/// Grid node `i` of `points` on `[lo, hi]`, with both endpoints exact.
/// Written so that node `2i` of a `2m - 1` point grid is bit-identical to
/// node `i` of an `m` point grid.
fn node(lo: f64, hi: f64, i: usize, points: usize) -> f64 {
    if i + 1 == points {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Incumbent {
    db: Database,
    profit: f64,
}

/// Higher profit wins; exact ties go to the lexicographically smaller
/// database, which makes parallel reductions order independent.
fn prefer(a: Incumbent, b: Incumbent) -> Incumbent {
    if b.profit > a.profit
        || (b.profit == a.profit && (b.db.n0, b.db.n1) < (a.db.n0, a.db.n1))
    {
        b
    } else {
        a
    }
}

fn scan_box(
    p: &ModelParams,
    objective: GridObjective,
    (lo0, hi0): (f64, f64),
    (lo1, hi1): (f64, f64),
    points: usize,
) -> Incumbent {
    (0..points)
        .into_par_iter()
        .map(|i| {
            let n0 = node(lo0, hi0, i, points);
            (0..points)
                .map(|j| {
                    let db = Database {
                        n0,
                        n1: node(lo1, hi1, j, points),
                    };
                    Incumbent {
                        db,
                        profit: objective_value(objective, db, p),
                    }
                })
                .reduce(prefer)
                .expect("points >= 2")
        })
        .reduce_with(prefer)
        .expect("points >= 2")
}

/// Best database on a square grid over `[0, n_max]^2`, refined by
/// re-gridding a window of two steps around the incumbent each round.
pub fn grid_best_database(
    p: &ModelParams,
    objective: GridObjective,
    spec: &GridSpec,
) -> Result<(Database, f64)> {
    p.validate()?;
    spec.validate()?;
    let points = spec.points_per_axis;
    let full = (0.0, spec.n_max);
    let mut best = scan_box(p, objective, full, full, points);
    let mut widths = (spec.n_max, spec.n_max);
    for _ in 0..spec.refinement_rounds {
        let window = |center: f64, width: f64| {
            let radius = 2.0 * width / (points - 1) as f64;
            ((center - radius).max(0.0), (center + radius).min(spec.n_max))
        };
        let box0 = window(best.db.n0, widths.0);
        let box1 = window(best.db.n1, widths.1);
        best = prefer(best, scan_box(p, objective, box0, box1, points));
        widths = (box0.1 - box0.0, box1.1 - box1.0);
    }
    Ok((best.db, best.profit))
}

/// Slack of every screening constraint; negative means violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub ir_s: f64,
    pub ir_l: f64,
    pub ic_s: f64,
    pub ic_l: f64,
    /// Smallest of `q`, `n - q` over both plans and samples.
    pub feasibility: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConstraintReport {
    pub fn min_slack(&self) -> f64 {
        [self.ir_s, self.ir_l, self.ic_s, self.ic_l, self.feasibility]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Valuations of one plan's access by both types.
#[derive(Debug, Clone, Copy)]
struct PlanValues {
    vs: f64,
    vl: f64,
}

fn constraint_report(
    s_plan: PlanValues,
    fee_s: f64,
    l_plan: PlanValues,
    fee_l: f64,
    feasibility: f64,
    tol: f64,
) -> ConstraintReport {
    let ir_s = s_plan.vs - fee_s;
    let ir_l = l_plan.vl - fee_l;
    let ic_s = ir_s - (l_plan.vs - fee_l);
    let ic_l = ir_l - (s_plan.vl - fee_s);
    let slacks = [ir_s, ir_l, ic_s, ic_l, feasibility];
    ConstraintReport {
        ir_s,
        ir_l,
        ic_s,
        ic_l,
        feasibility,
        tol,
        pass: slacks.iter().all(|&x| x >= -tol),
    }
}

pub fn check_menu_constraints(menu: &Menu, db: Database, p: &ModelParams, tol: f64) -> ConstraintReport {
    let values = |plan: &AccessPlan| PlanValues {
        vs: value_s(plan.access(), p),
        vl: value_l(plan.access(), p),
    };
    let feasibility = [menu.plan_s, menu.plan_l]
        .iter()
        .flat_map(|plan| [plan.q0, plan.q1, db.n0 - plan.q0, db.n1 - plan.q1])
        .fold(f64::INFINITY, f64::min);
    constraint_report(
        values(&menu.plan_s),
        menu.plan_s.fee,
        values(&menu.plan_l),
        menu.plan_l.fee,
        feasibility,
        tol,
    )
}

#[derive(Debug, Clone, Copy)]
struct MenuCandidate {
    revenue: f64,
    k_l: usize,
    k_s: usize,
    fee_l: f64,
    fee_s: f64,
}

fn prefer_menu(a: MenuCandidate, b: MenuCandidate) -> MenuCandidate {
    if b.revenue > a.revenue || (b.revenue == a.revenue && (b.k_l, b.k_s) < (a.k_l, a.k_s)) {
        b
    } else {
        a
    }
}

/// Revenue-maximizing menu over all access pairs on a `resolution^2` grid
/// per plan.
///
/// For a given pair of allocations the candidate prices are the two binding
/// patterns. With the low plan fixed, pattern one's revenue increases in the
/// high plan's `V_S`, so scanning high plans in decreasing `V_S` and
/// stopping at the first feasible menu is exhaustive; the mirrored pattern
/// is scanned the same way in `V_L`.
pub fn brute_force_menu(db: Database, p: &ModelParams, resolution: usize) -> Result<Menu> {
    p.validate()?;
    if resolution < 2 {
        return Err(invalid("resolution", format!("must be >= 2, got {resolution}")));
    }
    let access: Vec<Database> = (0..resolution)
        .flat_map(|i| {
            (0..resolution).map(move |j| Database {
                n0: node(0.0, db.n0, i, resolution),
                n1: node(0.0, db.n1, j, resolution),
            })
        })
        .collect();
    let values: Vec<PlanValues> = access
        .par_iter()
        .map(|&q| PlanValues {
            vs: value_s(q, p),
            vl: value_l(q, p),
        })
        .collect();
    let descending = |key: fn(&PlanValues) -> f64| {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| key(&values[b]).total_cmp(&key(&values[a])).then(a.cmp(&b)));
        order
    };
    let by_vs = descending(|v| v.vs);
    let by_vl = descending(|v| v.vl);
    let lambda = p.lambda;
    let candidate = |k_l: usize, k_s: usize, fee_l: f64, fee_s: f64| MenuCandidate {
        revenue: lambda * fee_s + (1.0 - lambda) * fee_l,
        k_l,
        k_s,
        fee_l,
        fee_s,
    };

    // Low type's participation and high type's incentive constraint bind.
    let pattern_one = (0..values.len()).into_par_iter().filter_map(|k_l| {
        let fee_l = values[k_l].vl;
        by_vs.iter().find_map(|&k_s| {
            let fee_s = values[k_s].vs - values[k_l].vs + fee_l;
            constraint_report(values[k_s], fee_s, values[k_l], fee_l, 0.0, SCAN_TOL)
                .pass
                .then(|| candidate(k_l, k_s, fee_l, fee_s))
        })
    });
    // High type's participation and low type's incentive constraint bind.
    let pattern_two = (0..values.len()).into_par_iter().filter_map(|k_s| {
        let fee_s = values[k_s].vs;
        if values[k_s].vl - values[k_s].vs < -SCAN_TOL {
            // The low type's participation slack does not depend on its own plan.
            return None;
        }
        by_vl.iter().find_map(|&k_l| {
            let fee_l = values[k_l].vl - values[k_s].vl + fee_s;
            constraint_report(values[k_s], fee_s, values[k_l], fee_l, 0.0, SCAN_TOL)
                .pass
                .then(|| candidate(k_l, k_s, fee_l, fee_s))
        })
    });
    let best = pattern_one
        .chain(pattern_two)
        .reduce_with(prefer_menu)
        .ok_or_else(|| Error::InvariantViolation("no feasible grid menu".into()))?;

    let plan = |k: usize, fee: f64| AccessPlan {
        q0: access[k].n0,
        q1: access[k].n1,
        fee,
    };
    let menu = Menu {
        plan_s: plan(best.k_s, best.fee_s),
        plan_l: plan(best.k_l, best.fee_l),
    };
    if !check_menu_constraints(&menu, db, p, MENU_TOL).pass {
        return Err(Error::InvariantViolation("grid menu violates constraints".into()));
    }
    Ok(menu)
}

/// Largest violation of participation (4) and incentive (12) constraints of
/// a four-type beta menu; zero when all hold.
pub fn beta_constraint_violation(bp: &BetaParams, access: &[Database; 4], fees: &[f64; 4]) -> f64 {
    let types = bp.types();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let beta = types[i].0;
        let own = u_beta(beta, access[i], bp) - fees[i];
        worst = worst.max(-own);
        for j in (0..4).filter(|&j| j != i) {
            let mimic = u_beta(beta, access[j], bp) - fees[j];
            worst = worst.max(mimic - own);
        }
    }
    worst
}

/// Symmetric menu with narrow types at `(n, n)`, broad types at `(q, q)`,
/// and fees from the broad types' binding participation and the narrow
/// types' binding incentive constraint.
fn beta_binding_menu(bp: &BetaParams, n: f64, q: f64) -> ([Database; 4], [f64; 4]) {
    let full = Database { n0: n, n1: n };
    let broad = Database { n0: q, n1: q };
    let fee_broad = u_beta(bp.s, broad, bp);
    let fee_narrow = u_beta(bp.r, full, bp) - u_beta(bp.r, broad, bp) + fee_broad;
    (
        [full, broad, broad, full],
        [fee_narrow, fee_broad, fee_broad, fee_narrow],
    )
}

fn beta_profit(bp: &BetaParams, n: f64, fees: &[f64; 4]) -> f64 {
    let revenue: f64 = bp.types().iter().zip(fees).map(|((_, prob), fee)| prob * fee).sum();
    revenue - 2.0 * bp.cost * n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGridReport {
    pub regime: BetaRegime,
    pub n_store: f64,
    pub incumbent_q: f64,
    /// Profit of the solver's menu, recomputed from its fees.
    pub incumbent_profit: f64,
    pub incumbent_violation: f64,
    pub best_grid_q: f64,
    pub best_grid_profit: f64,
    pub feasible_points: usize,
    pub pass: bool,
}

/// Grids the broad types' access `Q` over `[0, N**]` at the solver's
/// database and confirms that the solver's menu is feasible and no feasible
/// grid menu earns more.
pub fn beta_grid_check(bp: &BetaParams, resolution: usize) -> Result<BetaGridReport> {
    if resolution < 2 {
        return Err(invalid("resolution", format!("must be >= 2, got {resolution}")));
    }
    let sol = solve_beta_second_best(bp, 1e-9)?;
    let n = sol.n_store;
    let incumbent_violation = beta_constraint_violation(bp, &sol.access(), &sol.fees);
    let incumbent_profit = beta_profit(bp, n, &sol.fees);

    let mut best: Option<(f64, f64)> = None;
    let mut feasible_points = 0;
    for i in 0..resolution {
        let q = node(0.0, n, i, resolution);
        let (access, fees) = beta_binding_menu(bp, n, q);
        if beta_constraint_violation(bp, &access, &fees) > BETA_CONSTRAINT_TOL {
            continue;
        }
        feasible_points += 1;
        let profit = beta_profit(bp, n, &fees);
        if best.is_none_or(|(_, b)| profit > b) {
            best = Some((q, profit));
        }
    }
    let (best_grid_q, best_grid_profit) = best.unwrap_or((f64::NAN, f64::NEG_INFINITY));
    Ok(BetaGridReport {
        regime: sol.regime,
        n_store: n,
        incumbent_q: sol.q_broad,
        incumbent_profit,
        incumbent_violation,
        best_grid_q,
        best_grid_profit,
        feasible_points,
        pass: incumbent_violation <= BETA_CONSTRAINT_TOL
            && incumbent_profit >= best_grid_profit - GRID_PROFIT_TOL,
    })
}

/// Best feasible profit over a grid of symmetric databases `N` and broad
/// access `Q in [0, N]`, with binding-pattern fees. Returns `(N, Q, profit)`.
pub fn beta_brute_force_profit(bp: &BetaParams, n_points: usize, q_points: usize) -> Result<(f64, f64, f64)> {
    bp.validate()?;
    if n_points < 2 || q_points < 2 {
        return Err(invalid("points", "grids need at least 2 points per axis"));
    }
    // Willingness to pay is at most 1 per component, so N beyond
    // sigma / sqrt(c) loses money.
    let n_hi = bp.sigma_sq.sqrt() / bp.cost.sqrt();
    (0..n_points)
        .into_par_iter()
        .flat_map_iter(|i| {
            let n = node(0.0, n_hi, i, n_points);
            (0..q_points).filter_map(move |j| {
                let q = node(0.0, n, j, q_points);
                let (access, fees) = beta_binding_menu(bp, n, q);
                (beta_constraint_violation(bp, &access, &fees) <= BETA_CONSTRAINT_TOL)
                    .then(|| (n, q, beta_profit(bp, n, &fees)))
            })
        })
        .reduce_with(|a, b| {
            if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::InvariantViolation("no feasible beta menu on grid".into()))
}
