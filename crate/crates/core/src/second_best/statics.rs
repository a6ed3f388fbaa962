//! First-best versus second-best comparisons and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_second_best, SecondBestRegime, SecondBestSolution};
use crate::error::{Error, Result};
use crate::first_best::{solve_first_best, FirstBestRegime, FirstBestSolution, DEFAULT_TOL};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub fb: FirstBestSolution,
    pub sb: SecondBestSolution,
    pub delta_n0: f64,
    pub delta_n1: f64,
    pub delta_total: f64,
    /// Second-best stores more historical than current data.
    pub composition_reversed: bool,
    /// Whether the second-best shifted storage toward historical data
    /// (`delta_n0 > 0`, `delta_n1 < 0`). Only evaluated when the first best is
    /// interior and the second best discriminates.
    pub historical_shift: Option<bool>,
}

/// Solves both problems and reports how screening distorts the database.
///
/// Fails with [`Error::InvariantViolation`] if the second best discriminates
/// at an interior first best without shifting storage toward historical
/// data.
pub fn compare_fb_sb(p: &ModelParams) -> Result<DistortionReport> {
    let fb = solve_first_best(p, DEFAULT_TOL)?;
    let sb = solve_second_best(p, false, DEFAULT_TOL)?;
    let delta_n0 = sb.db.n0 - fb.db.n0;
    let delta_n1 = sb.db.n1 - fb.db.n1;
    let historical_shift = (fb.regime == FirstBestRegime::Interior
        && sb.regime == SecondBestRegime::Discrimination)
        .then_some(delta_n0 > 0.0 && delta_n1 < 0.0);
    if historical_shift == Some(false) {
        return Err(Error::InvariantViolation(format!(
            "discriminating second best did not shift toward historical data: \
             delta_n0 = {delta_n0}, delta_n1 = {delta_n1}"
        )));
    }
    Ok(DistortionReport {
        fb,
        sb,
        delta_n0,
        delta_n1,
        delta_total: sb.db.total() - fb.db.total(),
        composition_reversed: sb.db.n0 > sb.db.n1,
        historical_shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    Cost,
    SigmaMuSq,
}

impl SweepAxis {
    pub fn apply(self, base: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepAxis::Lambda => base.with_lambda(value),
            SweepAxis::Cost => base.with_cost(value),
            SweepAxis::SigmaMuSq => base.with_sigma_mu_sq(value),
        }
    }
}

/// One sweep point. Rows whose solvers failed keep their place and carry
/// the error message instead of solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub first_best: Option<FirstBestSolution>,
    pub second_best: Option<SecondBestSolution>,
    pub error: Option<String>,
}

/// Solves both problems at every grid value of `axis`, in parallel, keeping
/// input order.
pub fn sweep(
    base: &ModelParams,
    axis: SweepAxis,
    grid: &[f64],
    markov: bool,
) -> Result<Vec<SweepRow>> {
    let params: Vec<ModelParams> = grid
        .iter()
        .map(|&v| {
            let p = axis.apply(*base, v);
            p.validate().map(|_| p)
        })
        .collect::<Result<_>>()?;

    Ok(params
        .par_iter()
        .zip(grid.par_iter())
        .map(|(p, &axis_value)| {
            let solved = solve_first_best(p, DEFAULT_TOL)
                .and_then(|fb| solve_second_best(p, markov, DEFAULT_TOL).map(|sb| (fb, sb)));
            match solved {
                Ok((fb, sb)) => SweepRow {
                    axis_value,
                    first_best: Some(fb),
                    second_best: Some(sb),
                    error: None,
                },
                Err(e) => SweepRow {
                    axis_value,
                    first_best: None,
                    second_best: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Across rows of a lambda sweep (in increasing lambda) that the solver
/// labels interior-discriminating, `n0` must strictly fall and `n1`
/// strictly rise.
pub fn discrimination_is_monotone_in_lambda(rows: &[SweepRow]) -> bool {
    let interior: Vec<&SecondBestSolution> = rows
        .iter()
        .filter_map(|r| r.second_best.as_ref())
        .filter(|sb| sb.regime == SecondBestRegime::Discrimination)
        .collect();
    interior
        .windows(2)
        .all(|w| w[1].db.n0 < w[0].db.n0 && w[1].db.n1 > w[0].db.n1)
}
