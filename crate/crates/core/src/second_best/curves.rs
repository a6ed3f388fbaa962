//! Iso-marginal-value curves in the `(n0, n1)` plane.
//!
//! `f1`/`f0` are the loci where the first-best marginal value of current /
//! historical data equals `level`; `g1`/`g0` are the same for the
//! discrimination-branch objective. At `level = c`, `f1` and `f0` cross at
//! the first best and `g1` and `g0` at the discriminating second best.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::first_best::fb_marginal_values;
use crate::model::{grad_values, Database, ModelParams};
use crate::numeric::decreasing_root_on_half_line;

const ROOT_SEARCH_LIMIT: f64 = 1e12;
const ROOT_XTOL: f64 = 1e-13;

/// Curve heights at one `n0`; `None` where no nonnegative `n1` attains the
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n0: f64,
    pub f0: Option<f64>,
    pub f1: Option<f64>,
    pub g0: Option<f64>,
    pub g1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub level: f64,
    pub lambda: f64,
    pub points: Vec<CurvePoint>,
}

impl CurveSet {
    /// Non-empty samples of one curve as `(n0, n1)` pairs.
    pub fn curve(&self, pick: fn(&CurvePoint) -> Option<f64>) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|pt| pick(pt).map(|n1| (pt.n0, n1)))
            .collect()
    }
}

fn solve_for_n1<F>(marginal: F, level: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> f64,
{
    decreasing_root_on_half_line(|n1| marginal(n1) - level, ROOT_SEARCH_LIMIT, ROOT_XTOL)
}

pub fn iso_marginal_curves(p: &ModelParams, level: f64, n0_grid: &[f64]) -> Result<CurveSet> {
    p.validate()?;
    if !(level.is_finite() && level > 0.0) {
        return Err(invalid("level", format!("must be finite and > 0, got {level}")));
    }
    let lambda = p.lambda;
    let points = n0_grid
        .iter()
        .map(|&n0| {
            if !(n0.is_finite() && n0 >= 0.0) {
                return Err(invalid("n0_grid", format!("entries must be >= 0, got {n0}")));
            }
            let at = |n1: f64| Database { n0, n1 };
            let (grad_l_no_current, _) = grad_values(at(0.0), p);
            Ok(CurvePoint {
                n0,
                f0: solve_for_n1(|n1| fb_marginal_values(at(n1), p).d_n0, level)?,
                f1: solve_for_n1(|n1| fb_marginal_values(at(n1), p).d_n1, level)?,
                g0: solve_for_n1(
                    |n1| {
                        let (_, gs) = grad_values(at(n1), p);
                        (1.0 - lambda) * grad_l_no_current.d_n0 + lambda * gs.d_n0
                    },
                    level,
                )?,
                g1: solve_for_n1(|n1| lambda * grad_values(at(n1), p).1.d_n1, level)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        level,
        lambda,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;
    use approx::assert_relative_eq;

    #[test]
    fn forecaster_curve_examples() {
        let p = ModelParams::new(1.0, 0.04, 0.0).unwrap();
        let set = iso_marginal_curves(&p, 0.04, &[0.0, 4.0 / 3.0]).unwrap();
        assert_relative_eq!(set.points[0].f1.unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(set.points[1].f1.unwrap(), 4.0 / 3.0, max_relative = 1e-12);
        // Nobody values current data on the g1 curve when lambda = 0.
        assert_eq!(set.points[0].g1, None);
    }

    #[test]
    fn unreachable_level_gives_no_root() {
        let p = ModelParams::new(1.0, 0.04, 0.5).unwrap();
        let set = iso_marginal_curves(&p, 50.0, &[0.0, 1.0, 3.0]).unwrap();
        for pt in &set.points {
            assert_eq!((pt.f0, pt.f1, pt.g0, pt.g1), (None, None, None, None));
        }
    }

    #[test]
    fn curve_orderings_and_slopes() {
        let p = ModelParams::new(1.0, 0.04, 0.5).unwrap();
        let set = iso_marginal_curves(&p, p.cost, &linspace(0.0, 3.0, 61)).unwrap();
        for pt in &set.points {
            if let (Some(f1), Some(g1)) = (pt.f1, pt.g1) {
                assert!(g1 < f1, "g1 above f1 at n0 = {}", pt.n0);
            }
            // Both curves reach the axis at the same n0, where the two
            // marginal values coincide.
            if let (Some(f0), Some(g0)) = (pt.f0, pt.g0) {
                assert!(g0 > f0 || (g0, f0) == (0.0, 0.0), "g0 below f0 at n0 = {}", pt.n0);
            }
        }
        for pick in [
            (|pt: &CurvePoint| pt.f0) as fn(&CurvePoint) -> Option<f64>,
            |pt| pt.f1,
            |pt| pt.g0,
            |pt| pt.g1,
        ] {
            let curve = set.curve(pick);
            assert!(curve.len() >= 2);
            assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::new(1.0, 0.04, 0.5).unwrap();
        assert!(iso_marginal_curves(&p, 0.0, &[1.0]).is_err());
        assert!(iso_marginal_curves(&p, 0.1, &[-1.0]).is_err());
    }
}
