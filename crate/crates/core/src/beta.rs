//! Four-type variant with two independent parameters.
//!
//! A type `beta` wants to learn `beta * theta_0 + (1 - beta) * theta_1`,
//! where `theta_i ~ N(0, 1)` are independent and the database holds `n_i`
//! observations of `theta_i + eps`, `eps ~ N(0, sigma_sq)`. Types are
//! `{r, s, 1 - s, 1 - r}` with `0 < r < s < 1/2` and a distribution
//! symmetric around one half. Types near 0 or 1 are narrow (high valuation),
//! types near one half are broad.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::first_best::check_tol;
use crate::model::Database;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub r: f64,
    pub s: f64,
    /// Probability of type `r` (and of `1 - r`).
    pub p_r: f64,
    pub sigma_sq: f64,
    pub cost: f64,
}

impl BetaParams {
    pub fn new(r: f64, s: f64, p_r: f64, sigma_sq: f64, cost: f64) -> Result<Self> {
        let bp = Self {
            r,
            s,
            p_r,
            sigma_sq,
            cost,
        };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < self.s && self.s < 0.5) {
            return Err(invalid(
                "r, s",
                format!("need 0 < r < s < 1/2, got r = {}, s = {}", self.r, self.s),
            ));
        }
        if !(self.p_r > 0.0 && self.p_r < 0.5) {
            return Err(invalid("p_r", format!("must lie in (0, 1/2), got {}", self.p_r)));
        }
        if !(self.sigma_sq.is_finite() && self.sigma_sq > 0.0) {
            return Err(invalid("sigma_sq", format!("must be finite and > 0, got {}", self.sigma_sq)));
        }
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return Err(invalid("cost", format!("must be finite and > 0, got {}", self.cost)));
        }
        Ok(())
    }

    /// Probability of type `s` (and of `1 - s`).
    pub fn p_s(&self) -> f64 {
        0.5 - self.p_r
    }

    /// Types in the order `[r, s, 1 - s, 1 - r]` with their probabilities.
    pub fn types(&self) -> [(f64, f64); 4] {
        [
            (self.r, self.p_r),
            (self.s, self.p_s()),
            (1.0 - self.s, self.p_s()),
            (1.0 - self.r, self.p_r),
        ]
    }

    /// `r^2 + (1 - r)^2`: a narrow type's value of one unit of precision on
    /// both components.
    pub fn narrow_weight(&self) -> f64 {
        self.r * self.r + (1.0 - self.r).powi(2)
    }

    /// `s^2 + (1 - s)^2`, the broad-type counterpart.
    pub fn broad_weight(&self) -> f64 {
        self.s * self.s + (1.0 - self.s).powi(2)
    }

    /// Population-average weight `W = p_r (r^2 + (1-r)^2) + p_s (s^2 + (1-s)^2)`.
    pub fn mean_weight(&self) -> f64 {
        self.p_r * self.narrow_weight() + self.p_s() * self.broad_weight()
    }

    /// Share of the variance of `theta_i` removed by `n` observations.
    pub fn precision_share(&self, n: f64) -> f64 {
        n / (n + self.sigma_sq)
    }
}

/// Willingness to pay of type `beta` for access `(n0, n1)`.
pub fn u_beta(beta: f64, db: Database, bp: &BetaParams) -> f64 {
    beta * beta * bp.precision_share(db.n0) + (1.0 - beta).powi(2) * bp.precision_share(db.n1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaRegime {
    /// Every type gets the full symmetric database.
    FullAccess,
    /// Broad types `s`, `1 - s` get nothing and pay nothing.
    Exclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFirstBest {
    pub n_star: f64,
    pub profit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSolution {
    /// Size of each of the two samples.
    pub n_store: f64,
    /// Per-component access of the broad types; either 0 or `n_store`.
    pub q_broad: f64,
    /// Fees in type order `[r, s, 1 - s, 1 - r]`.
    pub fees: [f64; 4],
    pub regime: BetaRegime,
    pub profit: f64,
    pub first_best_n: f64,
}

impl BetaSolution {
    /// Access `(q0, q1)` per type, in the order of [`BetaParams::types`].
    pub fn access(&self) -> [Database; 4] {
        let full = Database {
            n0: self.n_store,
            n1: self.n_store,
        };
        let broad = Database {
            n0: self.q_broad,
            n1: self.q_broad,
        };
        [full, broad, broad, full]
    }
}

/// Maximizer of `revenue_weight * N / (N + sigma_sq) - 2 c N` over `N >= 0`.
fn symmetric_size(revenue_weight: f64, bp: &BetaParams) -> f64 {
    let sigma = bp.sigma_sq.sqrt();
    (sigma * (revenue_weight / (2.0 * bp.cost)).sqrt() - bp.sigma_sq).max(0.0)
}

/// First best: the optimal database is symmetric, every type gets full
/// access and pays its willingness to pay.
pub fn solve_beta_first_best(bp: &BetaParams, tol: f64) -> Result<BetaFirstBest> {
    bp.validate()?;
    check_tol(tol)?;
    let revenue_weight = 2.0 * bp.mean_weight();
    let n_star = symmetric_size(revenue_weight, bp);
    Ok(BetaFirstBest {
        n_star,
        profit: revenue_weight * bp.precision_share(n_star) - 2.0 * bp.cost * n_star,
    })
}

/// Broad types keep full access iff `2 p_r <= (s^2 + (1-s)^2) / (r^2 + (1-r)^2)`.
pub fn broad_types_served(bp: &BetaParams) -> bool {
    2.0 * bp.p_r <= bp.broad_weight() / bp.narrow_weight()
}

/// Second best: symmetric database `N** < N*`, narrow types always served
/// in full, broad types served in full or excluded.
///
/// Under full access every type pays the broad types' valuation, so revenue
/// is `(s^2 + (1-s)^2) x_N`; under exclusion only narrow types pay, giving
/// `2 p_r (r^2 + (1-r)^2) x_N`. Storage costs `2 c N` in both cases.
pub fn solve_beta_second_best(bp: &BetaParams, tol: f64) -> Result<BetaSolution> {
    let first_best = solve_beta_first_best(bp, tol)?;
    let (regime, revenue_weight) = if broad_types_served(bp) {
        (BetaRegime::FullAccess, bp.broad_weight())
    } else {
        (BetaRegime::Exclusion, 2.0 * bp.p_r * bp.narrow_weight())
    };
    let n = symmetric_size(revenue_weight, bp);
    let share = bp.precision_share(n);
    let (q_broad, fees) = match regime {
        BetaRegime::FullAccess => (n, [bp.broad_weight() * share; 4]),
        BetaRegime::Exclusion => {
            let narrow_fee = bp.narrow_weight() * share;
            (0.0, [narrow_fee, 0.0, 0.0, narrow_fee])
        }
    };
    if first_best.n_star > 0.0 && n >= first_best.n_star {
        return Err(Error::InvariantViolation(format!(
            "second-best size {n} not below first-best size {}",
            first_best.n_star
        )));
    }
    let revenue: f64 = bp.types().iter().zip(fees).map(|((_, prob), fee)| prob * fee).sum();
    Ok(BetaSolution {
        n_store: n,
        q_broad,
        fees,
        regime,
        profit: revenue - 2.0 * bp.cost * n,
        first_best_n: first_best.n_star,
    })
}
