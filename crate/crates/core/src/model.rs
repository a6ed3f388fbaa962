//! Closed-form value of information for the two user types.
//!
//! A database `(n0, n1)` holds `n0` historical and `n1` current observations
//! `y = mu + x_t + eps`, with `mu ~ N(0, sigma_mu_sq)`, `x_t ~ N(0, 1)` and
//! observation noise normalized to unit variance. Forecasters (type L) want
//! to learn `mu`; nowcasters (type S) want `mu + x_1`. Each type's
//! willingness to pay is the reduction in the posterior variance of its
//! target.
//!
//! Sample sizes are continuous and measured in multiples of the observation
//! noise variance; [`Database::from_raw`] performs that rescaling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Above this size in both coordinates, values are evaluated with numerator
/// and denominator divided by `n0 * n1`.
const LARGE_SAMPLE: f64 = 1e8;

/// Environment constants of the main model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Prior variance of the long-run parameter.
    pub sigma_mu_sq: f64,
    /// Storage cost per data point.
    pub cost: f64,
    /// Fraction of nowcasters in the user population.
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(sigma_mu_sq: f64, cost: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            sigma_mu_sq,
            cost,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the standard deviation of `mu`.
    pub fn from_sigma_mu(sigma_mu: f64, cost: f64, lambda: f64) -> Result<Self> {
        if !(sigma_mu.is_finite() && sigma_mu > 0.0) {
            return Err(invalid("sigma_mu", format!("must be finite and > 0, got {sigma_mu}")));
        }
        Self::new(sigma_mu * sigma_mu, cost, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_mu_sq.is_finite() && self.sigma_mu_sq > 0.0) {
            return Err(invalid(
                "sigma_mu_sq",
                format!("must be finite and > 0, got {}", self.sigma_mu_sq),
            ));
        }
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return Err(invalid("cost", format!("must be finite and > 0, got {}", self.cost)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(invalid("lambda", format!("must lie in [0, 1], got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_cost(self, cost: f64) -> Self {
        Self { cost, ..self }
    }

    pub fn with_sigma_mu_sq(self, sigma_mu_sq: f64) -> Self {
        Self {
            sigma_mu_sq,
            ..self
        }
    }
}

/// Stored sample sizes: `n0` historical, `n1` current.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Database {
    pub n0: f64,
    pub n1: f64,
}

impl Database {
    pub const EMPTY: Database = Database { n0: 0.0, n1: 0.0 };

    pub fn new(n0: f64, n1: f64) -> Result<Self> {
        for (name, v) in [("n0", n0), ("n1", n1)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { n0, n1 })
    }

    /// Rescales raw observation counts drawn with noise variance
    /// `sigma_eps_sq` into the unit-noise sizes used throughout the crate.
    pub fn from_raw(raw_n0: f64, raw_n1: f64, sigma_eps_sq: f64) -> Result<Self> {
        if !(sigma_eps_sq.is_finite() && sigma_eps_sq > 0.0) {
            return Err(invalid(
                "sigma_eps_sq",
                format!("must be finite and > 0, got {sigma_eps_sq}"),
            ));
        }
        Self::new(raw_n0 / sigma_eps_sq, raw_n1 / sigma_eps_sq)
    }

    pub fn total(&self) -> f64 {
        self.n0 + self.n1
    }

    pub fn is_empty(&self) -> bool {
        self.n0 == 0.0 && self.n1 == 0.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            n0: self.n1,
            n1: self.n0,
        }
    }
}

/// Access levels to each sample plus the fee charged for them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccessPlan {
    pub q0: f64,
    pub q1: f64,
    pub fee: f64,
}

impl AccessPlan {
    pub fn access(&self) -> Database {
        Database {
            n0: self.q0,
            n1: self.q1,
        }
    }
}

/// A screening menu: one plan for nowcasters (S), one for forecasters (L).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Menu {
    pub plan_s: AccessPlan,
    pub plan_l: AccessPlan,
}

impl Menu {
    pub fn is_feasible(&self, db: Database) -> bool {
        [self.plan_s, self.plan_l].iter().all(|plan| {
            (0.0..=db.n0).contains(&plan.q0) && (0.0..=db.n1).contains(&plan.q1) && plan.fee >= 0.0
        })
    }

    /// Expected fee revenue when a fraction `lambda` picks the S plan.
    pub fn revenue(&self, lambda: f64) -> f64 {
        lambda * self.plan_s.fee + (1.0 - lambda) * self.plan_l.fee
    }

    pub fn is_pooled(&self) -> bool {
        self.plan_s == self.plan_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient2 {
    pub d_n0: f64,
    pub d_n1: f64,
}

/// Symmetric matrix of second partials in `(n0, n1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hessian2 {
    pub d_n0_n0: f64,
    pub d_n0_n1: f64,
    pub d_n1_n1: f64,
}

impl Hessian2 {
    pub fn determinant(&self) -> f64 {
        self.d_n0_n0 * self.d_n1_n1 - self.d_n0_n1 * self.d_n0_n1
    }

    pub fn is_negative_definite(&self) -> bool {
        self.d_n0_n0 < 0.0 && self.determinant() > 0.0
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.d_n0_n0, self.d_n0_n1], [self.d_n0_n1, self.d_n1_n1]]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            d_n0_n0: k * self.d_n0_n0,
            d_n0_n1: k * self.d_n0_n1,
            d_n1_n1: k * self.d_n1_n1,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            d_n0_n0: self.d_n0_n0 + other.d_n0_n0,
            d_n0_n1: self.d_n0_n1 + other.d_n0_n1,
            d_n1_n1: self.d_n1_n1 + other.d_n1_n1,
        }
    }
}

/// Common denominator `s(n0 + n1 + 2 n0 n1) + (1 + n0)(1 + n1)`.
#[inline]
fn denominator(n0: f64, n1: f64, s: f64) -> f64 {
    s * (n0 + n1 + 2.0 * n0 * n1) + (1.0 + n0) * (1.0 + n1)
}

/// `dD/dn1 = 1 + n0 + s(1 + 2 n0)`; also the square root of the nowcaster's
/// marginal-value numerator in `n1`.
#[inline]
fn d_denominator_dn1(n0: f64, s: f64) -> f64 {
    1.0 + n0 + s * (1.0 + 2.0 * n0)
}

#[inline]
fn d_denominator_dn0(n1: f64, s: f64) -> f64 {
    1.0 + n1 + s * (1.0 + 2.0 * n1)
}

/// Returns `(V_L, V_S - V_L)`.
fn values(db: Database, s: f64) -> (f64, f64) {
    let Database { n0, n1 } = db;
    if n0 > LARGE_SAMPLE && n1 > LARGE_SAMPLE {
        let (u0, u1) = (1.0 / n0, 1.0 / n1);
        let info = u0 + u1 + 2.0;
        let den = s * info + (1.0 + u0) * (1.0 + u1);
        let value_l = s * s * info / den;
        let premium = (3.0 * s + 2.0 * s * u0 + u0 + 1.0) / den;
        return (value_l, premium);
    }
    let den = denominator(n0, n1, s);
    let value_l = s * s * (n0 + n1 + 2.0 * n0 * n1) / den;
    let premium = (3.0 * s * n0 * n1 + 2.0 * s * n1 + n1 + n0 * n1) / den;
    (value_l, premium)
}

/// Forecaster willingness to pay: reduction in the posterior variance of `mu`.
pub fn value_l(db: Database, p: &ModelParams) -> f64 {
    values(db, p.sigma_mu_sq).0
}

/// Nowcaster willingness to pay: reduction in the posterior variance of
/// `mu + x_1`.
pub fn value_s(db: Database, p: &ModelParams) -> f64 {
    let (l, premium) = values(db, p.sigma_mu_sq);
    l + premium
}

/// Valuation gap `V_S - V_L`; zero exactly when `n1 = 0`.
pub fn value_delta(db: Database, p: &ModelParams) -> f64 {
    values(db, p.sigma_mu_sq).1
}

/// Partial derivatives of `(V_L, V_S)` with respect to `(n0, n1)`.
pub fn grad_values(db: Database, p: &ModelParams) -> (Gradient2, Gradient2) {
    let s = p.sigma_mu_sq;
    let Database { n0, n1 } = db;
    let den_sq = denominator(n0, n1, s).powi(2);
    let k = d_denominator_dn1(n0, s);
    let grad_l = Gradient2 {
        d_n0: s * s * (1.0 + n1).powi(2) / den_sq,
        d_n1: s * s * (1.0 + n0).powi(2) / den_sq,
    };
    let grad_s = Gradient2 {
        d_n0: s * s / den_sq,
        d_n1: k * k / den_sq,
    };
    (grad_l, grad_s)
}

/// Hessians of `(V_L, V_S)`.
pub fn hessians(db: Database, p: &ModelParams) -> (Hessian2, Hessian2) {
    let s = p.sigma_mu_sq;
    let Database { n0, n1 } = db;
    let den_cu = denominator(n0, n1, s).powi(3);
    let k0 = d_denominator_dn0(n1, s);
    let k1 = d_denominator_dn1(n0, s);
    let s2 = s * s;
    let hess_l = Hessian2 {
        d_n0_n0: -2.0 * s2 * (1.0 + n1).powi(2) * k0 / den_cu,
        d_n0_n1: -2.0 * s2 * s * (1.0 + n0) * (1.0 + n1) / den_cu,
        d_n1_n1: -2.0 * s2 * (1.0 + n0).powi(2) * k1 / den_cu,
    };
    let hess_s = Hessian2 {
        d_n0_n0: -2.0 * s2 * k0 / den_cu,
        d_n0_n1: -2.0 * s2 * k1 / den_cu,
        d_n1_n1: -2.0 * k1.powi(3) / den_cu,
    };
    (hess_l, hess_s)
}

/// Nowcaster share above which forecasters are cut off from current data,
/// given `n0` historical observations.
///
/// Equals the ratio of the two types' marginal values of current data, which
/// does not depend on the amount of current data.
pub fn lambda_star(n0: f64, p: &ModelParams) -> f64 {
    let s = p.sigma_mu_sq;
    if n0.is_infinite() {
        return (s / (1.0 + 2.0 * s)).powi(2);
    }
    (s / (1.0 + s * (2.0 * n0 + 1.0) / (n0 + 1.0))).powi(2)
}

/// Lower and upper limits of [`lambda_star`] over `n0 >= 0`.
pub fn lambda_star_bounds(p: &ModelParams) -> (f64, f64) {
    let s = p.sigma_mu_sq;
    ((s / (1.0 + 2.0 * s)).powi(2), (s / (1.0 + s)).powi(2))
}
