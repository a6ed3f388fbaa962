//! Independent re-derivations of the value functions.
//!
//! [`conditional_value_via_covariance`] builds the joint covariance of the
//! target and the two sample means and conditions on the signals.
//! [`monte_carlo_value`] simulates worlds, fits the linear predictor from the
//! empirical covariance of the simulated draws, and measures the resulting
//! reduction in squared error. Neither path touches the rational closed forms
//! in [`crate::model`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Database, ModelParams};

/// Which quantity a user type tries to learn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetKind {
    /// Current value `mu + x_1` (type S).
    Nowcaster,
    /// Long-run value `mu` (type L).
    Forecaster,
}

impl TargetKind {
    pub const ALL: [TargetKind; 2] = [TargetKind::Nowcaster, TargetKind::Forecaster];

    /// Loading of the target on the current-period shock `x_1`.
    fn current_shock_loading(self) -> f64 {
        match self {
            TargetKind::Nowcaster => 1.0,
            TargetKind::Forecaster => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub draws: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            draws: 1_000_000,
            seed: 0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(invalid("draws", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Indices of the signals actually present (`n_t > 0`).
fn present_signals(db: Database) -> Vec<usize> {
    [db.n0, db.n1]
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0.0)
        .map(|(t, _)| t)
        .collect()
}

/// Covariance of `(theta, ybar_0, ybar_1)`.
fn joint_covariance(target: TargetKind, db: Database, s: f64) -> [[f64; 3]; 3] {
    let c = target.current_shock_loading();
    let noise = |n: f64| if n > 0.0 { 1.0 / n } else { f64::INFINITY };
    [
        [s + c, s, s + c],
        [s, s + 1.0 + noise(db.n0), s],
        [s + c, s, s + 1.0 + noise(db.n1)],
    ]
}

/// Prior minus posterior variance of the target, by Gaussian conditioning
/// on whichever sample means are present.
pub fn conditional_value_via_covariance(
    target: TargetKind,
    db: Database,
    p: &ModelParams,
) -> Result<f64> {
    let cov = joint_covariance(target, db, p.sigma_mu_sq);
    let idx = present_signals(db);
    if idx.is_empty() {
        return Ok(0.0);
    }
    let k = idx.len();
    let a = DMatrix::from_fn(k, k, |i, j| cov[idx[i] + 1][idx[j] + 1]);
    let b = DVector::from_fn(k, |i, _| cov[0][idx[i] + 1]);
    let chol = a.cholesky().ok_or(Error::DegenerateMatrix)?;
    let weights = chol.solve(&b);
    Ok(b.dot(&weights))
}

/// Running first and second moments of a small random vector, mergeable in
/// any grouping.
#[derive(Debug, Clone)]
struct MomentAccumulator {
    count: f64,
    mean: Vec<f64>,
    /// Sum of outer products of deviations from the running mean.
    comoment: Vec<f64>,
}

#[allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
impl MomentAccumulator {
    fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
        }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.count += 1.0;
        let mut delta = [0.0; 3];
        for i in 0..d {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / self.count;
        }
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other.clone();
        }
        let d = self.dim();
        let n = self.count + other.count;
        let delta: Vec<f64> = (0..d).map(|i| other.mean[i] - self.mean[i]).collect();
        let w = self.count * other.count / n;
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * w;
            }
        }
        for i in 0..d {
            self.mean[i] += delta[i] * other.count / n;
        }
        self.count = n;
        self
    }

    fn covariance(&self, i: usize, j: usize) -> f64 {
        self.comoment[i * self.dim() + j] / (self.count - 1.0).max(1.0)
    }
}

const DRAWS_PER_CHUNK: u64 = 1 << 14;

/// One simulated world: returns `(theta, [ybar_t for present t])`.
struct WorldSampler {
    base: ChaCha8Rng,
    sigma_mu: f64,
    noise_sd: [f64; 2],
    loading: f64,
}

impl WorldSampler {
    fn new(target: TargetKind, db: Database, p: &ModelParams, seed: u64) -> Self {
        let sd = |n: f64| if n > 0.0 { (1.0 / n).sqrt() } else { 0.0 };
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
            sigma_mu: p.sigma_mu_sq.sqrt(),
            noise_sd: [sd(db.n0), sd(db.n1)],
            loading: target.current_shock_loading(),
        }
    }

    /// Each draw has its own ChaCha stream keyed by the seed, so the values
    /// do not depend on how draws are split across workers.
    fn draw(&self, index: u64, signals: &[usize], out: &mut [f64; 3]) {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        let mut z = [0.0f64; 5];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mu = self.sigma_mu * z[0];
        let shocks = [z[1], z[2]];
        let noise = [self.noise_sd[0] * z[3], self.noise_sd[1] * z[4]];
        out[0] = mu + self.loading * shocks[1];
        for (slot, &t) in signals.iter().enumerate() {
            out[slot + 1] = mu + shocks[t] + noise[t];
        }
    }
}

fn chunk_ranges(draws: u64) -> Vec<(u64, u64)> {
    (0..draws.div_ceil(DRAWS_PER_CHUNK))
        .map(|c| {
            let start = c * DRAWS_PER_CHUNK;
            (start, (start + DRAWS_PER_CHUNK).min(draws))
        })
        .collect()
}

/// Parallel map over draw chunks with an in-order sequential merge, so the
/// result is independent of the thread count.
fn accumulate<F>(draws: u64, dim: usize, per_draw: F) -> MomentAccumulator
where
    F: Fn(u64, &mut MomentAccumulator) + Sync,
{
    let partials: Vec<MomentAccumulator> = chunk_ranges(draws)
        .into_par_iter()
        .map(|(start, end)| {
            let mut acc = MomentAccumulator::new(dim);
            for i in start..end {
                per_draw(i, &mut acc);
            }
            acc
        })
        .collect();
    partials
        .iter()
        .fold(MomentAccumulator::new(dim), |acc, part| acc.merge(part))
}

/// Simulated reduction in mean squared error from predicting the target with
/// the best linear predictor fitted on the draws, relative to predicting
/// zero.
pub fn monte_carlo_value(
    target: TargetKind,
    db: Database,
    p: &ModelParams,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    let signals = present_signals(db);
    if signals.is_empty() {
        return Ok(McEstimate {
            estimate: 0.0,
            std_error: 0.0,
        });
    }
    let sampler = WorldSampler::new(target, db, p, cfg.seed);
    let dim = signals.len() + 1;

    // Pass 1: joint moments of (theta, signals).
    let moments = accumulate(cfg.draws, dim, |i, acc| {
        let mut row = [0.0; 3];
        sampler.draw(i, &signals, &mut row);
        acc.push(&row[..dim]);
    });
    let k = signals.len();
    let a = DMatrix::from_fn(k, k, |i, j| moments.covariance(i + 1, j + 1));
    let b = DVector::from_fn(k, |i, _| moments.covariance(0, i + 1));
    let weights = a.cholesky().ok_or(Error::DegenerateMatrix)?.solve(&b);
    let weights: Vec<f64> = weights.iter().copied().collect();
    let means = moments.mean.clone();

    // Pass 2: per-draw loss reduction theta^2 - (theta - prediction)^2.
    let gains = accumulate(cfg.draws, 1, |i, acc| {
        let mut row = [0.0; 3];
        sampler.draw(i, &signals, &mut row);
        let prediction = means[0]
            + (0..k)
                .map(|j| weights[j] * (row[j + 1] - means[j + 1]))
                .sum::<f64>();
        let theta = row[0];
        acc.push(&[theta * theta - (theta - prediction).powi(2)]);
    });
    let n = gains.count;
    Ok(McEstimate {
        estimate: gains.mean[0],
        std_error: (gains.covariance(0, 0) / n).sqrt(),
    })
}
