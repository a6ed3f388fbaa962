//! Value of information, optimal storage and screening menus for a
//! monopolist selling access to a database of noisy observations.
//!
//! Two user types buy access: forecasters learn a long-run mean, nowcasters
//! its current realization. The seller chooses how much historical and
//! current data to keep, at a per-observation cost, and which access plans
//! to offer.
//!
//! - [`model`]: closed-form willingness to pay, derivatives, threshold.
//! - [`posterior`]: Gaussian conditioning and Monte Carlo re-derivations.
//! - [`first_best`], [`second_best`]: the two database problems.
//! - [`beta`]: four-type variant with a symmetric type distribution.
//! - [`verify`]: grid and constraint oracles.

pub mod beta;
pub mod cli;
pub mod error;
pub mod first_best;
pub mod model;
pub mod numeric;
pub mod posterior;
pub mod second_best;
pub mod validate;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Database, ModelParams};
