//! elastiloc: an end-to-end workbench for locating a localized interior
//! source in an elastic body from surface sensor readings.
//!
//! The pipeline has three stages:
//!
//! 1. **Forward model** ([`mesh`], [`fem`]) — a static linear-elasticity
//!    solve over a rectangular body excited by a Gaussian body force.
//! 2. **Data generation** ([`datagen`]) — random source positions, one
//!    forward solve each, displacement and gradient readings extracted at
//!    surface sensor sites and persisted as CSV datasets.
//! 3. **Learning and evaluation** ([`learn`], [`tune`], [`eval`]) —
//!    from-scratch regression models (linear, tree, forest, gradient
//!    boosting, k-nearest-neighbours and an averaging ensemble) trained to
//!    recover the source position, grid-search tuning, and metric reports
//!    with figures.
//!
//! The [`cli`] module drives reproducible batch experiments; the `elastiloc`
//! binary is a thin wrapper around it. Every stage is deterministic given
//! its seeds.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod fem;
pub mod learn;
pub mod matrix;
pub mod mesh;
pub(crate) mod seeding;
pub mod tune;

pub use error::{Error, Result};
