//! Non-gradient iterative training of single-filter depth-2 ReLU networks,
//! with the moment constants, label-corruption adversaries, and recursion
//! bounds that drive their convergence schedules.
//!
//! The crate is organized around three trainers and their supporting cast:
//!
//! - [`glm_tron`]: full-batch GLM-Tron for L-Lipschitz non-decreasing gates
//!   (L < 2), with per-step decrease certificates and noise-risk bounds.
//! - [`relu_tron`]: modified mini-batch SGD for a single ReLU gate whose
//!   labels pass through a probabilistic bounded-corruption oracle, plus the
//!   Case I/II step-size and iteration-count schedules.
//! - [`neurotron`]: full-batch Neuro-Tron over width-w leaky-ReLU nets with
//!   shared filter and fixed patch matrices, targeting the infinity-norm
//!   interpolation problem on (possibly non-realizable) symmetric data.
//!
//! Supporting modules: [`linalg`] (dense vectors/matrices, eigen-extremes),
//! [`data`] (datasets, symmetrization, CSV), [`distributions`] (samplers and
//! Monte-Carlo moment estimation), [`adversary`] (the label oracle and attack
//! strategies), and [`recursion`] (closed-form analyses of the contraction
//! recursions, with brute-force certification).

pub mod adversary;
pub mod data;
pub mod distributions;
pub mod error;
pub mod glm_tron;
pub mod linalg;
pub mod neurotron;
pub mod recursion;
pub mod relu_tron;

pub use error::{Result, TronError};
pub use linalg::{RealMatrix, RealVector};
