//! Reproducible experiment harness for the Tron-style trainers: TOML-driven
//! runs with seeded repeats and on-disk artifacts, a moments estimator
//! command, randomized recursion certification, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod runner;
