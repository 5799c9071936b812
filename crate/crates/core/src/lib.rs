//! Numerical laboratory for series of subgaussian random variables.
//!
//! The crate computes the quantities that control almost-sure and
//! exponential-Orlicz convergence of random series (the Young function
//! `phi(x) = exp(x^2) - 1` and its Orlicz norm, subgaussian standards,
//! covering numbers of cumulative-weight pseudo-metrics, Dudley entropy
//! integrals, the chaining constant `C(alpha)`) and checks every resulting
//! inequality against seeded Monte Carlo simulation.
//!
//! Modules, bottom-up:
//!
//! * [`orlicz`]: `phi`, its inverse, empirical and Gaussian Orlicz norms.
//! * [`subgaussian`]: marginal laws and their subgaussian standards.
//! * [`entropy`]: weighted pseudo-metrics, covering numbers, entropy
//!   integrals and the constant `C(alpha)`.
//! * [`series`]: seeded generators for each dependence class.
//! * [`bounds`]: closed-form right-hand sides of every maximal, norm and
//!   tail inequality.
//! * [`verify`]: Monte Carlo and linear-algebra checks producing
//!   [`verify::VerificationReport`]s.
//! * [`cli`]: configuration files, the verification suite and the
//!   `subseries` command line.

pub mod bounds;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod orlicz;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod subgaussian;
pub mod verify;

pub use error::{Error, Result};
