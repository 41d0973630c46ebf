//! High-order expansion (HOE) of the distribution of Kuiper's `V_n` statistic.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`hoe`] evaluates the expansion coefficients `B_i(c)`, the truncated
//!   coefficient polynomials `A_j(c, n, k)` and the CDF / upper tail
//!   probability of `K_n = sqrt(n) V_n`.
//! * [`solver`] holds a small fixed-point framework (direct and Newton
//!   updates, bisection start values) and the Kuiper-pair, quantile and
//!   inverse-CDF solvers built on it.
//! * [`gof`] computes `D+`, `D-`, `V_n` from data and runs the test.
//! * [`baselines`] has Stephens' formulas and an asymptotic KS tail.
//! * [`montecarlo`] estimates Type I error rates by simulation.
//!
//! The expansion is stated for sample sizes `n >= 6`; smaller `n` is accepted
//! but the truncation error grows quickly.
//!
//! ```
//! use kuiper_hoe::{solver, ExpansionOrder, SolverConfig};
//!
//! let k = ExpansionOrder::new(5).unwrap();
//! let pair = solver::kuiper_pair_solver(&SolverConfig::default(), 0.05, 10, k).unwrap();
//! assert!((pair.c - 1.6630).abs() < 1e-4);
//! assert!((pair.v - 0.5259).abs() < 1e-4);
//! ```

// `!(x > y)` comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
mod error;
pub mod gof;
pub mod hoe;
pub mod montecarlo;
pub mod solver;

pub use error::{Error, LogArgument, Result};
pub use gof::{EdfScheme, SampleSet, TestResult};
pub use hoe::{ExpansionOrder, ProbabilityEstimate, SeriesConfig, Statistic};
pub use solver::{KuiperPair, Method, SolverConfig};
