//! Fixed-point iteration and the Kuiper-pair / quantile solvers.
//!
//! [`fixed_point`] is problem-agnostic: an updater maps `x_i` to `x_{i+1}`
//! and iteration stops once two consecutive iterates are closer than
//! `epsilon`. [`kuiper`] plugs the upper-tail equation into it.

pub mod fixed_point;
pub mod kuiper;

pub use fixed_point::{
    distance, fixed_point_solve, get_init_value, update_direct, update_newton, FixedPoint,
    InitValue,
};
pub use kuiper::{
    f_ctm, f_nlm, kuiper_inv_cdf, kuiper_ltq, kuiper_pair_solver, kuiper_utq, Bisection,
    KuiperPair, Method, SolverConfig, LTQ_GUARD, UTQ_GUARD,
};
