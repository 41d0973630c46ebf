use serde::{Deserialize, Serialize};

use crate::error::{check_open_probability, check_probability, check_sample_size, Error, LogArgument, Result};
use crate::hoe::{coefficient_a1, coefficient_a2, fun_a0, ExpansionOrder, HalfPowers};

use super::fixed_point::{distance, fixed_point_solve, get_init_value, update_direct, update_newton};

/// `kuiper_utq` returns 0 for `alpha` at or above this.
pub const UTQ_GUARD: f64 = 0.9999;
/// `kuiper_ltq` returns 0 for `alpha` at or below this.
pub const LTQ_GUARD: f64 = 0.0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Iterate `c <- f_ctm(c)`.
    Direct,
    /// Newton steps on `f_nlm(c) = 0`.
    #[default]
    Newton,
}

/// Bracket and resolution for the bisection start value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

impl Default for Bisection {
    fn default() -> Self {
        Bisection {
            a: 0.6,
            b: 3.0,
            h: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Stop once consecutive iterates differ by less than this.
    pub epsilon: f64,
    /// Forward-difference step for the Newton slope.
    pub h: f64,
    /// Starting `c`; 1.8 works for `n >= 6` and all `k`, `alpha`.
    pub c_guess: f64,
    pub max_iter: usize,
    /// Start from the bisection midpoint instead of `c_guess`.
    pub use_bisection_init: bool,
    pub bisection: Bisection,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Newton,
            epsilon: 1e-5,
            h: 1e-5,
            c_guess: 1.8,
            max_iter: 200,
            use_bisection_init: false,
            bisection: Bisection::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    value,
                    expected: "> 0",
                })
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("h", self.h)?;
        positive("bisection.h", self.bisection.h)?;
        if self.max_iter == 0 {
            return Err(Error::Domain {
                name: "max_iter",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if !(self.bisection.a < self.bisection.b) {
            return Err(Error::Domain {
                name: "bisection.a",
                value: self.bisection.a,
                expected: "a < b",
            });
        }
        Ok(())
    }
}

/// Critical value `c` and quantile `v = c / sqrt(n)` at level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KuiperPair {
    pub c: f64,
    pub v: f64,
    pub alpha: f64,
    pub n: u64,
    pub k: ExpansionOrder,
    pub method: Method,
    pub iterations: usize,
    /// `f_nlm` evaluated at the returned `c`.
    pub residual: f64,
}

/// The two logarithm arguments of the fixed-point equation, checked.
fn log_arguments(c: f64, alpha: f64, n: u64, k: ExpansionOrder) -> Result<(f64, f64)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain {
            name: "c",
            value: c,
            expected: "c > 0",
        });
    }
    let alpha_term = alpha - 1.0 - fun_a0(n, k);
    if !(alpha_term > 0.0) {
        return Err(Error::LogArgument {
            which: LogArgument::AlphaTerm,
            value: alpha_term,
            c,
        });
    }
    let np = HalfPowers::new(n);
    let coefficient_term =
        coefficient_a1(c, &np, k.get()) + coefficient_a2(c, &np, k.get()) * (-6.0 * c * c).exp();
    if !(coefficient_term > 0.0) {
        return Err(Error::LogArgument {
            which: LogArgument::CoefficientTerm,
            value: coefficient_term,
            c,
        });
    }
    Ok((alpha_term, coefficient_term))
}

/// `2c^2 + ln(alpha - 1 - A0) - ln(A1 + A2 exp(-6c^2))`; zero at the quantile.
pub fn f_nlm(c: f64, alpha: f64, n: u64, k: ExpansionOrder) -> Result<f64> {
    let (alpha_term, coefficient_term) = log_arguments(c, alpha, n, k)?;
    Ok(2.0 * c * c + alpha_term.ln() - coefficient_term.ln())
}

/// `sqrt((ln(A1 + A2 exp(-6c^2)) - ln(alpha - 1 - A0)) / 2)`; its fixed point is the quantile.
pub fn f_ctm(c: f64, alpha: f64, n: u64, k: ExpansionOrder) -> Result<f64> {
    let (alpha_term, coefficient_term) = log_arguments(c, alpha, n, k)?;
    let radicand = (coefficient_term.ln() - alpha_term.ln()) / 2.0;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { radicand, c });
    }
    Ok(radicand.sqrt())
}

fn solve_from(x0: f64, cfg: &SolverConfig, alpha: f64, n: u64, k: ExpansionOrder) -> Result<(f64, usize)> {
    let fp = match cfg.method {
        Method::Direct => fixed_point_solve(
            |c| update_direct(|x| f_ctm(x, alpha, n, k), c),
            distance,
            cfg.epsilon,
            cfg.max_iter,
            x0,
        )?,
        Method::Newton => fixed_point_solve(
            |c| update_newton(|x| f_nlm(x, alpha, n, k), c, cfg.h),
            distance,
            cfg.epsilon,
            cfg.max_iter,
            x0,
        )?,
    };
    Ok((fp.x, fp.iterations))
}

fn bisection_start(cfg: &SolverConfig, alpha: f64, n: u64, k: ExpansionOrder) -> Result<f64> {
    let Bisection { a, b, h } = cfg.bisection;
    // For small n and k = 1 the coefficient term turns negative before c = 3.
    // f_nlm diverges to +inf as that term drops to zero, so for the sign
    // test a nonpositive coefficient counts as +inf.
    let sign_f = |c| match f_nlm(c, alpha, n, k) {
        Err(Error::LogArgument {
            which: LogArgument::CoefficientTerm,
            ..
        }) => Ok(f64::INFINITY),
        other => other,
    };
    Ok(get_init_value(sign_f, a, b, h)?.x)
}

/// Solves the upper-tail equation at level `alpha` for `(c, v)`.
///
/// If the iteration started from `c_guess` leaves the domain of the
/// fixed-point map, it is restarted once from the bisection start value.
pub fn kuiper_pair_solver(cfg: &SolverConfig, alpha: f64, n: u64, k: ExpansionOrder) -> Result<KuiperPair> {
    cfg.validate()?;
    check_open_probability("alpha", alpha)?;
    check_sample_size(n)?;

    let (c, iterations) = if cfg.use_bisection_init {
        solve_from(bisection_start(cfg, alpha, n, k)?, cfg, alpha, n, k)?
    } else {
        match solve_from(cfg.c_guess, cfg, alpha, n, k) {
            Ok(found) => found,
            Err(e) if e.is_iteration_domain() => {
                solve_from(bisection_start(cfg, alpha, n, k)?, cfg, alpha, n, k)?
            }
            Err(e) => return Err(e),
        }
    };

    Ok(KuiperPair {
        c,
        v: c / (n as f64).sqrt(),
        alpha,
        n,
        k,
        method: cfg.method,
        iterations,
        residual: f_nlm(c, alpha, n, k)?,
    })
}

/// Upper tail quantile `v` with `Pr{V_n > v} = alpha`, always via Newton.
pub fn kuiper_utq(alpha: f64, n: u64, k: ExpansionOrder, cfg: &SolverConfig) -> Result<f64> {
    check_probability("alpha", alpha)?;
    if alpha >= UTQ_GUARD {
        return Ok(0.0);
    }
    let newton = SolverConfig {
        method: Method::Newton,
        ..*cfg
    };
    Ok(kuiper_pair_solver(&newton, alpha, n, k)?.v)
}

/// Lower tail quantile; identical to `kuiper_utq(1 - alpha)`.
pub fn kuiper_ltq(alpha: f64, n: u64, k: ExpansionOrder, cfg: &SolverConfig) -> Result<f64> {
    check_probability("alpha", alpha)?;
    if alpha <= LTQ_GUARD {
        return Ok(0.0);
    }
    kuiper_utq(1.0 - alpha, n, k, cfg)
}

/// Inverse of the `V_n` CDF.
pub fn kuiper_inv_cdf(x: f64, n: u64, k: ExpansionOrder, cfg: &SolverConfig) -> Result<f64> {
    check_probability("x", x)?;
    kuiper_utq(1.0 - x, n, k, cfg)
}
