use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which logarithm argument of the fixed-point equation went nonpositive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogArgument {
    /// `alpha - 1 - A0(n, k)`; nonpositive means `alpha` is too small for `n`.
    AlphaTerm,
    /// `A1(c, n, k) + A2(c, n, k) exp(-6c^2)`; nonpositive means `c` left the basin.
    CoefficientTerm,
}

impl fmt::Display for LogArgument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogArgument::AlphaTerm => f.write_str("alpha - 1 - A0"),
            LogArgument::CoefficientTerm => f.write_str("A1 + A2*exp(-6c^2)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expansion order must be in 1..=5, got {0}")]
    InvalidOrder(u8),

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("log argument `{which}` is not positive ({value:e}) at c = {c}")]
    LogArgument {
        which: LogArgument,
        value: f64,
        c: f64,
    },

    #[error("negative radicand {radicand:e} in direct update at c = {c}")]
    NegativeRadicand { radicand: f64, c: f64 },

    #[error("non-finite iterate {value} produced from x = {from}")]
    NonFinite { value: f64, from: f64 },

    #[error("finite-difference slope {slope:e} is too small at x = {x}")]
    DegenerateDerivative { slope: f64, x: f64 },

    #[error("no convergence after {iterations} iterations (last x = {last}, distance = {distance:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        distance: f64,
    },

    #[error("quadratic for t1, t2 has complex roots (discriminant {0:e})")]
    ComplexRoots(f64),

    #[error("hypothesized CDF returned {value} at x = {x}, outside [0, 1]")]
    CdfContract { x: f64, value: f64 },

    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value at position {0}")]
    NonFiniteSample(usize),

    #[error("the stephens-mixed scheme has no single probability vector; use compute_vn")]
    MixedSchemeProbs,
}

impl Error {
    /// True for failures of the iteration itself rather than bad inputs.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }

    /// Errors that signal the iterate left the region where the fixed-point
    /// map is defined; a restart from a bracketed initial value may help.
    pub(crate) fn is_iteration_domain(&self) -> bool {
        matches!(
            self,
            Error::LogArgument {
                which: LogArgument::CoefficientTerm,
                ..
            } | Error::Domain { name: "c", .. }
                | Error::NegativeRadicand { .. }
                | Error::NonFinite { .. }
                | Error::DegenerateDerivative { .. }
        )
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "0 <= p <= 1",
        })
    }
}

pub(crate) fn check_open_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "0 < p < 1",
        })
    }
}

pub(crate) fn check_sample_size(n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "n",
            value: n as f64,
            expected: "n >= 1",
        })
    }
}
