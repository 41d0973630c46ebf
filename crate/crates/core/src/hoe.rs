//! Series evaluation for the distribution of `K_n = sqrt(n) V_n`.
//!
//! `Pr{K_n <= c} = sum_{i=0}^{k} B_i(c) / n^{i/2}` with error `O(n^{-(k+1)/2})`.
//! `B_0` and `B_1` are Kuiper's classical first-order functions; `B_2..B_5`
//! extend the expansion up to `k = 5`.
//!
//! Two evaluation paths exist. [`b_series`] sums the exponential series over
//! `j = 1..=j_max`. [`fun_a0`] / [`fun_aj`] keep only the `exp(-2c^2)` and
//! `exp(-8c^2)` terms and regroup them by exponential; the solver works with
//! that truncated form.
//!
//! Note that `B_2` and `B_4` carry the constants `-1/18` and `1/648`, so for
//! `k >= 2` the CDF saturates at `1 - 1/(18n) (+ 1/(648 n^2))` rather than 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_sample_size, Error, Result};

/// Truncation depth `k` of the `1/sqrt(n)` series, `1 <= k <= 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ExpansionOrder(u8);

impl ExpansionOrder {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(k: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&k) {
            Ok(ExpansionOrder(k))
        } else {
            Err(Error::InvalidOrder(k))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// All supported orders, ascending.
    pub fn all() -> impl Iterator<Item = ExpansionOrder> {
        (Self::MIN..=Self::MAX).map(ExpansionOrder)
    }
}

impl Default for ExpansionOrder {
    fn default() -> Self {
        ExpansionOrder(1)
    }
}

impl TryFrom<u8> for ExpansionOrder {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        ExpansionOrder::new(k)
    }
}

impl From<ExpansionOrder> for u8 {
    fn from(k: ExpansionOrder) -> u8 {
        k.0
    }
}

impl fmt::Display for ExpansionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Controls for the full-series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Number of `exp(-2 j^2 c^2)` terms summed.
    pub j_max: usize,
    /// Results for `c` below this carry [`ProbabilityEstimate::below_validity_floor`].
    pub c_min_warn: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            j_max: 10,
            c_min_warn: 0.6,
        }
    }
}

/// A scaled/unscaled statistic pair with `c = v * sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Statistic {
    pub c: f64,
    pub v: f64,
    pub n: u64,
}

impl Statistic {
    pub fn from_v(v: f64, n: u64) -> Self {
        Statistic {
            c: v * (n as f64).sqrt(),
            v,
            n,
        }
    }

    pub fn from_c(c: f64, n: u64) -> Self {
        Statistic {
            c,
            v: c / (n as f64).sqrt(),
            n,
        }
    }
}

/// A probability produced by a truncated series.
///
/// `value` is clamped into `[0, 1]`; `raw` is what the series produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
    /// `c` was below [`SeriesConfig::c_min_warn`]; the asymptotic series is unreliable there.
    pub below_validity_floor: bool,
}

impl ProbabilityEstimate {
    fn new(raw: f64, below_validity_floor: bool) -> Self {
        let value = raw.clamp(0.0, 1.0);
        ProbabilityEstimate {
            value,
            raw,
            clamped: value != raw,
            below_validity_floor,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Which expression [`utp`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailForm {
    /// `1 - sum_i B_i(c) / n^{i/2}` with the full `j` series.
    #[default]
    FullSeries,
    /// `[1 + A0] + A1 exp(-2c^2) + A2 exp(-8c^2)`, the form the solver inverts.
    TwoExponential,
}

/// `(sqrt n)^i` for `i = 0..=5`, built by repeated multiplication.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfPowers([f64; 6]);

impl HalfPowers {
    pub(crate) fn new(n: u64) -> Self {
        let s = (n as f64).sqrt();
        let mut p = [1.0; 6];
        for i in 1..6 {
            p[i] = p[i - 1] * s;
        }
        HalfPowers(p)
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}

/// Polynomial multiplying `exp(-2 j^2 c^2)` inside the sum of `B_i`, with
/// `m = j^2`; the outer constant and scale are applied in [`b_series`].
fn series_term_poly(i: usize, c: f64, m: f64) -> f64 {
    let c2 = c * c;
    match i {
        0 => 4.0 * m * c2 - 1.0,
        1 => c * m * (4.0 * c2 * m - 3.0),
        2 => 4.0 * c2 * m * (-16.0 * c2 * m * m + 24.0 * m + 1.0) - 12.0 * m - 1.0,
        3 => {
            c * m
                * (16.0 * c2 * c2 * m * m * m - 40.0 * c2 * m * m - 4.0 * c2 * m + 15.0 * m + 3.0)
        }
        4 => {
            16.0 * c2 * c2 * m * m * (-64.0 * c2 * m * m * m + 240.0 * m * m + 40.0 * m + 1.0)
                - 24.0 * c2 * m * (120.0 * m * m + 40.0 * m + 1.0)
                + 120.0 * m * (2.0 * m + 1.0)
                + 3.0
        }
        5 => {
            let c3 = c2 * c;
            let c5 = c3 * c2;
            16.0 * (16.0 * c5 * m * m * m * (32.0 * c2 * m * m * m - 168.0 * m * m - 40.0 * m - 3.0)
                + 40.0 * c3 * m * m * (84.0 * m * m + 40.0 * m + 3.0)
                - 15.0 * c * m * (56.0 * m * m + 40.0 * m + 3.0))
        }
        _ => unreachable!("order checked by caller"),
    }
}

/// `(constant, scale)` with `B_i = constant + scale * sum_j poly_i(c, j) exp(-2 j^2 c^2)`.
const SERIES_AFFINE: [(f64, f64); 6] = [
    (1.0, -2.0),
    (0.0, 8.0 / 3.0),
    (-1.0 / 18.0, 1.0 / 9.0),
    (0.0, 16.0 / 81.0),
    (1.0 / 648.0, 1.0 / 972.0),
    (0.0, 2.0 / 3645.0),
];

fn check_index(i: usize) -> Result<()> {
    if i <= 5 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "i",
            value: i as f64,
            expected: "0 <= i <= 5",
        })
    }
}

fn check_positive_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "c",
            value: c,
            expected: "c > 0",
        })
    }
}

/// Coefficient of `exp(-2 j^2 c^2)` contributed to `B_i(c)` by the `j`-th
/// series term (`j >= 1`). For `j = 1, 2` these are the `B^j_i(c)` used by the
/// two-exponential truncation.
pub fn series_coefficient(i: usize, c: f64, j: u32) -> Result<f64> {
    check_index(i)?;
    let m = f64::from(j) * f64::from(j);
    Ok(SERIES_AFFINE[i].1 * series_term_poly(i, c, m))
}

/// `B_i(c)` with the inner sum truncated at `cfg.j_max`.
pub fn b_series(i: usize, c: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_index(i)?;
    check_positive_c(c)?;
    let c2 = c * c;
    let sum: f64 = (1..=cfg.j_max)
        .map(|j| {
            let m = (j * j) as f64;
            let e = (-2.0 * m * c2).exp();
            if e == 0.0 {
                0.0
            } else {
                e * series_term_poly(i, c, m)
            }
        })
        .sum();
    let (constant, scale) = SERIES_AFFINE[i];
    Ok(constant + scale * sum)
}

/// `A_0(n, k)`, the constant part of the regrouped upper tail.
pub fn fun_a0(n: u64, k: ExpansionOrder) -> f64 {
    let n = n as f64;
    let mut a0 = -1.0;
    if k.get() > 1 {
        a0 += 1.0 / (18.0 * n);
    }
    if k.get() > 3 {
        a0 -= 1.0 / (648.0 * n * n);
    }
    a0
}

/// `A_1(c, n, k)`: coefficient of `exp(-2c^2)`.
pub(crate) fn coefficient_a1(c: f64, np: &HalfPowers, k: u8) -> f64 {
    let c2 = c * c;
    let c3 = c2 * c;
    let c4 = c2 * c2;
    let c5 = c4 * c;
    let c6 = c4 * c2;
    let c7 = c6 * c;
    let mut a1 = (8.0 * c2 - 2.0) - 8.0 * (4.0 * c3 - 3.0 * c) / (3.0 * np.get(1));
    if k > 1 {
        a1 += (64.0 * c4 - 100.0 * c2 + 13.0) / (9.0 * np.get(2));
    }
    if k > 2 {
        a1 -= 32.0 * (8.0 * c5 - 22.0 * c3 + 9.0 * c) / (81.0 * np.get(3));
    }
    if k > 3 {
        a1 += (1024.0 * c6 - 4496.0 * c4 + 3864.0 * c2 - 363.0) / (972.0 * np.get(4));
    }
    if k > 4 {
        a1 -= 32.0 * (512.0 * c7 - 3376.0 * c5 + 5080.0 * c3 - 1485.0 * c) / (3645.0 * np.get(5));
    }
    a1
}

/// `A_2(c, n, k)`: coefficient of `exp(-8c^2)`.
pub(crate) fn coefficient_a2(c: f64, np: &HalfPowers, k: u8) -> f64 {
    let c2 = c * c;
    let c3 = c2 * c;
    let c4 = c2 * c2;
    let c5 = c4 * c;
    let c6 = c4 * c2;
    let c7 = c6 * c;
    let mut a2 = (32.0 * c2 - 2.0) - 32.0 * (16.0 * c3 - 3.0 * c) / (3.0 * np.get(1));
    if k > 1 {
        a2 += (4096.0 * c4 - 1552.0 * c2 + 49.0) / (9.0 * np.get(2));
    }
    if k > 2 {
        a2 -= 64.0 * (1024.0 * c5 - 656.0 * c3 + 63.0 * c) / (81.0 * np.get(3));
    }
    if k > 3 {
        a2 += (1_048_576.0 * c6 - 1_024_256.0 * c4 + 199_776.0 * c2 - 2403.0)
            / (972.0 * np.get(4));
    }
    if k > 4 {
        a2 -= 32.0
            * (2_097_152.0 * c7 - 2_919_424.0 * c5 + 964_480.0 * c3 - 63_540.0 * c)
            / (3645.0 * np.get(5));
    }
    a2
}

/// `A_j(c, n, k)` for `j` in `{1, 2}`.
pub fn fun_aj(j: u8, c: f64, n: u64, k: ExpansionOrder) -> Result<f64> {
    check_sample_size(n)?;
    let np = HalfPowers::new(n);
    match j {
        1 => Ok(coefficient_a1(c, &np, k.get())),
        2 => Ok(coefficient_a2(c, &np, k.get())),
        _ => Err(Error::Domain {
            name: "j",
            value: f64::from(j),
            expected: "j in {1, 2}",
        }),
    }
}

fn raw_cdf(c: f64, n: u64, k: ExpansionOrder, cfg: &SeriesConfig) -> Result<f64> {
    check_positive_c(c)?;
    check_sample_size(n)?;
    let np = HalfPowers::new(n);
    let mut total = 0.0;
    for i in 0..=usize::from(k.get()) {
        total += b_series(i, c, cfg)? / np.get(i);
    }
    Ok(total)
}

/// `Pr{K_n <= c}` to order `k`.
pub fn cdf_kn(c: f64, n: u64, k: ExpansionOrder, cfg: &SeriesConfig) -> Result<ProbabilityEstimate> {
    let raw = raw_cdf(c, n, k, cfg)?;
    Ok(ProbabilityEstimate::new(raw, c < cfg.c_min_warn))
}

/// `Pr{V_n <= v}`; evaluates [`cdf_kn`] at `c = v sqrt(n)`.
pub fn cdf_vn(v: f64, n: u64, k: ExpansionOrder, cfg: &SeriesConfig) -> Result<ProbabilityEstimate> {
    cdf_kn(Statistic::from_v(v, n).c, n, k, cfg)
}

/// Upper tail probability `Pr{K_n > c}`.
pub fn utp(
    c: f64,
    n: u64,
    k: ExpansionOrder,
    cfg: &SeriesConfig,
    form: TailForm,
) -> Result<ProbabilityEstimate> {
    let raw = match form {
        TailForm::FullSeries => 1.0 - raw_cdf(c, n, k, cfg)?,
        TailForm::TwoExponential => {
            check_positive_c(c)?;
            check_sample_size(n)?;
            let np = HalfPowers::new(n);
            let c2 = c * c;
            (1.0 + fun_a0(n, k))
                + coefficient_a1(c, &np, k.get()) * (-2.0 * c2).exp()
                + coefficient_a2(c, &np, k.get()) * (-8.0 * c2).exp()
        }
    };
    Ok(ProbabilityEstimate::new(raw, c < cfg.c_min_warn))
}
