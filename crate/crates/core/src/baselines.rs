//! Stephens' approximations for `V_n` and an asymptotic Kolmogorov-Smirnov tail.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_open_probability, check_sample_size, Error, Result};
use crate::solver::{distance, fixed_point_solve, get_init_value, update_newton};

fn ln_factorial(m: u64) -> f64 {
    ln_gamma(m as f64 + 1.0)
}

fn ln_binomial(n: u64, t: u64) -> f64 {
    ln_factorial(n) - ln_factorial(t) - ln_factorial(n - t)
}

/// Smallest `v` for which [`stephens_utp`] is defined.
pub fn stephens_utp_floor(n: u64) -> f64 {
    if n.is_multiple_of(2) {
        0.5
    } else {
        0.5 - 0.5 / n as f64
    }
}

/// Stephens' finite-sum upper tail `Pr{V_n >= v}`, valid for `v` at or above
/// [`stephens_utp_floor`]. Binomials are evaluated through `ln_gamma`.
pub fn stephens_utp(v: f64, n: u64) -> Result<f64> {
    check_sample_size(n)?;
    if !(v >= stephens_utp_floor(n)) {
        return Err(Error::Domain {
            name: "v",
            value: v,
            expected: "v >= 1/2 (n even) or v >= 1/2 - 1/(2n) (n odd)",
        });
    }
    let nf = n as f64;
    let upper = nf * (1.0 - v);
    if upper < 0.0 {
        return Ok(0.0);
    }
    let t_max = (upper.floor() as u64).min(n);

    let mut sum = 0.0;
    for t in 0..=t_max {
        let tf = t as f64;
        let y = v + tf / nf;
        let base = 1.0 - v - tf / nf;
        let exponent = n - t - 1;
        let ln_base_power = if base > 0.0 {
            exponent as f64 * base.ln()
        } else if exponent == 0 {
            0.0
        } else {
            continue;
        };
        let r = 3.0 - 2.0 / nf;
        let bracket = y.powi(3) * nf - y * y * tf * r + y * tf * (tf - 1.0) * r / nf
            - tf * (tf - 1.0) * (tf - 2.0) / (nf * nf);
        let magnitude = ln_binomial(n, t) + ln_base_power + (tf - 3.0) * y.ln();
        sum += magnitude.exp() * bracket;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// The two closed forms of Stephens' small-`v` CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallVBranch {
    /// `n! (v - 1/n)^(n-1)` on `[1/n, 2/n]`.
    Lower,
    /// The two-root expression on `[2/n, 3/n]`.
    Upper,
}

/// Evaluates one branch of the small-`v` CDF without checking which
/// interval `v` lies in.
pub fn stephens_cdf_branch(v: f64, n: u64, branch: SmallVBranch) -> Result<f64> {
    check_sample_size(n)?;
    let nf = n as f64;
    match branch {
        SmallVBranch::Lower => {
            let base = v - 1.0 / nf;
            if base < 0.0 {
                return Err(Error::Domain {
                    name: "v",
                    value: v,
                    expected: "v >= 1/n",
                });
            }
            if n == 1 {
                return Ok(1.0);
            }
            if base == 0.0 {
                return Ok(0.0);
            }
            Ok((ln_factorial(n) + (nf - 1.0) * base.ln()).exp())
        }
        SmallVBranch::Upper => {
            let x = nf * v;
            let disc = (x - 1.0).powi(2) - 2.0 * (x - 2.0).powi(2);
            if disc < 0.0 {
                return Err(Error::ComplexRoots(disc));
            }
            let root = disc.sqrt();
            let t1 = 0.5 * (x - 1.0 - root);
            let t2 = 0.5 * (x - 1.0 + root);
            if root == 0.0 {
                return Err(Error::Domain {
                    name: "v",
                    value: v,
                    expected: "distinct roots t1 != t2",
                });
            }
            let m = n as i32 - 1;
            let bracket = (t2.powi(m) * (1.0 - t1) - t1.powi(m) * (1.0 - t2)) / (t2 - t1);
            let scale = (ln_factorial(n - 1) - (nf - 2.0) * nf.ln()).exp();
            Ok(scale * bracket)
        }
    }
}

/// Stephens' exact `Pr{V_n <= v}` for `1/n <= v <= 3/n`.
pub fn stephens_cdf_small_v(v: f64, n: u64) -> Result<f64> {
    check_sample_size(n)?;
    let nf = n as f64;
    if !(v >= 1.0 / nf && v <= 3.0 / nf) {
        return Err(Error::Domain {
            name: "v",
            value: v,
            expected: "1/n <= v <= 3/n",
        });
    }
    let branch = if v <= 2.0 / nf {
        SmallVBranch::Lower
    } else {
        SmallVBranch::Upper
    };
    Ok(stephens_cdf_branch(v, n, branch)?.clamp(0.0, 1.0))
}

/// `V_n (sqrt n + 0.155 + 0.24 / sqrt n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedStatistic {
    pub t_n: f64,
    pub n: u64,
}

pub fn modified_multiplier(n: u64) -> f64 {
    let root = (n as f64).sqrt();
    root + 0.155 + 0.24 / root
}

pub fn modified_statistic(v_n: f64, n: u64) -> ModifiedStatistic {
    ModifiedStatistic {
        t_n: v_n * modified_multiplier(n),
        n,
    }
}

/// Level `alpha` of the leading asymptotic term `(8c^2 - 2) exp(-2c^2)`.
pub fn modified_tail(c: f64) -> f64 {
    (8.0 * c * c - 2.0) * (-2.0 * c * c).exp()
}

/// Solves `(8c^2 - 2) exp(-2c^2) = alpha` for the critical value of `T_n`.
///
/// The left side peaks at `c = sqrt(3)/2`; the root on the decreasing
/// branch is returned, so `alpha` must be below `4 exp(-3/2)`.
pub fn modified_quantile(alpha: f64) -> Result<f64> {
    check_open_probability("alpha", alpha)?;
    let peak_c = 0.75_f64.sqrt();
    let peak = modified_tail(peak_c);
    if alpha >= peak {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "alpha < 4 exp(-3/2)",
        });
    }
    let g = |c: f64| Ok(modified_tail(c) - alpha);
    let mut init = get_init_value(g, 0.6, 3.0, 0.05)?;
    if !init.bracketed {
        init = get_init_value(g, peak_c, 3.0, 0.05)?;
    }
    let fp = fixed_point_solve(|c| update_newton(g, c, 1e-7), distance, 1e-13, 100, init.x)?;
    Ok(fp.x)
}

/// Asymptotic Kolmogorov tail `Q(sqrt(n) d)`.
pub fn ks_utp_asymptotic(d: f64, n: u64) -> f64 {
    let lambda = (n as f64).sqrt() * d;
    if !(lambda > 0.0) {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        // The alternating series converges slowly here; use the theta
        // function form of the same distribution.
        let mut cdf = 0.0;
        let a = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        for j in 1..200 {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * a).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..200 {
            let jf = j as f64;
            let term = 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
            if term < 1e-12 {
                break;
            }
            sum += sign * term;
            sign = -sign;
        }
        sum
    };
    q.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn binomial(n: u64, t: u64) -> BigInt {
        (0..t).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
    }

    /// The same sum in exact rational arithmetic, for rational `v = p / q`.
    fn stephens_exact(p: i64, q: i64, n: u64) -> f64 {
        let v = rational(p, q);
        let nr = rational(n as i64, 1);
        let one = BigRational::one();
        let three = rational(3, 1);
        let r = &three - rational(2, n as i64);
        let t_max = ((q - p) * n as i64) / q;
        let mut sum = BigRational::zero();
        for t in 0..=t_max as u64 {
            let tr = rational(t as i64, 1);
            let y = &v + rational(t as i64, n as i64);
            let base = &one - &v - rational(t as i64, n as i64);
            let power = base.pow((n - t - 1) as i32);
            let y_power = y.pow(t as i32 - 3);
            let bracket = y.pow(3) * &nr - y.pow(2) * &tr * &r + &y * &tr * (&tr - &one) * &r / &nr
                - &tr * (&tr - &one) * (&tr - rational(2, 1)) / (&nr * &nr);
            sum += BigRational::from_integer(binomial(n, t)) * power * y_power * bracket;
        }
        sum.to_f64().unwrap()
    }

    #[test]
    fn utp_matches_exact_rational_sum() {
        let exact = stephens_exact(3, 5, 50);
        assert!((stephens_utp(0.6, 50).unwrap() - exact).abs() < 1e-10, "{exact}");
        let exact = stephens_exact(1, 2, 10);
        assert!((stephens_utp(0.5, 10).unwrap() - exact).abs() < 1e-10, "{exact}");
        let exact = stephens_exact(7, 10, 31);
        assert!((stephens_utp(0.7, 31).unwrap() - exact).abs() < 1e-10, "{exact}");
    }

    #[test]
    fn utp_limits_and_domain() {
        assert_eq!(stephens_utp(1.0, 10).unwrap(), 0.0);
        assert_eq!(stephens_utp(1.3, 10).unwrap(), 0.0);
        assert!(stephens_utp(0.49, 10).is_err());
        assert!(stephens_utp(0.46, 11).is_ok());
        assert!(stephens_utp(0.45, 11).is_err());
    }

    #[test]
    fn utp_decreases_in_v() {
        for n in [10, 20, 51] {
            let mut prev = 1.0;
            let mut v = stephens_utp_floor(n);
            while v < 1.0 {
                let p = stephens_utp(v, n).unwrap();
                assert!(p <= prev + 1e-12, "n={n} v={v}");
                prev = p;
                v += 0.01;
            }
        }
    }

    #[test]
    fn utp_close_to_expansion_for_larger_n() {
        use crate::hoe::{utp, ExpansionOrder, SeriesConfig, TailForm};
        let k = ExpansionOrder::new(5).unwrap();
        for n in [20u64, 40, 100] {
            for v in [0.5, 0.55, 0.6] {
                if v < stephens_utp_floor(n) {
                    continue;
                }
                let c = v * (n as f64).sqrt();
                let hoe = utp(c, n, k, &SeriesConfig::default(), TailForm::FullSeries).unwrap().value;
                let st = stephens_utp(v, n).unwrap();
                assert!((hoe - st).abs() < 0.01, "n={n} v={v}: {hoe} vs {st}");
            }
        }
    }

    #[test]
    fn small_v_cdf_values() {
        let expected = 6.0 * (0.55_f64 - 1.0 / 3.0).powi(2);
        let got = stephens_cdf_small_v(0.55, 3).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.281666).abs() < 1e-6);
        for n in 2..12u64 {
            assert_eq!(stephens_cdf_small_v(1.0 / n as f64, n).unwrap(), 0.0);
        }
        assert!(stephens_cdf_small_v(0.05, 10).is_err());
        assert!(stephens_cdf_small_v(0.31, 10).is_err());
    }

    #[test]
    fn small_v_branches_meet() {
        for n in 4..=12u64 {
            let seam = 2.0 / n as f64;
            let lower = stephens_cdf_branch(seam, n, SmallVBranch::Lower).unwrap();
            let upper = stephens_cdf_branch(seam, n, SmallVBranch::Upper).unwrap();
            assert!((lower - upper).abs() < 1e-9, "n={n}: {lower} vs {upper}");
        }
    }

    #[test]
    fn small_v_cdf_nondecreasing() {
        for n in 3..=15u64 {
            let nf = n as f64;
            let mut prev = 0.0;
            for i in 0..=200 {
                let v = (1.0 + 2.0 * i as f64 / 200.0) / nf;
                let p = stephens_cdf_small_v(v.min(3.0 / nf), n).unwrap();
                assert!(p >= prev - 1e-12, "n={n} v={v}");
                prev = p;
            }
        }
    }

    #[test]
    fn modified_statistic_values() {
        assert_eq!(modified_statistic(0.0, 17).t_n, 0.0);
        assert!((modified_multiplier(100) - 10.179).abs() < 1e-12);
        assert!((modified_statistic(0.5, 4).t_n - 1.1375).abs() < 1e-12);
    }

    #[test]
    fn modified_quantile_values() {
        let c05 = modified_quantile(0.05).unwrap();
        let c01 = modified_quantile(0.01).unwrap();
        // Roots from an independent bracketing solver.
        assert!((c05 - 1.747_259_937_611).abs() < 1e-9, "{c05}");
        assert!((c01 - 2.000_918_119_293).abs() < 1e-9, "{c01}");
        // Large-n limit of the k = 1 critical values.
        assert!((c05 - 1.7469).abs() < 5e-4);
        assert!((c01 - 2.0006).abs() < 5e-4);
        for alpha in [0.01, 0.05, 0.1, 0.5, 0.8] {
            let c = modified_quantile(alpha).unwrap();
            assert!((modified_tail(c) - alpha).abs() < 1e-8);
            assert!(c > 0.75_f64.sqrt());
        }
        assert!(modified_quantile(0.95).is_err());
        assert!(modified_quantile(0.0).is_err());
    }

    #[test]
    fn ks_tail() {
        assert_eq!(ks_utp_asymptotic(0.0, 10), 1.0);
        assert!(ks_utp_asymptotic(1.0, 100) < 1e-12);
        // Q(1.3581) = 0.05 and Q(1.6276) = 0.01.
        assert!((ks_utp_asymptotic(1.3581 / 10.0, 100) - 0.05).abs() < 1e-4);
        assert!((ks_utp_asymptotic(1.6276 / 10.0, 100) - 0.01).abs() < 1e-4);
        // Both forms agree where they switch over.
        let below = ks_utp_asymptotic(1.18 - 1e-9, 1);
        let above = ks_utp_asymptotic(1.18 + 1e-9, 1);
        assert!((below - above).abs() < 1e-8);
        let mut prev = 1.0;
        for i in 1..300 {
            let q = ks_utp_asymptotic(i as f64 * 0.01, 1);
            assert!(q <= prev + 1e-12);
            prev = q;
        }
    }
}
