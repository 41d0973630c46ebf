//! One-sample Kuiper test against a fully specified continuous CDF.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_open_probability, Error, Result};
use crate::hoe::{utp, ExpansionOrder, SeriesConfig, Statistic, TailForm};
use crate::solver::{kuiper_utq, SolverConfig};

/// Plotting position `q_t` assigned to the `t`-th order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdfScheme {
    /// `t / n`
    Scheme0,
    /// `(t - 1) / n`
    Scheme1,
    /// `(t - 0.5) / n`
    Scheme2,
    /// `t / (n + 1)`
    Scheme3,
    /// `(t - 0.375) / (n + 0.25)`
    Scheme4,
    /// `t / n` for `D+` and `(t - 1) / n` for `D-`.
    #[default]
    StephensMixed,
}

impl EdfScheme {
    pub const ALL: [EdfScheme; 6] = [
        EdfScheme::Scheme0,
        EdfScheme::Scheme1,
        EdfScheme::Scheme2,
        EdfScheme::Scheme3,
        EdfScheme::Scheme4,
        EdfScheme::StephensMixed,
    ];

    fn name(self) -> &'static str {
        match self {
            EdfScheme::Scheme0 => "scheme0",
            EdfScheme::Scheme1 => "scheme1",
            EdfScheme::Scheme2 => "scheme2",
            EdfScheme::Scheme3 => "scheme3",
            EdfScheme::Scheme4 => "scheme4",
            EdfScheme::StephensMixed => "stephens_mixed",
        }
    }

    /// `q_t` for `t` in `1..=n`; `None` for the mixed scheme.
    fn position(self, t: usize, n: usize) -> Option<f64> {
        let (t, n) = (t as f64, n as f64);
        Some(match self {
            EdfScheme::Scheme0 => t / n,
            EdfScheme::Scheme1 => (t - 1.0) / n,
            EdfScheme::Scheme2 => (t - 0.5) / n,
            EdfScheme::Scheme3 => t / (n + 1.0),
            EdfScheme::Scheme4 => (t - 0.375) / (n + 0.25),
            EdfScheme::StephensMixed => return None,
        })
    }
}

impl fmt::Display for EdfScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSchemeError(String);

impl fmt::Display for ParseSchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown EDF scheme `{}` (expected scheme0..scheme4 or stephens_mixed)",
            self.0
        )
    }
}

impl std::error::Error for ParseSchemeError {}

impl FromStr for EdfScheme {
    type Err = ParseSchemeError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "0" | "1" | "2" | "3" | "4" => Ok(EdfScheme::ALL[key.parse::<usize>().unwrap()]),
            "mixed" | "stephens" => Ok(EdfScheme::StephensMixed),
            _ => EdfScheme::ALL
                .into_iter()
                .find(|scheme| scheme.name() == key)
                .ok_or_else(|| ParseSchemeError(s.to_string())),
        }
    }
}

/// `[q_1, ..., q_n]` for a single-vector scheme.
pub fn edf_probs(n: usize, scheme: EdfScheme) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    (1..=n)
        .map(|t| scheme.position(t, n).ok_or(Error::MixedSchemeProbs))
        .collect()
}

/// A finite sample and its order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    sorted: Vec<f64>,
    ties: bool,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let ties = sorted.windows(2).any(|w| w[0] == w[1]);
        Ok(SampleSet { values, sorted, ties })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Repeated values were found. The test assumes a continuous population,
    /// so this is worth reporting but not fatal.
    pub fn has_ties(&self) -> bool {
        self.ties
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviations {
    pub d_plus: f64,
    pub d_minus: f64,
    pub v_n: f64,
}

/// `D+`, `D-` and `V_n` from `q = F(X_(t))`, which must be nondecreasing.
///
/// Both maxima are floored at zero.
pub fn deviations_from_probs(q: &[f64], scheme: EdfScheme) -> Deviations {
    let n = q.len();
    let mut d_plus = 0.0_f64;
    let mut d_minus = 0.0_f64;
    for (i, &qt) in q.iter().enumerate() {
        let t = i + 1;
        let (upper, lower) = match scheme.position(t, n) {
            Some(p) => (p, p),
            None => (t as f64 / n as f64, (t - 1) as f64 / n as f64),
        };
        d_plus = d_plus.max(upper - qt);
        d_minus = d_minus.max(qt - lower);
    }
    Deviations {
        d_plus,
        d_minus,
        v_n: d_plus + d_minus,
    }
}

/// Evaluates `cdf` at the order statistics and computes the deviations.
pub fn compute_vn<F>(sample: &SampleSet, cdf: F, scheme: EdfScheme) -> Result<Deviations>
where
    F: Fn(f64) -> f64,
{
    let q = sample
        .sorted()
        .iter()
        .map(|&x| {
            let value = cdf(x);
            if (0.0..=1.0).contains(&value) {
                Ok(value)
            } else {
                Err(Error::CdfContract { x, value })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviations_from_probs(&q, scheme))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub n: usize,
    pub d_plus: f64,
    pub d_minus: f64,
    pub v_n: f64,
    pub v_critical: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub k: ExpansionOrder,
    pub scheme: EdfScheme,
    pub ties: bool,
}

/// Kuiper test of `H0: X ~ cdf` at level `alpha`.
///
/// The critical value comes from the quantile solver; the p-value from the
/// full-series tail probability at `c = v_n sqrt(n)`.
pub fn kuiper_test<F>(
    sample: &SampleSet,
    cdf: F,
    alpha: f64,
    k: ExpansionOrder,
    scheme: EdfScheme,
    cfg: &SolverConfig,
) -> Result<TestResult>
where
    F: Fn(f64) -> f64,
{
    check_open_probability("alpha", alpha)?;
    let dev = compute_vn(sample, cdf, scheme)?;
    let n = sample.len() as u64;
    let v_critical = kuiper_utq(alpha, n, k, cfg)?;
    let p_value = if dev.v_n > 0.0 {
        let c = Statistic::from_v(dev.v_n, n).c;
        utp(c, n, k, &SeriesConfig::default(), TailForm::FullSeries)?.value
    } else {
        1.0
    };
    Ok(TestResult {
        n: sample.len(),
        d_plus: dev.d_plus,
        d_minus: dev.d_minus,
        v_n: dev.v_n,
        v_critical,
        p_value,
        reject: dev.v_n > v_critical,
        alpha,
        k,
        scheme,
        ties: sample.has_ties(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn uniform(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn plotting_positions() {
        assert!(close(&edf_probs(4, EdfScheme::Scheme0).unwrap(), &[0.25, 0.5, 0.75, 1.0]));
        let expected: Vec<f64> = (1..=4).map(|t| (t as f64 - 0.375) / 4.25).collect();
        assert!(close(&edf_probs(4, EdfScheme::Scheme4).unwrap(), &expected));
        assert!((expected[0] - 0.1470588).abs() < 1e-7);
        assert!(close(&edf_probs(1, EdfScheme::Scheme2).unwrap(), &[0.5]));
        assert!(close(&edf_probs(2, EdfScheme::Scheme1).unwrap(), &[0.0, 0.5]));
        assert!(close(&edf_probs(3, EdfScheme::Scheme3).unwrap(), &[0.25, 0.5, 0.75]));
        assert_eq!(edf_probs(3, EdfScheme::StephensMixed), Err(Error::MixedSchemeProbs));
        assert_eq!(edf_probs(0, EdfScheme::Scheme0), Err(Error::EmptySample));
    }

    #[test]
    fn positions_lie_in_unit_interval() {
        for scheme in EdfScheme::ALL.into_iter().filter(|s| *s != EdfScheme::StephensMixed) {
            for n in 1..40 {
                assert!(edf_probs(n, scheme).unwrap().iter().all(|q| (0.0..=1.0).contains(q)));
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for scheme in EdfScheme::ALL {
            assert_eq!(scheme.to_string().parse::<EdfScheme>().unwrap(), scheme);
        }
        assert_eq!("stephens-mixed".parse::<EdfScheme>().unwrap(), EdfScheme::StephensMixed);
        assert_eq!("4".parse::<EdfScheme>().unwrap(), EdfScheme::Scheme4);
        assert!("scheme9".parse::<EdfScheme>().is_err());
    }

    #[test]
    fn mixed_scheme_two_points() {
        let d = deviations_from_probs(&[0.25, 0.75], EdfScheme::StephensMixed);
        assert!((d.d_plus - 0.25).abs() < 1e-15);
        assert!((d.d_minus - 0.25).abs() < 1e-15);
        assert!((d.v_n - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_maximum_is_floored() {
        // D- would be 0.5 - 1.0 = -0.5 without the floor.
        let d = deviations_from_probs(&[0.5], EdfScheme::Scheme0);
        assert_eq!(d.d_plus, 0.5);
        assert_eq!(d.d_minus, 0.0);
        assert_eq!(d.v_n, 0.5);
    }

    #[test]
    fn perfect_fit_has_no_plus_deviation() {
        let q = edf_probs(7, EdfScheme::Scheme0).unwrap();
        let d = deviations_from_probs(&q, EdfScheme::Scheme0);
        assert_eq!(d.d_plus, 0.0);
        assert_eq!(d.d_minus, 0.0);
    }

    #[test]
    fn sample_set_sorts_and_flags_ties() {
        let s = SampleSet::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.sorted(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.values(), &[3.0, 1.0, 2.0]);
        assert!(!s.has_ties());
        assert!(SampleSet::new(vec![1.0, 1.0]).unwrap().has_ties());
        assert_eq!(SampleSet::new(vec![]), Err(Error::EmptySample));
        assert_eq!(SampleSet::new(vec![0.0, f64::NAN]), Err(Error::NonFiniteSample(1)));
    }

    #[test]
    fn cdf_outside_unit_interval_is_rejected() {
        let s = SampleSet::new(vec![0.1, 0.3]).unwrap();
        let err = compute_vn(&s, |x| 2.0 * x + 0.5, EdfScheme::Scheme0).unwrap_err();
        assert!(matches!(err, Error::CdfContract { .. }));
    }

    #[test]
    fn decile_sample_accepts() {
        let data: Vec<f64> = (1..=10).map(|t| (t as f64 - 0.5) / 10.0).collect();
        let s = SampleSet::new(data).unwrap();
        let k = ExpansionOrder::new(5).unwrap();
        let r = kuiper_test(&s, uniform, 0.05, k, EdfScheme::StephensMixed, &SolverConfig::default()).unwrap();
        assert!((r.d_plus - 0.05).abs() < 1e-12);
        assert!((r.d_minus - 0.05).abs() < 1e-12);
        assert!((r.v_n - 0.1).abs() < 1e-12);
        assert!((r.v_critical - 0.5259).abs() < 1e-4);
        assert!(!r.reject);
        assert!(r.p_value > 0.9);
    }

    #[test]
    fn guard_level_always_rejects() {
        let s = SampleSet::new(vec![0.1, 0.4, 0.45, 0.8, 0.9, 0.95]).unwrap();
        let k = ExpansionOrder::new(3).unwrap();
        let r = kuiper_test(&s, uniform, 0.9999, k, EdfScheme::StephensMixed, &SolverConfig::default()).unwrap();
        assert_eq!(r.v_critical, 0.0);
        assert!(r.reject);
    }

    #[test]
    fn mixed_statistic_bounded_on_grid() {
        // Exhaustive search over q on a grid for small n.
        for n in 1..=4usize {
            let steps = 12;
            let total = (steps + 1usize).pow(n as u32);
            for code in 0..total {
                let mut q: Vec<f64> = (0..n)
                    .map(|i| ((code / (steps + 1).pow(i as u32)) % (steps + 1)) as f64 / steps as f64)
                    .collect();
                q.sort_by(f64::total_cmp);
                let d = deviations_from_probs(&q, EdfScheme::StephensMixed);
                assert!(d.d_plus >= 0.0 && d.d_minus >= 0.0);
                assert!(d.d_plus <= 1.0 && d.d_minus <= 1.0);
                assert!(d.v_n <= 1.0 + 1.0 / n as f64 + 1e-12, "{q:?} -> {}", d.v_n);
            }
        }
    }

    #[test]
    fn invariants_of_result() {
        let s = SampleSet::new(vec![0.05, 0.07, 0.1, 0.2, 0.9, 0.97, 0.99]).unwrap();
        for scheme in EdfScheme::ALL {
            for k in ExpansionOrder::all() {
                let r = kuiper_test(&s, uniform, 0.05, k, scheme, &SolverConfig::default()).unwrap();
                assert_eq!(r.v_n, r.d_plus + r.d_minus);
                assert_eq!(r.reject, r.v_n > r.v_critical);
                assert!((0.0..=1.0).contains(&r.p_value));
            }
        }
    }
}
