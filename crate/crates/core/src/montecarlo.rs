//! Monte Carlo estimates of Type I error rates under a fully specified null.

use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::baselines::{ks_utp_asymptotic, modified_quantile, modified_statistic};
use crate::error::{check_open_probability, Error, Result};
use crate::gof::{deviations_from_probs, EdfScheme};
use crate::hoe::ExpansionOrder;
use crate::solver::{kuiper_utq, SolverConfig};

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Null distribution the data are drawn from and tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    /// Standard normal.
    #[default]
    Normal,
    /// Uniform on `(0, 1)`.
    Uniform,
}

impl Population {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Population::Normal => normal_cdf(x),
            Population::Uniform => x.clamp(0.0, 1.0),
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        match self {
            Population::Normal => normal_quantile(u),
            Population::Uniform => u,
        }
    }
}

/// Baseline tests run on the same replications as the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Comparators {
    /// Asymptotic KS tail on `max(D+, D-)`.
    pub ks: bool,
    /// Stephens' `T_n` against the `c_MK` critical value.
    pub stephens: bool,
}

pub const KS_LABEL: &str = "ks-asymptotic";
pub const STEPHENS_LABEL: &str = "stephens-tn";

pub fn hoe_label(k: ExpansionOrder) -> String {
    format!("hoe-k{k}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub alpha: f64,
    pub k_set: Vec<ExpansionOrder>,
    pub n_rep: usize,
    pub seed: u64,
    /// Plotting positions for the expansion tests; the comparators always
    /// use the mixed scheme.
    pub scheme: EdfScheme,
    pub population: Population,
    pub comparators: Comparators,
    pub solver: SolverConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 10,
            alpha: 0.05,
            k_set: ExpansionOrder::all().collect(),
            n_rep: 1000,
            seed: 0,
            scheme: EdfScheme::Scheme0,
            population: Population::Normal,
            comparators: Comparators::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimate {
    pub method: String,
    /// Expansion order, for the expansion-based rows only.
    pub k: Option<ExpansionOrder>,
    /// Critical value of `V_n` (or of `T_n` for the Stephens row; absent for KS).
    pub critical: Option<f64>,
    pub rejections: u64,
    pub p_type1: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub alpha: f64,
    pub n_rep: usize,
    pub seed: u64,
    pub scheme: EdfScheme,
    pub population: Population,
    pub estimates: Vec<MethodEstimate>,
}

impl SimResult {
    pub fn get(&self, method: &str) -> Option<&MethodEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    pub fn p_type1(&self, method: &str) -> Option<f64> {
        self.get(method).map(|e| e.p_type1)
    }
}

enum Rule {
    Hoe { critical: f64 },
    Ks,
    Stephens { critical: f64 },
}

/// Runs `n_rep` replications. Replication `i` draws from the ChaCha8 stream
/// `i` of `seed`, so the result does not depend on the thread count.
pub fn simulate_type1(cfg: &SimConfig) -> Result<SimResult> {
    check_open_probability("alpha", cfg.alpha)?;
    if cfg.n == 0 {
        return Err(Error::EmptySample);
    }
    if cfg.n_rep == 0 {
        return Err(Error::Domain {
            name: "n_rep",
            value: 0.0,
            expected: "n_rep >= 1",
        });
    }

    let mut labels = Vec::new();
    let mut rules = Vec::new();
    for &k in &cfg.k_set {
        labels.push((hoe_label(k), Some(k)));
        rules.push(Rule::Hoe {
            critical: kuiper_utq(cfg.alpha, cfg.n as u64, k, &cfg.solver)?,
        });
    }
    if cfg.comparators.ks {
        labels.push((KS_LABEL.to_string(), None));
        rules.push(Rule::Ks);
    }
    if cfg.comparators.stephens {
        labels.push((STEPHENS_LABEL.to_string(), None));
        rules.push(Rule::Stephens {
            critical: modified_quantile(cfg.alpha)?,
        });
    }

    let n = cfg.n;
    let counts = (0..cfg.n_rep)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(rep as u64);
            let mut q: Vec<f64> = (0..n)
                .map(|_| cfg.population.cdf(cfg.population.draw(&mut rng)))
                .collect();
            q.sort_by(f64::total_cmp);
            let own = deviations_from_probs(&q, cfg.scheme);
            let mixed = deviations_from_probs(&q, EdfScheme::StephensMixed);
            rules
                .iter()
                .map(|rule| {
                    let reject = match *rule {
                        Rule::Hoe { critical } => own.v_n > critical,
                        Rule::Ks => {
                            ks_utp_asymptotic(mixed.d_plus.max(mixed.d_minus), n as u64) < cfg.alpha
                        }
                        Rule::Stephens { critical } => modified_statistic(mixed.v_n, n as u64).t_n > critical,
                    };
                    u64::from(reject)
                })
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0; rules.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let reps = cfg.n_rep as f64;
    let estimates = labels
        .into_iter()
        .zip(&rules)
        .zip(counts)
        .map(|(((method, k), rule), rejections)| {
            let p = rejections as f64 / reps;
            MethodEstimate {
                method,
                k,
                critical: match *rule {
                    Rule::Hoe { critical } | Rule::Stephens { critical } => Some(critical),
                    Rule::Ks => None,
                },
                rejections,
                p_type1: p,
                ci_halfwidth: 1.96 * (p * (1.0 - p) / reps).sqrt(),
            }
        })
        .collect();

    Ok(SimResult {
        n,
        alpha: cfg.alpha,
        n_rep: cfg.n_rep,
        seed: cfg.seed,
        scheme: cfg.scheme,
        population: cfg.population,
        estimates,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    method: &'a str,
    n: usize,
    alpha: f64,
    k: Option<u8>,
    n_rep: usize,
    p_type1: f64,
    ci_halfwidth: f64,
    seed: u64,
}

/// One CSV row per method: `method,n,alpha,k,n_rep,p_type1,ci_halfwidth,seed`.
pub fn write_csv<W: Write>(result: &SimResult, out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for e in &result.estimates {
        writer.serialize(CsvRow {
            method: &e.method,
            n: result.n,
            alpha: result.alpha,
            k: e.k.map(u8::from),
            n_rep: result.n_rep,
            p_type1: e.p_type1,
            ci_halfwidth: e.ci_halfwidth,
            seed: result.seed,
        })?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        // Phi(1) from a 20-digit table.
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12, "{:e}", normal_cdf(1.0) - 0.841_344_746_068_542_9);
        for x in [0.1, 0.7, 1.5, 3.0, 6.0] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-12);
        }
        let mut prev = 0.0;
        for i in -800..=800 {
            let p = normal_cdf(i as f64 * 0.01);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for p in [1e-6, 0.01, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-6] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-12 * p.max(1e-3) * 1e3);
        }
    }

    fn small(k_set: Vec<u8>, n_rep: usize) -> SimConfig {
        SimConfig {
            n: 10,
            k_set: k_set.into_iter().map(|k| ExpansionOrder::new(k).unwrap()).collect(),
            n_rep,
            seed: 7,
            comparators: Comparators {
                ks: true,
                stephens: true,
            },
            ..SimConfig::default()
        }
    }

    #[test]
    fn single_replication_is_an_indicator() {
        let r = simulate_type1(&small(vec![1, 5], 1)).unwrap();
        assert!(r.estimates.iter().all(|e| e.p_type1 == 0.0 || e.p_type1 == 1.0));
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let cfg = small(vec![1, 2, 3, 4, 5], 400);
        let a = simulate_type1(&cfg).unwrap();
        let b = simulate_type1(&cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate_type1(&cfg).unwrap());
        assert_eq!(a, c);
        let other = simulate_type1(&SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn labels_and_counts() {
        let r = simulate_type1(&small(vec![1, 3], 300)).unwrap();
        let names: Vec<&str> = r.estimates.iter().map(|e| e.method.as_str()).collect();
        assert_eq!(names, ["hoe-k1", "hoe-k3", KS_LABEL, STEPHENS_LABEL]);
        for e in &r.estimates {
            assert_eq!(e.p_type1, e.rejections as f64 / 300.0);
        }
        // k >= 2 has a larger critical value than k = 1, so it rejects less.
        assert!(r.estimates[1].rejections <= r.estimates[0].rejections);
    }

    #[test]
    fn csv_layout() {
        let r = simulate_type1(&small(vec![2], 50)).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("method,n,alpha,k,n_rep,p_type1,ci_halfwidth,seed"));
        assert!(lines.next().unwrap().starts_with("hoe-k2,10,0.05,2,50,"));
        assert!(lines.next().unwrap().starts_with("ks-asymptotic,10,0.05,,50,"));
    }

    #[test]
    fn bad_config() {
        assert!(simulate_type1(&SimConfig { n_rep: 0, ..SimConfig::default() }).is_err());
        assert!(simulate_type1(&SimConfig { n: 0, ..SimConfig::default() }).is_err());
        assert!(simulate_type1(&SimConfig { alpha: 1.0, ..SimConfig::default() }).is_err());
    }
}
