use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kuiper_hoe::montecarlo::normal_cdf;

use crate::error::CliError;

/// Fully specified null distribution for `kuiper test`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Piecewise-linear CDF through `(x, F)` knots; constant outside the knots.
    Table { path: PathBuf, x: Vec<f64>, f: Vec<f64> },
}

impl Dist {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Dist::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Dist::Normal { mu, sigma } => normal_cdf((x - mu) / sigma),
            Dist::Table { x: xs, f: fs, .. } => {
                let i = xs.partition_point(|&k| k <= x);
                if i == 0 {
                    fs[0]
                } else if i == xs.len() {
                    fs[fs.len() - 1]
                } else {
                    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                    fs[i - 1] + t * (fs[i] - fs[i - 1])
                }
            }
        }
    }

    fn load_table(path: &Path) -> Result<Dist, CliError> {
        let bad = |msg: String| CliError::Dist(format!("{}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| bad(e.to_string()))?;
        let mut x = Vec::new();
        let mut f = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() != 2 {
                return Err(bad(format!("row {} must have two columns (x, F)", i + 1)));
            }
            let (Ok(xi), Ok(fi)) = (record[0].parse::<f64>(), record[1].parse::<f64>()) else {
                if i == 0 {
                    continue; // header
                }
                return Err(bad(format!("row {} is not numeric", i + 1)));
            };
            x.push(xi);
            f.push(fi);
        }
        if x.len() < 2 {
            return Err(bad("need at least two knots".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(bad("x column must be strictly increasing".into()));
        }
        if f.windows(2).any(|w| w[0] > w[1]) || f.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("F column must be nondecreasing within [0, 1]".into()));
        }
        Ok(Dist::Table {
            path: path.to_path_buf(),
            x,
            f,
        })
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Dist::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Dist::Table { path, .. } => write!(f, "table({})", path.display()),
        }
    }
}

impl FromStr for Dist {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Dist(format!("cannot parse `{s}`; expected uniform(a,b), normal(mu,sigma) or table(PATH)"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let name = name.trim().to_ascii_lowercase();
        if name == "table" {
            return Dist::load_table(Path::new(args.trim()));
        }
        let params: Vec<f64> = args
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [p1, p2] = params[..] else {
            return Err(bad());
        };
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(bad());
        }
        match name.as_str() {
            "uniform" if p1 < p2 => Ok(Dist::Uniform { a: p1, b: p2 }),
            "uniform" => Err(CliError::Dist(format!("uniform({p1},{p2}) needs a < b"))),
            "normal" if p2 > 0.0 => Ok(Dist::Normal { mu: p1, sigma: p2 }),
            "normal" => Err(CliError::Dist(format!("normal({p1},{p2}) needs sigma > 0"))),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_parametric_specs() {
        assert_eq!("uniform(0,1)".parse::<Dist>().unwrap(), Dist::Uniform { a: 0.0, b: 1.0 });
        assert_eq!(
            " Normal( 2.5 , 0.5 ) ".parse::<Dist>().unwrap(),
            Dist::Normal { mu: 2.5, sigma: 0.5 }
        );
        assert!("normal(0,-1)".parse::<Dist>().is_err());
        assert!("uniform(1,1)".parse::<Dist>().is_err());
        assert!("gamma(1,2)".parse::<Dist>().is_err());
        assert!("normal(0)".parse::<Dist>().is_err());
        assert!("normal 0 1".parse::<Dist>().is_err());
    }

    #[test]
    fn parametric_cdfs() {
        let u = Dist::Uniform { a: 2.0, b: 4.0 };
        assert_eq!(u.cdf(1.0), 0.0);
        assert_eq!(u.cdf(3.0), 0.5);
        assert_eq!(u.cdf(5.0), 1.0);
        let n = Dist::Normal { mu: 1.0, sigma: 2.0 };
        assert_eq!(n.cdf(1.0), 0.5);
    }

    #[test]
    fn table_interpolates_linearly() {
        let d = Dist::Table {
            path: PathBuf::from("t"),
            x: vec![0.0, 1.0, 3.0],
            f: vec![0.0, 0.5, 1.0],
        };
        assert_eq!(d.cdf(-1.0), 0.0);
        assert_eq!(d.cdf(0.5), 0.25);
        assert_eq!(d.cdf(2.0), 0.75);
        assert_eq!(d.cdf(9.0), 1.0);
    }
}
