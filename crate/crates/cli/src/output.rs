use std::io::Write;

use clap::ValueEnum;
use kuiper_hoe::montecarlo::{write_csv, SimResult};
use kuiper_hoe::{KuiperPair, ProbabilityEstimate, TestResult};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

/// Rendering settings shared by all subcommands.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub format: Format,
    /// Decimals in the table format; csv and json always print full precision.
    pub precision: usize,
}

fn json<W: Write, T: Serialize + ?Sized>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_rows<W: Write, T: Serialize>(out: &mut W, rows: &[T]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn pair<W: Write>(out: &mut W, style: Style, p: &KuiperPair) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            let d = style.precision;
            writeln!(out, "({:.d$}, {:.d$})", p.c, p.v)?;
            Ok(())
        }
        Format::Csv => csv_rows(out, &[p]),
        Format::Json => json(out, p),
    }
}

#[derive(Serialize)]
pub struct Quantile {
    pub kind: &'static str,
    /// `alpha` for utq/ltq, `x` for invcdf.
    pub level: f64,
    pub n: u64,
    pub k: u8,
    pub v: f64,
}

pub fn quantile<W: Write>(out: &mut W, style: Style, q: &Quantile) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            writeln!(out, "{:.*}", style.precision, q.v)?;
            Ok(())
        }
        Format::Csv => csv_rows(out, &[q]),
        Format::Json => json(out, q),
    }
}

#[derive(Serialize)]
pub struct Cdf {
    pub c: f64,
    pub v: f64,
    pub n: u64,
    pub k: u8,
    pub probability: f64,
    pub raw: f64,
    pub clamped: bool,
    pub below_validity_floor: bool,
}

impl Cdf {
    pub fn new(c: f64, v: f64, n: u64, k: u8, e: ProbabilityEstimate) -> Self {
        Cdf {
            c,
            v,
            n,
            k,
            probability: e.value,
            raw: e.raw,
            clamped: e.clamped,
            below_validity_floor: e.below_validity_floor,
        }
    }
}

pub fn cdf<W: Write>(out: &mut W, style: Style, c: &Cdf) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            writeln!(out, "{:.*}", style.precision, c.probability)?;
            Ok(())
        }
        Format::Csv => csv_rows(out, &[c]),
        Format::Json => json(out, c),
    }
}

pub fn test<W: Write>(out: &mut W, style: Style, r: &TestResult, dist: &str) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            let d = style.precision;
            writeln!(out, "null        {dist}")?;
            writeln!(out, "n           {}", r.n)?;
            writeln!(out, "scheme      {}", r.scheme)?;
            writeln!(out, "k           {}", r.k)?;
            writeln!(out, "alpha       {}", r.alpha)?;
            writeln!(out, "D+          {:.d$}", r.d_plus)?;
            writeln!(out, "D-          {:.d$}", r.d_minus)?;
            writeln!(out, "V_n         {:.d$}", r.v_n)?;
            writeln!(out, "v_critical  {:.d$}", r.v_critical)?;
            writeln!(out, "p-value     {:.d$}", r.p_value)?;
            writeln!(out, "decision    {}", if r.reject { "reject" } else { "accept" })?;
            Ok(())
        }
        Format::Csv => csv_rows(out, &[r]),
        Format::Json => json(out, r),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub alpha: f64,
    pub n: u64,
    pub k: u8,
    pub c: Option<f64>,
    pub v: Option<f64>,
    /// `ok`, or the solver error for a failed cell.
    pub status: String,
}

pub const FAILED_CELL: &str = "--";

pub fn grid<W: Write>(out: &mut W, style: Style, ns: &[u64], ks: &[u8], cells: &[Cell]) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            let d = style.precision;
            let text: Vec<String> = cells
                .iter()
                .map(|cell| match (cell.c, cell.v) {
                    (Some(c), Some(v)) => format!("({c:.d$}, {v:.d$})"),
                    _ => FAILED_CELL.to_string(),
                })
                .collect();
            let width = text.iter().map(String::len).max().unwrap_or(0).max(4);
            write!(out, "{:>8}", "n")?;
            for k in ks {
                write!(out, "  {:>width$}", format!("k={k}"))?;
            }
            writeln!(out)?;
            for (row, n) in ns.iter().enumerate() {
                write!(out, "{n:>8}")?;
                for cell in &text[row * ks.len()..(row + 1) * ks.len()] {
                    write!(out, "  {cell:>width$}")?;
                }
                writeln!(out)?;
            }
            Ok(())
        }
        Format::Csv => csv_rows(out, cells),
        Format::Json => json(out, cells),
    }
}

pub fn simulation<W: Write>(out: &mut W, style: Style, r: &SimResult) -> Result<(), CliError> {
    match style.format {
        Format::Table => {
            let d = style.precision;
            writeln!(
                out,
                "n = {}, alpha = {}, n_rep = {}, seed = {}, scheme = {}",
                r.n, r.alpha, r.n_rep, r.seed, r.scheme
            )?;
            writeln!(out, "{:<14}  {:>10}  {:>10}  {:>10}", "method", "critical", "p_type1", "+/- 95%")?;
            for e in &r.estimates {
                let critical = e.critical.map_or_else(|| "-".to_string(), |c| format!("{c:.d$}"));
                writeln!(
                    out,
                    "{:<14}  {:>10}  {:>10.d$}  {:>10.d$}",
                    e.method, critical, e.p_type1, e.ci_halfwidth
                )?;
            }
            Ok(())
        }
        Format::Csv => {
            write_csv(r, out)?;
            Ok(())
        }
        Format::Json => json(out, r),
    }
}
