#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kuiper_hoe::gof::{kuiper_test, EdfScheme, SampleSet};
use kuiper_hoe::hoe::{cdf_kn, Statistic};
use kuiper_hoe::montecarlo::{simulate_type1, Comparators, Population, SimConfig};
use kuiper_hoe::solver::{kuiper_inv_cdf, kuiper_ltq, kuiper_pair_solver, kuiper_utq};
use kuiper_hoe::{ExpansionOrder, Method, SeriesConfig, SolverConfig};

mod dist;
mod error;
mod input;
mod output;

use dist::Dist;
use error::CliError;
use output::{Cell, Format, Style};

const DEFAULT_TABLE_N: [u64; 11] = [6, 7, 8, 9, 10, 20, 30, 40, 50, 100, 1_000_000];

#[derive(Parser)]
#[command(name = "kuiper", version, about = "Kuiper V_n critical values, CDF and goodness-of-fit test")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Decimals shown in table output.
    #[arg(long, default_value_t = 4, global = true)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kuiper pair (c, v) at upper tail level alpha.
    Pair {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
        method: MethodArg,
        /// Start from the bisection value on [0.6, 3.0] instead of c = 1.8.
        #[arg(long)]
        bisection_init: bool,
    },
    /// Upper tail quantile v with Pr{V_n > v} = alpha.
    Utq {
        #[command(flatten)]
        point: Point,
    },
    /// Lower tail quantile, equal to utq at 1 - alpha.
    Ltq {
        #[command(flatten)]
        point: Point,
    },
    /// Inverse CDF of V_n.
    Invcdf {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "5", value_parser = parse_order)]
        k: ExpansionOrder,
    },
    /// CDF of V_n at v (or of sqrt(n) V_n at c).
    Cdf {
        #[arg(long, conflicts_with = "c", required_unless_present = "c")]
        v: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "5", value_parser = parse_order)]
        k: ExpansionOrder,
        /// Terms kept in each series.
        #[arg(long, default_value_t = 10)]
        j_max: usize,
    },
    /// Kuiper goodness-of-fit test of a data file against a fully specified CDF.
    /// Exits 0 on accept and 1 on reject.
    Test(TestArgs),
    /// Grid of Kuiper pairs for one alpha.
    Table {
        #[arg(long)]
        alpha: f64,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TABLE_N)]
        n: Vec<u64>,
        /// Comma-separated expansion orders.
        #[arg(long, value_delimiter = ',', default_values = ["1", "2", "3", "4", "5"], value_parser = parse_order)]
        k: Vec<ExpansionOrder>,
        #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
        method: MethodArg,
    },
    /// Monte Carlo Type I error rates.
    Simulate(SimArgs),
}

#[derive(Args)]
struct Point {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value = "5", value_parser = parse_order)]
    k: ExpansionOrder,
}

#[derive(Args)]
struct TestArgs {
    /// Data file, one value per line ('#' comments allowed), or `-` for stdin.
    file: PathBuf,
    /// uniform(a,b), normal(mu,sigma) or table(PATH) with x,F rows.
    #[arg(long)]
    dist: String,
    /// Take values from this column of a CSV file with a header row.
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "5", value_parser = parse_order)]
    k: ExpansionOrder,
    #[arg(long, default_value = "stephens_mixed", value_parser = parse_scheme)]
    scheme: EdfScheme,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_delimiter = ',', default_values = ["1", "2", "3", "4", "5"], value_parser = parse_order)]
    k: Vec<ExpansionOrder>,
    #[arg(long = "nrep", default_value_t = 1000)]
    n_rep: usize,
    #[arg(long, env = "KUIPER_SEED", default_value_t = 0)]
    seed: u64,
    /// Extra methods on the same data: ks, stephens.
    #[arg(long, value_delimiter = ',', value_enum)]
    comparators: Vec<ComparatorArg>,
    #[arg(long, default_value = "scheme0", value_parser = parse_scheme)]
    scheme: EdfScheme,
    #[arg(long, value_enum, default_value_t = PopulationArg::Normal)]
    population: PopulationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Newton,
    Direct,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ComparatorArg {
    Ks,
    Stephens,
}

#[derive(Clone, Copy, ValueEnum)]
enum PopulationArg {
    Normal,
    Uniform,
}

fn parse_order(s: &str) -> Result<ExpansionOrder, String> {
    let k: u8 = s.trim().parse().map_err(|_| format!("`{s}` is not an integer"))?;
    ExpansionOrder::new(k).map_err(|e| e.to_string())
}

fn parse_scheme(s: &str) -> Result<EdfScheme, String> {
    s.parse().map_err(|e: kuiper_hoe::gof::ParseSchemeError| e.to_string())
}

fn solver_config(method: MethodArg, bisection_init: bool) -> SolverConfig {
    SolverConfig {
        method: match method {
            MethodArg::Newton => Method::Newton,
            MethodArg::Direct => Method::Direct,
        },
        use_bisection_init: bisection_init,
        ..SolverConfig::default()
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<ExitCode, CliError> {
    let style = Style {
        format: cli.format,
        precision: cli.precision,
    };
    match cli.command {
        Command::Pair {
            point,
            method,
            bisection_init,
        } => {
            let cfg = solver_config(method, bisection_init);
            let pair = kuiper_pair_solver(&cfg, point.alpha, point.n, point.k)?;
            output::pair(out, style, &pair)?;
        }
        Command::Utq { point } => {
            let v = kuiper_utq(point.alpha, point.n, point.k, &SolverConfig::default())?;
            output::quantile(out, style, &quantile("utq", point.alpha, point.n, point.k, v))?;
        }
        Command::Ltq { point } => {
            let v = kuiper_ltq(point.alpha, point.n, point.k, &SolverConfig::default())?;
            output::quantile(out, style, &quantile("ltq", point.alpha, point.n, point.k, v))?;
        }
        Command::Invcdf { x, n, k } => {
            let v = kuiper_inv_cdf(x, n, k, &SolverConfig::default())?;
            output::quantile(out, style, &quantile("invcdf", x, n, k, v))?;
        }
        Command::Cdf { v, c, n, k, j_max } => {
            let stat = match (v, c) {
                (Some(v), _) => Statistic::from_v(v, n),
                (None, Some(c)) => Statistic::from_c(c, n),
                (None, None) => return Err(CliError::Usage("one of --v or --c is required".into())),
            };
            let cfg = SeriesConfig {
                j_max,
                ..SeriesConfig::default()
            };
            let estimate = cdf_kn(stat.c, n, k, &cfg)?;
            if estimate.below_validity_floor {
                eprintln!("warning: c = {} is below {}; the expansion is unreliable there", stat.c, cfg.c_min_warn);
            }
            output::cdf(out, style, &output::Cdf::new(stat.c, stat.v, n, k.get(), estimate))?;
        }
        Command::Test(args) => return run_test(args, style, out),
        Command::Table { alpha, n, k, method } => {
            if n.is_empty() || k.is_empty() {
                return Err(CliError::Usage("--n and --k need at least one value".into()));
            }
            let cfg = solver_config(method, false);
            let mut cells = Vec::with_capacity(n.len() * k.len());
            for &size in &n {
                for &order in &k {
                    let cell = match kuiper_pair_solver(&cfg, alpha, size, order) {
                        Ok(p) => Cell {
                            alpha,
                            n: size,
                            k: order.get(),
                            c: Some(p.c),
                            v: Some(p.v),
                            status: "ok".into(),
                        },
                        Err(e @ kuiper_hoe::Error::Domain { name: "alpha", .. }) => return Err(e.into()),
                        Err(e) => {
                            eprintln!("cell (alpha={alpha}, n={size}, k={order}) failed: {e}");
                            Cell {
                                alpha,
                                n: size,
                                k: order.get(),
                                c: None,
                                v: None,
                                status: e.to_string(),
                            }
                        }
                    };
                    cells.push(cell);
                }
            }
            let ks: Vec<u8> = k.iter().map(|o| o.get()).collect();
            output::grid(out, style, &n, &ks, &cells)?;
        }
        Command::Simulate(args) => {
            let cfg = SimConfig {
                n: args.n,
                alpha: args.alpha,
                k_set: args.k,
                n_rep: args.n_rep,
                seed: args.seed,
                scheme: args.scheme,
                population: match args.population {
                    PopulationArg::Normal => Population::Normal,
                    PopulationArg::Uniform => Population::Uniform,
                },
                comparators: Comparators {
                    ks: args.comparators.contains(&ComparatorArg::Ks),
                    stephens: args.comparators.contains(&ComparatorArg::Stephens),
                },
                solver: SolverConfig::default(),
            };
            output::simulation(out, style, &simulate_type1(&cfg)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn quantile(kind: &'static str, level: f64, n: u64, k: ExpansionOrder, v: f64) -> output::Quantile {
    output::Quantile {
        kind,
        level,
        n,
        k: k.get(),
        v,
    }
}

fn run_test(args: TestArgs, style: Style, out: &mut impl Write) -> Result<ExitCode, CliError> {
    let dist: Dist = args.dist.parse()?;
    let values = input::read_values(&args.file, args.column.as_deref())?;
    if values.is_empty() {
        return Err(CliError::Input(format!("{}: no sample values", args.file.display())));
    }
    let sample = SampleSet::new(values)?;
    if sample.has_ties() {
        eprintln!("warning: sample contains tied values; the test assumes a continuous population");
    }
    let result = kuiper_test(
        &sample,
        |x| dist.cdf(x),
        args.alpha,
        args.k,
        args.scheme,
        &SolverConfig::default(),
    )?;
    output::test(out, style, &result, &dist.to_string())?;
    Ok(if result.reject {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
