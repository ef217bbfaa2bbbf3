//! Command-line front end: config-driven experiment pipelines and
//! cost-model queries. Exit codes: 0 success, 2 config/usage error,
//! 3 numerical or memory failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use restop::backward::ContinuationModel;
use restop::bounds::{dual_upper_bound, lower_bound, Evaluator};
use restop::config::ExperimentConfig;
use restop::costmodel::{self, CostParams};
use restop::error::{Error, Result};
use restop::market::simulate;
use restop::products::Product;
use restop::rng::{purpose, Stream};
use restop::runner::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "restop",
    version,
    about = "Regression Monte Carlo for optimal stopping: reinforced-basis training, \
             out-of-sample lower bounds, nested-simulation dual upper bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides shared by the pipeline subcommands. Explicit flags win over
/// --paper-scale, which itself wins over the config file.
#[derive(Args)]
struct Overrides {
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override N (training paths)
    #[arg(long)]
    paths: Option<usize>,
    /// Override N_test (out-of-sample paths)
    #[arg(long = "test-paths")]
    test_paths: Option<usize>,
    /// Override inner path count for the dual bound
    #[arg(long)]
    inner: Option<usize>,
    /// Reference scale N = N_test = 10^6 (expect long runtimes)
    #[arg(long = "paper-scale")]
    paper_scale: bool,
    /// Cap worker threads (never affects computed values)
    #[arg(long)]
    threads: Option<usize>,
    /// Emit per-date training diagnostics as JSON lines
    #[arg(long = "log-json")]
    log_json: bool,
    /// Suppress per-date training diagnostics
    #[arg(long)]
    quiet: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.paper_scale {
            cfg.n_train = 1_000_000;
            cfg.n_test = 1_000_000;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.paths {
            cfg.n_train = n;
        }
        if let Some(n) = self.test_paths {
            cfg.n_test = n;
        }
        if let Some(n) = self.inner {
            cfg.inner_count = n;
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions { log_json: self.log_json, quiet: self.quiet }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Lower,
    Upper,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate training paths under the config's market and save them
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Binary path-set destination
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Train a continuation model and save it as JSON
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Model destination (falls back to the config's out.model)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Estimate bounds for a previously trained model
    Bound {
        /// Trained model JSON
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "lower")]
        kind: BoundKind,
        /// Out-of-sample paths for the lower bound
        #[arg(long = "test-paths", default_value_t = 100_000)]
        test_paths: usize,
        /// Inner paths per (outer path, date) for the dual
        #[arg(long, default_value_t = 1000)]
        inner: usize,
        /// Outer paths for the dual (default min(test-paths, 10^4))
        #[arg(long)]
        outer: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// End-to-end experiment: simulate, train, bound, report
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report JSON destination (also echoed to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compute the dual upper bound even if the config does not ask
        #[arg(long)]
        upper: bool,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run a sweep: built-in "table1" / "table2" or a JSON override file
    Table {
        /// Template config supplying scales, seed, and defaults
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "table1")]
        sweep: String,
        /// CSV destination (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Evaluate the symbolic cost model
    Cost {
        /// Standard fixed-basis size K
        #[arg(long)]
        k: usize,
        /// Reinforced fixed-basis size K_r
        #[arg(long = "k-r")]
        k_r: usize,
        #[arg(long = "dates", default_value_t = 9)]
        dates: usize,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long = "test-paths", default_value_t = 100_000)]
        test_paths: usize,
        #[arg(long = "c-f", default_value_t = 1.0)]
        c_f: f64,
        #[arg(long = "c-star", default_value_t = 1.0)]
        c_star: f64,
        /// Asset count for the max-call headline ratio (2d+J)/(d(d+1))
        #[arg(long)]
        d: Option<u64>,
    },
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(t) => {
            if t == 0 {
                return Err(Error::config("--threads must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::config(format!("thread pool: {e}")))?
                .install(f)
        }
    }
}

fn load_config(path: &PathBuf, over: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    over.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { config, out, over } => {
            let cfg = load_config(&config, &over)?;
            let product = Product::new(cfg.product.clone())?;
            let paths = with_threads(over.threads, || {
                simulate(
                    &product.market(),
                    &product.times,
                    cfg.n_train,
                    Stream::new(cfg.seed, purpose::TRAIN),
                    cfg.seed,
                )
            })?;
            paths.save(&out)?;
            print_json(&serde_json::json!({
                "file": out,
                "paths": paths.n,
                "dates": paths.j_dates,
                "d": paths.d,
                "seed": paths.seed,
            }))
        }
        Cmd::Train { config, out, over } => {
            let mut cfg = load_config(&config, &over)?;
            cfg.n_test = 0; // training only
            if out.is_some() {
                cfg.out.model = out;
            }
            if cfg.out.model.is_none() {
                return Err(Error::config(
                    "train: give --out or set out.model in the config to keep the model",
                ));
            }
            let opts = over.run_options();
            let report = with_threads(over.threads, || runner::run_experiment(&cfg, &opts))?;
            print_json(&report)
        }
        Cmd::Bound { model, kind, test_paths, inner, outer, seed, threads } => {
            let model = ContinuationModel::load(&model)?;
            let ev = Evaluator::new(&model)?;
            let product = &ev.product;
            let (mut lo, mut up) = (None, None);
            with_threads(threads, || {
                if matches!(kind, BoundKind::Lower | BoundKind::Both) {
                    if test_paths == 0 {
                        return Err(Error::config("--test-paths must be positive"));
                    }
                    let test = simulate(
                        &product.market(),
                        &product.times,
                        test_paths,
                        Stream::new(seed, purpose::TEST),
                        seed,
                    )?;
                    lo = Some(lower_bound(&ev, &test)?.0);
                }
                if matches!(kind, BoundKind::Upper | BoundKind::Both) {
                    let n_outer = outer.unwrap_or_else(|| test_paths.clamp(1, 10_000));
                    up = Some(dual_upper_bound(&ev, n_outer, inner, seed)?);
                }
                Ok(())
            })?;
            print_json(&serde_json::json!({
                "product": model.product,
                "basis": model.basis,
                "method": model.method,
                "seed": seed,
                "lower": lo,
                "upper": up,
            }))
        }
        Cmd::Run { config, out, upper, over } => {
            let mut cfg = load_config(&config, &over)?;
            if upper {
                cfg.upper = true;
            }
            if out.is_some() {
                cfg.out.report = out;
            }
            let opts = over.run_options();
            let report = with_threads(over.threads, || runner::run_experiment(&cfg, &opts))?;
            print_json(&report)
        }
        Cmd::Table { config, sweep, out, over } => {
            let cfg = load_config(&config, &over)?;
            let cells = match sweep.as_str() {
                "table1" => runner::table1_sweep(),
                "table2" => runner::table2_sweep(),
                path => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::config(format!("cannot read sweep file {path}: {e}"))
                    })?;
                    serde_json::from_str::<Vec<serde_json::Value>>(&text)
                        .map_err(|e| Error::config(format!("sweep file: {e}")))?
                }
            };
            let opts = over.run_options();
            let rows = with_threads(over.threads, || runner::run_table(&cfg, &cells, &opts))?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p)?;
                    runner::write_table_csv(std::io::BufWriter::new(f), &rows)?;
                    eprintln!("wrote {} rows to {}", rows.len(), p.display());
                }
                None => runner::write_table_csv(std::io::stdout().lock(), &rows)?,
            }
            Ok(())
        }
        Cmd::Cost { k, k_r, dates, paths, test_paths, c_f, c_star, d } => {
            let params = CostParams {
                c_f,
                c_star,
                n: paths,
                n_test: test_paths,
                j_dates: dates,
                k,
                k_r,
                b: 1,
            };
            let predicted = costmodel::predict(&params)?;
            let headline = d.map(|d| {
                let (num, den) = costmodel::headline_ratio(d, dates as u64);
                format!("(2d+J)/(d(d+1)) = {num}/{den} ~= {:.4}", num as f64 / den as f64)
            });
            print_json(&serde_json::json!({
                "params": params,
                "predicted": predicted,
                "headline_ratio": headline,
                "warning": params.reinforcement_warning(),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
