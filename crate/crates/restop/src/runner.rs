//! Experiment pipelines: simulate -> train -> bound -> report, plus table
//! sweeps that mirror the reference result layouts.
//!
//! Errors from the underlying modules are re-tagged with the pipeline stage
//! (`simulate`, `train`, `bound`, `report`) so a failing batch run names the
//! step that broke. Table sweeps apply a partial-failure policy: a broken
//! cell is recorded in the `note` column and the sweep continues.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::backward::{train, DateDiag, Trained};
use crate::basis::BasisFamily;
use crate::bounds::{dual_upper_bound, lower_bound, BoundEstimate, Evaluator};
use crate::config::ExperimentConfig;
use crate::costmodel::{self, CostParams, CostPrediction};
use crate::error::{Error, Result};
use crate::market::simulate;
use crate::products::Product;
use crate::rng::{purpose, Stream};

/// Logging behavior for pipeline runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Emit per-date training diagnostics as JSON lines instead of text.
    pub log_json: bool,
    /// Suppress per-date training diagnostics entirely.
    pub quiet: bool,
}

fn tag(stage: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{stage}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{stage}: {m}")),
        Error::Memory(m) => Error::Memory(format!("{stage}: {m}")),
        other => other,
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Timings {
    pub simulate_s: f64,
    pub train_s: f64,
    pub lower_s: f64,
    pub upper_s: f64,
    pub total_s: f64,
}

/// Cost-model context reported with every experiment: this run's basis as
/// the reinforced basis K_r against the product's quadratic family as the
/// standard comparator K (the canonical rich basis reinforcement competes
/// with), at unit costs c_f = c_* = 1.
#[derive(Clone, Debug, Serialize)]
pub struct CostBlock {
    pub params: CostParams,
    pub predicted: CostPrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headline_ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn cost_block(cfg: &ExperimentConfig, product: &Product) -> Result<CostBlock> {
    let d = product.d();
    let comparator =
        if product.is_swap() { BasisFamily::SwapQuadratic } else { BasisFamily::Quadratic };
    let params = CostParams {
        c_f: 1.0,
        c_star: 1.0,
        n: cfg.n_train,
        n_test: cfg.n_test.max(1),
        j_dates: product.n_dates(),
        k: comparator.size(d),
        k_r: cfg.basis.size(d),
        b: 1,
    };
    let predicted = costmodel::predict(&params)?;
    let headline_ratio = matches!(cfg.product, crate::products::ProductSpec::MaxCall { .. })
        .then(|| {
            let (num, den) = costmodel::headline_ratio(d as u64, product.n_dates() as u64);
            format!(
                "(2d+J)/(d(d+1)) = {num}/{den} ~= {:.4}",
                num as f64 / den as f64
            )
        });
    Ok(CostBlock { params, predicted, headline_ratio, warning: params.reinforcement_warning() })
}

/// Self-contained record of one experiment; the echoed config re-runs it.
#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<BoundEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<BoundEstimate>,
    pub cost: CostBlock,
    pub diagnostics: Vec<DateDiag>,
    pub timings: Timings,
}

fn log_date(opts: &RunOptions, d: &DateDiag) {
    if opts.quiet {
        return;
    }
    if opts.log_json {
        eprintln!(
            "{}",
            json!({
                "stage": "train",
                "date": d.date,
                "rank": d.rank,
                "resid_norm": d.resid_norm,
                "cond": d.cond,
            })
        );
    } else {
        eprintln!(
            "train date {:>3}: rank {:>3} resid_norm {:.6e} cond {:.3e}",
            d.date, d.rank, d.resid_norm, d.cond
        );
    }
}

/// Simulate, train, and (unless N_test = 0) estimate bounds; write any
/// configured outputs and return the report.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    cfg.validate()?;
    let total0 = Instant::now();
    let product = Product::new(cfg.product.clone())?;
    let market = product.market();
    let mut timings = Timings::default();

    let t0 = Instant::now();
    let train_paths = simulate(
        &market,
        &product.times,
        cfg.n_train,
        Stream::new(cfg.seed, purpose::TRAIN),
        cfg.seed,
    )
    .map_err(|e| tag("simulate", e))?;
    if let Some(p) = &cfg.out.paths {
        train_paths.save(p).map_err(|e| tag("simulate", e))?;
    }
    timings.simulate_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let trained: Trained = train(
        &product,
        &train_paths,
        cfg.method,
        cfg.basis,
        cfg.memory_cap_mb,
        |d| log_date(opts, d),
    )
    .map_err(|e| tag("train", e))?;
    drop(train_paths);
    timings.train_s = t0.elapsed().as_secs_f64();
    if let Some(p) = &cfg.out.model {
        trained.model.save(p).map_err(|e| tag("train", e))?;
    }

    let mut lower = None;
    let mut upper = None;
    if cfg.n_test > 0 {
        let ev = Evaluator::new(&trained.model).map_err(|e| tag("bound", e))?;
        let t0 = Instant::now();
        let test_paths = simulate(
            &market,
            &product.times,
            cfg.n_test,
            Stream::new(cfg.seed, purpose::TEST),
            cfg.seed,
        )
        .map_err(|e| tag("simulate", e))?;
        let (est, _stops) = lower_bound(&ev, &test_paths).map_err(|e| tag("bound", e))?;
        drop(test_paths);
        lower = Some(est);
        timings.lower_s = t0.elapsed().as_secs_f64();

        if cfg.upper {
            let t0 = Instant::now();
            upper = Some(
                dual_upper_bound(&ev, cfg.dual_outer_count(), cfg.inner_count, cfg.seed)
                    .map_err(|e| tag("bound", e))?,
            );
            timings.upper_s = t0.elapsed().as_secs_f64();
        }
    }

    timings.total_s = total0.elapsed().as_secs_f64();
    let report = ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        config_hash: cfg.config_hash(),
        lower,
        upper,
        cost: cost_block(cfg, &product).map_err(|e| tag("report", e))?,
        diagnostics: trained.diagnostics,
        timings,
    };
    if let Some(p) = &cfg.out.report {
        let f = std::fs::File::create(p).map_err(|e| tag("report", e.into()))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), &report)
            .map_err(|e| tag("report", e.into()))?;
    }
    if let Some(p) = &cfg.out.csv {
        append_results_csv(p, &report).map_err(|e| tag("report", e))?;
    }
    Ok(report)
}

const RESULTS_HEADER: [&str; 15] = [
    "product", "d", "rho", "basis", "method", "kind", "value", "std_error", "ci_low", "ci_high",
    "N", "N_test", "inner", "seed", "wall_seconds",
];

/// Append one row per estimated bound to the results CSV, creating the file
/// (with header) if needed.
pub fn append_results_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(RESULTS_HEADER)?;
    }
    let cfg = &report.config;
    let mut write_kind = |kind: &str, est: &BoundEstimate, secs: f64| -> Result<()> {
        w.write_record([
            cfg.product.name().to_string(),
            cfg.product.d().to_string(),
            cfg.product.rho().to_string(),
            cfg.basis.name().to_string(),
            cfg.method.label().to_string(),
            kind.to_string(),
            est.value.to_string(),
            est.std_error.to_string(),
            est.ci_low.to_string(),
            est.ci_high.to_string(),
            cfg.n_train.to_string(),
            cfg.n_test.to_string(),
            cfg.inner_count.to_string(),
            cfg.seed.to_string(),
            format!("{secs:.3}"),
        ])?;
        Ok(())
    };
    if let Some(est) = &report.lower {
        write_kind("lower", est, report.timings.lower_s)?;
    }
    if let Some(est) = &report.upper {
        write_kind("upper", est, report.timings.upper_s)?;
    }
    w.flush()?;
    Ok(())
}

/// One sweep cell: experiment identity, bounds if the cell ran, and a note
/// describing skips or failures.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub product: String,
    pub d: usize,
    pub rho: f64,
    pub basis: String,
    pub method: String,
    pub lower: Option<BoundEstimate>,
    pub upper: Option<BoundEstimate>,
    pub n_train: usize,
    pub n_test: usize,
    pub inner: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    pub note: String,
}

/// Built-in sweep mirroring the max-call table: d in {2,5,10,20} x
/// {linear, quadratic, payoff} x {standard-tvr, reinforced-tvr}. The
/// reinforced/payoff cells are invalid by construction and surface as
/// skipped rows.
pub fn table1_sweep() -> Vec<Value> {
    let mut out = Vec::new();
    for d in [2usize, 5, 10, 20] {
        for basis in ["linear", "quadratic", "payoff"] {
            for method in ["standard-tvr", "reinforced-tvr"] {
                out.push(json!({
                    "product": {"type": "max-call", "d": d, "K": 100.0, "r": 0.05,
                                 "delta": 0.1, "sigma": 0.2, "x0": 100.0, "T": 3.0, "J": 9},
                    "basis": basis,
                    "method": method,
                }));
            }
        }
    }
    out
}

/// Built-in sweep mirroring the cancelable-swap table: rho in
/// {0, 0.2, 0.5, 0.8} x {swap-linear, swap-quadratic} x both methods.
pub fn table2_sweep() -> Vec<Value> {
    let mut out = Vec::new();
    for rho in [0.0, 0.2, 0.5, 0.8] {
        for basis in ["swap-linear", "swap-quadratic"] {
            for method in ["standard-tvr", "reinforced-tvr"] {
                out.push(json!({
                    "product": {"type": "swap", "d": 20, "r": 0.05, "delta": 0.0,
                                 "sigma_l": 0.2, "rho": rho, "alpha": 0.05,
                                 "n1": 5, "n2": 10, "s1": 0.09, "s2": 0.03, "s3": 0.0,
                                 "T": 5.0, "J": 10},
                    "basis": basis,
                    "method": method,
                }));
            }
        }
    }
    out
}

fn merge_top_level(template: &Value, over: &Value) -> Result<Value> {
    let mut merged = template.clone();
    let (Some(m), Some(o)) = (merged.as_object_mut(), over.as_object()) else {
        return Err(Error::config("sweep overrides must be JSON objects"));
    };
    for (k, v) in o {
        m.insert(k.clone(), v.clone());
    }
    Ok(merged)
}

fn identity_from_value(v: &Value) -> (String, usize, f64, String, String) {
    let product = v
        .pointer("/product/type")
        .and_then(Value::as_str)
        .unwrap_or("?")
        .to_string();
    let d = v.pointer("/product/d").and_then(Value::as_u64).unwrap_or(0) as usize;
    let d = if product == "put" { 1 } else { d };
    let rho = v.pointer("/product/rho").and_then(Value::as_f64).unwrap_or(0.0);
    let basis = v.get("basis").and_then(Value::as_str).unwrap_or("?").to_string();
    let method = v.get("method").and_then(Value::as_str).unwrap_or("?").to_string();
    (product, d, rho, basis, method)
}

/// Run every override merged onto the template, recording failures as notes
/// rather than aborting the sweep.
pub fn run_table(
    template: &ExperimentConfig,
    sweep: &[Value],
    opts: &RunOptions,
) -> Result<Vec<TableRow>> {
    let template_value =
        serde_json::to_value(template).map_err(|e| Error::config(format!("template: {e}")))?;
    let mut rows = Vec::with_capacity(sweep.len());
    for over in sweep {
        let merged = merge_top_level(&template_value, over)?;
        let (product, d, rho, basis, method) = identity_from_value(&merged);
        let mut row = TableRow {
            product,
            d,
            rho,
            basis,
            method,
            lower: None,
            upper: None,
            n_train: template.n_train,
            n_test: template.n_test,
            inner: template.inner_count,
            seed: template.seed,
            wall_seconds: 0.0,
            note: String::new(),
        };
        let cfg: ExperimentConfig = match serde_json::from_value(merged) {
            Ok(c) => c,
            Err(e) => {
                row.note = format!("invalid cell: {e}");
                rows.push(row);
                continue;
            }
        };
        row.n_train = cfg.n_train;
        row.n_test = cfg.n_test;
        row.inner = cfg.inner_count;
        row.seed = cfg.seed;
        if let Err(e) = cfg.validate() {
            row.note = format!("skipped: {e}");
            rows.push(row);
            continue;
        }
        match run_experiment(&cfg, opts) {
            Ok(rep) => {
                row.lower = rep.lower;
                row.upper = rep.upper;
                row.wall_seconds = rep.timings.total_s;
            }
            Err(e) => row.note = format!("failed: {e}"),
        }
        rows.push(row);
    }
    Ok(rows)
}

const TABLE_HEADER: [&str; 19] = [
    "product", "d", "rho", "basis", "method", "lower", "lower_se", "lower_ci_low",
    "lower_ci_high", "upper", "upper_se", "upper_ci_low", "upper_ci_high", "N", "N_test",
    "inner", "seed", "wall_seconds", "note",
];

/// Write sweep rows as CSV (header always present, even for empty sweeps).
pub fn write_table_csv<W: std::io::Write>(out: W, rows: &[TableRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    let opt = |b: &Option<BoundEstimate>, f: fn(&BoundEstimate) -> f64| -> String {
        b.as_ref().map(|e| f(e).to_string()).unwrap_or_default()
    };
    for r in rows {
        w.write_record([
            r.product.clone(),
            r.d.to_string(),
            r.rho.to_string(),
            r.basis.clone(),
            r.method.clone(),
            opt(&r.lower, |e| e.value),
            opt(&r.lower, |e| e.std_error),
            opt(&r.lower, |e| e.ci_low),
            opt(&r.lower, |e| e.ci_high),
            opt(&r.upper, |e| e.value),
            opt(&r.upper, |e| e.std_error),
            opt(&r.upper, |e| e.ci_low),
            opt(&r.upper, |e| e.ci_high),
            r.n_train.to_string(),
            r.n_test.to_string(),
            r.inner.to_string(),
            r.seed.to_string(),
            format!("{:.3}", r.wall_seconds),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
