//! Every number the engine produces is a pure function of (config, seed):
//! path generation is counter-based, and all parallel reductions run in a
//! fixed order. This example runs the same experiment in a 1-thread and a
//! 2-thread rayon pool and compares the results bit for bit.

use restop::config::ExperimentConfig;
use restop::runner::{run_experiment, ExperimentReport, RunOptions};

fn run_in_pool(threads: usize, cfg: &ExperimentConfig) -> restop::Result<ExperimentReport> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(|| run_experiment(cfg, &RunOptions { quiet: true, ..Default::default() }))
}

fn main() -> restop::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "product": {"type": "max-call", "d": 2, "K": 100.0, "r": 0.05,
                        "delta": 0.1, "sigma": 0.2, "x0": 100.0, "T": 3.0, "J": 9},
            "method": "reinforced-tvr",
            "basis": "linear",
            "N": 20000,
            "N_test": 20000,
            "upper": true,
            "dual_outer": 500,
            "inner_count": 100,
            "seed": 7
        }"#,
    )?;

    let a = run_in_pool(1, &cfg)?;
    let b = run_in_pool(2, &cfg)?;

    let (la, lb) = (a.lower.unwrap(), b.lower.unwrap());
    let (ua, ub) = (a.upper.unwrap(), b.upper.unwrap());
    println!("threads=1  lower {:.17}  upper {:.17}", la.value, ua.value);
    println!("threads=2  lower {:.17}  upper {:.17}", lb.value, ub.value);
    assert_eq!(la.value.to_bits(), lb.value.to_bits());
    assert_eq!(la.std_error.to_bits(), lb.std_error.to_bits());
    assert_eq!(ua.value.to_bits(), ub.value.to_bits());
    assert_eq!(ua.std_error.to_bits(), ub.std_error.to_bits());
    println!("bit-identical across thread counts");
    Ok(())
}
