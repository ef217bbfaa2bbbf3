//! Desk-scale slice of the max-call comparison table: d in {2, 5}, linear and
//! quadratic bases, standard and reinforced regression, 20k paths each. The
//! full-scale sweep is `restop table --config <cfg> --sweep table1`.

use restop::runner::{run_table, write_table_csv, RunOptions};

fn main() -> restop::Result<()> {
    let template: restop::config::ExperimentConfig = restop::config::ExperimentConfig::from_json(
        r#"{
            "product": {"type": "max-call", "d": 2, "K": 100.0, "r": 0.05,
                        "delta": 0.1, "sigma": 0.2, "x0": 100.0, "T": 3.0, "J": 9},
            "method": "standard-tvr",
            "basis": "linear",
            "N": 20000,
            "N_test": 20000,
            "seed": 7
        }"#,
    )?;

    // Overrides replace whole top-level keys, so each cell carries its full product.
    let mut cells = Vec::new();
    for d in [2, 5] {
        for basis in ["linear", "quadratic"] {
            for method in ["standard-tvr", "reinforced-tvr"] {
                cells.push(serde_json::json!({
                    "product": {"type": "max-call", "d": d, "K": 100.0, "r": 0.05,
                                "delta": 0.1, "sigma": 0.2, "x0": 100.0, "T": 3.0, "J": 9},
                    "basis": basis,
                    "method": method,
                }));
            }
        }
    }

    let rows = run_table(&template, &cells, &RunOptions { quiet: true, ..Default::default() })?;
    write_table_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}
