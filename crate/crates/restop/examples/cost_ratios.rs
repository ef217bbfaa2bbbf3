//! Symbolic cost model: compare the operation counts of reinforced regression
//! on the small basis against standard regression on the big basis it aims to
//! replace. Prints the training and evaluation cost ratios for max-calls of
//! several sizes, plus the large-N headline ratio (2d+J)/(d(d+1)).

use restop::costmodel::{cost_ratios, headline_ratio, CostParams};

fn main() -> restop::Result<()> {
    let j = 9;
    println!(
        "{:>4} {:>6} {:>6} {:>12} {:>12} {:>14}",
        "d", "K_r", "K", "train ratio", "eval ratio", "headline"
    );
    for d in [2usize, 5, 10, 20, 50] {
        // Reinforced runs on {1, x_1..x_d} plus the reinforced regressor;
        // the comparison target is the full quadratic family.
        let k_r = d + 2;
        let k = (d + 1) * (d + 2) / 2;
        let params = CostParams {
            c_f: 1.0,
            c_star: 1.0,
            n: 100_000,
            n_test: 100_000,
            j_dates: j,
            k,
            k_r,
            b: 1,
        };
        let (train, eval) = cost_ratios(&params)?;
        let (num, den) = headline_ratio(d as u64, j as u64);
        println!(
            "{d:>4} {k_r:>6} {k:>6} {train:>12.4} {eval:>12.4} {:>8}/{:<5} = {:.4}",
            num,
            den,
            num as f64 / den as f64
        );
    }
    println!("\nratios < 1 mean the reinforced small-basis run is cheaper than");
    println!("standard regression on the quadratic basis of the same dimension.");
    Ok(())
}
