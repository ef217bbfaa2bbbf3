//! Simulate correlated geometric Brownian paths on a product's exercise grid
//! and check the simulated moments against the closed-form lognormal ones.
//!
//! ```text
//! cargo run --example simulate_paths
//! ```

use restop::market::simulate;
use restop::products::{Product, ProductSpec};
use restop::rng::{purpose, Stream};

fn main() -> restop::Result<()> {
    let product = Product::new(ProductSpec::MaxCall {
        d: 3,
        strike: 100.0,
        r: 0.05,
        delta: 0.1,
        sigma: 0.2,
        x0: 100.0,
        maturity: 3.0,
        dates: 9,
    })?;

    let n = 50_000;
    let seed = 42;
    let paths = simulate(&product.market(), &product.times, n, Stream::new(seed, purpose::TRAIN), seed)?;
    println!("simulated {} paths, {} dates, {} assets (seed {})", paths.n, paths.j_dates, paths.d, paths.seed);

    // E[X_t] = x0 exp((r - delta) t) under the pricing measure.
    let (r, delta, x0) = (0.05, 0.1, 100.0);
    println!("{:>6} {:>12} {:>12} {:>10}", "t", "mean(X_1)", "analytic", "rel err");
    for (j, &t) in paths.times.iter().enumerate() {
        let mean = (0..n).map(|m| paths.state(m, j)[0]).sum::<f64>() / n as f64;
        let exact = x0 * ((r - delta) * t).exp();
        println!("{t:>6.3} {mean:>12.5} {exact:>12.5} {:>10.2e}", (mean - exact).abs() / exact);
    }
    Ok(())
}
