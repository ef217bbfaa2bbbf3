//! Train a reinforced continuation model for a Bermudan max-call and print
//! the per-date regression diagnostics. The fitted model is saved as JSON
//! next to the working directory so `bound`-style workflows can reload it.

use restop::backward::{train, Method};
use restop::basis::BasisFamily;
use restop::market::simulate;
use restop::products::{Product, ProductSpec};
use restop::rng::{purpose, Stream};

fn main() -> restop::Result<()> {
    let product = Product::new(ProductSpec::MaxCall {
        d: 2,
        strike: 100.0,
        r: 0.05,
        delta: 0.1,
        sigma: 0.2,
        x0: 100.0,
        maturity: 3.0,
        dates: 9,
    })?;

    let seed = 7;
    let paths = simulate(&product.market(), &product.times, 50_000, Stream::new(seed, purpose::TRAIN), seed)?;

    println!("{:>4} {:>5} {:>14} {:>12}", "date", "rank", "resid_norm", "cond");
    let trained = train(&product, &paths, Method::ReinforcedTvr, BasisFamily::Linear, 3072, |d| {
        println!("{:>4} {:>5} {:>14.6e} {:>12.3e}", d.date, d.rank, d.resid_norm, d.cond);
    })?;

    let out = std::path::Path::new("maxcall_model.json");
    trained.model.save(out)?;
    println!(
        "saved {} model with {} per-date coefficient vectors to {}",
        trained.model.basis.name(),
        trained.model.coeffs.len(),
        out.display()
    );
    Ok(())
}
