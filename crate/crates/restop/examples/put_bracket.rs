//! Independent cross-check on a one-dimensional Bermudan put: the Monte
//! Carlo lower/upper bounds must bracket the binomial-lattice price (which
//! is effectively exact in one dimension after step-doubling convergence).

use restop::backward::{train, Method};
use restop::basis::BasisFamily;
use restop::bounds::{dual_upper_bound, lower_bound, Evaluator};
use restop::market::simulate;
use restop::oracle::{converged_lattice_price, LatticeSpec};
use restop::products::{Product, ProductSpec};
use restop::rng::{purpose, Stream};

fn main() -> restop::Result<()> {
    let (strike, r, sigma, x0, maturity, dates) = (100.0, 0.05, 0.2, 100.0, 1.0, 4);

    let (lattice, steps_per) = converged_lattice_price(
        &LatticeSpec {
            strike,
            spot: x0,
            rate: r,
            dividend: 0.0,
            sigma,
            maturity,
            dates,
            steps_per: 16,
            is_put: true,
        },
        1e-4,
        4096,
    )?;
    println!("lattice price {lattice:.6} (converged at {steps_per} steps per exercise interval)");

    let product = Product::new(ProductSpec::Put { strike, r, delta: 0.0, sigma, x0, maturity, dates })?;
    let seed = 7;
    let train_paths = simulate(&product.market(), &product.times, 100_000, Stream::new(seed, purpose::TRAIN), seed)?;
    let trained = train(&product, &train_paths, Method::ReinforcedTvr, BasisFamily::Quadratic, 3072, |_| {})?;
    drop(train_paths);

    let ev = Evaluator::new(&trained.model)?;
    let test_paths = simulate(&product.market(), &product.times, 100_000, Stream::new(seed, purpose::TEST), seed)?;
    let (lower, _) = lower_bound(&ev, &test_paths)?;
    drop(test_paths);
    let upper = dual_upper_bound(&ev, 10_000, 1000, seed)?;

    println!("mc lower      {:.6}  (SE {:.4})", lower.value, lower.std_error);
    println!("mc upper      {:.6}  (SE {:.4})", upper.value, upper.std_error);
    let ok = lower.value <= lattice + 3.0 * lower.std_error && upper.value >= lattice - 3.0 * upper.std_error;
    println!("bracket holds within 3 standard errors: {ok}");
    Ok(())
}
