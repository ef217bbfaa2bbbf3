//! Sandwich a Bermudan max-call price between the out-of-sample lower bound
//! of the trained stopping rule and the nested-simulation dual upper bound
//! built from the same rule (Andersen-Broadie style).

use restop::backward::{train, Method};
use restop::basis::BasisFamily;
use restop::bounds::{dual_upper_bound, lower_bound, Evaluator};
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
    let train_paths = simulate(&product.market(), &product.times, 100_000, Stream::new(seed, purpose::TRAIN), seed)?;
    let trained = train(&product, &train_paths, Method::ReinforcedTvr, BasisFamily::Quadratic, 3072, |_| {})?;
    drop(train_paths);

    let ev = Evaluator::new(&trained.model)?;
    let test_paths = simulate(&product.market(), &product.times, 100_000, Stream::new(seed, purpose::TEST), seed)?;
    let (lower, _) = lower_bound(&ev, &test_paths)?;
    drop(test_paths);

    // 2000 outer paths x 500 inner rollouts per date keeps this example quick;
    // scale both up for tighter intervals.
    let upper = dual_upper_bound(&ev, 2000, 500, seed)?;

    println!("lower bound  {:>8.4}  (SE {:.4}, CI [{:.4}, {:.4}])", lower.value, lower.std_error, lower.ci_low, lower.ci_high);
    println!("upper bound  {:>8.4}  (SE {:.4}, CI [{:.4}, {:.4}])", upper.value, upper.std_error, upper.ci_low, upper.ci_high);
    println!("gap          {:>8.4}", upper.value - lower.value);
    Ok(())
}
