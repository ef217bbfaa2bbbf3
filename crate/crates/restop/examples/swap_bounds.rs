//! Cancelable spread-rate swap on twenty assets: the holder receives a
//! floating-minus-spread coupon stream (quoted per 10^4 of notional) and may
//! cancel at any exercise date. Reproduces the rho = 0 column of the swap
//! table at reduced path counts.

use restop::backward::{train, Method};
use restop::basis::BasisFamily;
use restop::bounds::{lower_bound, Evaluator};
use restop::market::simulate;
use restop::products::{Product, ProductSpec};
use restop::rng::{purpose, Stream};

fn main() -> restop::Result<()> {
    let product = Product::new(ProductSpec::Swap {
        d: 20,
        r: 0.05,
        delta: 0.0,
        sigma_l: 0.2,
        rho: 0.0,
        alpha: 0.05,
        n1: 5,
        n2: 10,
        s1: 0.09,
        s2: 0.03,
        s3: 0.0,
        maturity: 5.0,
        dates: 10,
        inception_coupon: true,
    })?;

    let seed = 7;
    let n = 50_000;
    let train_paths = simulate(&product.market(), &product.times, n, Stream::new(seed, purpose::TRAIN), seed)?;
    let test_paths = simulate(&product.market(), &product.times, n, Stream::new(seed, purpose::TEST), seed)?;

    for method in [Method::StandardTvr, Method::ReinforcedTvr] {
        let trained = train(&product, &train_paths, method, BasisFamily::SwapLinear, 3072, |_| {})?;
        let ev = Evaluator::new(&trained.model)?;
        let (est, stops) = lower_bound(&ev, &test_paths)?;
        let never = stops.iter().filter(|&&j| j + 1 == product.n_dates()).count();
        println!(
            "{:<16} lower {:>8.2}  SE {:>5.2}  (held to maturity on {:.1}% of paths)",
            method.label(),
            est.value,
            est.std_error,
            100.0 * never as f64 / n as f64
        );
    }
    Ok(())
}
