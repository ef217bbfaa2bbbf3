//! Independent ground truth for desk-scale verification.
//!
//! `lattice_price` prices 1-asset Bermudan puts/calls on a recombining
//! CRR-style binomial tree with exercise restricted to the product's date
//! grid, refined by step doubling until two successive resolutions agree.
//! `exhaustive_value` computes the anticipative pathwise-maximum envelope on
//! a small reward table — an upper bound for the value of *any* stopping
//! rule on the same paths, so engine lower bounds must sit below it.

use crate::error::{Error, Result};
use crate::products::Tables;

/// A 1-asset Bermudan option on a binomial lattice. `steps_per` subdivides
/// each of the `dates` equal exercise intervals.
#[derive(Clone, Copy, Debug)]
pub struct LatticeSpec {
    pub strike: f64,
    pub spot: f64,
    pub rate: f64,
    pub dividend: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub dates: usize,
    pub steps_per: usize,
    pub is_put: bool,
}

impl LatticeSpec {
    fn validate(&self) -> Result<()> {
        if self.steps_per == 0 || self.dates == 0 {
            return Err(Error::config("lattice needs steps_per >= 1 and dates >= 1"));
        }
        if !(self.spot > 0.0 && self.strike > 0.0 && self.maturity > 0.0 && self.sigma >= 0.0) {
            return Err(Error::config("lattice spec requires positive spot/strike/maturity"));
        }
        Ok(())
    }

    fn payoff(&self, price: f64) -> f64 {
        if self.is_put {
            (self.strike - price).max(0.0)
        } else {
            (price - self.strike).max(0.0)
        }
    }
}

/// Price at a single lattice resolution.
pub fn lattice_price(spec: &LatticeSpec) -> Result<f64> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        // Deterministic forward path: optimize over the exercise dates
        // directly. X_t = spot * exp((r - delta) t).
        let mut best: f64 = 0.0;
        for j in 1..=spec.dates {
            let t = spec.maturity * j as f64 / spec.dates as f64;
            let price = spec.spot * ((spec.rate - spec.dividend) * t).exp();
            best = best.max((-spec.rate * t).exp() * spec.payoff(price));
        }
        return Ok(best);
    }
    let s = spec.steps_per * spec.dates;
    let dt = spec.maturity / s as f64;
    let u = (spec.sigma * dt.sqrt()).exp();
    let dn = 1.0 / u;
    let p = (((spec.rate - spec.dividend) * dt).exp() - dn) / (u - dn);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::numerical(format!(
            "risk-neutral up-probability {p} outside [0,1]; refine the lattice"
        )));
    }
    let disc = (-spec.rate * dt).exp();
    let mut vals: Vec<f64> = (0..=s)
        .map(|j| spec.payoff(spec.spot * u.powi(2 * j as i32 - s as i32)))
        .collect();
    for step in (0..s).rev() {
        for j in 0..=step {
            vals[j] = disc * (p * vals[j + 1] + (1.0 - p) * vals[j]);
        }
        if step % spec.steps_per == 0 && step > 0 {
            for j in 0..=step {
                let price = spec.spot * u.powi(2 * j as i32 - step as i32);
                vals[j] = vals[j].max(spec.payoff(price));
            }
        }
    }
    Ok(vals[0])
}

/// Refine by doubling `steps_per` until two successive prices agree within
/// `tol`; returns the finer price and its `steps_per`. Fails with the last
/// two iterates if `steps_per` would exceed `cap`.
pub fn converged_lattice_price(spec: &LatticeSpec, tol: f64, cap: usize) -> Result<(f64, usize)> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok((lattice_price(spec)?, spec.steps_per));
    }
    let mut coarse = *spec;
    let mut prev = lattice_price(&coarse)?;
    let mut history = (coarse.steps_per, prev, prev);
    loop {
        let mut fine = coarse;
        fine.steps_per = coarse.steps_per * 2;
        if fine.steps_per > cap {
            return Err(Error::numerical(format!(
                "lattice did not converge to {tol} within steps_per cap {cap}; \
                 last two iterates: {} (steps_per {}) and {} (steps_per {})",
                history.1,
                history.0 / 2,
                history.2,
                history.0
            )));
        }
        let cur = lattice_price(&fine)?;
        history = (fine.steps_per, prev, cur);
        if (cur - prev).abs() <= tol {
            return Ok((cur, fine.steps_per));
        }
        prev = cur;
        coarse = fine;
    }
}

/// Mean over paths of the pathwise best reward max_j g_j — the value of the
/// anticipative (look-ahead) stopper. Only intended for small instances.
pub fn exhaustive_value(t: &Tables) -> Result<f64> {
    if t.n == 0 || t.j_dates == 0 {
        return Err(Error::config("exhaustive evaluation needs a nonempty reward table"));
    }
    if t.n * t.j_dates > 10_000 {
        return Err(Error::config(format!(
            "exhaustive evaluation capped at N*J <= 10000 entries, got {}",
            t.n * t.j_dates
        )));
    }
    let mut sum = 0.0;
    for m in 0..t.n {
        let mut best = f64::NEG_INFINITY;
        for j in 0..t.j_dates {
            best = best.max(t.exercise[j * t.n + m]);
        }
        sum += best;
    }
    Ok(sum / t.n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn put_fixture(steps_per: usize) -> LatticeSpec {
        LatticeSpec {
            strike: 100.0,
            spot: 100.0,
            rate: 0.05,
            dividend: 0.0,
            sigma: 0.2,
            maturity: 1.0,
            dates: 4,
            steps_per,
            is_put: true,
        }
    }

    /// Frozen reference values for the Bermudan put fixture, computed once
    /// at fixed resolutions and pinned.
    #[test]
    fn bermudan_put_fixture_goldens() {
        assert!((lattice_price(&put_fixture(64)).unwrap() - 5.953386085704451).abs() < 1e-9);
        assert!((lattice_price(&put_fixture(128)).unwrap() - 5.953296376348222).abs() < 1e-9);
    }

    #[test]
    fn step_doubling_converges_to_the_frozen_value() {
        let (v, steps) = converged_lattice_price(&put_fixture(16), 1e-4, 2048).unwrap();
        assert_eq!(steps, 128);
        assert!((v - 5.953296376348222).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_reports_last_iterates() {
        let err = converged_lattice_price(&put_fixture(16), 1e-18, 64).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("did not converge"), "{msg}");
        // Both final iterates must be reported: steps_per 32 and 64.
        assert!(msg.contains("5.9480624026668885"), "{msg}");
        assert!(msg.contains("5.953386085704442"), "{msg}");
        assert!(msg.contains("steps_per 64"), "{msg}");
    }

    /// With a single exercise date the lattice prices a European put;
    /// Richardson extrapolation in 1/steps reproduces Black-Scholes.
    #[test]
    fn single_date_matches_black_scholes() {
        let mut spec = put_fixture(512);
        spec.dates = 1;
        let v512 = lattice_price(&spec).unwrap();
        spec.steps_per = 1024;
        let v1024 = lattice_price(&spec).unwrap();
        let bs = 5.573526022256971; // K=S=100, r=0.05, sigma=0.2, T=1
        assert!((v1024 - bs).abs() < 2.5e-3);
        assert!((2.0 * v1024 - v512 - bs).abs() < 1e-5);
    }

    #[test]
    fn zero_volatility_is_priced_analytically() {
        let spec = LatticeSpec {
            strike: 110.0,
            spot: 100.0,
            rate: 0.0,
            dividend: 0.0,
            sigma: 0.0,
            maturity: 1.0,
            dates: 3,
            steps_per: 1,
            is_put: true,
        };
        assert_eq!(lattice_price(&spec).unwrap(), 10.0);
        let grown = LatticeSpec { rate: 0.05, maturity: 1.0, dates: 2, ..spec };
        let want = (110.0 * (-0.025f64).exp() - 100.0).max(110.0 * (-0.05f64).exp() - 100.0);
        assert!((lattice_price(&grown).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_fixture_and_edges() {
        // 4 paths, 3 dates, rewards laid out column-major [j*n + m].
        let rewards: [[f64; 3]; 4] =
            [[1.0, 0.0, 2.0], [0.0, 0.0, 1.0], [3.0, 1.0, 0.0], [0.0, 2.0, 2.0]];
        let mut exercise = vec![0.0; 12];
        for (m, row) in rewards.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                exercise[j * 4 + m] = v;
            }
        }
        let t = Tables { n: 4, j_dates: 3, exercise, raw: vec![0.0; 12] };
        assert_eq!(exhaustive_value(&t).unwrap(), 2.0);

        let single = Tables { n: 1, j_dates: 3, exercise: vec![1.0, 5.0, 2.0], raw: vec![0.0; 3] };
        assert_eq!(exhaustive_value(&single).unwrap(), 5.0);

        let zeros = Tables { n: 3, j_dates: 2, exercise: vec![0.0; 6], raw: vec![0.0; 6] };
        assert_eq!(exhaustive_value(&zeros).unwrap(), 0.0);

        let big = Tables { n: 5001, j_dates: 2, exercise: vec![0.0; 10002], raw: vec![] };
        assert!(exhaustive_value(&big).is_err());
    }

    /// The anticipative envelope dominates the engine's rule on the same
    /// paths.
    #[test]
    fn envelope_dominates_engine_lower_bound() {
        use crate::backward::{train, Method};
        use crate::basis::BasisFamily;
        use crate::bounds::{lower_bound, Evaluator};
        use crate::market::simulate;
        use crate::products::{Product, ProductSpec};
        use crate::rng::{purpose, Stream};

        let p = Product::new(ProductSpec::Put {
            strike: 100.0,
            r: 0.05,
            delta: 0.0,
            sigma: 0.2,
            x0: 100.0,
            maturity: 1.0,
            dates: 4,
        })
        .unwrap();
        let paths = simulate(&p.market(), &p.times, 2000, Stream::new(5, purpose::TRAIN), 5).unwrap();
        let tr = train(&p, &paths, Method::ReinforcedTvr, BasisFamily::Linear, 1024, |_| {}).unwrap();
        let ev = Evaluator::new(&tr.model).unwrap();
        let test = simulate(&p.market(), &p.times, 2000, Stream::new(5, purpose::TEST), 5).unwrap();
        let (lo, _) = lower_bound(&ev, &test).unwrap();
        let envelope = exhaustive_value(&p.build_tables(&test).unwrap()).unwrap();
        assert!(envelope >= lo.value, "envelope {envelope} < lower bound {}", lo.value);
    }
}
