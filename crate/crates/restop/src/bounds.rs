//! Out-of-sample bound estimation.
//!
//! The lower bound applies the trained stopping rule to fresh paths. The
//! upper bound follows the dual (Rogers / Haugh-Kogan) construction with the
//! Andersen-Broadie martingale: continuation values along each outer path
//! are estimated by nested simulation of the rule itself, and the resulting
//! approximate Doob martingale is plugged into the pathwise maximum.
//!
//! Both estimators evaluate continuation values through the coefficient
//! chain only (no stored per-path state), so a serialized model is all that
//! is ever needed at evaluation time.

use rayon::prelude::*;

use crate::backward::ContinuationModel;
use crate::basis::{validate_combo, BasisFamily};
use crate::error::{Error, Result};
use crate::market::{simulate, PathSet};
use crate::products::Product;
use crate::rng::{purpose, Stream};

/// A Monte Carlo estimate with its sampling error. `ci_low`/`ci_high` form
/// the asymptotic 95% interval (1.96 standard errors).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct BoundEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BoundEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<BoundEstimate> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::config("cannot estimate a bound from zero samples"));
        }
        let mut sum = 0.0;
        for &v in samples {
            sum += v;
        }
        let mean = sum / n as f64;
        let mut ss = 0.0;
        for &v in samples {
            ss += (v - mean) * (v - mean);
        }
        let var = if n > 1 { ss / (n as f64 - 1.0) } else { 0.0 };
        let se = (var / n as f64).sqrt();
        if !mean.is_finite() || !se.is_finite() {
            return Err(Error::numerical("non-finite bound estimate"));
        }
        Ok(BoundEstimate {
            value: mean,
            std_error: se,
            n,
            ci_low: mean - 1.96 * se,
            ci_high: mean + 1.96 * se,
        })
    }
}

/// Per-thread evaluation workspace (basis scratch + feature buffer).
pub struct Scratch {
    sort: Vec<f64>,
    feat: Vec<f64>,
}

/// Evaluates a trained continuation model at arbitrary states.
///
/// Continuation values are rebuilt through the backward chain: starting from
/// zero at the last date, each earlier date composes its fitted coefficients
/// with the reinforced regressor max(g, C) of the level above. The basis
/// features of the queried state are computed once and reused through the
/// chain.
pub struct Evaluator {
    pub product: Product,
    basis: BasisFamily,
    k: usize,
    reinforced: bool,
    coeffs: Vec<Vec<f64>>,
}

impl Evaluator {
    pub fn new(model: &ContinuationModel) -> Result<Evaluator> {
        let product = Product::new(model.product.clone())?;
        validate_combo(product.is_swap(), model.basis, model.method.reinforced())?;
        let k = model.basis.size(product.d());
        let k_eff = k + model.method.reinforced() as usize;
        let jd = product.n_dates();
        if model.coeffs.len() + 1 != jd {
            return Err(Error::config(format!(
                "model has {} coefficient vectors but the product has {jd} exercise dates",
                model.coeffs.len()
            )));
        }
        if model.coeffs.iter().any(|c| c.len() != k_eff) {
            return Err(Error::config(format!(
                "model coefficient vectors do not match basis size {k_eff}"
            )));
        }
        Ok(Evaluator {
            product,
            basis: model.basis,
            k,
            reinforced: model.method.reinforced(),
            coeffs: model.coeffs.clone(),
        })
    }

    pub fn scratch(&self) -> Scratch {
        Scratch { sort: Vec::with_capacity(self.product.d()), feat: vec![0.0; self.k] }
    }

    /// Continuation value C_j(x) for holding at date j (0-based). The last
    /// date has no continuation and returns 0.
    pub fn continuation(&self, x: &[f64], j: usize, s: &mut Scratch) -> f64 {
        let jd = self.product.n_dates();
        debug_assert!(j < jd);
        if j + 1 >= jd {
            return 0.0;
        }
        let aux = self.product.basis_aux_fresh(x, j);
        self.basis.eval(x, aux, &mut s.sort, &mut s.feat);
        let mut c = 0.0;
        for l in (j..jd - 1).rev() {
            let g = &self.coeffs[l];
            let mut v = 0.0;
            for kk in 0..self.k {
                v += g[kk] * s.feat[kk];
            }
            if self.reinforced {
                let nu = self.product.nu_reward_fresh(x, l + 1).max(c);
                v += g[self.k] * nu;
            }
            c = v;
        }
        c
    }

    /// The estimated rule: stop at date j iff exercising weakly beats the
    /// estimated continuation (the final date is forced).
    pub fn should_stop(&self, x: &[f64], j: usize, s: &mut Scratch) -> bool {
        j + 1 == self.product.n_dates()
            || self.product.dp_exercise_fresh(x, j) >= self.continuation(x, j, s)
    }
}

/// Apply the rule to `paths` and average the collected stop values.
/// Also returns the stop date (0-based) of every path.
pub fn lower_bound(ev: &Evaluator, paths: &PathSet) -> Result<(BoundEstimate, Vec<usize>)> {
    let p = &ev.product;
    if paths.d != p.d() || paths.j_dates != p.n_dates() {
        return Err(Error::config("evaluation paths do not match the model's product"));
    }
    let n = paths.n;
    let jd = paths.j_dates;
    let mut vals = vec![0.0f64; n];
    let mut stops = vec![0usize; n];
    vals.par_iter_mut()
        .zip(stops.par_iter_mut())
        .enumerate()
        .for_each(|(m, (val, stop))| {
            let mut s = ev.scratch();
            let mut z = p.initial_carry();
            for j in 0..jd {
                let x = paths.state(m, j);
                z = p.step_carry(z, x, j);
                if ev.should_stop(x, j, &mut s) {
                    *val = p.stop_value_fresh(x, z, j);
                    *stop = j;
                    break;
                }
            }
        });
    Ok((BoundEstimate::from_samples(&vals)?, stops))
}

/// Stop date (0-based) chosen by the trained rule on each path; handy for
/// exercise-boundary diagnostics without caring about the bound itself.
pub fn pathwise_stop_times(ev: &Evaluator, paths: &PathSet) -> Result<Vec<usize>> {
    lower_bound(ev, paths).map(|(_, stops)| stops)
}

/// Nested-simulation dual upper bound.
///
/// For each of `n_outer` fresh outer paths, continuation values theta_j are
/// estimated at every date by `n_inner` sub-simulations that follow the
/// trained rule from date j+1 onwards. These define the Andersen-Broadie
/// approximate Doob martingale M (with V-hat = max(g, theta) before the last
/// date), and the path contributes max_j (g_j - M_j).
pub fn dual_upper_bound(
    ev: &Evaluator,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<BoundEstimate> {
    if n_outer == 0 {
        return Err(Error::config("dual bound needs at least one outer path"));
    }
    if n_inner == 0 {
        return Err(Error::config("dual bound needs at least one inner path"));
    }
    let p = &ev.product;
    let market = p.market();
    let d = market.d;
    let jd = p.n_dates();
    let outer = simulate(&market, &p.times, n_outer, Stream::new(seed, purpose::DUAL_OUTER), seed)?;

    // Per-interval log-increment coefficients for the inner sub-paths,
    // indexed by the target date (index 0 is unused: inner steps always go
    // from one exercise date to the next).
    let chol = market.cholesky()?;
    let mut drift = vec![0.0f64; jd * d];
    let mut vol = vec![0.0f64; jd * d];
    for j in 1..jd {
        let dt = p.times[j] - p.times[j - 1];
        for l in 0..d {
            let sg = market.sigma[l];
            drift[j * d + l] = (market.rate - market.dividend - 0.5 * sg * sg) * dt;
            vol[j * d + l] = sg * dt.sqrt();
        }
    }

    let inner_root = Stream::new(seed, purpose::DUAL_INNER);
    let mut samples = vec![0.0f64; n_outer];
    samples.par_iter_mut().enumerate().for_each(|(m, out)| {
        let mut s = ev.scratch();
        let mut x = vec![0.0f64; d];
        let mut zn = vec![0.0f64; d];
        let mut g = vec![0.0f64; jd];
        let mut theta = vec![0.0f64; jd.saturating_sub(1)];

        // Exercise values and carries along the outer path.
        let mut carry = p.initial_carry();
        let mut carries = vec![0.0f64; jd];
        for j in 0..jd {
            let xj = outer.state(m, j);
            carry = p.step_carry(carry, xj, j);
            carries[j] = carry;
            g[j] = p.stop_value_fresh(xj, carry, j);
        }

        // Nested estimates of the rule's continuation value at each date.
        let path_stream = inner_root.child(m as u64);
        for j in 0..jd.saturating_sub(1) {
            let date_stream = path_stream.child(j as u64);
            let x0 = outer.state(m, j);
            let mut sum = 0.0;
            for i in 0..n_inner {
                let st = date_stream.child(i as u64);
                x.copy_from_slice(x0);
                let mut z = carries[j];
                for jj in j + 1..jd {
                    for a in 0..d {
                        zn[a] = st.normal_at(((jj - j - 1) * d + a) as u64);
                    }
                    for l in 0..d {
                        let mut w = 0.0;
                        for c in 0..=l {
                            w += chol[l * d + c] * zn[c];
                        }
                        x[l] *= (drift[jj * d + l] + vol[jj * d + l] * w).exp();
                    }
                    z = p.step_carry(z, &x, jj);
                    if ev.should_stop(&x, jj, &mut s) {
                        sum += p.stop_value_fresh(&x, z, jj);
                        break;
                    }
                }
            }
            theta[j] = sum / n_inner as f64;
        }

        // Doob martingale against the theta estimates; M_0 = 0 at the first
        // exercise date.
        let mut mart = 0.0;
        let mut best = g[0];
        for j in 1..jd {
            let vhat = if j + 1 == jd { g[j] } else { g[j].max(theta[j]) };
            mart += vhat - theta[j - 1];
            best = best.max(g[j] - mart);
        }
        *out = best;
    });

    BoundEstimate::from_samples(&samples)
}
