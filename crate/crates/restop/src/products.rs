//! Product definitions: Bermudan max-call, 1-asset Bermudan put, and the
//! cancelable coupon swap.
//!
//! All rewards are discounted to t_0, so bound estimates are directly
//! comparable across dates. Exercise dates are t_j = j*T/J for j = 1..J.
//!
//! The swap needs a little care: the holder who cancels at date j has
//! collected the aggregated net coupon Z_j = C(0) + sum_{i<=j} C(i), where
//! C(i) = exp(-r t_i) * (exp(r dt) - 1 - a(i) dt) per unit notional (quoted
//! per 10^4, see [`SWAP_NOTIONAL`]) and the coupon rate a(i) depends on how
//! many assets sit below the barrier (1-alpha) * X_l(0).
//! Internally the dynamic program works on coupon *increments*: the decision
//! to cancel compares zero against the expected value of future coupons,
//! which is equivalent to comparing Z_j against the aggregate continuation
//! but keeps the regression response on a well-conditioned scale. The
//! inception coupon C(0) is a known constant (nothing is below the barrier
//! at t_0) and enters every Z_j as a fixed offset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Market, PathSet};

/// Swap cash flows are quoted per 10^4 of notional, the scale on which the
/// reference values (e.g. 171.59 at rho = 0) are stated.
pub const SWAP_NOTIONAL: f64 = 1.0e4;

fn default_true() -> bool {
    true
}

/// Serializable product description as it appears in config files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProductSpec {
    MaxCall {
        d: usize,
        #[serde(rename = "K")]
        strike: f64,
        r: f64,
        delta: f64,
        sigma: f64,
        x0: f64,
        #[serde(rename = "T")]
        maturity: f64,
        #[serde(rename = "J")]
        dates: usize,
    },
    Swap {
        d: usize,
        r: f64,
        delta: f64,
        sigma_l: f64,
        rho: f64,
        alpha: f64,
        n1: usize,
        n2: usize,
        s1: f64,
        s2: f64,
        s3: f64,
        #[serde(rename = "T")]
        maturity: f64,
        #[serde(rename = "J")]
        dates: usize,
        /// Include the known t_0 coupon C(0) in the aggregated stream.
        #[serde(default = "default_true")]
        inception_coupon: bool,
    },
    Put {
        #[serde(rename = "K")]
        strike: f64,
        r: f64,
        #[serde(default)]
        delta: f64,
        sigma: f64,
        x0: f64,
        #[serde(rename = "T")]
        maturity: f64,
        #[serde(rename = "J")]
        dates: usize,
    },
}

impl ProductSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProductSpec::MaxCall { .. } => "max-call",
            ProductSpec::Swap { .. } => "swap",
            ProductSpec::Put { .. } => "put",
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            ProductSpec::MaxCall { d, .. } => d,
            ProductSpec::Swap { d, .. } => d,
            ProductSpec::Put { .. } => 1,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            ProductSpec::Swap { rho, .. } => rho,
            _ => 0.0,
        }
    }
}

/// Reward data precomputed on a path set, column-major: `[j * n + m]`.
///
/// `exercise` is the value collected when stopping at date j (discounted
/// payoff, or aggregated net coupon for the swap). `raw` is the product's
/// pointwise primitive at each (path, date): undiscounted intrinsic value
/// for call/put, discounted date-j net coupon for the swap.
#[derive(Clone, Debug)]
pub struct Tables {
    pub n: usize,
    pub j_dates: usize,
    pub exercise: Vec<f64>,
    pub raw: Vec<f64>,
}

/// A product bound to its exercise grid, with discount factors precomputed.
#[derive(Clone, Debug)]
pub struct Product {
    pub spec: ProductSpec,
    pub times: Vec<f64>,
    pub disc: Vec<f64>,
    // swap-only scalars (zeroed otherwise)
    barrier: f64,
    coupon_flt: f64,
    dt: f64,
    c0: f64,
}

impl Product {
    pub fn new(spec: ProductSpec) -> Result<Product> {
        let (r, maturity, dates) = match spec {
            ProductSpec::MaxCall { d, strike, r, sigma, x0, maturity, dates, .. } => {
                if d == 0 || strike <= 0.0 || sigma < 0.0 || x0 <= 0.0 {
                    return Err(Error::config("max-call: need d >= 1, positive K/x0, sigma >= 0"));
                }
                (r, maturity, dates)
            }
            ProductSpec::Swap {
                d, sigma_l, alpha, n1, n2, maturity, dates, r, ..
            } => {
                if d == 0 || sigma_l <= 0.0 {
                    return Err(Error::config("swap: need d >= 1 and positive sigma_l"));
                }
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::config("swap: alpha must lie in (0,1)"));
                }
                if n1 > n2 {
                    return Err(Error::config("swap: need n1 <= n2"));
                }
                (r, maturity, dates)
            }
            ProductSpec::Put { strike, sigma, x0, maturity, dates, r, .. } => {
                if strike <= 0.0 || sigma < 0.0 || x0 <= 0.0 {
                    return Err(Error::config("put: need positive K/x0, sigma >= 0"));
                }
                (r, maturity, dates)
            }
        };
        if maturity <= 0.0 || dates == 0 {
            return Err(Error::config("product: need T > 0 and J >= 1"));
        }
        let times: Vec<f64> = (1..=dates).map(|j| j as f64 * maturity / dates as f64).collect();
        let disc: Vec<f64> = times.iter().map(|t| (-r * t).exp()).collect();
        let mut p = Product { spec, times, disc, barrier: 0.0, coupon_flt: 0.0, dt: 0.0, c0: 0.0 };
        if let ProductSpec::Swap { alpha, maturity, dates, r, inception_coupon, .. } = p.spec {
            p.dt = maturity / dates as f64;
            p.barrier = 1.0 - alpha; // relative to spot0 = 100 scaling below
            p.coupon_flt = SWAP_NOTIONAL * ((r * p.dt).exp() - 1.0);
            let a0 = p.rate_for_count(0);
            p.c0 = if inception_coupon {
                p.coupon_flt - SWAP_NOTIONAL * a0 * p.dt
            } else {
                0.0
            };
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn n_dates(&self) -> usize {
        self.times.len()
    }

    pub fn is_swap(&self) -> bool {
        matches!(self.spec, ProductSpec::Swap { .. })
    }

    /// Market implied by the product parameters.
    pub fn market(&self) -> Market {
        match self.spec {
            ProductSpec::MaxCall { d, r, delta, sigma, x0, .. } => Market {
                d,
                spot: vec![x0; d],
                rate: r,
                dividend: delta,
                sigma: vec![sigma; d],
                rho: 0.0,
            },
            ProductSpec::Swap { d, r, delta, sigma_l, rho, .. } => Market {
                d,
                spot: vec![100.0; d],
                rate: r,
                dividend: delta,
                sigma: vec![sigma_l; d],
                rho,
            },
            ProductSpec::Put { r, delta, sigma, x0, .. } => Market {
                d: 1,
                spot: vec![x0],
                rate: r,
                dividend: delta,
                sigma: vec![sigma],
                rho: 0.0,
            },
        }
    }

    fn rate_for_count(&self, count: usize) -> f64 {
        if let ProductSpec::Swap { n1, n2, s1, s2, s3, .. } = self.spec {
            if count <= n1 {
                s1
            } else if count <= n2 {
                s2
            } else {
                s3
            }
        } else {
            0.0
        }
    }

    /// Undiscounted intrinsic value (call/put only).
    #[inline]
    pub fn intrinsic(&self, x: &[f64]) -> f64 {
        match self.spec {
            ProductSpec::MaxCall { strike, .. } => {
                let mx = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (mx - strike).max(0.0)
            }
            ProductSpec::Put { strike, .. } => (strike - x[0]).max(0.0),
            ProductSpec::Swap { .. } => 0.0,
        }
    }

    /// Discounted date-j net coupon for the swap at state x.
    #[inline]
    pub fn coupon(&self, x: &[f64], j: usize) -> f64 {
        if let ProductSpec::Swap { .. } = self.spec {
            let spot0 = 100.0;
            let bar = self.barrier * spot0;
            let count = x.iter().filter(|&&v| v <= bar).count();
            let a = self.rate_for_count(count);
            self.disc[j] * (self.coupon_flt - SWAP_NOTIONAL * a * self.dt)
        } else {
            0.0
        }
    }

    /// The known inception coupon C(0) (zero when disabled or not a swap).
    pub fn inception_value(&self) -> f64 {
        self.c0
    }

    /// Build per-path reward tables.
    pub fn build_tables(&self, paths: &PathSet) -> Result<Tables> {
        if paths.d != self.d() || paths.j_dates != self.n_dates() {
            return Err(Error::config("paths do not match product dimensions"));
        }
        let (n, jd) = (paths.n, paths.j_dates);
        let mut raw = vec![0.0; n * jd];
        let mut exercise = vec![0.0; n * jd];
        if self.is_swap() {
            for m in 0..n {
                let mut z = self.c0;
                for j in 0..jd {
                    let c = self.coupon(paths.state(m, j), j);
                    raw[j * n + m] = c;
                    z += c;
                    exercise[j * n + m] = z;
                }
            }
        } else {
            for m in 0..n {
                for j in 0..jd {
                    let v = self.intrinsic(paths.state(m, j));
                    raw[j * n + m] = v;
                    exercise[j * n + m] = self.disc[j] * v;
                }
            }
        }
        Ok(Tables { n, j_dates: jd, exercise, raw })
    }

    // ---- dynamic-programming hooks on precomputed tables ----

    /// Value compared against the continuation in the stopping rule.
    #[inline]
    pub fn dp_exercise(&self, t: &Tables, m: usize, j: usize) -> f64 {
        if self.is_swap() {
            0.0
        } else {
            t.exercise[j * t.n + m]
        }
    }

    /// Increment collected on arrival at date j (swap coupon; zero otherwise).
    #[inline]
    pub fn dp_increment(&self, t: &Tables, m: usize, j: usize) -> f64 {
        if self.is_swap() {
            t.raw[j * t.n + m]
        } else {
            0.0
        }
    }

    /// Reward part of the reinforced regressor nu at a date-`j_state` state,
    /// for the model fitted one date later (`date_next`).
    #[inline]
    pub fn nu_reward(&self, t: &Tables, m: usize, j_state: usize, date_next: usize) -> f64 {
        if self.is_swap() {
            0.0
        } else {
            self.disc[date_next] * t.raw[j_state * t.n + m]
        }
    }

    /// Scalar fed to basis families that take a payoff/coupon feature.
    #[inline]
    pub fn basis_aux(&self, t: &Tables, m: usize, j: usize) -> f64 {
        if self.is_swap() {
            t.raw[j * t.n + m]
        } else {
            t.exercise[j * t.n + m]
        }
    }

    // ---- the same hooks for fresh states (bounds, nested simulation) ----

    #[inline]
    pub fn dp_exercise_fresh(&self, x: &[f64], j: usize) -> f64 {
        if self.is_swap() {
            0.0
        } else {
            self.disc[j] * self.intrinsic(x)
        }
    }

    #[inline]
    pub fn nu_reward_fresh(&self, x: &[f64], date_next: usize) -> f64 {
        if self.is_swap() {
            0.0
        } else {
            self.disc[date_next] * self.intrinsic(x)
        }
    }

    #[inline]
    pub fn basis_aux_fresh(&self, x: &[f64], j: usize) -> f64 {
        if self.is_swap() {
            self.coupon(x, j)
        } else {
            self.disc[j] * self.intrinsic(x)
        }
    }

    /// Value collected when stopping at date j in state (x, carry).
    #[inline]
    pub fn stop_value_fresh(&self, x: &[f64], carry: f64, j: usize) -> f64 {
        if self.is_swap() {
            carry
        } else {
            self.disc[j] * self.intrinsic(x)
        }
    }

    /// Carry before the first date (aggregated coupons so far).
    #[inline]
    pub fn initial_carry(&self) -> f64 {
        self.c0
    }

    /// Advance the carry across arrival at date `j_next` in state `x_next`.
    #[inline]
    pub fn step_carry(&self, carry: f64, x_next: &[f64], j_next: usize) -> f64 {
        if self.is_swap() {
            carry + self.coupon(x_next, j_next)
        } else {
            carry
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::simulate;
    use crate::rng::{purpose, Stream};

    fn maxcall_spec(dates: usize) -> ProductSpec {
        ProductSpec::MaxCall {
            d: 2,
            strike: 100.0,
            r: 0.05,
            delta: 0.1,
            sigma: 0.2,
            x0: 100.0,
            maturity: 3.0,
            dates,
        }
    }

    fn swap_spec(inception: bool) -> ProductSpec {
        ProductSpec::Swap {
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
            inception_coupon: inception,
        }
    }

    #[test]
    fn maxcall_payoff_values() {
        let p = Product::new(maxcall_spec(1)).unwrap(); // single date at t = 3
        assert_eq!(p.intrinsic(&[110.0, 90.0]), 10.0);
        assert_eq!(p.intrinsic(&[95.0, 90.0]), 0.0);
        let v = p.dp_exercise_fresh(&[120.0, 90.0], 0);
        assert!((v - 17.214159528501156).abs() < 1e-12); // 20 e^{-0.15}
    }

    #[test]
    fn swap_coupon_golden_values() {
        let p = Product::new(swap_spec(true)).unwrap();
        // All assets at par: nothing below the 95 barrier, rate s1. Values
        // are quoted per 10^4 notional.
        let x = vec![100.0; 20];
        let c1 = p.coupon(&x, 0); // date t_1 = 0.5
        assert!((c1 - (-191.98858069607617)).abs() < 1e-10, "c1={c1}");
        assert!((p.inception_value() - (-196.8487947557114)).abs() < 1e-10);
        let q = Product::new(swap_spec(false)).unwrap();
        assert_eq!(q.inception_value(), 0.0);
    }

    #[test]
    fn swap_rate_thresholds() {
        let p = Product::new(swap_spec(true)).unwrap();
        let mut x = vec![100.0; 20];
        for l in 0..5 {
            x[l] = 90.0; // 5 below: still s1
        }
        let c = p.coupon(&x, 0);
        assert!((c - (-191.98858069607617)).abs() < 1e-10);
        x[5] = 90.0; // 6 below: s2
        let c2 = p.coupon(&x, 0);
        let expect2 =
            SWAP_NOTIONAL * (-0.05f64 * 0.5).exp() * ((0.05f64 * 0.5).exp() - 1.0 - 0.03 * 0.5);
        assert!((c2 - expect2).abs() < 1e-10);
        for l in 6..11 {
            x[l] = 90.0; // 11 below: s3 = 0, coupon positive
        }
        let c3 = p.coupon(&x, 0);
        assert!(c3 > 0.0);
    }

    #[test]
    fn swap_cumulative_telescopes() {
        let p = Product::new(swap_spec(true)).unwrap();
        let paths = simulate(&p.market(), &p.times, 50, Stream::new(3, purpose::TRAIN), 3).unwrap();
        let t = p.build_tables(&paths).unwrap();
        for m in 0..50 {
            let mut z = p.inception_value();
            for j in 0..10 {
                z += t.raw[j * 50 + m];
                assert!((t.exercise[j * 50 + m] - z).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_date_swap_table_is_the_first_coupon() {
        let mut spec = swap_spec(false);
        if let ProductSpec::Swap { dates, maturity, .. } = &mut spec {
            *dates = 1;
            *maturity = 0.5;
        }
        let p = Product::new(spec).unwrap();
        let paths = simulate(&p.market(), &p.times, 20, Stream::new(5, purpose::TRAIN), 5).unwrap();
        let t = p.build_tables(&paths).unwrap();
        for m in 0..20 {
            assert_eq!(t.exercise[m], t.raw[m]);
            assert_eq!(t.exercise[m], p.coupon(paths.state(m, 0), 0));
        }
    }

    #[test]
    fn discounting_applied_per_date() {
        let p = Product::new(maxcall_spec(9)).unwrap(); // t_j = j/3
        let paths = simulate(&p.market(), &p.times, 10, Stream::new(7, purpose::TRAIN), 7).unwrap();
        let t = p.build_tables(&paths).unwrap();
        for m in 0..10 {
            for j in 0..9 {
                let expect = (-0.05 * (j + 1) as f64 / 3.0).exp() * t.raw[j * 10 + m];
                assert!((t.exercise[j * 10 + m] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spec_serde_roundtrip() {
        let spec = swap_spec(true);
        let s = serde_json::to_string(&spec).unwrap();
        let back: ProductSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        // unknown variant tags and missing required fields are rejected
        let bad_tag = r#"{"type":"puut","K":100.0,"r":0.05,"sigma":0.2,"x0":100.0,"T":1.0,"J":4}"#;
        assert!(serde_json::from_str::<ProductSpec>(bad_tag).is_err());
        let missing = r#"{"type":"put","r":0.05,"sigma":0.2,"x0":100.0,"T":1.0,"J":4}"#;
        assert!(serde_json::from_str::<ProductSpec>(missing).is_err());
    }
}
