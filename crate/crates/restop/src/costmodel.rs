//! Symbolic cost accounting for the reinforced and standard regression
//! pipelines, plus the two cost ratios used to argue when reinforcement is
//! worthwhile.
//!
//! Costs are expressed in abstract units: `c_f` per basis/payoff function
//! evaluation and `c_star` per fused add-multiply. The formulas are treated
//! as exact expressions (not asymptotic bounds) so they can be unit-tested;
//! no proportionality constants beyond the displayed terms are modeled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_b() -> usize {
    1
}

/// Inputs to the cost model. `k` is the fixed-basis size of the standard
/// method, `k_r` the (usually smaller) fixed-basis size used with
/// reinforcement, and `b` the number of reinforced regressors appended per
/// backward step (1 in this implementation).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    pub c_f: f64,
    pub c_star: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_test")]
    pub n_test: usize,
    #[serde(rename = "J")]
    pub j_dates: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "K_r")]
    pub k_r: usize,
    #[serde(default = "default_b")]
    pub b: usize,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.c_f < 0.0 || self.c_star < 0.0 {
            return Err(Error::config("unit costs must be nonnegative"));
        }
        if self.n == 0 || self.j_dates == 0 || self.k == 0 || self.k_r == 0 {
            return Err(Error::config("counts N, J, K, K_r must be positive"));
        }
        Ok(())
    }

    /// Reinforcement on a basis at least as large as the standard one saves
    /// nothing; the configuration is legal but deserves a warning.
    pub fn reinforcement_warning(&self) -> Option<String> {
        (self.k_r >= self.k).then(|| {
            format!(
                "K_r = {} >= K = {}: the reinforced basis is not smaller than the \
                 standard one, so reinforcement saves no cost",
                self.k_r, self.k
            )
        })
    }
}

/// Training cost of the reinforced algorithm with fixed-basis size `k`
/// (pass `K_r`): N J^2 c_f / 2 + N J K c_f + N J K^2 c_* + N J^2 K c_* / 2.
pub fn reinforced_training_cost(n: usize, j: usize, k: usize, c_f: f64, c_star: f64) -> f64 {
    let (n, j, k) = (n as f64, j as f64, k as f64);
    0.5 * n * j * j * c_f + n * j * k * c_f + n * j * k * k * c_star + 0.5 * n * j * j * k * c_star
}

/// Training cost of plain regression with fixed-basis size `k` (pass `K`):
/// N J K c_f + N J K^2 c_*.
pub fn standard_training_cost(n: usize, j: usize, k: usize, c_f: f64, c_star: f64) -> f64 {
    let (n, j, k) = (n as f64, j as f64, k as f64);
    n * j * k * c_f + n * j * k * k * c_star
}

/// Cost of evaluating the trained reinforced model on `n_test` fresh paths
/// through the backward chain: N_test J K c_f + J^2 N_test c_f / 2
/// + N_test K J^2 c_* / 2, with `k` the model's fixed-basis size.
pub fn evaluation_cost(n_test: usize, j: usize, k: usize, c_f: f64, c_star: f64) -> f64 {
    let (n, j, k) = (n_test as f64, j as f64, k as f64);
    n * j * k * c_f + 0.5 * j * j * n * c_f + 0.5 * n * k * j * j * c_star
}

/// Predicted costs for one experiment, reported alongside measured timings.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CostPrediction {
    pub reinforced_training: f64,
    pub standard_training: f64,
    pub evaluation: f64,
    pub training_ratio: f64,
    pub evaluation_ratio: f64,
}

/// The two ratios of reinforced to standard cost:
/// training (K_r + J/2)/K * (1 + K_r c_*/c_f) / (1 + K c_*/c_f),
/// evaluation (K_r + J/2)/K + (J K_r / K) c_*/c_f / 2.
pub fn cost_ratios(p: &CostParams) -> Result<(f64, f64)> {
    p.validate()?;
    if p.c_f == 0.0 {
        return Err(Error::numerical("cost ratios are undefined for c_f = 0"));
    }
    let (j, k, k_r) = (p.j_dates as f64, p.k as f64, p.k_r as f64);
    let q = p.c_star / p.c_f;
    let training = (k_r + 0.5 * j) / k * (1.0 + k_r * q) / (1.0 + k * q);
    let evaluation = (k_r + 0.5 * j) / k + 0.5 * (j * k_r / k) * q;
    Ok((training, evaluation))
}

pub fn predict(p: &CostParams) -> Result<CostPrediction> {
    let (training_ratio, evaluation_ratio) = cost_ratios(p)?;
    Ok(CostPrediction {
        reinforced_training: reinforced_training_cost(p.n, p.j_dates, p.k_r, p.c_f, p.c_star),
        standard_training: standard_training_cost(p.n, p.j_dates, p.k, p.c_f, p.c_star),
        evaluation: evaluation_cost(p.n_test, p.j_dates, p.k_r, p.c_f, p.c_star),
        training_ratio,
        evaluation_ratio,
    })
}

/// The max-call headline ratio (2d + J) / (d (d + 1)) as a reduced fraction:
/// linear reinforced basis (K_r = d + 1, plus the date count from the
/// backward chain) against the standard quadratic basis (K ~ d^2/2).
pub fn headline_ratio(d: u64, j: u64) -> (u64, u64) {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    let num = 2 * d + j;
    let den = d * (d + 1);
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CostParams {
        CostParams { c_f: 3.0, c_star: 2.0, n: 1000, n_test: 2000, j_dates: 9, k: 66, k_r: 3, b: 1 }
    }

    #[test]
    fn hand_examples_are_exact() {
        // N=1, J=2, K=1, c_f=c_*=1: 1/2*4 + 2 + 2 + 1/2*4 = 8.
        assert_eq!(reinforced_training_cost(1, 2, 1, 1.0, 1.0), 8.0);
        // N=1, J=1, K=2, c_f=c_*=1: 2 + 4 = 6.
        assert_eq!(standard_training_cost(1, 1, 2, 1.0, 1.0), 6.0);
        // N_test=1, J=2, K=1, c_f=c_*=1: 2 + 2 + 2 = 6.
        assert_eq!(evaluation_cost(1, 2, 1, 1.0, 1.0), 6.0);
        // Zero unit costs zero everything.
        assert_eq!(reinforced_training_cost(5, 3, 2, 0.0, 0.0), 0.0);
        assert_eq!(standard_training_cost(5, 3, 2, 0.0, 0.0), 0.0);
        assert_eq!(evaluation_cost(5, 3, 2, 0.0, 0.0), 0.0);
        // Linearity in the path counts.
        assert_eq!(
            reinforced_training_cost(2, 4, 3, 1.5, 0.5),
            2.0 * reinforced_training_cost(1, 4, 3, 1.5, 0.5)
        );
        assert_eq!(
            standard_training_cost(6, 4, 3, 1.5, 0.5),
            2.0 * standard_training_cost(3, 4, 3, 1.5, 0.5)
        );
        assert_eq!(
            evaluation_cost(8, 4, 3, 1.5, 0.5),
            2.0 * evaluation_cost(4, 4, 3, 1.5, 0.5)
        );
    }

    #[test]
    fn ratios_match_the_displayed_formulas_and_the_cost_quotients() {
        let p = params();
        let (tr, ev) = cost_ratios(&p).unwrap();
        // The displayed ratio formulas are algebraically the quotients of
        // the cost formulas (training) and of chain evaluation over plain
        // prediction N_test*J*K*c_f (evaluation).
        let quo_tr = reinforced_training_cost(p.n, p.j_dates, p.k_r, p.c_f, p.c_star)
            / standard_training_cost(p.n, p.j_dates, p.k, p.c_f, p.c_star);
        assert!((tr - quo_tr).abs() < 1e-12 * quo_tr);
        let quo_ev = evaluation_cost(p.n_test, p.j_dates, p.k_r, p.c_f, p.c_star)
            / (p.n_test as f64 * p.j_dates as f64 * p.k as f64 * p.c_f);
        assert!((ev - quo_ev).abs() < 1e-12 * quo_ev);
    }

    #[test]
    fn ratio_degenerate_cases() {
        // K_r = K, c_* = 0, J -> 0: training ratio 1 (formula limit).
        let p = CostParams { c_f: 1.0, c_star: 0.0, n: 1, n_test: 1, j_dates: 1, k: 4, k_r: 4, b: 1 };
        let (tr, ev) = cost_ratios(&p).unwrap();
        let expect_tr = (4.0 + 0.5) / 4.0; // J=1 leaves the J/2 overhead
        assert!((tr - expect_tr).abs() < 1e-15);
        assert!((ev - expect_tr).abs() < 1e-15); // c_*=0 second term vanishes
        let bad = CostParams { c_f: 0.0, ..p };
        assert!(cost_ratios(&bad).is_err());
    }

    #[test]
    fn headline_max_call_ratio() {
        assert_eq!(headline_ratio(10, 9), (29, 110));
        let (n, d) = headline_ratio(10, 9);
        assert!((n as f64 / d as f64 - 0.2636363636363636).abs() < 1e-15);
        assert_eq!(headline_ratio(2, 9), (13, 6));
        assert_eq!(headline_ratio(20, 9), (7, 60)); // 49/420 reduced
    }

    #[test]
    fn costs_are_monotone_in_every_parameter() {
        let base = (1000usize, 9usize, 6usize, 2.0f64, 1.0f64);
        let f = |n, j, k, cf, cs| {
            [
                reinforced_training_cost(n, j, k, cf, cs),
                standard_training_cost(n, j, k, cf, cs),
                evaluation_cost(n, j, k, cf, cs),
            ]
        };
        let v0 = f(base.0, base.1, base.2, base.3, base.4);
        let bumps = [
            f(base.0 + 500, base.1, base.2, base.3, base.4),
            f(base.0, base.1 + 3, base.2, base.3, base.4),
            f(base.0, base.1, base.2 + 4, base.3, base.4),
            f(base.0, base.1, base.2, base.3 + 1.0, base.4),
            f(base.0, base.1, base.2, base.3, base.4 + 1.0),
        ];
        for b in bumps {
            for (lo, hi) in v0.iter().zip(b.iter()) {
                assert!(hi >= lo);
            }
        }
    }

    #[test]
    fn removing_backward_terms_with_equal_bases_recovers_standard() {
        for (n, j, k) in [(1usize, 2usize, 1usize), (700, 9, 6), (31, 4, 12)] {
            for (cf, cs) in [(1.0, 1.0), (3.0, 0.25)] {
                let reinforced = reinforced_training_cost(n, j, k, cf, cs);
                let j_terms = 0.5 * (n as f64) * (j as f64) * (j as f64) * cf
                    + 0.5 * (n as f64) * (j as f64) * (j as f64) * (k as f64) * cs;
                let standard = standard_training_cost(n, j, k, cf, cs);
                assert_eq!(reinforced - j_terms, standard);
            }
        }
    }

    #[test]
    fn oversized_reinforced_basis_is_flagged() {
        let mut p = params();
        assert!(p.reinforcement_warning().is_none());
        p.k_r = p.k;
        assert!(p.reinforcement_warning().unwrap().contains("saves no cost"));
        p.k_r = p.k + 5;
        assert!(p.reinforcement_warning().is_some());
    }

    #[test]
    fn validation_rejects_degenerate_counts() {
        let mut p = params();
        p.n = 0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.c_f = -1.0;
        assert!(p.validate().is_err());
    }

    /// Smoke-level performance check: measured training wall-clock scales
    /// linearly in N within +-25% over a 4x range. Uses the median of
    /// several repetitions to damp scheduler noise.
    #[test]
    fn training_wall_clock_is_linear_in_n() {
        use crate::backward::{train, Method};
        use crate::basis::BasisFamily;
        use crate::market::simulate;
        use crate::products::{Product, ProductSpec};
        use crate::rng::{purpose, Stream};

        let p = Product::new(ProductSpec::MaxCall {
            d: 2,
            strike: 100.0,
            r: 0.05,
            delta: 0.1,
            sigma: 0.2,
            x0: 100.0,
            maturity: 3.0,
            dates: 9,
        })
        .unwrap();
        let time_one = |n: usize| -> f64 {
            let paths = simulate(&p.market(), &p.times, n, Stream::new(3, purpose::TRAIN), 3).unwrap();
            let mut samples: Vec<f64> = (0..5)
                .map(|_| {
                    let t0 = std::time::Instant::now();
                    let tr =
                        train(&p, &paths, Method::ReinforcedTvr, BasisFamily::Quadratic, 2048, |_| {})
                            .unwrap();
                    let dt = t0.elapsed().as_secs_f64();
                    assert!(tr.model.coeffs.len() == 8);
                    dt
                })
                .collect();
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            samples[2]
        };
        time_one(4000); // warm up allocator and caches
        let t1 = time_one(8000);
        let t4 = time_one(32000);
        let ratio = t4 / (4.0 * t1);
        assert!(
            (0.75..=1.25).contains(&ratio),
            "wall clock not linear: t(N)={t1:.4}s t(4N)={t4:.4}s ratio {ratio:.3}"
        );
    }
}
