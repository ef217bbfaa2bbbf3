//! Backward induction: fits the continuation-value models date by date.
//!
//! Two response conventions are supported. The value-iteration form (TvR)
//! regresses max(exercise, fitted continuation) at the next date; the
//! Longstaff-Schwartz form (LS) regresses the pathwise cash flow realized by
//! the current estimated rule, using the full cross-section of paths.
//!
//! Reinforced variants append one extra regressor per backward step,
//! nu_j(x) = max(g_{j+1}(x), C_{j+1}(x)), built from the model fitted one
//! date later. Keeping that column available while stepping backwards
//! requires the bookkeeping below: continuation values of the *current*
//! model are maintained at every earlier date's states ("cont"), refreshed
//! in place after each fit, so each nu evaluation is one max plus one dot
//! product instead of a recursive chain.
//!
//! Everything here is sequential and allocation-reusing; parallelism lives
//! in path simulation and bound evaluation.

use serde::{Deserialize, Serialize};

use crate::basis::{validate_combo, BasisFamily};
use crate::error::{Error, Result};
use crate::market::PathSet;
use crate::products::{Product, ProductSpec, Tables};
use crate::regression::lstsq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    StandardTvr,
    ReinforcedTvr,
    StandardLs,
    ReinforcedLs,
}

impl Method {
    pub fn reinforced(&self) -> bool {
        matches!(self, Method::ReinforcedTvr | Method::ReinforcedLs)
    }

    pub fn is_ls(&self) -> bool {
        matches!(self, Method::StandardLs | Method::ReinforcedLs)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::StandardTvr => "standard-tvr",
            Method::ReinforcedTvr => "reinforced-tvr",
            Method::StandardLs => "standard-ls",
            Method::ReinforcedLs => "reinforced-ls",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "standard-tvr" | "standard" => Ok(Method::StandardTvr),
            "reinforced-tvr" | "reinforced" => Ok(Method::ReinforcedTvr),
            "standard-ls" => Ok(Method::StandardLs),
            "reinforced-ls" => Ok(Method::ReinforcedLs),
            _ => Err(Error::config(format!("unknown method '{s}'"))),
        }
    }
}

/// Per-date regression diagnostics, one log line each.
#[derive(Clone, Debug, Serialize)]
pub struct DateDiag {
    pub date: usize,
    pub rank: usize,
    pub ssr: f64,
    pub resid_norm: f64,
    pub cond: f64,
}

/// Fitted continuation-value model: one coefficient vector per fitting date
/// j = 0..J-2 (the last date needs none). Serialized as versioned JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationModel {
    pub schema_version: u32,
    pub product: ProductSpec,
    pub basis: BasisFamily,
    pub method: Method,
    pub n_train: usize,
    pub seed: u64,
    pub coeffs: Vec<Vec<f64>>,
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

impl ContinuationModel {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<ContinuationModel> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let m: ContinuationModel = serde_json::from_reader(f)?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "model schema version {} unsupported (expected {MODEL_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

/// Result of training: the serializable model plus in-sample arrays that the
/// test-suite invariants and diagnostics lean on.
#[derive(Clone, Debug)]
pub struct Trained {
    pub model: ContinuationModel,
    /// Continuation values at training states, column-major [j*n + m]; after
    /// training, column j holds C_{N,j} evaluated at the date-j states.
    pub cont: Vec<f64>,
    pub tables: Tables,
    pub diagnostics: Vec<DateDiag>,
}

/// Estimated working-set size for a training run, with the contributing
/// terms named so cap violations are actionable.
pub fn estimate_train_bytes(n: usize, j_dates: usize, d: usize, k_eff: usize) -> (usize, String) {
    let paths = 8 * n * j_dates * d;
    let tables = 8 * n * j_dates * 2;
    let psi = 8 * n * j_dates * k_eff;
    let cont = 8 * n * j_dates;
    let design = 8 * n * (k_eff + 2);
    let total = paths + tables + psi + cont + design;
    let detail = format!(
        "paths N*J*d = {paths}, reward tables 2*N*J = {tables}, basis tensor N*J*K = {psi}, \
         continuation N*J = {cont}, design N*(K+2) = {design}"
    );
    (total, detail)
}

/// Fit continuation models on `paths`. `on_date` fires once per fitted date
/// (from the last date backwards) with that date's regression diagnostics.
pub fn train(
    product: &Product,
    paths: &PathSet,
    method: Method,
    family: BasisFamily,
    memory_cap_mb: usize,
    mut on_date: impl FnMut(&DateDiag),
) -> Result<Trained> {
    validate_combo(product.is_swap(), family, method.reinforced())?;
    let n = paths.n;
    let jd = paths.j_dates;
    let d = product.d();
    let k = family.size(d);
    let k_eff = k + method.reinforced() as usize;
    if n < k_eff {
        return Err(Error::config(format!(
            "need at least K+1 = {k_eff} training paths, got {n}"
        )));
    }
    let (bytes, detail) = estimate_train_bytes(n, jd, d, k_eff);
    if bytes > memory_cap_mb * 1024 * 1024 {
        return Err(Error::Memory(format!(
            "training would need ~{} MB > cap {memory_cap_mb} MB ({detail})",
            bytes / (1024 * 1024)
        )));
    }

    let tables = product.build_tables(paths)?;

    // Precompute the basis tensor psi[(j*K + k)*n + m]: every basis function
    // at every (path, date), evaluated exactly once.
    let mut psi = vec![0.0f64; n * jd * k];
    {
        let mut scratch = Vec::with_capacity(d);
        let mut feat = vec![0.0f64; k];
        for m in 0..n {
            for j in 0..jd {
                let aux = product.basis_aux(&tables, m, j);
                family.eval(paths.state(m, j), aux, &mut scratch, &mut feat);
                for (kk, &v) in feat.iter().enumerate() {
                    psi[(j * k + kk) * n + m] = v;
                }
            }
        }
    }

    let mut cont = vec![0.0f64; n * jd];
    let mut coeffs: Vec<Vec<f64>> = vec![Vec::new(); jd.saturating_sub(1)];
    let mut diagnostics = Vec::new();

    // LS pathwise cash flows: value realized from the current date onward
    // under the estimated rule. Initialized at the forced final date.
    let mut carry = vec![0.0f64; if method.is_ls() { n } else { 0 }];
    if method.is_ls() {
        for m in 0..n {
            carry[m] =
                product.dp_increment(&tables, m, jd - 1) + product.dp_exercise(&tables, m, jd - 1);
        }
    }

    let mut design = vec![0.0f64; n * k_eff];
    let mut resp = vec![0.0f64; n];
    let mut acc = vec![0.0f64; n];

    for fit in (0..jd.saturating_sub(1)).rev() {
        // Design: the fixed family at the date-`fit` states, plus (when
        // reinforced) nu = max(g_{fit+1}(x), C_{fit+1}(x)) at those states.
        design[..n * k].copy_from_slice(&psi[fit * k * n..(fit * k + k) * n]);
        if method.reinforced() {
            let (cn, dn) = (&cont[fit * n..(fit + 1) * n], &mut design[k * n..]);
            for m in 0..n {
                dn[m] = product.nu_reward(&tables, m, fit, fit + 1).max(cn[m]);
            }
        }

        // Response at the next date.
        if method.is_ls() {
            for m in 0..n {
                resp[m] = product.dp_increment(&tables, m, fit + 1) + carry[m];
            }
        } else {
            let cnext = &cont[(fit + 1) * n..(fit + 2) * n];
            for m in 0..n {
                resp[m] = product.dp_increment(&tables, m, fit + 1)
                    + product.dp_exercise(&tables, m, fit + 1).max(cnext[m]);
            }
        }
        if resp.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite response at date {fit}")));
        }

        let mut work_y = resp.clone();
        let fitres = lstsq(&mut design, n, k_eff, &mut work_y)?;
        let diag = DateDiag {
            date: fit,
            rank: fitres.rank,
            ssr: fitres.ssr,
            resid_norm: (fitres.ssr / n as f64).sqrt(),
            cond: fitres.cond,
        };
        on_date(&diag);
        diagnostics.push(diag);
        let gamma = fitres.coeffs;

        // Refresh the stored continuation values at every date l <= fit so
        // they reflect the newly fitted model (bookkeeping invariant).
        for l in (0..=fit).rev() {
            for a in acc.iter_mut() {
                *a = 0.0;
            }
            for kk in 0..k {
                let g = gamma[kk];
                let col = &psi[(l * k + kk) * n..(l * k + kk + 1) * n];
                for m in 0..n {
                    acc[m] += g * col[m];
                }
            }
            let cl = &mut cont[l * n..(l + 1) * n];
            if method.reinforced() {
                let g = gamma[k];
                for m in 0..n {
                    let nu = product.nu_reward(&tables, m, l, fit + 1).max(cl[m]);
                    cl[m] = acc[m] + g * nu;
                }
            } else {
                cl.copy_from_slice(&acc);
            }
        }

        coeffs[fit] = gamma;

        // LS: roll the realized cash flow through the date-`fit` decision.
        if method.is_ls() {
            let cf = &cont[fit * n..(fit + 1) * n];
            for m in 0..n {
                let ex = product.dp_exercise(&tables, m, fit);
                carry[m] = product.dp_increment(&tables, m, fit)
                    + if ex >= cf[m] { ex } else { carry[m] };
            }
        }
    }

    let model = ContinuationModel {
        schema_version: MODEL_SCHEMA_VERSION,
        product: product.spec.clone(),
        basis: family,
        method,
        n_train: n,
        seed: paths.seed,
        coeffs,
    };
    Ok(Trained { model, cont, tables, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::simulate;
    use crate::rng::{purpose, Stream};

    fn put_product(dates: usize) -> Product {
        Product::new(ProductSpec::Put {
            strike: 100.0,
            r: 0.05,
            delta: 0.0,
            sigma: 0.2,
            x0: 100.0,
            maturity: 1.0,
            dates,
        })
        .unwrap()
    }

    /// Fixture: 10 hand-picked 1-asset paths on the grid (0.25, 0.5, 0.75),
    /// K = 100, r = 0.05, basis {1, x}. Standard TvR coefficients and the
    /// date-0 continuation values were computed independently with exact
    /// rational arithmetic and frozen.
    fn fixture_paths() -> PathSet {
        let rows: [[f64; 3]; 10] = [
            [96.0, 101.0, 93.0],
            [104.0, 108.0, 112.0],
            [99.0, 94.0, 90.0],
            [101.0, 98.0, 104.0],
            [93.0, 87.0, 85.0],
            [107.0, 111.0, 106.0],
            [98.0, 103.0, 99.0],
            [102.0, 97.0, 95.0],
            [95.0, 92.0, 97.0],
            [100.0, 105.0, 110.0],
        ];
        let mut data = Vec::new();
        for r in rows {
            data.extend_from_slice(&r);
        }
        PathSet {
            n: 10,
            j_dates: 3,
            d: 1,
            seed: 0,
            times: vec![0.25, 0.5, 0.75],
            data,
        }
    }

    fn fixture_product() -> Product {
        Product::new(ProductSpec::Put {
            strike: 100.0,
            r: 0.05,
            delta: 0.0,
            sigma: 0.2,
            x0: 100.0,
            maturity: 0.75,
            dates: 3,
        })
        .unwrap()
    }

    #[test]
    fn tvr_fixture_coefficients_and_continuations() {
        let p = fixture_product();
        let paths = fixture_paths();
        let tr = train(&p, &paths, Method::StandardTvr, BasisFamily::Linear, 1024, |_| {}).unwrap();
        let g2 = &tr.model.coeffs[1];
        assert!((g2[0] - 55.25201935033793).abs() < 1e-9, "{g2:?}");
        assert!((g2[1] - (-0.5150895806996241)).abs() < 1e-11);
        let g1 = &tr.model.coeffs[0];
        assert!((g1[0] - 74.72519507935505).abs() < 1e-9);
        assert!((g1[1] - (-0.7067543690126203)).abs() < 1e-11);
        let want_c0 = [
            6.876775654143501,
            1.222740702042529,
            4.756512547105629,
            3.343003809080386,
            8.997038761181358,
            -0.8975224049953283,
            5.463266916118258,
            2.636249440067772,
            7.583530023156115,
            4.049758178093015,
        ];
        for m in 0..10 {
            assert!(
                (tr.cont[n_at(0, m, 10)] - want_c0[m]).abs() < 1e-9,
                "path {m}: {} vs {}",
                tr.cont[n_at(0, m, 10)],
                want_c0[m]
            );
        }
    }

    fn n_at(j: usize, m: usize, n: usize) -> usize {
        j * n + m
    }

    /// LS fixture: 8 paths, 2 dates (0.5, 1.0), frozen gamma and cash flows.
    #[test]
    fn ls_fixture_matches_frozen_values() {
        let rows: [[f64; 2]; 8] = [
            [97.0, 97.0],
            [103.0, 106.0],
            [94.0, 99.0],
            [106.0, 102.0],
            [99.0, 96.0],
            [92.0, 88.0],
            [101.0, 104.0],
            [96.0, 101.0],
        ];
        let mut data = Vec::new();
        for r in rows {
            data.extend_from_slice(&r);
        }
        let paths = PathSet { n: 8, j_dates: 2, d: 1, seed: 0, times: vec![0.5, 1.0], data };
        let p = put_product(2);
        let tr = train(&p, &paths, Method::StandardLs, BasisFamily::Linear, 1024, |_| {}).unwrap();
        let g = &tr.model.coeffs[0];
        assert!((g[0] - 54.093452500422096).abs() < 1e-9);
        assert!((g[1] - (-0.5250292278088357)).abs() < 1e-11);
    }

    #[test]
    fn reinforced_bookkeeping_with_zero_weight_matches_standard() {
        // The reinforced machinery must reduce to the standard fit when the
        // nu column carries no information: compare a standard run against a
        // run where nu is present but its fitted weight is forced irrelevant
        // by construction (nu identically zero happens for the swap at the
        // last backward step; here we check the general identity instead:
        // fitted values from the bookkeeping refresh equal a direct
        // prediction with the same coefficients).
        let p = put_product(4);
        let paths = simulate(&p.market(), &p.times, 600, Stream::new(4, purpose::TRAIN), 4).unwrap();
        let tr = train(&p, &paths, Method::StandardTvr, BasisFamily::Quadratic, 1024, |_| {}).unwrap();
        // Direct prediction at date j states with gamma_j must equal cont.
        let fam = BasisFamily::Quadratic;
        let k = fam.size(1);
        let t = p.build_tables(&paths).unwrap();
        let mut scratch = Vec::new();
        let mut feat = vec![0.0; k];
        for j in 0..3 {
            for m in 0..600 {
                let aux = p.basis_aux(&t, m, j);
                fam.eval(paths.state(m, j), aux, &mut scratch, &mut feat);
                let pred: f64 =
                    feat.iter().zip(&tr.model.coeffs[j]).map(|(a, b)| a * b).sum();
                let stored = tr.cont[j * 600 + m];
                assert!((pred - stored).abs() < 1e-12, "j={j} m={m}");
            }
        }
    }

    #[test]
    fn single_date_product_trains_to_empty_model() {
        let p = put_product(1);
        let paths = simulate(&p.market(), &p.times, 50, Stream::new(6, purpose::TRAIN), 6).unwrap();
        let tr = train(&p, &paths, Method::StandardTvr, BasisFamily::Linear, 1024, |_| {}).unwrap();
        assert!(tr.model.coeffs.is_empty());
        assert!(tr.cont.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn model_json_roundtrip() {
        let p = put_product(3);
        let paths = simulate(&p.market(), &p.times, 200, Stream::new(8, purpose::TRAIN), 8).unwrap();
        let tr = train(&p, &paths, Method::ReinforcedTvr, BasisFamily::Linear, 1024, |_| {}).unwrap();
        let tmp = std::env::temp_dir().join("restop_model_roundtrip.json");
        tr.model.save(&tmp).unwrap();
        let back = ContinuationModel::load(&tmp).unwrap();
        std::fs::remove_file(&tmp).ok();
        assert_eq!(back.coeffs.len(), tr.model.coeffs.len());
        for (a, b) in back.coeffs.iter().flatten().zip(tr.model.coeffs.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn memory_cap_is_enforced_with_term_breakdown() {
        let p = put_product(4);
        let paths = simulate(&p.market(), &p.times, 500, Stream::new(9, purpose::TRAIN), 9).unwrap();
        let err = train(&p, &paths, Method::StandardTvr, BasisFamily::Linear, 0, |_| {}).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("basis tensor"), "{msg}");
        assert!(msg.contains("N*J*K"), "{msg}");
    }

    #[test]
    fn response_sanity_tvr_last_step_regresses_exercise() {
        // With one fitting date (J = 2) and zero initial continuation, the
        // TvR response is exactly the date-1 exercise value.
        let p = put_product(2);
        let paths = simulate(&p.market(), &p.times, 400, Stream::new(10, purpose::TRAIN), 10).unwrap();
        let t = p.build_tables(&paths).unwrap();
        let tr = train(&p, &paths, Method::StandardTvr, BasisFamily::Linear, 1024, |_| {}).unwrap();
        // Compare against an independent direct least-squares fit of g_1.
        let k = 2;
        let n = 400;
        let mut a = vec![0.0; n * k];
        let mut scratch = Vec::new();
        let mut feat = vec![0.0; k];
        for m in 0..n {
            BasisFamily::Linear.eval(paths.state(m, 0), 0.0, &mut scratch, &mut feat);
            a[m] = feat[0];
            a[n + m] = feat[1];
        }
        let mut y: Vec<f64> = (0..n).map(|m| t.exercise[n + m]).collect();
        let direct = lstsq(&mut a, n, k, &mut y).unwrap();
        for (da, db) in direct.coeffs.iter().zip(&tr.model.coeffs[0]) {
            assert!((da - db).abs() < 1e-12);
        }
    }
}
