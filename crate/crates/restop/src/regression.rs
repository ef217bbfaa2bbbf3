//! Linear least squares via Householder QR with column pivoting.
//!
//! Column-major storage (k columns of length n). Pivoting makes the solver
//! robust to rank deficiency: once the working column norm falls below a
//! relative threshold the remaining directions are truncated and their
//! coefficients set to zero, which keeps fitted values well defined when a
//! basis function is (numerically) redundant — e.g. the reinforced column at
//! the first backward step, which is identically zero for the swap.
//!
//! Deterministic by construction: no parallelism, no order ambiguity.

use crate::error::{Error, Result};

/// Relative pivot threshold for rank truncation.
const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FitResult {
    pub coeffs: Vec<f64>,
    pub rank: usize,
    /// Sum of squared residuals.
    pub ssr: f64,
    /// |R_11| / |R_rr|: crude spread of the retained pivots.
    pub cond: f64,
}

/// Solve min ||A x - y||_2. `a` is column-major (k columns of length n) and is
/// destroyed; `y` (length n) is destroyed too.
pub fn lstsq(a: &mut [f64], n: usize, k: usize, y: &mut [f64]) -> Result<FitResult> {
    if a.len() != n * k || y.len() != n {
        return Err(Error::config("lstsq: shape mismatch"));
    }
    if n < k {
        return Err(Error::config(format!(
            "lstsq: need at least as many rows as columns (n={n} < k={k})"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("lstsq: non-finite entries in design or response"));
    }

    let mut perm: Vec<usize> = (0..k).collect();
    // Squared working norms, downdated as reflections are applied.
    let mut norms2: Vec<f64> = (0..k)
        .map(|c| a[c * n..(c + 1) * n].iter().map(|v| v * v).sum())
        .collect();
    let orig_norms2 = norms2.clone();
    let max_norm = norms2.iter().cloned().fold(0.0, f64::max).sqrt();

    let mut rank = k;
    let mut first_pivot = 0.0;
    let mut last_pivot = 0.0;

    for s in 0..k {
        // Choose the remaining column with the largest working norm.
        let (mut piv, mut best) = (s, -1.0);
        for c in s..k {
            if norms2[c] > best {
                best = norms2[c];
                piv = c;
            }
        }
        // Refresh the downdated norm (guards against cancellation drift).
        let fresh: f64 = a[piv * n + s..(piv + 1) * n].iter().map(|v| v * v).sum();
        norms2[piv] = fresh;
        if fresh.sqrt() <= RANK_TOL * max_norm.max(1e-300) {
            rank = s;
            break;
        }
        if piv != s {
            a.swap_ranges_cols(n, s, piv);
            norms2.swap(s, piv);
            perm.swap(s, piv);
            // orig norms travel with their columns for the refresh heuristic
        }

        // Householder vector for rows s.. of column s.
        let col = &mut a[s * n + s..(s + 1) * n];
        let sigma = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if col[0] >= 0.0 { -sigma } else { sigma };
        col[0] -= alpha; // v = x - alpha e1, stored in place
        let vtv: f64 = col.iter().map(|v| v * v).sum();
        let pivot_abs = sigma;
        if s == 0 {
            first_pivot = pivot_abs;
        }
        last_pivot = pivot_abs;

        if vtv > 0.0 {
            // Apply H = I - 2 v v^T / v^T v to the remaining columns and y.
            for c in (s + 1)..k {
                let (left, right) = a.split_at_mut(c * n);
                let v = &left[s * n + s..s * n + n];
                let tail = &mut right[s..n];
                let dot: f64 = v.iter().zip(tail.iter()).map(|(x, w)| x * w).sum();
                let f = 2.0 * dot / vtv;
                for (w, x) in tail.iter_mut().zip(v.iter()) {
                    *w -= f * x;
                }
            }
            {
                let v = &a[s * n + s..(s + 1) * n];
                let tail = &mut y[s..n];
                let dot: f64 = v.iter().zip(tail.iter()).map(|(x, w)| x * w).sum();
                let f = 2.0 * dot / vtv;
                for (w, x) in tail.iter_mut().zip(v.iter()) {
                    *w -= f * x;
                }
            }
        }
        // R diagonal entry; the strictly-lower part of this column is spent.
        a[s * n + s] = alpha;

        // Downdate working norms of the remaining columns.
        for c in (s + 1)..k {
            let t = a[c * n + s];
            norms2[c] -= t * t;
            if norms2[c] < 1e-10 * orig_norms2[perm[c]].max(1e-300) || norms2[c] < 0.0 {
                norms2[c] = a[c * n + s + 1..(c + 1) * n].iter().map(|v| v * v).sum();
            }
        }
    }

    // Back-substitute on the rank x rank upper triangle.
    let mut beta = vec![0.0; k];
    for i in (0..rank).rev() {
        let mut s = y[i];
        for j in (i + 1)..rank {
            s -= a[j * n + i] * beta[j];
        }
        let rii = a[i * n + i];
        if rii == 0.0 || !rii.is_finite() {
            return Err(Error::numerical("lstsq: zero pivot in back substitution"));
        }
        beta[i] = s / rii;
    }

    let ssr: f64 = y[rank..n].iter().map(|v| v * v).sum();

    // Undo the column permutation.
    let mut coeffs = vec![0.0; k];
    for (pos, &orig) in perm.iter().enumerate() {
        if pos < rank {
            coeffs[orig] = beta[pos];
        }
    }
    let cond = if rank > 0 && last_pivot > 0.0 { first_pivot / last_pivot } else { f64::INFINITY };
    Ok(FitResult { coeffs, rank, ssr, cond })
}

/// Swap two equal-length column slices of a column-major matrix.
trait SwapCols {
    fn swap_ranges_cols(&mut self, n: usize, c1: usize, c2: usize);
}

impl SwapCols for [f64] {
    fn swap_ranges_cols(&mut self, n: usize, c1: usize, c2: usize) {
        debug_assert_ne!(c1, c2);
        let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
        let (a, b) = self.split_at_mut(hi * n);
        a[lo * n..lo * n + n].swap_with_slice(&mut b[..n]);
    }
}
