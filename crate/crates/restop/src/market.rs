//! Correlated geometric Brownian motion simulation and path storage.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Risk-neutral GBM market: d assets with common pairwise correlation.
#[derive(Clone, Debug)]
pub struct Market {
    pub d: usize,
    pub spot: Vec<f64>,
    pub rate: f64,
    pub dividend: f64,
    pub sigma: Vec<f64>,
    pub rho: f64,
}

impl Market {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.spot.len() != self.d || self.sigma.len() != self.d {
            return Err(Error::config("market: dimension/spot/sigma mismatch"));
        }
        if self.spot.iter().any(|&s| s <= 0.0) || self.sigma.iter().any(|&s| s < 0.0) {
            return Err(Error::config("market: spots must be positive, vols nonnegative"));
        }
        // The constant-correlation matrix is PSD iff rho in [-1/(d-1), 1].
        let lo = if self.d > 1 { -1.0 / (self.d as f64 - 1.0) } else { -1.0 };
        if !(self.rho <= 1.0 && self.rho > lo) {
            return Err(Error::config(format!(
                "market: rho {} outside ({lo}, 1] for d={}",
                self.rho, self.d
            )));
        }
        Ok(())
    }

    /// Lower-triangular Cholesky factor of the correlation matrix, row-major.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let d = self.d;
        let mut l = vec![0.0; d * d];
        if (self.rho - 1.0).abs() < 1e-15 {
            // Perfectly correlated: single common factor.
            for row in 0..d {
                l[row * d] = 1.0;
            }
            return Ok(l);
        }
        let mut a = vec![self.rho; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        for i in 0..d {
            for j in 0..=i {
                let mut s = a[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::numerical(format!(
                            "cholesky: nonpositive pivot {s} at {i}"
                        )));
                    }
                    l[i * d + i] = s.sqrt();
                } else {
                    l[i * d + j] = s / l[j * d + j];
                }
            }
        }
        Ok(l)
    }
}

/// Simulated paths stored at the exercise dates t_1..t_J (no t_0 column).
/// Layout: `data[(m * j_dates + j) * d + l]` for path m, date j, asset l.
#[derive(Clone, Debug)]
pub struct PathSet {
    pub n: usize,
    pub j_dates: usize,
    pub d: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub data: Vec<f64>,
}

impl PathSet {
    #[inline]
    pub fn state(&self, m: usize, j: usize) -> &[f64] {
        let off = (m * self.j_dates + j) * self.d;
        &self.data[off..off + self.d]
    }

    /// Binary dump: header of four u64 (n, j_dates, d, seed) little-endian,
    /// then the state array as row-major f64, path-major.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in [self.n as u64, self.j_dates as u64, self.d as u64, self.seed] {
            f.write_all(&v.to_le_bytes())?;
        }
        for &x in &self.data {
            f.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// Load a dump written by `save`. The exercise grid is not stored in the
    /// file and must be supplied by the caller (it comes from the config).
    pub fn load(path: &Path, times: Vec<f64>) -> Result<PathSet> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut buf8 = [0u8; 8];
        let mut head = [0u64; 4];
        for h in head.iter_mut() {
            f.read_exact(&mut buf8)?;
            *h = u64::from_le_bytes(buf8);
        }
        let (n, j_dates, d, seed) = (head[0] as usize, head[1] as usize, head[2] as usize, head[3]);
        if times.len() != j_dates {
            return Err(Error::config(format!(
                "path file has {} dates but grid has {}",
                j_dates,
                times.len()
            )));
        }
        let mut data = vec![0.0f64; n * j_dates * d];
        for x in data.iter_mut() {
            f.read_exact(&mut buf8)?;
            *x = f64::from_le_bytes(buf8);
        }
        Ok(PathSet { n, j_dates, d, seed, times, data })
    }
}

/// Simulate `n` paths of the market at the given exercise dates.
///
/// Path m uses the child stream `stream.child(m)`; draw k of that stream is
/// the k-th normal of the path (k = step * d + asset). Output is therefore
/// byte-identical for any thread count.
pub fn simulate(market: &Market, times: &[f64], n: usize, stream: Stream, seed: u64) -> Result<PathSet> {
    market.validate()?;
    if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("grid must be strictly increasing and start after 0"));
    }
    let d = market.d;
    let j_dates = times.len();
    let chol = market.cholesky()?;

    // Per-interval drift and vol scalings.
    let mut drift = vec![0.0; j_dates * d]; // (r - delta - sigma^2/2) * dt
    let mut vol = vec![0.0; j_dates * d]; // sigma * sqrt(dt)
    let mut prev_t = 0.0;
    for (j, &t) in times.iter().enumerate() {
        let dt = t - prev_t;
        for l in 0..d {
            let s = market.sigma[l];
            drift[j * d + l] = (market.rate - market.dividend - 0.5 * s * s) * dt;
            vol[j * d + l] = s * dt.sqrt();
        }
        prev_t = t;
    }

    let mut data = vec![0.0f64; n * j_dates * d];
    data.par_chunks_mut(j_dates * d).enumerate().for_each(|(m, block)| {
        let st = stream.child(m as u64);
        let mut z = vec![0.0f64; d];
        let mut logx: Vec<f64> = market.spot.iter().map(|s| s.ln()).collect();
        for j in 0..j_dates {
            for (k, zk) in z.iter_mut().enumerate() {
                *zk = st.normal_at((j * d + k) as u64);
            }
            for l in 0..d {
                // Correlated increment (L z)_l.
                let mut w = 0.0;
                for k in 0..=l {
                    w += chol[l * d + k] * z[k];
                }
                logx[l] += drift[j * d + l] + vol[j * d + l] * w;
                block[j * d + l] = logx[l].exp();
            }
        }
    });

    Ok(PathSet { n, j_dates, d, seed, times: times.to_vec(), data })
}
