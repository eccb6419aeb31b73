//! Independent numerical oracles: sample-based skewness/kurtosis, sample
//! scatter pairs, and a grid search for the mode.
//!
//! Everything here deliberately avoids the closed-form machinery of
//! [`crate::moments`] and [`crate::canonical`] so the two sides can be
//! cross-validated against each other. Sample statistics use the divisor
//! `n` covariance throughout, matching the estimators the sample indices
//! are defined with.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::distributions::ScaleMixtureSN;
use crate::error::{Error, Result};
use crate::linalg;

/// Sample Mardia statistics.
#[derive(Debug, Clone)]
pub struct EmpiricalMardia {
    /// Sample skewness `b1 = n^-2 sum_ij ((y_i - m)' S^-1 (y_j - m))^3`;
    /// estimates the population skewness index.
    pub b1: f64,
    /// Sample kurtosis `b2 = n^-1 sum_i ((y_i - m)' S^-1 (y_i - m))^2`;
    /// estimates `gamma_2 + d(d+2)` (not the excess form).
    pub b2: f64,
    /// Rows used.
    pub n: usize,
    /// Columns used.
    pub d: usize,
}

/// Bootstrap standard errors for the sample Mardia statistics.
#[derive(Debug, Clone)]
pub struct MardiaBootstrap {
    /// Standard error of `b1` across resamples.
    pub b1_se: f64,
    /// Standard error of `b2` across resamples.
    pub b2_se: f64,
    /// Resamples drawn.
    pub resamples: usize,
}

fn check_sample_shape(samples: &DMatrix<f64>) -> Result<(usize, usize)> {
    let (n, d) = (samples.nrows(), samples.ncols());
    if d == 0 {
        return Err(Error::InvalidArgument {
            what: "sample matrix has zero columns".to_string(),
        });
    }
    let needed = d + 2;
    if n < needed {
        return Err(Error::TooFewSamples { n, needed });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument {
            what: "sample matrix contains non-finite entries".to_string(),
        });
    }
    Ok((n, d))
}

/// Core sweep shared by the plain and bootstrap estimators: weighted mean,
/// covariance, standardized rows, then `b1` through the third-moment
/// tensor (`O(n d^3)` instead of the naive `O(n^2 d)` double sum) and `b2`
/// as the mean squared Mahalanobis form.
fn weighted_mardia(samples: &DMatrix<f64>, weights: Option<&[f64]>) -> Result<(f64, f64)> {
    let (n, d) = (samples.nrows(), samples.ncols());
    let w_total: f64 = match weights {
        Some(w) => w.iter().sum(),
        None => n as f64,
    };
    let wi = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut mean = DVector::zeros(d);
    for i in 0..n {
        for k in 0..d {
            mean[k] += wi(i) * samples[(i, k)];
        }
    }
    mean /= w_total;
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        let w = wi(i);
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            let ra = samples[(i, a)] - mean[a];
            for bq in a..d {
                cov[(a, bq)] += w * ra * (samples[(i, bq)] - mean[bq]);
            }
        }
    }
    for a in 0..d {
        for bq in a..d {
            cov[(a, bq)] /= w_total;
            cov[(bq, a)] = cov[(a, bq)];
        }
    }
    let w_inv_sqrt = linalg::spd_inv_sqrt(&cov)?;
    let mut tensor = vec![0.0f64; d * d * d];
    let mut b2 = 0.0;
    let mut z = vec![0.0f64; d];
    for i in 0..n {
        let w = wi(i);
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += w_inv_sqrt[(a, k)] * (samples[(i, k)] - mean[k]);
            }
            z[a] = acc;
        }
        let q: f64 = z.iter().map(|v| v * v).sum();
        b2 += w * q * q;
        for a in 0..d {
            let za = w * z[a];
            for bq in 0..d {
                let zab = za * z[bq];
                let row = (a * d + bq) * d;
                for c in 0..d {
                    tensor[row + c] += zab * z[c];
                }
            }
        }
    }
    b2 /= w_total;
    let b1 = tensor.iter().map(|m| (m / w_total).powi(2)).sum();
    Ok((b1, b2))
}

/// Sample Mardia skewness and kurtosis of a data matrix (rows are
/// observations).
pub fn empirical_mardia(samples: &DMatrix<f64>) -> Result<EmpiricalMardia> {
    let (n, d) = check_sample_shape(samples)?;
    let (b1, b2) = weighted_mardia(samples, None)?;
    Ok(EmpiricalMardia { b1, b2, n, d })
}

/// Bootstrap standard errors for the sample Mardia statistics, from
/// `resamples` multinomial-weight resamples driven by a seeded generator.
pub fn bootstrap_mardia(
    samples: &DMatrix<f64>,
    resamples: usize,
    seed: u64,
) -> Result<MardiaBootstrap> {
    let (n, _) = check_sample_shape(samples)?;
    if resamples < 2 {
        return Err(Error::InvalidArgument {
            what: format!("bootstrap needs at least 2 resamples, got {resamples}"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut b1s = Vec::with_capacity(resamples);
    let mut b2s = Vec::with_capacity(resamples);
    let mut counts = vec![0.0f64; n];
    for _ in 0..resamples {
        counts.iter_mut().for_each(|c| *c = 0.0);
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1.0;
        }
        let (b1, b2) = weighted_mardia(samples, Some(&counts))?;
        b1s.push(b1);
        b2s.push(b2);
    }
    Ok(MardiaBootstrap {
        b1_se: std_dev(&b1s),
        b2_se: std_dev(&b2s),
        resamples,
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Sample covariance (divisor `n`) and sample kurtosis matrix
/// `K = n^-1 sum_i (y_i - m)(y_i - m)' q_i^e` with `q_i` the Mahalanobis
/// form under the sample covariance — the empirical counterpart of the
/// analytic scatter pair.
pub fn empirical_scatter_pair(
    samples: &DMatrix<f64>,
    exponent: u32,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, d) = check_sample_shape(samples)?;
    if !(1..=2).contains(&exponent) {
        return Err(Error::InvalidArgument {
            what: format!("kurtosis matrix exponent must be 1 or 2, got {exponent}"),
        });
    }
    let mut mean = DVector::zeros(d);
    for i in 0..n {
        for k in 0..d {
            mean[k] += samples[(i, k)];
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        for a in 0..d {
            let ra = samples[(i, a)] - mean[a];
            for bq in a..d {
                cov[(a, bq)] += ra * (samples[(i, bq)] - mean[bq]);
            }
        }
    }
    for a in 0..d {
        for bq in a..d {
            cov[(a, bq)] /= n as f64;
            cov[(bq, a)] = cov[(a, bq)];
        }
    }
    let w_inv_sqrt = linalg::spd_inv_sqrt(&cov)?;
    let mut kappa = DMatrix::zeros(d, d);
    let mut r = vec![0.0f64; d];
    let mut z = vec![0.0f64; d];
    for i in 0..n {
        for k in 0..d {
            r[k] = samples[(i, k)] - mean[k];
        }
        for a in 0..d {
            z[a] = (0..d).map(|k| w_inv_sqrt[(a, k)] * r[k]).sum();
        }
        let q: f64 = z.iter().map(|v| v * v).sum();
        let qe = if exponent == 1 { q } else { q * q };
        for a in 0..d {
            for bq in a..d {
                kappa[(a, bq)] += r[a] * r[bq] * qe;
            }
        }
    }
    for a in 0..d {
        for bq in a..d {
            kappa[(a, bq)] /= n as f64;
            kappa[(bq, a)] = kappa[(a, bq)];
        }
    }
    Ok((cov, kappa))
}

/// Outcome of a grid mode search.
#[derive(Debug, Clone)]
pub struct GridModeResult {
    /// Best grid point found.
    pub mode: DVector<f64>,
    /// Density at that point.
    pub density: f64,
    /// Final grid step per coordinate — the resolution of the answer.
    pub step: DVector<f64>,
}

/// Dense grid search for the mode, refined once around the best cell: the
/// first pass covers `xi_k +/- half_width * scale_k`, the second pass
/// shrinks the span to one first-pass step on each side. Limited to
/// `d <= 3` (cost grows as `points^d`) and intended as an oracle for
/// cross-checking the root-finding mode, not as a fast method.
pub fn grid_mode_search(
    smsn: &ScaleMixtureSN,
    half_width: f64,
    points_per_axis: usize,
) -> Result<GridModeResult> {
    let d = smsn.dim();
    if d > 3 {
        return Err(Error::InvalidArgument {
            what: format!("grid search is limited to d <= 3, got {d}"),
        });
    }
    if points_per_axis < 5 || !(half_width > 0.0) {
        return Err(Error::InvalidArgument {
            what: format!(
                "grid search needs points_per_axis >= 5 and half_width > 0, got {points_per_axis} and {half_width}"
            ),
        });
    }
    let sn = smsn.sn();
    let mut center = sn.xi().clone();
    let mut span: DVector<f64> = sn.scale() * half_width;
    let mut best_point = center.clone();
    let mut best_density = f64::NEG_INFINITY;
    let mut step = DVector::zeros(d);
    for _pass in 0..2 {
        let m = points_per_axis;
        for k in 0..d {
            step[k] = 2.0 * span[k] / (m - 1) as f64;
        }
        let mut idx = vec![0usize; d];
        let mut point = DVector::zeros(d);
        loop {
            for k in 0..d {
                point[k] = center[k] - span[k] + idx[k] as f64 * step[k];
            }
            let f = smsn.density(&point)?;
            if f > best_density {
                best_density = f;
                best_point.copy_from(&point);
            }
            // Mixed-radix increment over the grid indices.
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    break;
                }
            }
            if k == d {
                break;
            }
        }
        center.copy_from(&best_point);
        span = step.clone();
    }
    Ok(GridModeResult {
        mode: best_point,
        density: best_density,
        step,
    })
}
