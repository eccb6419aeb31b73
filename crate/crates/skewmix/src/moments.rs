//! Closed-form moments and multivariate skewness/kurtosis indices.
//!
//! Everything here follows from the canonical-coordinate factorization of
//! the mixture `Y = xi + S * omega Z`: in canonical coordinates the first
//! component carries all the asymmetry (overlap `delta_star`) and the rest
//! are symmetric, so the Mardia indices and the kurtosis matrix reduce to
//! combinations of the mixing moments `e_m = E(S^m)` and `delta_star`. The
//! kurtosis matrix in original coordinates collapses to the rank-one update
//! `K = k2 * Omega + (k1 - k2) (omega delta)(omega delta)' / delta_star^2`,
//! so no eigen or Cholesky work is needed to evaluate it.
//!
//! Whenever a required `E(S^m)` does not exist the affected index is
//! reported as absent together with the unmet moment condition; no sentinel
//! values are produced.

use nalgebra::{DMatrix, DVector};

use crate::distributions::{MixingDistribution, ScaleMixtureSN};
use crate::error::{Error, Result};

/// `sqrt(2/pi)`, the recurring half-normal mean.
pub(crate) fn b_const() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

/// Fetches `E(S^m)` for `m = 0..=k`; fails with the first missing moment.
pub(crate) fn moments_through(mixing: &MixingDistribution, k: u32) -> Result<Vec<f64>> {
    (0..=k).map(|m| mixing.moment(m)).collect()
}

/// Mean vector and covariance matrix of the mixture:
/// `E(Y) = xi + sqrt(2/pi) E(S) omega delta` and
/// `Var(Y) = omega (E(S^2) Omega_bar - (2/pi) E(S)^2 delta delta') omega`.
/// Requires the first two mixing moments.
pub fn mean_cov(smsn: &ScaleMixtureSN) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let sn = smsn.sn();
    let e1 = smsn.mixing().moment(1)?;
    let e2 = smsn.mixing().moment(2)?;
    let b = b_const();
    let d = sn.dim();
    let scale = sn.scale();
    let delta = sn.delta();
    let mean = sn.xi() + scale.component_mul(delta) * (b * e1);
    let b2e1sq = b * b * e1 * e1;
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            cov[(i, j)] = scale[i]
                * scale[j]
                * (e2 * sn.omega_bar()[(i, j)] - b2e1sq * delta[i] * delta[j]);
        }
    }
    Ok((mean, cov))
}

/// Third central moment of a unit-scale univariate mixture with overlap
/// `delta`, in terms of the mixing moments `e1..e3`.
pub(crate) fn third_central_unit(delta: f64, e1: f64, e2: f64, e3: f64) -> f64 {
    let b = b_const();
    b * delta * (e3 * (3.0 - delta * delta) - 3.0 * e1 * e2 + 2.0 * b * b * e1.powi(3) * delta * delta)
}

/// Fourth central moment of a unit-scale univariate mixture with overlap
/// `delta`, in terms of the mixing moments `e1..e4`.
pub(crate) fn fourth_central_unit(delta: f64, e1: f64, e2: f64, e3: f64, e4: f64) -> f64 {
    let b = b_const();
    let mu = e1 * b * delta;
    3.0 * e4 - 4.0 * e3 * b * delta * (3.0 - delta * delta) * mu + 6.0 * e2 * mu * mu
        - 3.0 * mu.powi(4)
}

/// Univariate skewness/kurtosis of a scale mixture with overlap `delta`.
#[derive(Debug, Clone)]
pub struct UnivariateIndices {
    /// Signed skewness `mu_3 / sigma^3`, when the third mixing moment exists.
    pub gamma1: Option<f64>,
    /// Excess kurtosis `mu_4 / sigma^4 - 3`, when the fourth mixing moment exists.
    pub gamma2: Option<f64>,
    /// Unmet moment condition blocking `gamma1`, if any.
    pub gamma1_blocked_by: Option<String>,
    /// Unmet moment condition blocking `gamma2`, if any.
    pub gamma2_blocked_by: Option<String>,
}

/// Skewness and excess kurtosis of the univariate mixture with overlap
/// `delta` in `(-1, 1)`. Indices whose mixing moments do not exist come
/// back as `None` with the unmet condition recorded.
pub fn univariate_indices(delta: f64, mixing: &MixingDistribution) -> Result<UnivariateIndices> {
    // The closed boundary |delta| = 1 is the half-normal-type limit (it is
    // also where delta rounds to for very large shapes); the moment
    // formulas stay finite there, so it is accepted.
    if !(delta.abs() <= 1.0) {
        return Err(Error::InvalidArgument {
            what: format!("overlap delta must lie in [-1, 1], got {delta}"),
        });
    }
    let mut out = UnivariateIndices {
        gamma1: None,
        gamma2: None,
        gamma1_blocked_by: None,
        gamma2_blocked_by: None,
    };
    let b = b_const();
    match moments_through(mixing, 3) {
        Ok(e) => {
            let var = e[2] - b * b * e[1] * e[1] * delta * delta;
            out.gamma1 = Some(third_central_unit(delta, e[1], e[2], e[3]) / var.powf(1.5));
        }
        Err(Error::MomentNotFinite { required }) => out.gamma1_blocked_by = Some(required),
        Err(e) => return Err(e),
    }
    match moments_through(mixing, 4) {
        Ok(e) => {
            let var = e[2] - b * b * e[1] * e[1] * delta * delta;
            out.gamma2 =
                Some(fourth_central_unit(delta, e[1], e[2], e[3], e[4]) / (var * var) - 3.0);
        }
        Err(Error::MomentNotFinite { required }) => out.gamma2_blocked_by = Some(required),
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Mardia skewness/kurtosis indices of a `d`-dimensional mixture.
#[derive(Debug, Clone)]
pub struct MardiaIndices {
    /// Dimension the indices refer to.
    pub d: usize,
    /// Scalar shape `alpha_star` of the underlying skew-normal.
    pub alpha_star: f64,
    /// Scalar overlap `delta_star`.
    pub delta_star: f64,
    /// Mardia skewness `gamma_{1,d}`, when the third mixing moment exists.
    pub gamma1: Option<f64>,
    /// Mardia excess kurtosis `gamma_{2,d}`, when the fourth mixing moment exists.
    pub gamma2: Option<f64>,
    /// Unmet moment condition blocking `gamma1`, if any.
    pub gamma1_blocked_by: Option<String>,
    /// Unmet moment condition blocking `gamma2`, if any.
    pub gamma2_blocked_by: Option<String>,
}

/// Mardia indices of a mixture, from its scalar overlap summary. The
/// indices depend on the multivariate parameters only through `d` and
/// `delta_star`, which is what makes closed forms possible:
///
/// * `gamma_{1,d} = gamma_1*^2 + 3(d-1)(2/pi) delta_star^2 (e3 - e1 e2)^2 / (sigma_star^2 e2^2)`
/// * `gamma_{2,d} = mu_4*/sigma_star^4 + (d^2-1) e4/e2^2 + 2(d-1) mu_{11ii}/(e2 sigma_star^2) - d(d+2)`
///
/// with `sigma_star^2 = e2 - (2/pi) e1^2 delta_star^2`,
/// `mu_{11ii} = e4 + (2/pi) delta_star^2 (e1^2 e2 - 2 e1 e3)`, and
/// `gamma_1*`, `mu_4*` the univariate canonical-coordinate moments.
pub fn mardia_from_scalar(
    d: usize,
    delta_star: f64,
    mixing: &MixingDistribution,
) -> Result<MardiaIndices> {
    if d == 0 {
        return Err(Error::InvalidArgument {
            what: "dimension must be at least 1".to_string(),
        });
    }
    if !(0.0..=1.0).contains(&delta_star) {
        return Err(Error::InvalidArgument {
            what: format!("delta_star must lie in [0, 1], got {delta_star}"),
        });
    }
    // delta_star = 1 (the half-normal-type limit, reached in floating
    // point for very large shapes) keeps every moment formula finite; only
    // the back-transformed shape diverges.
    let alpha_star = if delta_star < 1.0 {
        delta_star / (1.0 - delta_star * delta_star).sqrt()
    } else {
        f64::INFINITY
    };
    let mut out = MardiaIndices {
        d,
        alpha_star,
        delta_star,
        gamma1: None,
        gamma2: None,
        gamma1_blocked_by: None,
        gamma2_blocked_by: None,
    };
    let b = b_const();
    let df = d as f64;
    let ds2 = delta_star * delta_star;
    match moments_through(mixing, 3) {
        Ok(e) => {
            let var = e[2] - b * b * e[1] * e[1] * ds2;
            let g1u = third_central_unit(delta_star, e[1], e[2], e[3]) / var.powf(1.5);
            let cross = e[3] - e[1] * e[2];
            out.gamma1 = Some(
                g1u * g1u
                    + 3.0 * (df - 1.0) * b * b * ds2 * cross * cross / (var * e[2] * e[2]),
            );
        }
        Err(Error::MomentNotFinite { required }) => out.gamma1_blocked_by = Some(required),
        Err(e) => return Err(e),
    }
    match moments_through(mixing, 4) {
        Ok(e) => {
            let var = e[2] - b * b * e[1] * e[1] * ds2;
            let mu4 = fourth_central_unit(delta_star, e[1], e[2], e[3], e[4]);
            let mu11ii = e[4] + b * b * ds2 * (e[1] * e[1] * e[2] - 2.0 * e[1] * e[3]);
            out.gamma2 = Some(
                mu4 / (var * var) + (df * df - 1.0) * e[4] / (e[2] * e[2])
                    + 2.0 * (df - 1.0) * mu11ii / (e[2] * var)
                    - df * (df + 2.0),
            );
        }
        Err(Error::MomentNotFinite { required }) => out.gamma2_blocked_by = Some(required),
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Mardia indices of a mixture distribution.
pub fn mardia_indices(smsn: &ScaleMixtureSN) -> Result<MardiaIndices> {
    mardia_from_scalar(smsn.dim(), smsn.sn().delta_star(), smsn.mixing())
}

/// Closed-form Mardia indices of the skew-normal itself (any dimension):
/// with `r = 2 alpha_star^2 / (pi + (pi - 2) alpha_star^2)`,
/// `gamma_{1,d} = ((4 - pi)/2)^2 r^3` and `gamma_{2,d} = 2(pi - 3) r^2`.
pub fn sn_mardia(alpha_star: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let r = 2.0 * alpha_star * alpha_star / (pi + (pi - 2.0) * alpha_star * alpha_star);
    let g1 = ((4.0 - pi) / 2.0).powi(2) * r.powi(3);
    let g2 = 2.0 * (pi - 3.0) * r * r;
    (g1, g2)
}

/// Mardia indices of the skew-t with `nu` degrees of freedom, as a pair.
/// This is the general mixture formula specialized to the skew-t moments;
/// it errors when `nu <= 4` because the kurtosis index then does not exist
/// (`nu <= 3` also loses the skewness index).
pub fn st_mardia(alpha_star: f64, nu: f64, d: usize) -> Result<(f64, f64)> {
    let delta_star = alpha_star / (1.0 + alpha_star * alpha_star).sqrt();
    let m = mardia_from_scalar(d, delta_star, &MixingDistribution::SkewT { nu })?;
    match (m.gamma1, m.gamma2) {
        (Some(g1), Some(g2)) => Ok((g1, g2)),
        (None, _) => Err(Error::MomentNotFinite {
            required: m.gamma1_blocked_by.unwrap_or_default(),
        }),
        (_, None) => Err(Error::MomentNotFinite {
            required: m.gamma2_blocked_by.unwrap_or_default(),
        }),
    }
}

/// Kurtosis matrix `K = E[(Y - mu)(Y - mu)' q^e]` with
/// `q = (Y - mu)' Sigma^-1 (Y - mu)`, in original coordinates, for
/// `exponent` 1 or 2. In canonical coordinates `K` is diagonal with two
/// distinct entries `k1` (skew direction) and `k2`, which back-transforms
/// to the rank-one form documented at module level. For a Gaussian
/// (`alpha = 0`, degenerate mixing) this reduces to `(d+2) Sigma` at
/// exponent 1 and `(d+2)(d+4) Sigma` at exponent 2.
pub fn analytic_kappa(smsn: &ScaleMixtureSN, exponent: u32) -> Result<DMatrix<f64>> {
    let sn = smsn.sn();
    let d = sn.dim();
    let df = d as f64;
    let ds = sn.delta_star();
    let b = b_const();
    let (k1, k2) = match exponent {
        1 => {
            let e = moments_through(smsn.mixing(), 4)?;
            let var = e[2] - b * b * e[1] * e[1] * ds * ds;
            let mu4 = fourth_central_unit(ds, e[1], e[2], e[3], e[4]);
            let mu11ii = e[4] + b * b * ds * ds * (e[1] * e[1] * e[2] - 2.0 * e[1] * e[3]);
            (
                mu4 / var + (df - 1.0) * mu11ii / e[2],
                mu11ii / var + (df + 1.0) * e[4] / e[2],
            )
        }
        2 => {
            let e = moments_through(smsn.mixing(), 6)?;
            let var = e[2] - b * b * e[1] * e[1] * ds * ds;
            let mu = e[1] * b * ds;
            let z1 = b * ds;
            let z3 = b * ds * (3.0 - ds * ds);
            let z5 = b * ds * (15.0 - 10.0 * ds * ds + 3.0 * ds.powi(4));
            let a = e[6] - 2.0 * mu * e[5] * z1 + mu * mu * e[4];
            let bb = 3.0 * e[6] - 4.0 * mu * e[5] * z3 + 6.0 * mu * mu * e[4]
                - 4.0 * mu.powi(3) * e[3] * z1
                + mu.powi(4) * e[2];
            let c = 15.0 * e[6] - 6.0 * mu * e[5] * z5 + 45.0 * mu * mu * e[4]
                - 20.0 * mu.powi(3) * e[3] * z3
                + 15.0 * mu.powi(4) * e[2]
                - 6.0 * mu.powi(5) * e[1] * z1
                + mu.powi(6);
            (
                c / (var * var) + 2.0 * (df - 1.0) * bb / (var * e[2])
                    + (df * df - 1.0) * a / (e[2] * e[2]),
                bb / (var * var) + 2.0 * (df + 1.0) * a / (var * e[2])
                    + (df + 1.0) * (df + 3.0) * e[6] / (e[2] * e[2]),
            )
        }
        other => {
            return Err(Error::InvalidArgument {
                what: format!("kurtosis matrix exponent must be 1 or 2, got {other}"),
            })
        }
    };
    let mut kappa = sn.omega() * k2;
    if ds > 0.0 {
        // Rank-one skew correction; (k1 - k2) vanishes like delta_star^2,
        // so the ratio stays well-scaled for small overlaps.
        let wd = sn.scale().component_mul(sn.delta());
        let coeff = (k1 - k2) / (ds * ds);
        for i in 0..d {
            for j in 0..d {
                kappa[(i, j)] += coeff * wd[i] * wd[j];
            }
        }
    }
    Ok(kappa)
}

/// Covariance matrix and kurtosis matrix as a pair: the analytic scatter
/// functionals that drive the scatter-based canonical route.
pub fn analytic_scatter_pair(
    smsn: &ScaleMixtureSN,
    exponent: u32,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (_, sigma) = mean_cov(smsn)?;
    let kappa = analytic_kappa(smsn, exponent)?;
    Ok((sigma, kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::SkewNormalParams;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn st_smsn(nu: f64) -> ScaleMixtureSN {
        ScaleMixtureSN::from_parts(
            DVector::from_row_slice(&[0.3, -0.7]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]),
            DVector::from_row_slice(&[3.0, -1.5]),
            MixingDistribution::SkewT { nu },
        )
        .unwrap()
    }

    #[test]
    fn sn_mardia_reference_values() {
        let (g1, g2) = sn_mardia(5.0);
        assert_relative_eq!(g1, 0.724141452722709, max_relative = 1e-14);
        assert_relative_eq!(g2, 0.705345255033138, max_relative = 1e-14);
        let (g1, g2) = sn_mardia(1.0);
        assert_relative_eq!(g1, 0.018754964868181154, max_relative = 1e-14);
        assert_relative_eq!(g2, 0.061744315419326415, max_relative = 1e-14);
        // saturation limit r -> 2/(pi - 2)
        let (g1, g2) = sn_mardia(1e8);
        assert_relative_eq!(g1, 0.990565849244124, max_relative = 1e-8);
        assert_relative_eq!(g2, 0.8691773036059736, max_relative = 1e-8);
        assert_eq!(sn_mardia(0.0), (0.0, 0.0));
    }

    #[test]
    fn general_formula_reduces_to_sn_closed_form() {
        // Degenerate mixing: the general structure must reproduce the
        // skew-normal closed form for every dimension.
        let alpha_star = 5.0f64;
        let ds = alpha_star / (1.0 + alpha_star * alpha_star).sqrt();
        let (g1_sn, g2_sn) = sn_mardia(alpha_star);
        for d in [1, 2, 3, 7] {
            let m = mardia_from_scalar(d, ds, &MixingDistribution::Degenerate).unwrap();
            assert_relative_eq!(m.gamma1.unwrap(), g1_sn, max_relative = 1e-12);
            assert_relative_eq!(m.gamma2.unwrap(), g2_sn, max_relative = 1e-12);
            assert_relative_eq!(m.alpha_star, alpha_star, max_relative = 1e-12);
        }
    }

    #[test]
    fn skew_t_reference_values() {
        let (g1, g2) = st_mardia(5.0, 8.0, 3).unwrap();
        assert_relative_eq!(g1, 2.532065616348358, max_relative = 1e-12);
        assert_relative_eq!(g2, 10.941896325754584, max_relative = 1e-12);
        let (g1, g2) = st_mardia(2.0, 8.0, 3).unwrap();
        assert_relative_eq!(g1, 1.2544384286586618, max_relative = 1e-12);
        assert_relative_eq!(g2, 9.388235294117642, max_relative = 1e-12);
        // Symmetric skew-t: gamma1 = 0 and gamma2 = d(d+2)[(nu-2)/(nu-4) - 1].
        let (g1, g2) = st_mardia(0.0, 10.0, 3).unwrap();
        assert!(g1.abs() < 1e-15);
        assert_relative_eq!(g2, 5.0, max_relative = 1e-13);
        // Large nu approaches the skew-normal values.
        let (g1, g2) = st_mardia(5.0, 1e6, 3).unwrap();
        let (g1_sn, g2_sn) = sn_mardia(5.0);
        assert!((g1 - g1_sn).abs() < 1e-4);
        assert!((g2 - g2_sn).abs() < 1e-4);
    }

    #[test]
    fn missing_moments_block_indices_with_reasons() {
        let m = mardia_from_scalar(3, 0.6, &MixingDistribution::SkewT { nu: 3.5 }).unwrap();
        assert!(m.gamma1.is_some());
        assert!(m.gamma2.is_none());
        assert!(m.gamma2_blocked_by.as_deref().unwrap().contains('4'));
        let m = mardia_from_scalar(3, 0.6, &MixingDistribution::SkewT { nu: 2.5 }).unwrap();
        assert!(m.gamma1.is_none() && m.gamma2.is_none());
        // Slash with 3 < q < 4: skewness exists, kurtosis does not.
        let m = mardia_from_scalar(2, 0.3, &MixingDistribution::Slash { q: 3.5 }).unwrap();
        assert!(m.gamma1.is_some() && m.gamma2.is_none());
        // q = 4.5 has the fourth moment, so both exist.
        let m = mardia_from_scalar(2, 0.3, &MixingDistribution::Slash { q: 4.5 }).unwrap();
        assert!(m.gamma1.is_some() && m.gamma2.is_some());
        assert!(matches!(st_mardia(1.0, 4.0, 2), Err(Error::MomentNotFinite { .. })));
    }

    #[test]
    fn univariate_skew_t_reference() {
        let u = univariate_indices(0.7, &MixingDistribution::SkewT { nu: 4.0 }).unwrap();
        assert_relative_eq!(u.gamma1.unwrap(), 1.8938096980939434, max_relative = 1e-13);
        assert!(u.gamma2.is_none());
        assert!(u.gamma2_blocked_by.is_some());
        // Degenerate: gamma1^2 equals the d = 1 Mardia skewness.
        let delta = -0.7f64;
        let u = univariate_indices(delta, &MixingDistribution::Degenerate).unwrap();
        let alpha_star = delta.abs() / (1.0 - delta * delta).sqrt();
        let (g1d, g2d) = sn_mardia(alpha_star);
        assert_relative_eq!(u.gamma1.unwrap().powi(2), g1d, max_relative = 1e-12);
        assert_relative_eq!(u.gamma2.unwrap(), g2d, max_relative = 1e-12);
        assert!(u.gamma1.unwrap() < 0.0, "sign must follow delta");
    }

    #[test]
    fn mean_cov_satisfies_trace_identity() {
        // tr(Omega^-1 Sigma) = (d-1) E(S^2) + sigma_star^2; reference value
        // frozen from an independent computation for the nu = 5 case.
        let smsn = st_smsn(5.0);
        let (mean, cov) = mean_cov(&smsn).unwrap();
        let tr = (smsn.sn().omega().clone().try_inverse().unwrap() * &cov).trace();
        assert_relative_eq!(tr, 2.5395166444450092, max_relative = 1e-12);
        // Mean against the closed form in each coordinate.
        let e1 = smsn.mixing().moment(1).unwrap();
        let b = b_const();
        for k in 0..2 {
            let want = smsn.sn().xi()[k]
                + b * e1 * smsn.sn().scale()[k] * smsn.sn().delta()[k];
            assert_relative_eq!(mean[k], want, max_relative = 1e-14);
        }
        // Monte-Carlo agreement for the covariance.
        let n = 300_000;
        let y = smsn.sample(n, 19).unwrap();
        let mut emp = DMatrix::zeros(2, 2);
        let mu: Vec<f64> = (0..2).map(|k| y.column(k).sum() / n as f64).collect();
        for r in 0..n {
            for i in 0..2 {
                for j in 0..2 {
                    emp[(i, j)] += (y[(r, i)] - mu[i]) * (y[(r, j)] - mu[j]);
                }
            }
        }
        emp /= n as f64;
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (emp[(i, j)] - cov[(i, j)]).abs() < 0.05,
                    "cov[{i},{j}] analytic {} empirical {}",
                    cov[(i, j)],
                    emp[(i, j)]
                );
            }
        }
    }

    #[test]
    fn kappa_gaussian_reduction() {
        let gauss = ScaleMixtureSN::from_parts(
            DVector::zeros(3),
            DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]),
            DVector::zeros(3),
            MixingDistribution::Degenerate,
        )
        .unwrap();
        let (_, sigma) = mean_cov(&gauss).unwrap();
        let k1 = analytic_kappa(&gauss, 1).unwrap();
        let k2 = analytic_kappa(&gauss, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(k1[(i, j)], 5.0 * sigma[(i, j)], max_relative = 1e-13);
                assert_relative_eq!(k2[(i, j)], 35.0 * sigma[(i, j)], max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn kappa_trace_ties_to_mardia_kurtosis() {
        // tr(Sigma^-1 K) = gamma_{2,d} + d(d+2) for exponent 1, across
        // mixing families and shapes.
        for (smsn, label) in [
            (st_smsn(8.0), "skew-t(8)"),
            (st_smsn(5.0), "skew-t(5)"),
            (
                ScaleMixtureSN::from_parts(
                    DVector::zeros(3),
                    DMatrix::from_row_slice(3, 3, &[4.0, 0.8, 0.4, 0.8, 1.0, -0.2, 0.4, -0.2, 2.0]),
                    DVector::from_row_slice(&[1.0, -2.0, 0.5]),
                    MixingDistribution::Slash { q: 7.0 },
                )
                .unwrap(),
                "slash(7)",
            ),
            (
                ScaleMixtureSN::from_parts(
                    DVector::zeros(2),
                    DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
                    DVector::from_row_slice(&[4.0, 1.0]),
                    MixingDistribution::Degenerate,
                )
                .unwrap(),
                "skew-normal",
            ),
        ] {
            let d = smsn.dim() as f64;
            let (sigma, kappa) = analytic_scatter_pair(&smsn, 1).unwrap();
            let tr = (sigma.clone().try_inverse().unwrap() * &kappa).trace();
            let g2 = mardia_indices(&smsn).unwrap().gamma2.unwrap();
            assert_relative_eq!(tr, g2 + d * (d + 2.0), max_relative = 1e-12,);
            assert!(
                crate::linalg::max_asymmetry(&kappa) < 1e-12,
                "{label}: kappa must be symmetric"
            );
        }
    }

    #[test]
    fn kappa_rank_one_matches_direct_conjugation() {
        // Independent route: build K in canonical coordinates and conjugate
        // back with the explicit inverse transform H^-1 = P' C omega.
        let smsn = st_smsn(8.0);
        let sn = smsn.sn();
        let d = 2;
        let e: Vec<f64> = (0..=4).map(|m| smsn.mixing().moment(m).unwrap()).collect();
        let b = b_const();
        let ds = sn.delta_star();
        let var = e[2] - b * b * e[1] * e[1] * ds * ds;
        let mu4 = fourth_central_unit(ds, e[1], e[2], e[3], e[4]);
        let mu11ii = e[4] + b * b * ds * ds * (e[1] * e[1] * e[2] - 2.0 * e[1] * e[3]);
        let k1 = mu4 / var + 1.0 * mu11ii / e[2];
        let k2 = mu11ii / var + 3.0 * e[4] / e[2];
        let kx = DMatrix::from_diagonal(&DVector::from_row_slice(&[k1, k2]));
        let l = nalgebra::Cholesky::new(sn.omega_bar().clone()).unwrap().l();
        let c = l.transpose();
        let v = (&c * sn.alpha()) / sn.alpha_star();
        let mut p = DMatrix::identity(d, d);
        // Householder mapping e1 -> v.
        let mut u = v.clone();
        u[0] -= 1.0;
        let un = u.norm();
        if un > 0.0 {
            u /= un;
            p -= 2.0 * &u * u.transpose();
        }
        let h_inv = p.transpose() * &c * DMatrix::from_diagonal(sn.scale());
        let conjugated = h_inv.transpose() * kx * &h_inv;
        let direct = analytic_kappa(&smsn, 1).unwrap();
        for i in 0..d {
            for j in 0..d {
                assert_relative_eq!(direct[(i, j)], conjugated[(i, j)], max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn kappa_affine_equivariance() {
        // K transforms like A' K A under X = A'Y + b (the quadratic form is
        // invariant).
        let smsn = st_smsn(9.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.1, 0.2, -0.4, 0.8]);
        let bvec = DVector::from_row_slice(&[2.0, -1.0]);
        let x_law = smsn.affine_transform(&a, &bvec).unwrap();
        let k_y = analytic_kappa(&smsn, 1).unwrap();
        let k_x = analytic_kappa(&x_law, 1).unwrap();
        let pushed = a.transpose() * k_y * &a;
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(k_x[(i, j)], pushed[(i, j)], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn kappa_small_overlap_stays_finite() {
        let smsn = ScaleMixtureSN::from_parts(
            DVector::zeros(3),
            DMatrix::identity(3, 3),
            DVector::from_row_slice(&[1e-9, 0.0, 0.0]),
            MixingDistribution::SkewT { nu: 8.0 },
        )
        .unwrap();
        let d = 3.0;
        let kappa = analytic_kappa(&smsn, 1).unwrap();
        let (_, sigma) = mean_cov(&smsn).unwrap();
        let g2 = mardia_indices(&smsn).unwrap().gamma2.unwrap();
        let tr = (sigma.clone().try_inverse().unwrap() * &kappa).trace();
        assert_relative_eq!(tr, g2 + d * (d + 2.0), max_relative = 1e-11);
    }

    #[test]
    fn kappa_exponent_validation_and_moment_requirements() {
        let smsn = st_smsn(8.0);
        assert!(matches!(
            analytic_kappa(&smsn, 3),
            Err(Error::InvalidArgument { .. })
        ));
        // Exponent 2 needs moments through E(S^6); at nu = 5 the order-5
        // moment is the first to fail.
        match analytic_kappa(&st_smsn(5.0), 2) {
            Err(Error::MomentNotFinite { required }) => assert!(required.contains('5')),
            other => panic!("expected MomentNotFinite, got {other:?}"),
        }
        // nu = 6.5 has it.
        assert!(analytic_kappa(&st_smsn(6.5), 2).is_ok());
    }

    #[test]
    fn third_moment_helper_matches_raw_expansion() {
        // mu_3 = m3 - 3 m1 m2 + 2 m1^3 with the raw canonical moments.
        let (e1, e2, e3) = (1.189416077435181, 5.0 / 3.0, 2.9735401935879517); // skew-t nu = 5
        let delta = 0.55f64;
        let b = b_const();
        let m1 = e1 * b * delta;
        let m2 = e2;
        let m3 = e3 * b * delta * (3.0 - delta * delta);
        let want = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
        assert_relative_eq!(
            third_central_unit(delta, e1, e2, e3),
            want,
            max_relative = 1e-13
        );
    }

    #[test]
    fn marginal_indices_consistency() {
        // The univariate indices of a 1-d marginal computed two ways: from
        // the marginal overlap directly, and from the marginal parameters.
        let smsn = st_smsn(8.0);
        let m0 = smsn.marginal(&[0]).unwrap();
        let u_direct = univariate_indices(m0.sn().delta()[0], smsn.mixing()).unwrap();
        let u_params =
            univariate_indices(smsn.sn().delta()[0], &MixingDistribution::SkewT { nu: 8.0 })
                .unwrap();
        assert_relative_eq!(
            u_direct.gamma1.unwrap(),
            u_params.gamma1.unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn d1_mardia_equals_squared_univariate() {
        let mixing = MixingDistribution::Slash { q: 9.0 };
        let delta = 0.8;
        let m = mardia_from_scalar(1, delta, &mixing).unwrap();
        let u = univariate_indices(delta, &mixing).unwrap();
        assert_relative_eq!(
            m.gamma1.unwrap(),
            u.gamma1.unwrap().powi(2),
            max_relative = 1e-13
        );
        assert_relative_eq!(m.gamma2.unwrap(), u.gamma2.unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_scalar_arguments() {
        assert!(mardia_from_scalar(0, 0.5, &MixingDistribution::Degenerate).is_err());
        assert!(mardia_from_scalar(2, 1.2, &MixingDistribution::Degenerate).is_err());
        assert!(mardia_from_scalar(2, -0.1, &MixingDistribution::Degenerate).is_err());
        assert!(univariate_indices(-1.1, &MixingDistribution::Degenerate).is_err());
        assert!(univariate_indices(f64::NAN, &MixingDistribution::Degenerate).is_err());
    }

    #[test]
    fn boundary_overlap_is_the_saturation_limit() {
        // For huge shapes delta_star rounds to exactly 1 in floating
        // point; the indices must still come out, equal to the saturation
        // values.
        let p = SkewNormalParams::new(
            DVector::zeros(1),
            DMatrix::identity(1, 1),
            DVector::from_row_slice(&[1e8]),
        )
        .unwrap();
        assert_eq!(p.delta_star(), 1.0);
        let m = mardia_from_scalar(3, 1.0, &MixingDistribution::Degenerate).unwrap();
        let (g1_sat, g2_sat) = sn_mardia(1e10);
        assert_relative_eq!(m.gamma1.unwrap(), g1_sat, max_relative = 1e-9);
        assert_relative_eq!(m.gamma2.unwrap(), g2_sat, max_relative = 1e-9);
        assert!(m.alpha_star.is_infinite());
        let u = univariate_indices(1.0, &MixingDistribution::Degenerate).unwrap();
        assert!(u.gamma1.unwrap().is_finite() && u.gamma2.unwrap().is_finite());
    }
}
