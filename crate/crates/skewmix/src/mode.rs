//! Mode computation.
//!
//! The mode of the mixture lies on the canonical skew axis: writing
//! `M = xi + (y / delta_star) * omega delta`, the scalar `y > 0` is the
//! mode of the canonical first coordinate's density profile. That reduces
//! the `d`-dimensional optimization to one scalar root-find of the profile
//! derivative, which takes a closed form without mixing, a Student-t form
//! for the skew-t, and a one-dimensional integral for everything else.
//! In all three cases the stationarity function is strictly negative for
//! `y <= 0`, so the search is confined to the positive half-line.

use std::cell::RefCell;

use nalgebra::DVector;

use crate::distributions::{MixingDistribution, ScaleMixtureSN};
use crate::error::{Error, Result};
use crate::quad::integrate_half_line;
use crate::rootfind::{expand_bracket, scan_sign_changes, solve_bracketed};
use crate::special::{normal_cdf, normal_pdf, student_cdf, student_pdf};

/// Relative tolerance for the mixing-integral evaluations of the
/// stationarity function.
const STATIONARITY_REL_TOL: f64 = 1e-10;

/// Panels used when scanning the axis profile for additional stationary
/// points.
const SCAN_PANELS: usize = 400;

/// Whether the uniqueness of the reported mode is backed by a proof or
/// only by the numerical scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeUniqueness {
    /// Unique by log-concavity (no mixing) or radial monotonicity (no
    /// skewness).
    Proven,
    /// No proof applies; `sign_changes` reports what the scan saw.
    NotProven,
}

/// Result of a mode computation.
#[derive(Debug, Clone)]
pub struct ModeResult {
    /// The mode itself.
    pub mode: DVector<f64>,
    /// Scalar root `y` on the canonical axis (zero for a symmetric
    /// distribution).
    pub scalar_root: f64,
    /// Axis image `omega delta / delta_star`; the mode is
    /// `xi + scalar_root * direction` (zero vector when symmetric).
    pub direction: DVector<f64>,
    /// Norm of a finite-difference density gradient at the mode — an
    /// independent check, limited by the accuracy of density evaluation.
    pub residual_gradient_norm: f64,
    /// Uniqueness status of the mode.
    pub uniqueness: ModeUniqueness,
    /// Stationary points of the axis profile detected by a sign-change
    /// scan over `(0, max(8 y, 8))` — 1 means only the reported root.
    pub sign_changes: usize,
}

/// Scalar mode of the canonical skew-normal profile: the positive root of
/// `z Phi(alpha_star z) - alpha_star phi(alpha_star z)`, independent of
/// dimension. Returns zero for a symmetric shape.
pub fn sn_mode_scalar(alpha_star: f64) -> Result<f64> {
    validate_alpha_star(alpha_star)?;
    if alpha_star == 0.0 {
        return Ok(0.0);
    }
    let g = |z: f64| z * normal_cdf(alpha_star * z) - alpha_star * normal_pdf(alpha_star * z);
    let (lo, hi) = expand_bracket(g, 0.0, 1.0, 1e6, "skew-normal mode equation")?;
    let res = solve_bracketed(g, lo, hi, 1e-15 * (1.0 + alpha_star), "skew-normal mode equation")?;
    Ok(res.root)
}

/// Scalar mode of the canonical skew-t profile in dimension `d`: the
/// positive root of
/// `y sqrt(nu + d) T(w; nu + d) - nu alpha_star (nu + y^2)^{-1/2} t(w; nu + d)`
/// with `w = alpha_star y sqrt((nu + d) / (nu + y^2))`.
pub fn st_mode_scalar(alpha_star: f64, nu: f64, d: usize) -> Result<f64> {
    validate_alpha_star(alpha_star)?;
    if !(nu > 0.0) || d == 0 {
        return Err(Error::InvalidArgument {
            what: format!("skew-t mode needs nu > 0 and d >= 1, got nu = {nu}, d = {d}"),
        });
    }
    if alpha_star == 0.0 {
        return Ok(0.0);
    }
    let nd = nu + d as f64;
    let g = |y: f64| {
        let w = alpha_star * y * (nd / (nu + y * y)).sqrt();
        y * nd.sqrt() * student_cdf(w, nd)
            - nu * alpha_star / (nu + y * y).sqrt() * student_pdf(w, nd)
    };
    let (lo, hi) = expand_bracket(g, 0.0, 1.0, 1e6, "skew-t mode equation")?;
    let res = solve_bracketed(g, lo, hi, 1e-15 * (1.0 + alpha_star), "skew-t mode equation")?;
    Ok(res.root)
}

/// Scalar mode of the canonical profile for an arbitrary mixing law with a
/// density: the positive root of
/// `G(y) = Int s^{-d-1} phi(y/s) {(y/s) Phi(alpha_star y/s) -
/// alpha_star phi(alpha_star y/s)} f_S(s) ds`,
/// evaluated by adaptive quadrature over the mixing support. Works for any
/// mixing with a density (including the skew-t, where it cross-checks the
/// closed form), but not for the degenerate mixing.
pub fn mixture_mode_scalar(
    alpha_star: f64,
    d: usize,
    mixing: &MixingDistribution,
) -> Result<f64> {
    validate_alpha_star(alpha_star)?;
    if d == 0 {
        return Err(Error::InvalidArgument {
            what: "mode needs d >= 1".to_string(),
        });
    }
    if !mixing.has_density() {
        return Err(Error::DensityUnavailable {
            mixing: mixing.kind(),
        });
    }
    if alpha_star == 0.0 {
        return Ok(0.0);
    }
    let stationarity = |y: f64| mixture_stationarity(y, alpha_star, d, mixing);
    let captured: RefCell<Option<Error>> = RefCell::new(None);
    let g = |y: f64| match stationarity(y) {
        Ok(v) => v,
        Err(e) => {
            captured.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let solved = expand_bracket(&g, 0.0, 1.0, 1e6, "mixture mode equation").and_then(
        |(lo, hi)| {
            solve_bracketed(&g, lo, hi, 1e-14 * (1.0 + alpha_star), "mixture mode equation")
        },
    );
    if let Some(e) = captured.into_inner() {
        return Err(e);
    }
    Ok(solved?.root)
}

/// The mixing-integral stationarity function `G(y)` itself.
fn mixture_stationarity(
    y: f64,
    alpha_star: f64,
    d: usize,
    mixing: &MixingDistribution,
) -> Result<f64> {
    let power = -(d as i32) - 1;
    let lower = mixing.support_lower();
    let q = integrate_half_line(
        |s| {
            let fs = mixing.density(s).unwrap_or(0.0);
            if fs == 0.0 || s <= 0.0 {
                return 0.0;
            }
            let z = y / s;
            s.powi(power)
                * normal_pdf(z)
                * (z * normal_cdf(alpha_star * z) - alpha_star * normal_pdf(alpha_star * z))
                * fs
        },
        lower,
        STATIONARITY_REL_TOL,
    )?;
    Ok(q.value)
}

/// Mode of a mixture distribution, with diagnostics.
pub fn smsn_mode(smsn: &ScaleMixtureSN) -> Result<ModeResult> {
    let sn = smsn.sn();
    let d = sn.dim();
    let alpha_star = sn.alpha_star();
    if alpha_star == 0.0 {
        // Symmetric case: the density is radially decreasing in the
        // Mahalanobis norm for every mixing law, so the mode is the
        // location exactly.
        let mode = sn.xi().clone();
        let grad = density_gradient_norm(smsn, &mode)?;
        return Ok(ModeResult {
            mode,
            scalar_root: 0.0,
            direction: DVector::zeros(d),
            residual_gradient_norm: grad,
            uniqueness: ModeUniqueness::Proven,
            sign_changes: 0,
        });
    }
    let root = match smsn.mixing() {
        MixingDistribution::Degenerate => sn_mode_scalar(alpha_star)?,
        MixingDistribution::SkewT { nu } => st_mode_scalar(alpha_star, *nu, d)?,
        other => mixture_mode_scalar(alpha_star, d, other)?,
    };
    let direction = sn.scale().component_mul(sn.delta()) / sn.delta_star();
    let mode = sn.xi() + &direction * root;
    let sign_changes = profile_sign_changes(alpha_star, d, smsn.mixing(), root);
    let uniqueness = match smsn.mixing() {
        // The skew-normal density is log-concave, hence unimodal.
        MixingDistribution::Degenerate => ModeUniqueness::Proven,
        _ => ModeUniqueness::NotProven,
    };
    let residual_gradient_norm = density_gradient_norm(smsn, &mode)?;
    Ok(ModeResult {
        mode,
        scalar_root: root,
        direction,
        residual_gradient_norm,
        uniqueness,
        sign_changes,
    })
}

/// Counts stationary points of the axis profile near the root; the
/// reported root itself accounts for one.
fn profile_sign_changes(
    alpha_star: f64,
    d: usize,
    mixing: &MixingDistribution,
    root: f64,
) -> usize {
    let hi = (8.0 * root).max(8.0);
    let lo = hi / SCAN_PANELS as f64 * 1e-3;
    match mixing {
        MixingDistribution::Degenerate => {
            let g =
                |z: f64| z * normal_cdf(alpha_star * z) - alpha_star * normal_pdf(alpha_star * z);
            scan_sign_changes(g, lo, hi, SCAN_PANELS).len()
        }
        MixingDistribution::SkewT { nu } => {
            let nd = nu + d as f64;
            let g = |y: f64| {
                let w = alpha_star * y * (nd / (nu + y * y)).sqrt();
                y * nd.sqrt() * student_cdf(w, nd)
                    - nu * alpha_star / (nu + y * y).sqrt() * student_pdf(w, nd)
            };
            scan_sign_changes(g, lo, hi, SCAN_PANELS).len()
        }
        other => {
            let g = |y: f64| mixture_stationarity(y, alpha_star, d, other).unwrap_or(f64::NAN);
            scan_sign_changes(g, lo, hi, SCAN_PANELS).len()
        }
    }
}

/// Central-difference gradient norm of the density at a point. The step
/// is widened when the density itself comes from quadrature, whose noise
/// would otherwise dominate the difference quotient.
fn density_gradient_norm(smsn: &ScaleMixtureSN, at: &DVector<f64>) -> Result<f64> {
    let exact = matches!(
        smsn.mixing(),
        MixingDistribution::Degenerate | MixingDistribution::SkewT { .. }
    );
    let rel_step = if exact { 1e-5 } else { 1e-3 };
    let d = at.len();
    let mut sq = 0.0;
    let mut x = at.clone();
    for k in 0..d {
        let h = rel_step * (1.0 + at[k].abs());
        x[k] = at[k] + h;
        let up = smsn.density(&x)?;
        x[k] = at[k] - h;
        let dn = smsn.density(&x)?;
        x[k] = at[k];
        let g = (up - dn) / (2.0 * h);
        sq += g * g;
    }
    Ok(sq.sqrt())
}

fn validate_alpha_star(alpha_star: f64) -> Result<()> {
    if !(alpha_star >= 0.0) || !alpha_star.is_finite() {
        return Err(Error::InvalidArgument {
            what: format!("alpha_star must be finite and non-negative, got {alpha_star}"),
        });
    }
    Ok(())
}
