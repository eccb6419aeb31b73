//! Adaptive quadrature.
//!
//! One-dimensional integrals use an adaptive Gauss-Kronrod 7/15 rule with
//! recursive bisection; the error estimate on each panel is the difference
//! between the embedded 7-point Gauss and 15-point Kronrod values, which is
//! conservative for smooth integrands. Integrals over `(lower, inf)` map the
//! half line onto the unit interval through `s = lower + u / (1 - u)`, and
//! full-space integrals (dimension <= 3) iterate the 1-D rule over a
//! per-axis tangent substitution, so no truncation box is involved.

use crate::error::{Error, Result};

/// Kronrod nodes on [0, 1] (positive half; the rule is symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_8,
    0.140_653_259_715_525_918_7,
    0.169_004_726_639_267_902_8,
    0.190_350_578_064_785_409_9,
    0.204_432_940_075_298_892_4,
    0.209_482_141_084_727_828_0,
];

/// Weights of the embedded 7-point Gauss rule (odd-index Kronrod nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_945_0,
    0.417_959_183_673_469_387_8,
];

/// Budget of integrand evaluations for one adaptive call.
const MAX_EVALS: usize = 400_000;

/// Deepest allowed bisection level (panel width `(b-a) * 2^-60`).
const MAX_DEPTH: usize = 60;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    /// Integral estimate.
    pub value: f64,
    /// Accumulated error estimate (conservative).
    pub abs_error: f64,
    /// Number of integrand evaluations used.
    pub evals: usize,
}

/// One Gauss-Kronrod 7/15 panel: returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, &x) in XGK.iter().enumerate().take(7) {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, (kron - gauss).abs() * h.abs())
}

/// One open panel awaiting possible refinement.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: usize,
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// The error target is `rel_tol` times the larger of `|integral|` and the
/// accumulated L1 mass of the panels, so sign-changing integrands whose
/// integral is near zero still terminate; for such integrands the achieved
/// accuracy is relative to the L1 mass, and `abs_error` reports it honestly.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || !(rel_tol > 0.0) {
        return Err(Error::InvalidArgument {
            what: format!("integrate endpoints [{a}, {b}] / rel_tol {rel_tol}"),
        });
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evals: 0,
        });
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut evals = 15usize;
    let mut open = vec![Panel {
        a,
        b,
        value: v0,
        err: e0,
        depth: 0,
    }];
    // Running sums over open panels plus the panels frozen as final.
    let mut sum_value = v0;
    let mut sum_abs = v0.abs();
    let mut sum_err = e0;
    let mut worst_frozen = 0.0f64;
    loop {
        let scale = sum_value.abs().max(sum_abs);
        let target = rel_tol * scale + f64::MIN_POSITIVE;
        if sum_err <= target || open.is_empty() {
            if sum_err > 1e3 * target && evals + 30 > MAX_EVALS {
                return Err(Error::NoConvergence {
                    what: "adaptive quadrature",
                    iterations: evals,
                    residual: sum_err,
                });
            }
            break;
        }
        // Refine the panel with the largest error estimate.
        let mut idx = 0usize;
        for (i, p) in open.iter().enumerate() {
            if p.err > open[idx].err {
                idx = i;
            }
        }
        let p = open.swap_remove(idx);
        if p.depth >= MAX_DEPTH || evals + 30 > MAX_EVALS {
            // Freeze this panel's estimate; its error stays in sum_err.
            worst_frozen = worst_frozen.max(p.err);
            if open.is_empty() {
                if sum_err > 1e3 * target {
                    return Err(Error::NoConvergence {
                        what: "adaptive quadrature",
                        iterations: evals,
                        residual: sum_err,
                    });
                }
                break;
            }
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        evals += 30;
        sum_value += v1 + v2 - p.value;
        sum_abs += v1.abs() + v2.abs() - p.value.abs();
        sum_err += e1 + e2 - p.err;
        open.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            err: e1,
            depth: p.depth + 1,
        });
        open.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            err: e2,
            depth: p.depth + 1,
        });
    }
    Ok(QuadResult {
        value: sum_value,
        abs_error: sum_err.max(worst_frozen),
        evals,
    })
}

/// Adaptive integral of `f` over `(lower, inf)` via the substitution
/// `s = lower + u / (1 - u)`, `u` in `(0, 1)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    integrate(
        move |u| {
            let one_minus = 1.0 - u;
            let s = lower + u / one_minus;
            f(s) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// Integral of `f` over all of `R^dim` (`dim <= 3`) by iterating the 1-D
/// adaptive rule over per-axis tangent substitutions
/// `x_i = center_i + scale_i * tan(u_i)`. Returns only the value; the error
/// control is the per-axis relative tolerance.
pub fn integrate_full_space<F: Fn(&[f64]) -> f64>(
    f: F,
    center: &[f64],
    scale: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let dim = center.len();
    if dim == 0 || dim > 3 || scale.len() != dim {
        return Err(Error::InvalidArgument {
            what: format!("full-space integration supports 1 <= dim <= 3, got {dim}"),
        });
    }
    let mut x = vec![0.0; dim];
    nested_tan_integral(&f, center, scale, rel_tol, &mut x, 0)
}

fn nested_tan_integral<F: Fn(&[f64]) -> f64>(
    f: &F,
    center: &[f64],
    scale: &[f64],
    rel_tol: f64,
    x: &mut Vec<f64>,
    axis: usize,
) -> Result<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let dim = center.len();
    // The innermost axis evaluates f directly; outer axes integrate the
    // nested result. Inner tolerances are tightened so the outer estimate
    // stays meaningful.
    let tol = rel_tol / (1 << (dim - 1 - axis)) as f64;
    let r = integrate(
        |u| {
            let t = u.tan();
            let jac = scale[axis] * (1.0 + t * t);
            let mut xs = x.clone();
            xs[axis] = center[axis] + scale[axis] * t;
            let inner = if axis + 1 == dim {
                f(&xs)
            } else {
                nested_tan_integral(f, center, scale, rel_tol, &mut xs, axis + 1)
                    .unwrap_or(f64::NAN)
            };
            inner * jac
        },
        -half_pi,
        half_pi,
        tol,
    )?;
    if !r.value.is_finite() {
        return Err(Error::NoConvergence {
            what: "iterated full-space quadrature",
            iterations: r.evals,
            residual: f64::NAN,
        });
    }
    Ok(r.value)
}
