//! Scalar special functions: error function, normal and Student
//! density/distribution functions, and log-gamma helpers.
//!
//! The standard normal distribution function must be accurate to better than
//! 1e-14 absolute error everywhere, which is more than the polynomial
//! approximation used by `statrs` delivers (its `erf` is off by ~1e-10 around
//! |x| = 1). `erf`/`erfc` here are therefore a port of W. J. Cody's rational
//! Chebyshev approximations (the SPECFUN `CALERF` scheme), which are good to
//! a few ulps in double precision. Log-gamma and the regularized incomplete
//! beta are taken from `statrs`, whose implementations already reach machine
//! accuracy.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

/// 1/sqrt(pi).
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_28;
/// 1/sqrt(2*pi).
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_94;
/// Boundary between the small-|x| erf expansion and the erfc expansions.
const ERF_THRESH: f64 = 0.46875;
/// erfc underflows to zero (in double precision) beyond this argument.
const ERFC_XBIG: f64 = 26.543;

// Rational coefficients for erf on |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];

// Rational coefficients for erfc on 0.46875 < x <= 4.
const ERFC_C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const ERFC_D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];

// Rational coefficients for the asymptotic erfc expansion on x > 4.
const ERFC_P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

/// erf for |x| <= 0.46875.
fn erf_small(x: f64) -> f64 {
    let y = x * x;
    let mut num = ERF_A[4] * y;
    let mut den = y;
    for i in 0..3 {
        num = (num + ERF_A[i]) * y;
        den = (den + ERF_B[i]) * y;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

/// exp(-x^2) evaluated as exp(-hi^2) * exp(-lo) with hi a 1/16-grid value,
/// which avoids the roundoff of squaring x directly in the far tail.
fn exp_neg_sq(x: f64) -> f64 {
    let hi = (x * 16.0).trunc() / 16.0;
    let del = (x - hi) * (x + hi);
    (-hi * hi).exp() * (-del).exp()
}

/// erfc for x > 0.46875 (positive arguments only).
fn erfc_pos(x: f64) -> f64 {
    if x > ERFC_XBIG {
        return 0.0;
    }
    if x <= 4.0 {
        let mut num = ERFC_C[8] * x;
        let mut den = x;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * x;
            den = (den + ERFC_D[i]) * x;
        }
        exp_neg_sq(x) * (num + ERFC_C[7]) / (den + ERFC_D[7])
    } else {
        let y = 1.0 / (x * x);
        let mut num = ERFC_P[5] * y;
        let mut den = y;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * y;
            den = (den + ERFC_Q[i]) * y;
        }
        let r = y * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        exp_neg_sq(x) * (FRAC_1_SQRT_PI - r) / x
    }
}

/// Error function, accurate to a few ulps over the whole real line.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= ERF_THRESH {
        erf_small(x)
    } else if x > 0.0 {
        1.0 - erfc_pos(x)
    } else {
        erfc_pos(-x) - 1.0
    }
}

/// Complementary error function, accurate to a few ulps; relative accuracy is
/// preserved in the decaying tail down to the underflow threshold.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= ERF_THRESH {
        1.0 - erf_small(x)
    } else if x > 0.0 {
        erfc_pos(x)
    } else {
        2.0 - erfc_pos(-x)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, absolute error below 1e-15.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Natural log of the gamma function (requires `x > 0`).
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

/// Gamma-function ratio `Gamma(a) / Gamma(b)` evaluated through log-gamma
/// differences, so it stays finite for large arguments where the individual
/// gamma values overflow. The relative error grows like
/// `max(|ln Gamma(a)|, |ln Gamma(b)|) * eps`, which is still below 1e-12
/// for arguments up to a few hundred.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    (ln_gamma(a) - ln_gamma(b)).exp()
}

/// Student t density with `nu` degrees of freedom.
pub fn student_pdf(x: f64, nu: f64) -> f64 {
    debug_assert!(nu > 0.0);
    let ln_norm = ln_gamma((nu + 1.0) / 2.0)
        - ln_gamma(nu / 2.0)
        - 0.5 * (nu * std::f64::consts::PI).ln();
    (ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

/// Student t distribution function with `nu` degrees of freedom, computed
/// from the regularized incomplete beta function.
///
/// Absolute error is below 1e-14 for moderate `nu` (verified up to 10^3);
/// in the near-normal regime around `nu = 10^6` the incomplete-beta
/// conditioning limits it to roughly 1e-10, still far below the spacing
/// between t and normal quantiles there.
pub fn student_cdf(x: f64, nu: f64) -> f64 {
    debug_assert!(nu > 0.0);
    if x == 0.0 {
        return 0.5;
    }
    let xx = x * x;
    if xx <= nu {
        // Near the center, parameterize by x^2/(nu + x^2) so the beta
        // argument keeps full precision for small |x| (forming the
        // complement of nu/(nu + x^2) would cancel).
        let y = xx / (nu + xx);
        let ib = beta_reg(0.5, nu / 2.0, y);
        0.5 + 0.5 * x.signum() * ib
    } else {
        let z = nu / (nu + xx);
        let tail = 0.5 * beta_reg(nu / 2.0, 0.5, z);
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath at 40 digits.
    const ERFC_REFS: &[(f64, f64)] = &[
        (0.05, 0.9436280222029834),
        (0.3, 0.6713732405408726),
        (0.46, 0.5153446099983203),
        (0.47, 0.5062549491139179),
        (1.0, 0.15729920705028513),
        (2.0, 0.004677734981047266),
        (3.9, 3.4792248597231765e-8),
        (4.1, 6.700027654084918e-9),
        (6.0, 2.1519736712498913e-17),
        (10.0, 2.088487583762545e-45),
        (15.0, 7.212994172451207e-100),
        (20.0, 5.395865611607901e-176),
        (26.0, 5.663192408856143e-296),
        (-0.5, 1.5204998778130465),
        (-1.0, 1.8427007929497148),
        (-4.0, 1.999999984582742),
        (-6.0, 2.0),
        (0.0, 1.0),
    ];

    const ERF_REFS: &[(f64, f64)] = &[
        (0.1, 0.1124629160182849),
        (0.46875, 0.49261347321793797),
        (1.0, 0.8427007929497149),
        (-2.5, -0.999593047982555),
        (3.0, 0.9999779095030014),
    ];

    const PHI_REFS: &[(f64, f64)] = &[
        (0.5, 0.6914624612740131),
        (1.0, 0.8413447460685429),
        (2.0, 0.9772498680518208),
        (-1.0, 0.15865525393145705),
        (-3.0, 0.0013498980316300946),
        (-5.0, 2.866515718791939e-7),
        (-8.0, 6.220960574271784e-16),
        (0.1, 0.539827837277029),
        (-0.75, 0.2266273523768682),
        (6.0, 0.9999999990134123),
        (-12.5, 3.732564298877713e-36),
    ];

    const T_CDF_REFS: &[(f64, f64, f64)] = &[
        (1.5, 7.0, 0.911350756505015),
        (-2.3, 4.0, 0.041469518556191194),
        (0.7, 12.0, 0.7513629231046463),
        (4.0, 6.0, 0.9964405110181259),
        (1.0, 1.0, 0.75),
        (-6.0, 3.0, 0.004636357446142334),
        (0.3, 25.0, 0.6166712531734714),
        (2.0, 2.0, 0.908248290463863),
        (-0.9, 5.0, 0.20468560017231197),
        (10.0, 4.0, 0.999718998188642),
    ];

    #[test]
    fn erfc_matches_reference_to_few_ulps() {
        for &(x, want) in ERFC_REFS {
            let got = erfc(x);
            let tol = 4.0 * f64::EPSILON * want.abs().max(f64::MIN_POSITIVE);
            assert!(
                (got - want).abs() <= tol,
                "erfc({x}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn erf_matches_reference() {
        for &(x, want) in ERF_REFS {
            let got = erf(x);
            assert!(
                (got - want).abs() <= 4.0 * f64::EPSILON * want.abs().max(1e-300),
                "erf({x}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn erf_erfc_are_complementary_and_odd() {
        for i in 0..200 {
            let x = -10.0 + 0.1 * i as f64;
            assert!((erf(x) + erfc(x) - 1.0).abs() < 4.0 * f64::EPSILON, "x = {x}");
            assert!((erf(-x) + erf(x)).abs() < 4.0 * f64::EPSILON, "x = {x}");
        }
    }

    #[test]
    fn normal_cdf_absolute_error_below_1e15() {
        for &(x, want) in PHI_REFS {
            let got = normal_cdf(x);
            assert!(
                (got - want).abs() < 1e-15,
                "Phi({x}) = {got:e}, want {want:e}, err {:e}",
                (got - want).abs()
            );
        }
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_cdf(-40.0), 0.0);
        assert_eq!(normal_cdf(40.0), 1.0);
    }

    #[test]
    fn student_cdf_matches_reference() {
        for &(x, nu, want) in T_CDF_REFS {
            let got = student_cdf(x, nu);
            assert!(
                (got - want).abs() < 1e-14,
                "T({x}; {nu}) = {got:e}, want {want:e}"
            );
        }
        // Near-normal regime: accuracy degrades gracefully, stays ~1e-10.
        let got = student_cdf(1.0, 1e6);
        assert!((got - 0.841344625083211).abs() < 5e-10);
        assert_eq!(student_cdf(0.0, 3.0), 0.5);
    }

    #[test]
    fn student_cdf_complementary_in_x() {
        for &nu in &[0.5, 1.0, 2.5, 8.0, 100.0] {
            for i in 0..40 {
                let x = -6.0 + 0.3 * i as f64;
                let s = student_cdf(x, nu) + student_cdf(-x, nu);
                assert!((s - 1.0).abs() < 1e-14, "nu = {nu}, x = {x}");
            }
        }
    }

    #[test]
    fn student_pdf_is_derivative_of_cdf() {
        for &nu in &[1.0, 4.0, 17.5] {
            for &x in &[-2.2, -0.4, 0.0, 0.9, 3.3] {
                let h = 1e-6;
                let fd = (student_cdf(x + h, nu) - student_cdf(x - h, nu)) / (2.0 * h);
                assert!(
                    (fd - student_pdf(x, nu)).abs() < 1e-9,
                    "nu = {nu}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn student_large_nu_approaches_normal() {
        for &x in &[-3.0, -1.0, 0.3, 2.0] {
            assert!((student_cdf(x, 1e6) - normal_cdf(x)).abs() < 1e-6);
            assert!((student_pdf(x, 1e8) - normal_pdf(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn gamma_ratio_handles_large_arguments() {
        // Gamma(4)/Gamma(2) = 6/1
        assert!((gamma_ratio(4.0, 2.0) - 6.0).abs() < 1e-13);
        // Gamma(x+1)/Gamma(x) = x, even where Gamma itself overflows. Going
        // through log-gamma differences leaves a relative error of order
        // |ln Gamma| * eps, so the check is relative.
        let x = 300.5;
        assert!(((gamma_ratio(x + 1.0, x) - x) / x).abs() < 1e-12);
    }
}
