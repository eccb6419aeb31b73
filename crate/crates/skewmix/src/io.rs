//! JSON and CSV interchange: distribution specifications, result reports,
//! and sample matrices.
//!
//! Floating-point values are written in scientific notation with 17
//! significant digits, which round-trips every finite `f64` exactly. The
//! describe report is a superset of the input specification, so it can be
//! fed back in as input.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::canonical::{self, CanonicalMethod};
use crate::distributions::{MixingDistribution, ScaleMixtureSN};
use crate::error::{Error, Result};
use crate::mc_oracle;
use crate::mode::{self, ModeUniqueness};
use crate::moments;

/// Mixing law in interchange form. Custom mixing laws are built from
/// closures and have no JSON representation.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MixingSpec {
    /// No mixing: the plain skew-normal.
    Degenerate,
    /// Skew-t mixing with `nu` degrees of freedom.
    SkewT {
        /// Degrees of freedom (> 0).
        nu: f64,
    },
    /// Slash mixing with tail index `q`.
    Slash {
        /// Tail index (> 0).
        q: f64,
    },
}

impl Default for MixingSpec {
    fn default() -> Self {
        MixingSpec::Degenerate
    }
}

impl MixingSpec {
    /// Converts to the runtime mixing law.
    pub fn to_mixing(&self) -> MixingDistribution {
        match self {
            MixingSpec::Degenerate => MixingDistribution::Degenerate,
            MixingSpec::SkewT { nu } => MixingDistribution::SkewT { nu: *nu },
            MixingSpec::Slash { q } => MixingDistribution::Slash { q: *q },
        }
    }

    /// Converts from the runtime mixing law; custom laws are rejected.
    pub fn from_mixing(mixing: &MixingDistribution) -> Result<Self> {
        match mixing {
            MixingDistribution::Degenerate => Ok(MixingSpec::Degenerate),
            MixingDistribution::SkewT { nu } => Ok(MixingSpec::SkewT { nu: *nu }),
            MixingDistribution::Slash { q } => Ok(MixingSpec::Slash { q: *q }),
            MixingDistribution::Custom { name, .. } => Err(Error::InvalidArgument {
                what: format!("custom mixing '{name}' has no JSON representation"),
            }),
        }
    }
}

/// A distribution in interchange form.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DistributionSpec {
    /// Location vector.
    pub xi: Vec<f64>,
    /// Scale matrix, row by row.
    #[serde(rename = "Omega")]
    pub omega: Vec<Vec<f64>>,
    /// Shape vector.
    pub alpha: Vec<f64>,
    /// Mixing law; defaults to none (plain skew-normal).
    #[serde(default)]
    pub mixing: MixingSpec,
}

impl DistributionSpec {
    /// Builds and validates the runtime distribution.
    pub fn to_distribution(&self) -> Result<ScaleMixtureSN> {
        let d = self.xi.len();
        let omega = rows_to_matrix(&self.omega)?;
        ScaleMixtureSN::from_parts(
            DVector::from_row_slice(&self.xi),
            omega,
            DVector::from_row_slice(&self.alpha),
            self.mixing.to_mixing(),
        )
        .map_err(|e| match e {
            // A ragged or mis-sized matrix produces a clearer message here
            // than deep inside parameter validation.
            Error::DimensionMismatch { expected, got, what } if expected != d => {
                Error::DimensionMismatch { expected: d, got, what }
            }
            other => other,
        })
    }

    /// Interchange form of a runtime distribution (custom mixing laws are
    /// rejected).
    pub fn from_distribution(smsn: &ScaleMixtureSN) -> Result<Self> {
        Ok(DistributionSpec {
            xi: smsn.sn().xi().iter().copied().collect(),
            omega: matrix_to_rows(smsn.sn().omega()),
            alpha: smsn.sn().alpha().iter().copied().collect(),
            mixing: MixingSpec::from_mixing(smsn.mixing())?,
        })
    }
}

/// Parses a distribution specification from JSON text.
pub fn parse_spec(json: &str) -> Result<DistributionSpec> {
    serde_json::from_str(json).map_err(|e| Error::InvalidArgument {
        what: format!("cannot parse distribution JSON: {e}"),
    })
}

/// Serializes any report to JSON with 17-significant-digit floats.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    struct Sci17;
    impl serde_json::ser::Formatter for Sci17 {
        fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            write!(writer, "{value:.16e}")
        }
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sci17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidArgument {
            what: format!("JSON encoding failed: {e}"),
        })?;
    Ok(String::from_utf8(out).expect("JSON output is UTF-8"))
}

/// Rows-of-rows view of a matrix.
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Matrix from rows-of-rows, which must be rectangular and non-empty.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidArgument {
            what: "matrix has no rows".to_string(),
        });
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidArgument {
            what: "matrix rows have unequal lengths".to_string(),
        });
    }
    Ok(DMatrix::from_row_iterator(
        n,
        m,
        rows.iter().flat_map(|r| r.iter().copied()),
    ))
}

/// Writes a sample matrix as headerless CSV, one observation per row.
pub fn write_samples_csv<W: Write>(writer: W, samples: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    let mut record = Vec::with_capacity(samples.ncols());
    for i in 0..samples.nrows() {
        record.clear();
        for j in 0..samples.ncols() {
            record.push(format!("{:.16e}", samples[(i, j)]));
        }
        wtr.write_record(&record).map_err(csv_error)?;
    }
    wtr.flush().map_err(|e| Error::InvalidArgument {
        what: format!("CSV write failed: {e}"),
    })
}

/// Reads a headerless CSV sample matrix.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let row: Result<Vec<f64>> = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| Error::InvalidArgument {
                    what: format!("CSV field '{field}' is not a number"),
                })
            })
            .collect();
        rows.push(row?);
    }
    rows_to_matrix(&rows)
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument {
        what: format!("CSV processing failed: {e}"),
    }
}

/// Full description of a distribution: the specification itself plus
/// derived quantities. Parses back as a [`DistributionSpec`].
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DescribeReport {
    /// Dimension.
    pub d: usize,
    /// Location vector.
    pub xi: Vec<f64>,
    /// Scale matrix.
    #[serde(rename = "Omega")]
    pub omega: Vec<Vec<f64>>,
    /// Shape vector.
    pub alpha: Vec<f64>,
    /// Mixing law.
    pub mixing: MixingSpec,
    /// Per-coordinate scales `sqrt(Omega_kk)`.
    pub scale: Vec<f64>,
    /// Overlap vector.
    pub delta: Vec<f64>,
    /// Scalar shape.
    pub alpha_star: f64,
    /// Scalar overlap.
    pub delta_star: f64,
    /// Mean vector, when the first mixing moment exists.
    pub mean: Option<Vec<f64>>,
    /// Covariance matrix, when the second mixing moment exists.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Unmet moment condition blocking mean/covariance, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub moments_blocked_by: Option<String>,
}

/// Builds the describe report.
pub fn describe_report(smsn: &ScaleMixtureSN) -> Result<DescribeReport> {
    let sn = smsn.sn();
    let (mean, covariance, blocked) = match moments::mean_cov(smsn) {
        Ok((m, c)) => (
            Some(m.iter().copied().collect()),
            Some(matrix_to_rows(&c)),
            None,
        ),
        Err(Error::MomentNotFinite { required }) => (None, None, Some(required)),
        Err(e) => return Err(e),
    };
    Ok(DescribeReport {
        d: sn.dim(),
        xi: sn.xi().iter().copied().collect(),
        omega: matrix_to_rows(sn.omega()),
        alpha: sn.alpha().iter().copied().collect(),
        mixing: MixingSpec::from_mixing(smsn.mixing())?,
        scale: sn.scale().iter().copied().collect(),
        delta: sn.delta().iter().copied().collect(),
        alpha_star: sn.alpha_star(),
        delta_star: sn.delta_star(),
        mean,
        covariance,
        moments_blocked_by: blocked,
    })
}

/// Verification block of a canonicalize report.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct VerificationReport {
    /// Matrix the transform normalizes (`"Omega"` or `"Sigma"`).
    pub normalized_matrix: String,
    /// Largest deviation of that matrix from the identity.
    pub max_normalization_deviation: f64,
    /// Where the deviation occurs.
    pub normalization_location: [usize; 2],
    /// Largest deviation of the transformed shape from canonical form.
    pub max_shape_deviation: f64,
    /// Component where the shape deviation occurs.
    pub shape_index: usize,
}

/// Canonical transform in interchange form.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CanonicalizeReport {
    /// Construction requested by the caller.
    pub requested_method: String,
    /// Construction actually used (a scatter route may fall back).
    pub method: String,
    /// The transform, row by row; the canonical variable is
    /// `X = H'(Y - xi)`.
    pub h: Vec<Vec<f64>>,
    /// Scalar shape carried by the canonical first coordinate.
    pub alpha_star: f64,
    /// Joint eigenvalues in column order (skew coordinate first), when the
    /// construction produces them.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eigenvalues: Option<Vec<f64>>,
    /// The canonical distribution itself.
    pub transformed: DistributionSpec,
    /// Verification against the source distribution, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<VerificationReport>,
}

/// Builds the canonicalize report.
pub fn canonicalize_report(
    smsn: &ScaleMixtureSN,
    method: CanonicalMethod,
    kappa_exponent: u32,
    verify: bool,
) -> Result<CanonicalizeReport> {
    let t = canonical::canonical(smsn, method, kappa_exponent)?;
    let transformed = DistributionSpec::from_distribution(&t.apply(smsn)?)?;
    let verification = if verify {
        let check = canonical::verify_canonical(smsn, &t)?;
        Some(VerificationReport {
            normalized_matrix: check.normalized_matrix.to_string(),
            max_normalization_deviation: check.max_normalization_deviation,
            normalization_location: [
                check.normalization_location.0,
                check.normalization_location.1,
            ],
            max_shape_deviation: check.max_shape_deviation,
            shape_index: check.shape_index,
        })
    } else {
        None
    };
    Ok(CanonicalizeReport {
        requested_method: method.as_str().to_string(),
        method: t.method.as_str().to_string(),
        h: matrix_to_rows(&t.h),
        alpha_star: t.alpha_star,
        eigenvalues: t.eigenvalues.as_ref().map(|e| e.iter().copied().collect()),
        transformed,
        verification,
    })
}

/// Monte-Carlo block of an indices report.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct McIndicesReport {
    /// Sample size drawn.
    pub n: usize,
    /// Generator seed.
    pub seed: u64,
    /// Sample skewness statistic.
    pub b1: f64,
    /// Sample kurtosis statistic (raw, not excess).
    pub b2: f64,
    /// Sample estimate of the skewness index (equals `b1`).
    pub gamma1_estimate: f64,
    /// Sample estimate of the excess kurtosis index (`b2 - d(d+2)`).
    pub gamma2_estimate: f64,
    /// Bootstrap standard error of `b1`, when resamples were drawn.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b1_se: Option<f64>,
    /// Bootstrap standard error of `b2`, when resamples were drawn.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b2_se: Option<f64>,
    /// Bootstrap resamples drawn (0 disables the bootstrap).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstrap_resamples: Option<usize>,
}

/// Skewness/kurtosis indices in interchange form.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct IndicesReport {
    /// Dimension.
    pub d: usize,
    /// Scalar shape; absent means infinite (saturated overlap).
    pub alpha_star: Option<f64>,
    /// Scalar overlap.
    pub delta_star: f64,
    /// Skewness index, when defined.
    pub gamma1: Option<f64>,
    /// Unmet moment condition blocking `gamma1`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma1_blocked_by: Option<String>,
    /// Excess kurtosis index, when defined.
    pub gamma2: Option<f64>,
    /// Unmet moment condition blocking `gamma2`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma2_blocked_by: Option<String>,
    /// Monte-Carlo cross-check, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monte_carlo: Option<McIndicesReport>,
}

/// Builds the indices report; `mc` optionally adds a Monte-Carlo
/// cross-check as `(n, seed, bootstrap_resamples)`.
pub fn indices_report(
    smsn: &ScaleMixtureSN,
    mc: Option<(usize, u64, usize)>,
) -> Result<IndicesReport> {
    let m = moments::mardia_indices(smsn)?;
    let monte_carlo = match mc {
        None => None,
        Some((n, seed, resamples)) => {
            let samples = smsn.sample(n, seed)?;
            let em = mc_oracle::empirical_mardia(&samples)?;
            let (b1_se, b2_se, boot) = if resamples >= 2 {
                let bs = mc_oracle::bootstrap_mardia(&samples, resamples, seed ^ 0x9e37_79b9)?;
                (Some(bs.b1_se), Some(bs.b2_se), Some(resamples))
            } else {
                (None, None, None)
            };
            let df = m.d as f64;
            Some(McIndicesReport {
                n,
                seed,
                b1: em.b1,
                b2: em.b2,
                gamma1_estimate: em.b1,
                gamma2_estimate: em.b2 - df * (df + 2.0),
                b1_se,
                b2_se,
                bootstrap_resamples: boot,
            })
        }
    };
    Ok(IndicesReport {
        d: m.d,
        alpha_star: m.alpha_star.is_finite().then_some(m.alpha_star),
        delta_star: m.delta_star,
        gamma1: m.gamma1,
        gamma1_blocked_by: m.gamma1_blocked_by,
        gamma2: m.gamma2,
        gamma2_blocked_by: m.gamma2_blocked_by,
        monte_carlo,
    })
}

/// Mode in interchange form.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ModeReport {
    /// The mode itself.
    pub mode: Vec<f64>,
    /// Scalar root on the canonical axis.
    pub scalar_root: f64,
    /// Axis image; the mode is `xi + scalar_root * direction`.
    pub direction: Vec<f64>,
    /// Density value at the mode.
    pub density_at_mode: f64,
    /// Finite-difference gradient norm at the mode.
    pub residual_gradient_norm: f64,
    /// `"proven"` or `"not_proven"`.
    pub uniqueness: String,
    /// Stationary points seen by the scan of the axis profile.
    pub sign_changes: usize,
}

/// Builds the mode report.
pub fn mode_report(smsn: &ScaleMixtureSN) -> Result<ModeReport> {
    let m = mode::smsn_mode(smsn)?;
    let density_at_mode = smsn.density(&m.mode)?;
    Ok(ModeReport {
        mode: m.mode.iter().copied().collect(),
        scalar_root: m.scalar_root,
        direction: m.direction.iter().copied().collect(),
        density_at_mode,
        residual_gradient_norm: m.residual_gradient_norm,
        uniqueness: match m.uniqueness {
            ModeUniqueness::Proven => "proven".to_string(),
            ModeUniqueness::NotProven => "not_proven".to_string(),
        },
        sign_changes: m.sign_changes,
    })
}
