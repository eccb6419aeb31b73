//! Scale mixtures of multivariate skew-normal distributions.
//!
//! The crate provides exact canonical-form transforms, closed-form Mardia
//! skewness/kurtosis indices, and mode computation for the family
//! `Y = xi + omega * S * Z`, where `Z` is multivariate skew-normal and `S`
//! is an independent positive mixing variable (constant one, the inverse
//! square-root Gamma that yields the skew-t, the Slash power law, or a
//! user-supplied mixing law). Monte-Carlo and grid-search oracles for
//! cross-validation live in [`mc_oracle`], and the `skewmix` binary exposes
//! the whole pipeline as a CLI.

pub mod canonical;
pub mod distributions;
pub mod error;
pub mod io;
pub mod mc_oracle;
pub mod mode;
pub mod moments;
pub mod special;

mod linalg;
pub mod quad;
pub mod rootfind;

pub use canonical::{canonical, CanonicalMethod, CanonicalTransform};
pub use distributions::{MixingDistribution, ScaleMixtureSN, SkewNormalParams};
pub use error::{Error, ErrorClass, Result};
pub use io::{parse_spec, DistributionSpec, MixingSpec};
pub use mode::{smsn_mode, ModeResult, ModeUniqueness};
pub use moments::{mardia_indices, mean_cov, MardiaIndices};
