//! Semigroups generated by one-sided and circulant truncations `A_N` and by
//! the two-sided operator (through its Laurent symbol).

mod blocks;
mod curves;
mod diagnostics;
mod expm;
mod fit;

pub use blocks::{circulant_exp, circulant_generator, onesided_blocks, onesided_generator, CirculantFactors, ScaledColumn};
pub use curves::{
    column_bracket, decay_curve, laurent_decay, laurent_point, pointwise_max, spectral_lower_bound, sup_over_n,
    CurveOptions, DecayCurve, Sample,
};
pub use diagnostics::{
    cesaro_norms, circulant_resolvent_apply, kernel_projection, power_bound_check, CesaroClass,
    CesaroResult, KernelProjection, PowerBound,
};
pub use expm::expm_dense;
pub use fit::{fit_rate, RateFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::SpectraError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("non-finite input")]
    NonFinite,
    #[error("matrix exponential overflowed (‖tM‖₁ = {0:.3e})")]
    Overflow(f64),
    #[error("series did not reach the requested accuracy")]
    ToleranceNotMet,
    #[error("inconsistent shapes")]
    ShapeMismatch,
    #[error("fit window holds {0} usable samples (need at least 8)")]
    DegenerateWindow(usize),
    #[error("A0 is singular")]
    ZeroInSpectrum,
    #[error("φ'(0) vanishes")]
    PhiPrimeZero,
    #[error("range consistency residual {0:.3e} exceeds tolerance")]
    RangeInconsistent(f64),
    #[error("ε = {eps} is not in (0, {eps_max})")]
    EpsTooLarge { eps: f64, eps_max: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Onesided,
    Circulant,
    Laurent,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Onesided => "onesided",
            Kind::Circulant => "circulant",
            Kind::Laurent => "laurent",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "onesided" => Ok(Kind::Onesided),
            "circulant" => Ok(Kind::Circulant),
            "laurent" => Ok(Kind::Laurent),
            _ => Err(format!("unknown kind `{s}` (onesided|circulant|laurent)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PNorm {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl PNorm {
    pub fn as_str(self) -> &'static str {
        match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        }
    }
}

impl std::str::FromStr for PNorm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1" => Ok(PNorm::One),
            "2" => Ok(PNorm::Two),
            "inf" | "∞" => Ok(PNorm::Inf),
            _ => Err(format!("unknown norm `{s}` (1|2|inf)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub kind: Kind,
    pub n: usize,
}

/// Which operator a curve measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `A_N T_N(t)`.
    Derivative,
    /// `T_N(t)`.
    Semigroup,
}
