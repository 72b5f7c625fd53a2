//! Serialized descriptions of distribution families.
//!
//! ```json
//! {"family":"poisson","params":{"lambda":2.0},"truncation":{"tail_mass":1e-14}}
//! {"family":"rank_finite","params":{"theta":2,"n":5}}
//! {"family":"explicit","support":[0,1],"pmf":[0.5,0.5]}
//! ```
//!
//! Numeric parameters accept JSON numbers or strings such as `"1/3"`. On the
//! rational backend numbers are read as the decimal literal they print as,
//! so `0.2` is exactly one fifth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub const DEFAULT_TAIL_MASS: f64 = 1e-14;

fn default_tail_mass() -> f64 {
    DEFAULT_TAIL_MASS
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// How an infinite support is cut down to a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Largest probability mass allowed outside the window.
    #[serde(default = "default_tail_mass")]
    pub tail_mass: f64,
    /// Explicit window `[lo, hi]`; its dropped mass must still be below
    /// `tail_mass`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    /// Rescale the retained masses to sum to one. When false the masses are
    /// the untruncated pmf values, which needs a known normalizer.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub renormalize: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tail_mass: DEFAULT_TAIL_MASS, window: None, renormalize: true }
    }
}

impl TruncationPolicy {
    pub fn with_tail_mass(tail_mass: f64) -> Self {
        TruncationPolicy { tail_mass, ..Default::default() }
    }

    pub fn with_window(mut self, lo: i64, hi: i64) -> Self {
        self.window = Some([lo, hi]);
        self
    }
}

/// A parameter value: a JSON number or an exact textual literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn resolve<S: Scalar>(&self) -> Result<S> {
        match self {
            Number::Float(v) => S::from_f64(*v),
            Number::Text(t) => S::parse(t),
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Float(v)
    }
}

impl From<&str> for Number {
    fn from(v: &str) -> Self {
        Number::Text(v.to_string())
    }
}

impl From<String> for Number {
    fn from(v: String) -> Self {
        Number::Text(v)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Float(v) => write!(f, "{v}"),
            Number::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub lambda: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    pub n: u32,
    pub p: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnParams {
    pub n: u32,
    pub alpha: Number,
    pub beta: Number,
}

/// `p(x+1)/p(x) = (s(x) + tau(x)) / s(x+1)` with tables indexed from `lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdParams {
    #[serde(default)]
    pub lower: i64,
    pub s: Vec<Number>,
    pub tau: Vec<Number>,
}

/// `p(x) ∝ exp(V(x)) omega^x / x!` on `[0, n]`, or on the naturals when `n` is
/// absent (then `V` stays at its last tabulated value). Give either `v` or
/// `exp_v`; the latter keeps rational instances exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_v: Option<Vec<Number>>,
    pub omega: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankLimitParams {
    pub theta: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFiniteParams {
    pub theta: u64,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Poisson { params: PoissonParams },
    Binomial { params: BinomialParams },
    PolyaUrn { params: UrnParams },
    Ord { params: OrdParams },
    Gibbs { params: GibbsParams },
    RankLimit { params: RankLimitParams },
    RankFinite { params: RankFiniteParams },
    Explicit { support: [i64; 2], pmf: Vec<Number> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default)]
    pub truncation: TruncationPolicy,
}

impl DensitySpec {
    pub fn new(family: FamilySpec) -> Self {
        DensitySpec { family, truncation: TruncationPolicy::default() }
    }

    pub fn poisson(lambda: impl Into<Number>) -> Self {
        Self::new(FamilySpec::Poisson { params: PoissonParams { lambda: lambda.into() } })
    }

    pub fn binomial(n: u32, p: impl Into<Number>) -> Self {
        Self::new(FamilySpec::Binomial { params: BinomialParams { n, p: p.into() } })
    }

    pub fn polya_urn(n: u32, alpha: impl Into<Number>, beta: impl Into<Number>) -> Self {
        Self::new(FamilySpec::PolyaUrn {
            params: UrnParams { n, alpha: alpha.into(), beta: beta.into() },
        })
    }

    pub fn rank_limit(theta: u64) -> Self {
        Self::new(FamilySpec::RankLimit { params: RankLimitParams { theta } })
    }

    pub fn rank_finite(theta: u64, n: u32) -> Self {
        Self::new(FamilySpec::RankFinite { params: RankFiniteParams { theta, n } })
    }

    pub fn explicit(lower: i64, pmf: Vec<Number>) -> Self {
        let upper = lower + pmf.len() as i64 - 1;
        Self::new(FamilySpec::Explicit { support: [lower, upper], pmf })
    }

    pub fn with_truncation(mut self, truncation: TruncationPolicy) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("density specs always serialize")
    }
}
