//! Gaussian statistical models with a shared mean `mu` and a shared
//! standard deviation `sigma`.
//!
//! Every micro-variable has mean `mu` and variance `sigma^2`; the correlated
//! structures put `rho * sigma^2` on a fixed pattern of off-diagonal entries.
//! The trivariate patterns are the three inequivalent ones up to permutation
//! of the micro-variables:
//!
//! ```text
//! weak            mildly weak       strong
//! | 1 r 0 |       | 1 r r |         | 1 r r |
//! | r 1 0 |       | r 1 0 |         | r 1 r |
//! | 0 0 1 |       | r 0 1 |         | r r 1 |
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SmallMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationStructure {
    /// One variable, `mu` is the only macro-variable (`sigma = 1`).
    Mono1,
    /// One variable, `sigma` is the only macro-variable (`mu = 0`).
    Mono2,
    /// One variable, both `mu` and `sigma`.
    Mono3,
    BivariateStrong,
    TrivariateWeak,
    TrivariateMildlyWeak,
    TrivariateStrong,
}

/// A coordinate on the parameter manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacroVar {
    Mu,
    Sigma,
}

impl MacroVar {
    /// Slot of this variable in `(mu, sigma)`-ordered tangent vectors.
    pub fn slot(self) -> usize {
        match self {
            MacroVar::Mu => 0,
            MacroVar::Sigma => 1,
        }
    }
}

impl CorrelationStructure {
    pub const ALL: [CorrelationStructure; 7] = [
        CorrelationStructure::Mono1,
        CorrelationStructure::Mono2,
        CorrelationStructure::Mono3,
        CorrelationStructure::BivariateStrong,
        CorrelationStructure::TrivariateWeak,
        CorrelationStructure::TrivariateMildlyWeak,
        CorrelationStructure::TrivariateStrong,
    ];

    /// Structures whose parameter manifold is the `(mu, sigma)` half-plane.
    pub const TWO_DIMENSIONAL: [CorrelationStructure; 5] = [
        CorrelationStructure::Mono3,
        CorrelationStructure::BivariateStrong,
        CorrelationStructure::TrivariateWeak,
        CorrelationStructure::TrivariateMildlyWeak,
        CorrelationStructure::TrivariateStrong,
    ];

    /// Structures with a correlation coefficient.
    pub const CORRELATED: [CorrelationStructure; 4] = [
        CorrelationStructure::BivariateStrong,
        CorrelationStructure::TrivariateWeak,
        CorrelationStructure::TrivariateMildlyWeak,
        CorrelationStructure::TrivariateStrong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorrelationStructure::Mono1 => "mono1",
            CorrelationStructure::Mono2 => "mono2",
            CorrelationStructure::Mono3 => "mono3",
            CorrelationStructure::BivariateStrong => "bivariate-strong",
            CorrelationStructure::TrivariateWeak => "trivariate-weak",
            CorrelationStructure::TrivariateMildlyWeak => "trivariate-mildly-weak",
            CorrelationStructure::TrivariateStrong => "trivariate-strong",
        }
    }

    /// Number of micro-variables `n`.
    pub fn micro_dim(self) -> usize {
        match self {
            CorrelationStructure::Mono1 | CorrelationStructure::Mono2 | CorrelationStructure::Mono3 => 1,
            CorrelationStructure::BivariateStrong => 2,
            _ => 3,
        }
    }

    pub fn macro_vars(self) -> &'static [MacroVar] {
        match self {
            CorrelationStructure::Mono1 => &[MacroVar::Mu],
            CorrelationStructure::Mono2 => &[MacroVar::Sigma],
            _ => &[MacroVar::Mu, MacroVar::Sigma],
        }
    }

    /// Number of macro-variables `m`.
    pub fn macro_dim(self) -> usize {
        self.macro_vars().len()
    }

    pub fn is_two_dimensional(self) -> bool {
        self.macro_dim() == 2
    }

    pub fn is_correlated(self) -> bool {
        self.micro_dim() > 1
    }
}

impl fmt::Display for CorrelationStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorrelationStructure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        CorrelationStructure::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = CorrelationStructure::ALL.iter().map(|c| c.name()).collect();
                format!("unknown structure '{s}' (expected one of: {})", names.join(", "))
            })
    }
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_endpoint(&self, x: f64) -> bool {
        x == self.lo || x == self.hi
    }

    /// The closed interval `[lo + inset, hi - inset]`.
    pub fn inset(&self, inset: f64) -> (f64, f64) {
        (self.lo + inset, self.hi - inset)
    }
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let span = hi - lo;
            let last = (count - 1) as f64;
            (0..count).map(|i| lo + span * (i as f64 / last)).collect()
        }
    }
}

/// Open interval of `rho` on which the correlation template is positive
/// definite. `None` for the uncorrelated single-variable structures.
pub fn admissible_rho_interval(structure: CorrelationStructure) -> Option<Interval> {
    match structure {
        CorrelationStructure::Mono1 | CorrelationStructure::Mono2 | CorrelationStructure::Mono3 => None,
        CorrelationStructure::BivariateStrong | CorrelationStructure::TrivariateWeak => {
            Some(Interval { lo: -1.0, hi: 1.0 })
        }
        CorrelationStructure::TrivariateMildlyWeak => Some(Interval {
            lo: -FRAC_1_SQRT_2,
            hi: FRAC_1_SQRT_2,
        }),
        CorrelationStructure::TrivariateStrong => Some(Interval { lo: -0.5, hi: 1.0 }),
    }
}

/// Unit-variance correlation pattern (covariance divided by `sigma^2`).
pub fn correlation_template(structure: CorrelationStructure, rho: f64) -> SmallMatrix {
    let r = rho;
    match structure {
        CorrelationStructure::Mono1 | CorrelationStructure::Mono2 | CorrelationStructure::Mono3 => {
            SmallMatrix::identity(1)
        }
        CorrelationStructure::BivariateStrong => SmallMatrix::from_rows(&[&[1.0, r], &[r, 1.0]]),
        CorrelationStructure::TrivariateWeak => {
            SmallMatrix::from_rows(&[&[1.0, r, 0.0], &[r, 1.0, 0.0], &[0.0, 0.0, 1.0]])
        }
        CorrelationStructure::TrivariateMildlyWeak => {
            SmallMatrix::from_rows(&[&[1.0, r, r], &[r, 1.0, 0.0], &[r, 0.0, 1.0]])
        }
        CorrelationStructure::TrivariateStrong => SmallMatrix::from_rows(&[&[1.0, r, r], &[r, 1.0, r], &[r, r, 1.0]]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec")]
pub struct ModelSpec {
    structure: CorrelationStructure,
    rho: f64,
}

#[derive(Deserialize)]
struct RawModelSpec {
    structure: CorrelationStructure,
    rho: f64,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = Error;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        ModelSpec::new(raw.structure, raw.rho)
    }
}

impl ModelSpec {
    /// Validates `rho` against the admissible interval of `structure`.
    pub fn new(structure: CorrelationStructure, rho: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::NonFinite("rho"));
        }
        match admissible_rho_interval(structure) {
            None if rho != 0.0 => Err(Error::UnusedRho { structure, rho }),
            None => Ok(Self { structure, rho: 0.0 }),
            Some(iv) if iv.is_endpoint(rho) => Err(Error::DegenerateCovariance { structure, rho }),
            Some(iv) if !iv.contains(rho) => Err(Error::InadmissibleRho {
                structure,
                rho,
                lo: iv.lo,
                hi: iv.hi,
            }),
            Some(_) => Ok(Self { structure, rho }),
        }
    }

    /// Uncorrelated model (`rho = 0`), always admissible.
    pub fn uncorrelated(structure: CorrelationStructure) -> Self {
        Self { structure, rho: 0.0 }
    }

    pub fn structure(&self) -> CorrelationStructure {
        self.structure
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn micro_dim(&self) -> usize {
        self.structure.micro_dim()
    }

    pub fn macro_vars(&self) -> &'static [MacroVar] {
        self.structure.macro_vars()
    }

    /// Applies the structure's pinned coordinates: `sigma = 1` for `Mono1`,
    /// `mu = 0` for `Mono2`.
    pub fn effective_theta(&self, theta: ThetaPoint) -> ThetaPoint {
        match self.structure {
            CorrelationStructure::Mono1 => ThetaPoint {
                mu: theta.mu,
                sigma: 1.0,
            },
            CorrelationStructure::Mono2 => ThetaPoint {
                mu: 0.0,
                sigma: theta.sigma,
            },
            _ => theta,
        }
    }

    pub fn template(&self) -> SmallMatrix {
        correlation_template(self.structure, self.rho)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(rho={})", self.structure, self.rho)
    }
}

/// Macro-state `(mu, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTheta")]
pub struct ThetaPoint {
    mu: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawTheta {
    mu: f64,
    sigma: f64,
}

impl TryFrom<RawTheta> for ThetaPoint {
    type Error = Error;

    fn try_from(raw: RawTheta) -> Result<Self> {
        ThetaPoint::new(raw.mu, raw.sigma)
    }
}

impl ThetaPoint {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::NonFinite("mu"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSigma(sigma));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Coordinates in `(mu, sigma)` order.
    pub fn coords(&self) -> [f64; 2] {
        [self.mu, self.sigma]
    }
}

/// `sigma^2` times the correlation template, after pinning.
pub fn covariance_matrix(spec: &ModelSpec, theta: ThetaPoint) -> SmallMatrix {
    let t = spec.effective_theta(theta);
    spec.template().scaled(t.sigma * t.sigma)
}

pub fn mean_vector(spec: &ModelSpec, theta: ThetaPoint) -> Vec<f64> {
    let t = spec.effective_theta(theta);
    vec![t.mu; spec.micro_dim()]
}

pub fn log_density(spec: &ModelSpec, theta: ThetaPoint, x: &[f64]) -> Result<f64> {
    let n = spec.micro_dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let cov = covariance_matrix(spec, theta);
    let det = cov.determinant();
    if !(det > 0.0) {
        return Err(Error::DegenerateCovariance {
            structure: spec.structure,
            rho: spec.rho,
        });
    }
    let prec = cov.inverse()?;
    let mean = mean_vector(spec, theta);
    let d: Vec<f64> = x.iter().zip(&mean).map(|(xi, mi)| xi - mi).collect();
    let n = n as f64;
    Ok(-0.5 * (n * (2.0 * PI).ln() + det.ln()) - 0.5 * prec.quadratic_form(&d))
}
