//! The eight symbolic covariance definitions.
//!
//! Every definition has the form `Cov(C_j, C_l) + w * E(R_j R_l)`, with weight
//! `delta` on the diagonal and `gamma` off it:
//!
//! | k | delta  | gamma  | micro-data weights                         |
//! |---|--------|--------|--------------------------------------------|
//! | 1 | 0      | 0      | point mass at zero                         |
//! | 2 | 1/4    | 1/4    | shared, uniform on {-1, 1}                 |
//! | 3 | 1/12   | 1/12   | shared, Var(U) = 1/3                       |
//! | 4 | 1/4    | 0      | independent, uniform on {-1, 1}            |
//! | 5 | 1/12   | 0      | independent, Var(U_j) = 1/3                |
//! | 6 | 1/8    | 0      | independent, inverse triangular            |
//! | 7 | 1/24   | 0      | independent, triangular                    |
//! | 8 | delta8 | 0      | independent, N(0, 1/9) truncated to [-1,1] |
//!
//! In every case `delta = Var(U) / 4`.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::weights::{Family, Scenario, WeightModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CovKind {
    K1 = 1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
    K8,
}

impl CovKind {
    pub const ALL: [CovKind; 8] = [
        CovKind::K1,
        CovKind::K2,
        CovKind::K3,
        CovKind::K4,
        CovKind::K5,
        CovKind::K6,
        CovKind::K7,
        CovKind::K8,
    ];

    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1..=8 => Ok(Self::ALL[usize::from(k) - 1]),
            _ => Err(Error::InvalidKind(k)),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// Weight of `E(R_j^2)` in the variance.
    pub fn delta(self) -> f64 {
        match self {
            CovKind::K1 => 0.0,
            CovKind::K2 | CovKind::K4 => 0.25,
            CovKind::K3 | CovKind::K5 => 1.0 / 12.0,
            CovKind::K6 => 0.125,
            CovKind::K7 => 1.0 / 24.0,
            CovKind::K8 => delta_8(),
        }
    }

    /// Weight of `E(R_j R_l)` in the covariance, `j != l`.
    pub fn gamma(self) -> f64 {
        match self {
            CovKind::K2 => 0.25,
            CovKind::K3 => 1.0 / 12.0,
            _ => 0.0,
        }
    }

    /// True when the range term enters off-diagonal entries too, so that
    /// `Cov_k(X, X) = Var_k(X)`.
    pub fn is_full(self) -> bool {
        matches!(self, CovKind::K1 | CovKind::K2 | CovKind::K3)
    }

    /// The micro-data weight model whose covariance is this definition.
    pub fn weight_model(self) -> WeightModel {
        let (family, scenario) = match self {
            CovKind::K1 => (Family::PointMassZero, Scenario::Independent),
            CovKind::K2 => (Family::DiscreteUniformPm1, Scenario::Shared),
            CovKind::K3 => (Family::ContinuousUniform, Scenario::Shared),
            CovKind::K4 => (Family::DiscreteUniformPm1, Scenario::Independent),
            CovKind::K5 => (Family::ContinuousUniform, Scenario::Independent),
            CovKind::K6 => (Family::InverseTriangular, Scenario::Independent),
            CovKind::K7 => (Family::Triangular, Scenario::Independent),
            CovKind::K8 => (Family::TruncatedNormal, Scenario::Independent),
        };
        WeightModel::new(family, scenario)
    }
}

impl TryFrom<u8> for CovKind {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        Self::from_index(k)
    }
}

impl From<CovKind> for u8 {
    fn from(k: CovKind) -> u8 {
        k.index()
    }
}

impl fmt::Display for CovKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.index())
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    standard_normal().pdf(x)
}

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

/// `2 phi(3) / (3 (2 Phi(3) - 1))`: the variance lost by truncating
/// `N(0, 1/9)` to `[-1, 1]`.
pub fn truncation_loss() -> f64 {
    2.0 * std_normal_pdf(3.0) / (3.0 * (2.0 * std_normal_cdf(3.0) - 1.0))
}

/// Variance of `N(0, 1/9)` conditioned on `[-1, 1]`.
pub fn truncated_normal_variance() -> f64 {
    1.0 / 9.0 - truncation_loss()
}

/// `1/36 - phi(3) / (6 (2 Phi(3) - 1))`.
pub fn delta_8() -> f64 {
    1.0 / 36.0 - std_normal_pdf(3.0) / (6.0 * (2.0 * std_normal_cdf(3.0) - 1.0))
}
