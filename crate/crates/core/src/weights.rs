//! Latent weight distributions on `[-1, 1]`.
//!
//! A micro observation is `a_j = c_j + u_j * r_j / 2`. Under scenario 1 the
//! weights `u_j` are drawn independently per variable; under scenario 2 one
//! weight is shared by all variables of the point.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kind::{std_normal_cdf, truncated_normal_variance, CovKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PointMassZero,
    DiscreteUniformPm1,
    ContinuousUniform,
    Triangular,
    InverseTriangular,
    TruncatedNormal,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::PointMassZero,
        Family::DiscreteUniformPm1,
        Family::ContinuousUniform,
        Family::Triangular,
        Family::InverseTriangular,
        Family::TruncatedNormal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::PointMassZero => "point-mass-zero",
            Family::DiscreteUniformPm1 => "discrete-uniform-pm1",
            Family::ContinuousUniform => "continuous-uniform",
            Family::Triangular => "triangular",
            Family::InverseTriangular => "inverse-triangular",
            Family::TruncatedNormal => "truncated-normal",
        }
    }

    pub fn is_continuous(self) -> bool {
        !matches!(self, Family::PointMassZero | Family::DiscreteUniformPm1)
    }

    pub fn variance(self) -> f64 {
        match self {
            Family::PointMassZero => 0.0,
            Family::DiscreteUniformPm1 => 1.0,
            Family::ContinuousUniform => 1.0 / 3.0,
            Family::Triangular => 1.0 / 6.0,
            Family::InverseTriangular => 0.5,
            Family::TruncatedNormal => truncated_normal_variance(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Family::PointMassZero => 0.0,
            Family::DiscreteUniformPm1 => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Family::ContinuousUniform => rng.random_range(-1.0..=1.0),
            Family::Triangular => rng.random::<f64>() - rng.random::<f64>(),
            Family::InverseTriangular => {
                let v: f64 = rng.random_range(-1.0..=1.0);
                v.signum() * v.abs().sqrt()
            }
            Family::TruncatedNormal => loop {
                let z: f64 = StandardNormal.sample(rng);
                let z = z / 3.0;
                if z.abs() <= 1.0 {
                    break z;
                }
            },
        }
    }

    /// Distribution function on `[-1, 1]`; `None` for the discrete families.
    pub fn cdf(self, u: f64) -> Option<f64> {
        if !self.is_continuous() {
            return None;
        }
        if u <= -1.0 {
            return Some(0.0);
        }
        if u >= 1.0 {
            return Some(1.0);
        }
        Some(match self {
            Family::ContinuousUniform => 0.5 * (u + 1.0),
            Family::Triangular => {
                if u <= 0.0 {
                    0.5 * (1.0 + u) * (1.0 + u)
                } else {
                    1.0 - 0.5 * (1.0 - u) * (1.0 - u)
                }
            }
            Family::InverseTriangular => {
                if u <= 0.0 {
                    0.5 * (1.0 - u * u)
                } else {
                    0.5 * (1.0 + u * u)
                }
            }
            Family::TruncatedNormal => {
                let lo = std_normal_cdf(-3.0);
                (std_normal_cdf(3.0 * u) - lo) / (std_normal_cdf(3.0) - lo)
            }
            Family::PointMassZero | Family::DiscreteUniformPm1 => unreachable!(),
        })
    }

    /// Whether `u` is a possible value, with tolerance `tol`.
    pub fn in_support(self, u: f64, tol: f64) -> bool {
        match self {
            Family::PointMassZero => u.abs() <= tol,
            Family::DiscreteUniformPm1 => (u.abs() - 1.0).abs() <= tol,
            _ => u.abs() <= 1.0 + tol,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                format!("unknown weight family {s:?}; expected one of {}", known.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Scenario 1: one weight per variable, drawn independently.
    Independent,
    /// Scenario 2: a single weight shared by every variable.
    Shared,
}

impl Scenario {
    pub fn number(self) -> u8 {
        match self {
            Scenario::Independent => 1,
            Scenario::Shared => 2,
        }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        match n {
            1 => Ok(Scenario::Independent),
            2 => Ok(Scenario::Shared),
            _ => Err(format!("scenario must be 1 or 2, got {n}")),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.number()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightModel {
    pub family: Family,
    pub scenario: Scenario,
}

impl WeightModel {
    pub fn new(family: Family, scenario: Scenario) -> Self {
        Self { family, scenario }
    }

    pub fn variance(&self) -> f64 {
        self.family.variance()
    }

    /// The covariance definition this model generates, if it is one of the
    /// eight tabulated ones.
    pub fn cov_kind(&self) -> Option<CovKind> {
        CovKind::ALL
            .into_iter()
            .find(|k| {
                let m = k.weight_model();
                m.family == self.family
                    && (m.scenario == self.scenario || m.family == Family::PointMassZero)
            })
    }

    pub(crate) fn require_continuous(&self) -> Result<()> {
        if self.family.is_continuous() {
            Ok(())
        } else {
            Err(Error::NotContinuous(self.family))
        }
    }
}

pub fn model_variance(m: &WeightModel) -> f64 {
    m.variance()
}

pub fn sample_weight<R: Rng + ?Sized>(m: &WeightModel, rng: &mut R) -> f64 {
    m.family.sample(rng)
}
