//! Population symbolic covariance and correlation.
//!
//! The law of the macro-data enters only through `Cov(C)` and
//! `E(R R^t) = Cov(R) + mu_R mu_R^t`:
//!
//! ```text
//! Sigma_k = Sigma_CC + delta_k * Diag(E(RR^t)) + gamma_k * Offdiag(E(RR^t))
//! ```
//!
//! The center/range cross-covariance is carried for simulation but has no
//! effect on any `Sigma_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kind::CovKind;
use crate::matrix::SymmetricMatrix;
use crate::stats::covariance_to_correlation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PopulationParams {
    mu_c: Vec<f64>,
    sigma_cc: SymmetricMatrix,
    mu_r: Vec<f64>,
    sigma_rr: SymmetricMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_cr: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct RawParams {
    mu_c: Vec<f64>,
    sigma_cc: SymmetricMatrix,
    mu_r: Vec<f64>,
    sigma_rr: SymmetricMatrix,
    #[serde(default)]
    cross_cr: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawParams> for PopulationParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        PopulationParams::new(raw.mu_c, raw.sigma_cc, raw.mu_r, raw.sigma_rr, raw.cross_cr)
    }
}

impl PopulationParams {
    /// `cross_cr[j][l]` is `Cov(C_j, R_l)`.
    pub fn new(
        mu_c: Vec<f64>,
        sigma_cc: SymmetricMatrix,
        mu_r: Vec<f64>,
        sigma_rr: SymmetricMatrix,
        cross_cr: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let p = mu_c.len();
        if p == 0 {
            return Err(Error::Empty("population has no variables"));
        }
        if mu_r.len() != p || sigma_cc.dim() != p || sigma_rr.dim() != p {
            return Err(Error::Dimension(format!(
                "mu_c has {p} entries but mu_r has {}, sigma_cc is {}x{0}, sigma_rr is {}x{1}",
                mu_r.len(),
                sigma_cc.dim(),
                sigma_rr.dim()
            )));
        }
        if let Some(v) = mu_c.iter().chain(&mu_r).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: *v,
                context: "population mean".into(),
            });
        }
        if let Some(cross) = &cross_cr {
            if cross.len() != p || cross.iter().any(|r| r.len() != p) {
                return Err(Error::Dimension(format!("cross_cr must be {p}x{p}")));
            }
            if let Some(v) = cross.iter().flatten().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    value: *v,
                    context: "cross_cr".into(),
                });
            }
        }
        sigma_cc.check_psd("sigma_cc")?;
        sigma_rr.check_psd("sigma_rr")?;
        Ok(Self {
            mu_c,
            sigma_cc,
            mu_r,
            sigma_rr,
            cross_cr,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu_c.len()
    }

    pub fn mu_c(&self) -> &[f64] {
        &self.mu_c
    }

    pub fn sigma_cc(&self) -> &SymmetricMatrix {
        &self.sigma_cc
    }

    pub fn mu_r(&self) -> &[f64] {
        &self.mu_r
    }

    pub fn sigma_rr(&self) -> &SymmetricMatrix {
        &self.sigma_rr
    }

    pub fn cross_cr(&self) -> Option<&[Vec<f64>]> {
        self.cross_cr.as_deref()
    }

    /// Covariance of the stacked vector `(C, R)`, `2p x 2p`.
    pub fn joint_covariance(&self) -> Vec<Vec<f64>> {
        let p = self.dim();
        let mut out = vec![vec![0.0; 2 * p]; 2 * p];
        for i in 0..p {
            for j in 0..p {
                out[i][j] = self.sigma_cc.get(i, j);
                out[p + i][p + j] = self.sigma_rr.get(i, j);
                let cross = self.cross_cr.as_ref().map_or(0.0, |c| c[i][j]);
                out[i][p + j] = cross;
                out[p + j][i] = cross;
            }
        }
        out
    }

    /// Params of the interval variables `Y = W X` under Moore arithmetic:
    /// `C_Y = W C` and `R_Y = |W| R`.
    pub fn linear_transform(&self, weights: &[Vec<f64>]) -> Result<PopulationParams> {
        let p = self.dim();
        if weights.is_empty() || weights.iter().any(|w| w.len() != p) {
            return Err(Error::Dimension(format!("weight rows must have length {p}")));
        }
        let abs: Vec<Vec<f64>> = weights
            .iter()
            .map(|w| w.iter().map(|x| x.abs()).collect())
            .collect();
        let q = weights.len();
        let dot = |w: &[f64], v: &[f64]| w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let quad = |a: &[f64], m: &dyn Fn(usize, usize) -> f64, b: &[f64]| {
            let mut s = 0.0;
            for (i, ai) in a.iter().enumerate() {
                for (j, bj) in b.iter().enumerate() {
                    s += ai * m(i, j) * bj;
                }
            }
            s
        };
        let scc = |i, j| self.sigma_cc.get(i, j);
        let srr = |i, j| self.sigma_rr.get(i, j);
        let scr = |i: usize, j: usize| self.cross_cr.as_ref().map_or(0.0, |c| c[i][j]);
        let mu_c = weights.iter().map(|w| dot(w, &self.mu_c)).collect();
        let mu_r = abs.iter().map(|w| dot(w, &self.mu_r)).collect();
        let sigma_cc = SymmetricMatrix::from_fn(q, |a, b| quad(&weights[a], &scc, &weights[b]));
        let sigma_rr = SymmetricMatrix::from_fn(q, |a, b| quad(&abs[a], &srr, &abs[b]));
        let cross_cr = self.cross_cr.as_ref().map(|_| {
            (0..q)
                .map(|a| (0..q).map(|b| quad(&weights[a], &scr, &abs[b])).collect())
                .collect()
        });
        Ok(PopulationParams {
            mu_c,
            sigma_cc,
            mu_r,
            sigma_rr,
            cross_cr,
        })
    }

    /// Probability that `R_j < 0` under a normal law for each range.
    pub fn negative_range_probability(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let sd = self.sigma_rr.get(j, j).max(0.0).sqrt();
                let mu = self.mu_r[j];
                if sd == 0.0 {
                    if mu < 0.0 { 1.0 } else { 0.0 }
                } else {
                    crate::kind::std_normal_cdf(-mu / sd)
                }
            })
            .collect()
    }
}

/// `E(R R^t) = Sigma_RR + mu_R mu_R^t`.
pub fn expected_rr(params: &PopulationParams) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(params.dim(), |i, j| {
        params.sigma_rr.get(i, j) + params.mu_r[i] * params.mu_r[j]
    })
}

pub fn population_cov_matrix(params: &PopulationParams, kind: CovKind) -> SymmetricMatrix {
    let err = expected_rr(params);
    let (delta, gamma) = (kind.delta(), kind.gamma());
    SymmetricMatrix::from_fn(params.dim(), |i, j| {
        let w = if i == j { delta } else { gamma };
        let c = params.sigma_cc.get(i, j);
        if w == 0.0 {
            c
        } else {
            c + w * err.get(i, j)
        }
    })
}

/// `P_k = U^-1 Sigma_k U^-1`; unit diagonal.
pub fn population_cor_matrix(params: &PopulationParams, kind: CovKind) -> Result<SymmetricMatrix> {
    let names: Vec<String> = (1..=params.dim()).map(|j| format!("X{j}")).collect();
    covariance_to_correlation(&population_cov_matrix(params, kind), &names)
}

fn check_index(params: &PopulationParams, j: usize) -> Result<()> {
    if j >= params.dim() {
        return Err(Error::ColumnOutOfRange {
            index: j,
            dim: params.dim(),
        });
    }
    Ok(())
}

pub fn pairwise_cov(params: &PopulationParams, j: usize, l: usize, kind: CovKind) -> Result<f64> {
    check_index(params, j)?;
    check_index(params, l)?;
    Ok(population_cov_matrix(params, kind).get(j, l))
}

pub fn pairwise_cor(params: &PopulationParams, j: usize, l: usize, kind: CovKind) -> Result<f64> {
    check_index(params, j)?;
    check_index(params, l)?;
    Ok(population_cor_matrix(params, kind)?.get(j, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu_r: [f64; 2], srr: [[f64; 2]; 2], scc: [[f64; 2]; 2]) -> PopulationParams {
        PopulationParams::new(
            vec![0.0, 0.0],
            SymmetricMatrix::from_rows(&scc.map(|r| r.to_vec())).unwrap(),
            mu_r.to_vec(),
            SymmetricMatrix::from_rows(&srr.map(|r| r.to_vec())).unwrap(),
            None,
        )
        .unwrap()
    }

    fn assert_matrix(m: &SymmetricMatrix, expected: [[f64; 2]; 2], tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (m.get(i, j) - expected[i][j]).abs() <= tol,
                    "({i},{j}): {} vs {}",
                    m.get(i, j),
                    expected[i][j]
                );
            }
        }
    }

    #[test]
    fn expected_rr_examples() {
        let p = params([1.5, 1.5], [[0.64, 0.0], [0.0, 0.04]], [[1.0, 0.0], [0.0, 0.5]]);
        assert_matrix(&expected_rr(&p), [[2.89, 2.25], [2.25, 2.29]], 1e-12);
        let p = params([0.0, 0.0], [[0.3, 0.1], [0.1, 0.2]], [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(expected_rr(&p), *p.sigma_rr());
        let p = params([1.3, 1.3], [[0.16, 0.07], [0.07, 0.04]], [[1.0, 0.0], [0.0, 0.5]]);
        assert_matrix(&expected_rr(&p), [[1.85, 1.76], [1.76, 1.73]], 1e-12);
    }

    #[test]
    fn conventional_collapse() {
        let p = params([0.0, 0.0], [[0.0, 0.0], [0.0, 0.0]], [[2.0, -0.3], [-0.3, 1.0]]);
        for k in CovKind::ALL {
            assert_eq!(population_cov_matrix(&p, k), *p.sigma_cc());
        }
    }

    #[test]
    fn rejects_bad_params() {
        let bad = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let ok = SymmetricMatrix::identity(2);
        assert!(matches!(
            PopulationParams::new(vec![0.0; 2], bad.clone(), vec![1.0; 2], ok.clone(), None),
            Err(Error::NotPsd { .. })
        ));
        assert!(PopulationParams::new(vec![0.0; 2], ok.clone(), vec![1.0; 3], ok.clone(), None)
            .is_err());
        assert!(PopulationParams::new(
            vec![0.0; 2],
            ok.clone(),
            vec![1.0; 2],
            ok,
            Some(vec![vec![0.0; 2]])
        )
        .is_err());
    }

    #[test]
    fn json_schema() {
        let json = r#"{ "mu_c": [0, 0], "sigma_cc": [[1, 0], [0, 0.5]],
                        "mu_r": [1.5, 1.5], "sigma_rr": [[0.64, 0], [0, 0.04]] }"#;
        let p: PopulationParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.dim(), 2);
        assert!(p.cross_cr().is_none());
        let back: PopulationParams =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let bad = r#"{ "mu_c": [0], "sigma_cc": [[-1]], "mu_r": [1], "sigma_rr": [[0]] }"#;
        assert!(serde_json::from_str::<PopulationParams>(bad).is_err());
    }

    #[test]
    fn cross_block_does_not_enter_sigma_k() {
        let base = params([1.0, 2.0], [[0.5, 0.1], [0.1, 0.5]], [[1.0, 0.2], [0.2, 1.0]]);
        let with_cross = PopulationParams::new(
            base.mu_c().to_vec(),
            base.sigma_cc().clone(),
            base.mu_r().to_vec(),
            base.sigma_rr().clone(),
            Some(vec![vec![0.3, 0.0], vec![0.1, 0.2]]),
        )
        .unwrap();
        for k in CovKind::ALL {
            assert_eq!(population_cov_matrix(&base, k), population_cov_matrix(&with_cross, k));
        }
        assert_eq!(with_cross.joint_covariance()[0][2], 0.3);
        assert_eq!(with_cross.joint_covariance()[2][0], 0.3);
    }

    #[test]
    fn pairwise_matches_matrix() {
        let p = params([1.3, 1.3], [[0.16, 0.07], [0.07, 0.04]], [[1.0, 0.0], [0.0, 0.5]]);
        for k in CovKind::ALL {
            let s = population_cov_matrix(&p, k);
            let r = population_cor_matrix(&p, k).unwrap();
            for j in 0..2 {
                for l in 0..2 {
                    assert_eq!(pairwise_cov(&p, j, l, k).unwrap().to_bits(), s.get(j, l).to_bits());
                    assert_eq!(pairwise_cor(&p, j, l, k).unwrap().to_bits(), r.get(j, l).to_bits());
                }
            }
        }
        assert!(pairwise_cov(&p, 0, 2, CovKind::K1).is_err());
    }

    #[test]
    fn negative_range_probability() {
        let p = params([1.5, 1.5], [[0.64, 0.0], [0.0, 0.04]], [[1.0, 0.0], [0.0, 0.5]]);
        let probs = p.negative_range_probability();
        // Phi(-1.875) and Phi(-7.5)
        assert!((probs[0] - 0.030396).abs() < 1e-5);
        assert!(probs[1] < 1e-12);
    }
}
