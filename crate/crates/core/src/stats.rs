//! Sample symbolic mean, covariance and correlation.
//!
//! All moments use the divisor `1/n`, not `1/(n-1)`.
//!
//! The public path works in center/range form with two-pass accumulation:
//!
//! ```text
//! s_jj = (1/n) sum (c_ij - cbar_j)^2            + delta_k (1/n) sum r_ij^2
//! s_jl = (1/n) sum (c_ij - cbar_j)(c_il - cbar_l) + gamma_k (1/n) sum r_ij r_il
//! ```
//!
//! [`limits_form_oracle`] evaluates the original interval-limit formulas of
//! definitions 1-3 directly and exists to cross-check the above.
//!
//! Definitions 6-8 are only defined for populations; their sample versions
//! here add `delta_k * mean(r_j^2)` to the diagonal and nothing off it, in
//! line with definitions 4 and 5.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::IntervalDataset;
use crate::kind::CovKind;
use crate::matrix::SymmetricMatrix;

/// Mean of the centers of each variable.
pub fn sample_mean(d: &IntervalDataset) -> Vec<f64> {
    let n = d.n_objects() as f64;
    (0..d.n_variables())
        .map(|j| d.centers(j).sum::<f64>() / n)
        .collect()
}

fn pair_value(d: &IntervalDataset, means: &[f64], j: usize, l: usize, kind: CovKind) -> f64 {
    let n = d.n_objects() as f64;
    let (mj, ml) = (means[j], means[l]);
    let weight = if j == l { kind.delta() } else { kind.gamma() };
    let mut centers = 0.0;
    let mut ranges = 0.0;
    for row in d.rows() {
        let (x, y) = (row[j], row[l]);
        centers += (x.center() - mj) * (y.center() - ml);
        ranges += x.range() * y.range();
    }
    if weight == 0.0 {
        centers / n
    } else {
        centers / n + weight * (ranges / n)
    }
}

/// Entry `(j, l)` of the `k`-th sample symbolic covariance matrix.
///
/// For `j == l` this is the `k`-th symbolic variance. For `j != l` with
/// `k >= 4` only the center covariance remains.
pub fn sample_cov_pair(d: &IntervalDataset, j: usize, l: usize, kind: CovKind) -> Result<f64> {
    d.check_column(j)?;
    d.check_column(l)?;
    let means = sample_mean(d);
    Ok(pair_value(d, &means, j, l, kind))
}

pub fn sample_cov_matrix(d: &IntervalDataset, kind: CovKind) -> SymmetricMatrix {
    let p = d.n_variables();
    let means = sample_mean(d);
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let lower = pairs
        .par_iter()
        .map(|&(i, j)| pair_value(d, &means, i, j, kind))
        .collect();
    SymmetricMatrix::from_packed(p, lower)
}

/// `P_k = U^-1 S_k U^-1` with `U = diag(sqrt(s_jj))`.
///
/// The diagonal is exactly 1 for every `k`. For `k >= 4` a variable is not
/// perfectly correlated with a copy of itself held in another column; that
/// shows up off the diagonal.
pub fn sample_cor_matrix(d: &IntervalDataset, kind: CovKind) -> Result<SymmetricMatrix> {
    covariance_to_correlation(&sample_cov_matrix(d, kind), d.variable_names())
}

/// Off-diagonal entry `(j, l)` of [`sample_cor_matrix`]; 1 when `j == l`.
pub fn sample_cor_pair(d: &IntervalDataset, j: usize, l: usize, kind: CovKind) -> Result<f64> {
    let means = sample_mean(d);
    d.check_column(j)?;
    d.check_column(l)?;
    let sjj = pair_value(d, &means, j, j, kind);
    let sll = pair_value(d, &means, l, l, kind);
    for (idx, s) in [(j, sjj), (l, sll)] {
        if s <= 0.0 {
            return Err(Error::ZeroVariance(d.variable_names()[idx].clone()));
        }
    }
    if j == l {
        return Ok(1.0);
    }
    Ok(correlate(pair_value(d, &means, j, l, kind), sjj, sll))
}

#[inline]
fn correlate(s_jl: f64, s_jj: f64, s_ll: f64) -> f64 {
    (s_jl / (s_jj.sqrt() * s_ll.sqrt())).clamp(-1.0, 1.0)
}

/// Scales a covariance matrix to unit diagonal. Fails on the first
/// non-positive diagonal entry, naming its variable.
pub fn covariance_to_correlation(
    cov: &SymmetricMatrix,
    names: &[String],
) -> Result<SymmetricMatrix> {
    let diag = cov.diag();
    if let Some(j) = diag.iter().position(|&v| v <= 0.0 || !v.is_finite()) {
        let name = names.get(j).cloned().unwrap_or_else(|| format!("#{j}"));
        return Err(Error::ZeroVariance(name));
    }
    Ok(SymmetricMatrix::from_fn(cov.dim(), |i, j| {
        if i == j {
            1.0
        } else {
            correlate(cov.get(i, j), diag[i], diag[j])
        }
    }))
}

/// Sample definitions 1-3 evaluated from the interval limits `[a, b]`
/// exactly as the classical formulas are written, without the
/// center/range rewriting. Uses raw moments where those formulas do.
pub fn limits_form_oracle(d: &IntervalDataset, j: usize, l: usize, defn: u8) -> Result<f64> {
    d.check_column(j)?;
    d.check_column(l)?;
    let n = d.n_objects() as f64;
    let limits = |col: usize| -> Vec<(f64, f64)> { d.column(col).map(|x| x.to_limits()).collect() };
    let lj = limits(j);
    let ll = limits(l);
    let xbar = |lim: &[(f64, f64)]| lim.iter().map(|(a, b)| (a + b) / 2.0).sum::<f64>() / n;
    let (xj, xl) = (xbar(&lj), xbar(&ll));

    let value = if j == l {
        match defn {
            1 => lj.iter().map(|(a, b)| ((a + b) / 2.0 - xj).powi(2)).sum::<f64>() / n,
            2 => {
                lj.iter()
                    .map(|(a, b)| (a - xj).powi(2) + (b - xj).powi(2))
                    .sum::<f64>()
                    / (2.0 * n)
            }
            3 => {
                let raw = lj.iter().map(|(a, b)| b * b + b * a + a * a).sum::<f64>() / (3.0 * n);
                let m = lj.iter().map(|(a, b)| b + a).sum::<f64>() / (2.0 * n);
                raw - m * m
            }
            _ => return Err(Error::InvalidKind(defn)),
        }
    } else {
        let pairs = lj.iter().zip(&ll);
        match defn {
            1 => pairs.map(|((aj, bj), (al, bl))| (bj + aj) * (bl + al)).sum::<f64>() / (4.0 * n) - xj * xl,
            2 => {
                pairs
                    .map(|((aj, bj), (al, bl))| (aj - xj) * (al - xl) + (bj - xj) * (bl - xl))
                    .sum::<f64>()
                    / (2.0 * n)
            }
            3 => {
                pairs
                    .map(|((aj, bj), (al, bl))| {
                        (aj - xj) * (bl - xl)
                            + (bj - xj) * (al - xl)
                            + 2.0 * (aj - xj) * (al - xl)
                            + 2.0 * (bj - xj) * (bl - xl)
                    })
                    .sum::<f64>()
                    / (6.0 * n)
            }
            _ => return Err(Error::InvalidKind(defn)),
        }
    };
    Ok(value)
}
