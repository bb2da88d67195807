//! Moore interval arithmetic in center/range form.
//!
//! Ranges add under both sum and difference and scale by `|w|`. There is no
//! interval product and no outward rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalDataset};

/// `x -> scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSpec {
    scale: f64,
    offset: f64,
}

impl AffineSpec {
    pub fn new(scale: f64, offset: f64) -> Result<Self> {
        for v in [scale, offset] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: "affine coefficient".into(),
                });
            }
        }
        Ok(Self { scale, offset })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

pub fn add(x: Interval, y: Interval) -> Interval {
    Interval::from_center_range_unchecked(x.center() + y.center(), x.range() + y.range())
}

pub fn sub(x: Interval, y: Interval) -> Interval {
    Interval::from_center_range_unchecked(x.center() - y.center(), x.range() + y.range())
}

pub fn affine(x: Interval, t: AffineSpec) -> Interval {
    Interval::from_center_range_unchecked(
        t.scale * x.center() + t.offset,
        t.scale.abs() * x.range(),
    )
}

pub fn lincomb2(w1: f64, x1: Interval, w2: f64, x2: Interval) -> Interval {
    Interval::from_center_range_unchecked(
        w1 * x1.center() + w2 * x2.center(),
        w1.abs() * x1.range() + w2.abs() * x2.range(),
    )
}

/// `sum_j weights[j] * cells[j]`, accumulated left to right.
pub fn linear_combination(weights: &[f64], cells: &[Interval]) -> Interval {
    debug_assert_eq!(weights.len(), cells.len());
    let (c, r) = weights
        .iter()
        .zip(cells)
        .fold((0.0, 0.0), |(c, r), (&w, x)| {
            (c + w * x.center(), r + w.abs() * x.range())
        });
    Interval::from_center_range_unchecked(c, r)
}

/// Applies the linear map `W` (one row of weights per output variable) to
/// every object of `d`, plus an optional per-output offset.
pub fn transform_dataset(
    d: &IntervalDataset,
    names: Vec<String>,
    weights: &[Vec<f64>],
    offsets: Option<&[f64]>,
) -> Result<IntervalDataset> {
    let p = d.n_variables();
    if names.len() != weights.len() {
        return Err(Error::Dimension(format!(
            "{} names for {} weight rows",
            names.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.len() != p) {
        return Err(Error::Dimension(format!(
            "weight row of length {} for {p} variables",
            w.len()
        )));
    }
    if let Some(o) = offsets {
        if o.len() != weights.len() {
            return Err(Error::Dimension("offset length".into()));
        }
    }
    let rows = d
        .rows()
        .map(|row| {
            weights
                .iter()
                .enumerate()
                .map(|(a, w)| {
                    let y = linear_combination(w, row);
                    let shift = offsets.map_or(0.0, |o| o[a]);
                    Interval::from_center_range_unchecked(y.center() + shift, y.range())
                })
                .collect()
        })
        .collect();
    IntervalDataset::from_rows(d.object_ids().to_vec(), names, rows)
}
