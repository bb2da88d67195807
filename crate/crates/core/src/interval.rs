//! Interval cells, interval datasets and micro-data tables.
//!
//! An [`Interval`] is stored as `(center, range)`, the form every statistic
//! uses. It also keeps the limits `[a, b]` it was built from, so reading
//! limits back is exact and micro values stay inside aggregated cells.
//! Zero-range intervals are legal everywhere and behave like ordinary real
//! values.

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(from = "CenterRange", into = "CenterRange")]
pub struct Interval {
    center: f64,
    range: f64,
    lower: f64,
    upper: f64,
}

/// Equality compares center and range only.
impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.range == other.range
    }
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct CenterRange {
    center: f64,
    range: f64,
}

impl From<CenterRange> for Interval {
    fn from(x: CenterRange) -> Self {
        Interval::from_center_range_unchecked(x.center, x.range)
    }
}

impl From<Interval> for CenterRange {
    fn from(x: Interval) -> Self {
        CenterRange {
            center: x.center,
            range: x.range,
        }
    }
}

impl Interval {
    /// Builds `[a, b]`. Rejects `a > b` and non-finite limits.
    pub fn from_limits(a: f64, b: f64) -> Result<Self> {
        for v in [a, b] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: "interval limit".into(),
                });
            }
        }
        if a > b {
            return Err(Error::InvertedLimits { lower: a, upper: b });
        }
        Ok(Self {
            center: 0.5 * a + 0.5 * b,
            range: b - a,
            lower: a,
            upper: b,
        })
    }

    pub fn from_center_range(center: f64, range: f64) -> Result<Self> {
        for v in [center, range] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: "interval center/range".into(),
                });
            }
        }
        if range < 0.0 {
            return Err(Error::InvertedLimits {
                lower: center + 0.5 * range,
                upper: center - 0.5 * range,
            });
        }
        Ok(Self::from_center_range_unchecked(center, range))
    }

    /// Skips validation. Datasets built from such cells should be checked
    /// with [`validate_dataset`].
    pub fn from_center_range_unchecked(center: f64, range: f64) -> Self {
        Self {
            center,
            range,
            lower: center - 0.5 * range,
            upper: center + 0.5 * range,
        }
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Self {
            center: x,
            range: 0.0,
            lower: x,
            upper: x,
        }
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn range(&self) -> f64 {
        self.range
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn to_limits(&self) -> (f64, f64) {
        (self.lower(), self.upper())
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn is_degenerate(&self) -> bool {
        self.range == 0.0
    }
}

/// `n` objects described by `p` interval-valued variables.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDataset {
    object_ids: Vec<String>,
    variable_names: Vec<String>,
    cells: Vec<Interval>,
}

impl IntervalDataset {
    /// Builds and validates a dataset from rows of cells.
    pub fn from_rows(
        object_ids: Vec<String>,
        variable_names: Vec<String>,
        rows: Vec<Vec<Interval>>,
    ) -> Result<Self> {
        let dataset = Self::from_rows_unchecked(object_ids, variable_names, rows)?;
        validate_dataset(&dataset)?;
        Ok(dataset)
    }

    /// Only checks the shape; cell contents and id uniqueness are left to
    /// [`validate_dataset`].
    pub fn from_rows_unchecked(
        object_ids: Vec<String>,
        variable_names: Vec<String>,
        rows: Vec<Vec<Interval>>,
    ) -> Result<Self> {
        let p = variable_names.len();
        if rows.len() != object_ids.len() {
            return Err(Error::Dimension(format!(
                "{} object ids for {} rows",
                object_ids.len(),
                rows.len()
            )));
        }
        let mut cells = Vec::with_capacity(rows.len() * p);
        for (row, cells_in_row) in rows.into_iter().enumerate() {
            if cells_in_row.len() != p {
                return Err(Error::RaggedRow {
                    row,
                    expected: p,
                    found: cells_in_row.len(),
                });
            }
            cells.extend(cells_in_row);
        }
        Ok(Self {
            object_ids,
            variable_names,
            cells,
        })
    }

    /// Builds a dataset from column vectors of cells. Object ids default
    /// to `o1, o2, ...` when `object_ids` is `None`.
    pub fn from_columns(
        object_ids: Option<Vec<String>>,
        variable_names: Vec<String>,
        columns: Vec<Vec<Interval>>,
    ) -> Result<Self> {
        if columns.len() != variable_names.len() {
            return Err(Error::Dimension(format!(
                "{} variable names for {} columns",
                variable_names.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if let Some((j, col)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Dimension(format!(
                "column {j} has {} cells, expected {n}",
                col.len()
            )));
        }
        let object_ids =
            object_ids.unwrap_or_else(|| (1..=n).map(|i| format!("o{i}")).collect());
        let rows = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self::from_rows(object_ids, variable_names, rows)
    }

    pub fn n_objects(&self) -> usize {
        self.object_ids.len()
    }

    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    #[inline]
    pub fn cell(&self, row: usize, col: usize) -> Interval {
        self.cells[row * self.variable_names.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Interval] {
        let p = self.variable_names.len();
        &self.cells[row * p..(row + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Interval]> + '_ {
        self.cells.chunks(self.variable_names.len().max(1))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Interval> + '_ {
        let p = self.variable_names.len();
        self.cells.iter().skip(col).step_by(p.max(1)).copied()
    }

    pub fn centers(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.column(col).map(|x| x.center())
    }

    pub fn ranges(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.column(col).map(|x| x.range())
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|v| v == name)
    }

    pub(crate) fn check_column(&self, col: usize) -> Result<()> {
        if col >= self.n_variables() {
            return Err(Error::ColumnOutOfRange {
                index: col,
                dim: self.n_variables(),
            });
        }
        Ok(())
    }
}

/// Checks every invariant of an [`IntervalDataset`] and reports the first
/// violation.
pub fn validate_dataset(d: &IntervalDataset) -> Result<()> {
    if d.object_ids.is_empty() {
        return Err(Error::Empty("dataset has no objects"));
    }
    if d.variable_names.is_empty() {
        return Err(Error::Empty("dataset has no variables"));
    }
    let p = d.variable_names.len();
    if d.cells.len() != d.object_ids.len() * p {
        return Err(Error::Dimension(format!(
            "{} cells for {} x {}",
            d.cells.len(),
            d.object_ids.len(),
            p
        )));
    }
    let mut seen = HashSet::with_capacity(d.object_ids.len());
    for id in &d.object_ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    let mut seen = HashSet::with_capacity(p);
    for name in &d.variable_names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateVariable(name.clone()));
        }
    }
    for (idx, cell) in d.cells.iter().enumerate() {
        let (row, col) = (idx / p, idx % p);
        if !cell.center.is_finite() || !cell.range.is_finite() {
            return Err(Error::NonFiniteCell { row, col });
        }
        if cell.range < 0.0 {
            return Err(Error::NegativeRange {
                row,
                col,
                range: cell.range,
            });
        }
    }
    Ok(())
}

/// Individual observations, each labelled with the group (symbolic object)
/// it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroTable {
    group_ids: Vec<String>,
    variable_names: Vec<String>,
    values: Vec<f64>,
}

impl MicroTable {
    pub fn new(
        group_ids: Vec<String>,
        variable_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let p = variable_names.len();
        if p == 0 {
            return Err(Error::Empty("micro table has no variables"));
        }
        if rows.len() != group_ids.len() {
            return Err(Error::Dimension(format!(
                "{} group ids for {} rows",
                group_ids.len(),
                rows.len()
            )));
        }
        let mut seen = HashSet::with_capacity(p);
        for name in &variable_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateVariable(name.clone()));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != p {
                return Err(Error::RaggedRow {
                    row,
                    expected: p,
                    found: r.len(),
                });
            }
            if let Some((col, _)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFiniteCell { row, col });
            }
            values.extend(r);
        }
        Ok(Self {
            group_ids,
            variable_names,
            values,
        })
    }

    pub(crate) fn from_flat(
        group_ids: Vec<String>,
        variable_names: Vec<String>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), group_ids.len() * variable_names.len());
        Self {
            group_ids,
            variable_names,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.group_ids.len()
    }

    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }

    pub fn group_ids(&self) -> &[String] {
        &self.group_ids
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.variable_names.len();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.group_ids
            .iter()
            .map(String::as_str)
            .zip(self.values.chunks(self.variable_names.len()))
    }

    /// Row counts per group, in order of first appearance.
    pub fn group_sizes(&self) -> IndexMap<&str, usize> {
        let mut sizes = IndexMap::new();
        for g in &self.group_ids {
            *sizes.entry(g.as_str()).or_insert(0) += 1;
        }
        sizes
    }
}

/// Collapses each group of micro rows into one object whose cells are the
/// per-variable `[min, max]` of the group. Groups keep their order of first
/// appearance.
pub fn aggregate_microdata(micro: &MicroTable) -> Result<IntervalDataset> {
    if micro.n_rows() == 0 {
        return Err(Error::Empty("micro table has no rows"));
    }
    let p = micro.n_variables();
    let mut extrema: IndexMap<&str, Vec<(f64, f64)>> = IndexMap::new();
    for (row, (group, values)) in micro.rows().enumerate() {
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCell { row, col });
        }
        match extrema.get_mut(group) {
            Some(bounds) => {
                for (b, &v) in bounds.iter_mut().zip(values) {
                    b.0 = b.0.min(v);
                    b.1 = b.1.max(v);
                }
            }
            None => {
                extrema.insert(group, values.iter().map(|&v| (v, v)).collect());
            }
        }
    }
    let mut ids = Vec::with_capacity(extrema.len());
    let mut rows = Vec::with_capacity(extrema.len());
    for (group, bounds) in extrema {
        debug_assert_eq!(bounds.len(), p);
        ids.push(group.to_owned());
        rows.push(
            bounds
                .into_iter()
                .map(|(lo, hi)| Interval::from_limits(lo, hi))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    IntervalDataset::from_rows(ids, micro.variable_names.clone(), rows)
}
