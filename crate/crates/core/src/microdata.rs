//! Simulation of macro- and micro-data and recovery of the weights.
//!
//! A micro value is `a_j = c_j + u_j * r_j / 2`, with the weights drawn
//! independently per variable (scenario 1) or shared by all variables of a
//! point (scenario 2).

use std::collections::HashMap;

use indexmap::IndexMap;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalDataset, MicroTable};
use crate::population::PopulationParams;
use crate::rng::{domain, RngSeed, SHARED};
use crate::weights::{Scenario, WeightModel};

/// Draw attempts allowed for a single object before giving up.
const MAX_ATTEMPTS_PER_OBJECT: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct MacroSimulation {
    pub dataset: IntervalDataset,
    /// Draws discarded because some range came out negative.
    pub rejected: u64,
}

impl MacroSimulation {
    pub fn rejection_rate(&self) -> f64 {
        let n = self.dataset.n_objects() as u64;
        self.rejected as f64 / (self.rejected + n) as f64
    }
}

/// Lower factor `L` with `L L^t = a` for a PSD matrix. Pivots below
/// `1e-12 * max diag` are treated as zero, leaving that column empty.
fn psd_cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let scale = (0..n).fold(0.0f64, |m, i| m.max(a[i][i].abs()));
    let tol = 1e-12 * scale;
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d <= tol {
            continue;
        }
        let pivot = d.sqrt();
        l[j][j] = pivot;
        for i in j + 1..n {
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = s / pivot;
        }
    }
    l
}

/// Draws `n` objects with `(C, R)` jointly normal, redrawing the whole
/// vector whenever a range is negative.
pub fn simulate_macrodata(
    params: &PopulationParams,
    n: usize,
    seed: RngSeed,
) -> Result<MacroSimulation> {
    if n == 0 {
        return Err(Error::Empty("n must be at least 1"));
    }
    let p = params.dim();
    let l = psd_cholesky(&params.joint_covariance());
    let mean: Vec<f64> = params.mu_c().iter().chain(params.mu_r()).copied().collect();

    let draws: Vec<(Vec<Interval>, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(domain::MACRO, &[i as u64]);
            let mut z = vec![0.0; 2 * p];
            let mut x = vec![0.0; 2 * p];
            for attempt in 0..MAX_ATTEMPTS_PER_OBJECT {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                for (r, xr) in x.iter_mut().enumerate() {
                    *xr = mean[r] + (0..=r).map(|k| l[r][k] * z[k]).sum::<f64>();
                }
                if x[p..].iter().all(|&r| r >= 0.0) {
                    let row = (0..p)
                        .map(|j| Interval::from_center_range_unchecked(x[j], x[p + j]))
                        .collect();
                    return Ok((row, attempt));
                }
            }
            Err(Error::RejectionRate { rate: 1.0 })
        })
        .collect::<Result<_>>()?;

    let rejected: u64 = draws.iter().map(|(_, r)| r).sum();
    let rate = rejected as f64 / (rejected + n as u64) as f64;
    if rate > 0.5 {
        return Err(Error::RejectionRate { rate });
    }
    let ids = (1..=n).map(|i| format!("o{i}")).collect();
    let names = (1..=p).map(|j| format!("X{j}")).collect();
    let rows = draws.into_iter().map(|(row, _)| row).collect();
    Ok(MacroSimulation {
        dataset: IntervalDataset::from_rows(ids, names, rows)?,
        rejected,
    })
}

/// The weights `simulate_microdata` uses, in the same row order: object
/// by object, `points_per_object` rows each, `p` values per row.
pub fn draw_weights(
    n_objects: usize,
    n_variables: usize,
    model: &WeightModel,
    points_per_object: usize,
    seed: RngSeed,
) -> Vec<f64> {
    let p = n_variables;
    let mut out = vec![0.0; n_objects * points_per_object * p];
    out.par_chunks_mut(points_per_object * p)
        .enumerate()
        .for_each(|(i, block)| {
            for (t, row) in block.chunks_mut(p).enumerate() {
                match model.scenario {
                    Scenario::Shared => {
                        let mut rng = seed.stream(domain::MICRO, &[i as u64, t as u64, SHARED]);
                        row.fill(model.family.sample(&mut rng));
                    }
                    Scenario::Independent => {
                        for (j, u) in row.iter_mut().enumerate() {
                            let mut rng =
                                seed.stream(domain::MICRO, &[i as u64, t as u64, j as u64]);
                            *u = model.family.sample(&mut rng);
                        }
                    }
                }
            }
        });
    out
}

pub fn simulate_microdata(
    macro_data: &IntervalDataset,
    model: &WeightModel,
    points_per_object: usize,
    seed: RngSeed,
) -> Result<MicroTable> {
    if points_per_object == 0 {
        return Err(Error::Empty("points_per_object must be at least 1"));
    }
    let n = macro_data.n_objects();
    let p = macro_data.n_variables();
    let mut values = draw_weights(n, p, model, points_per_object, seed);
    values
        .par_chunks_mut(points_per_object * p)
        .zip(macro_data.object_ids().par_iter().enumerate())
        .for_each(|(block, (i, _))| {
            let cells = macro_data.row(i);
            for row in block.chunks_mut(p) {
                for (v, cell) in row.iter_mut().zip(cells) {
                    let a = cell.center() + *v * (0.5 * cell.range());
                    *v = a.clamp(cell.lower(), cell.upper());
                }
            }
        });
    let groups = macro_data
        .object_ids()
        .iter()
        .flat_map(|id| std::iter::repeat(id.clone()).take(points_per_object))
        .collect();
    Ok(MicroTable::from_flat(
        groups,
        macro_data.variable_names().to_vec(),
        values,
    ))
}

/// Recovered weights, one row per micro row. `None` marks a cell with a
/// degenerate interval or an excluded boundary value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    group_ids: Vec<String>,
    variable_names: Vec<String>,
    values: Vec<Option<f64>>,
}

impl WeightTable {
    pub fn new(
        group_ids: Vec<String>,
        variable_names: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let p = variable_names.len();
        if rows.len() != group_ids.len() {
            return Err(Error::Dimension(format!(
                "{} group ids for {} rows",
                group_ids.len(),
                rows.len()
            )));
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
            values.extend(r);
        }
        Ok(Self {
            group_ids,
            variable_names,
            values,
        })
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

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.variable_names.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let p = self.variable_names.len();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<f64>]> + '_ {
        self.values.chunks(self.variable_names.len().max(1))
    }

    /// Non-missing values of one column.
    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows().filter_map(|r| r[col]).collect()
    }

    /// Every non-missing value, row-major.
    pub fn pooled(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// `u_j = 2 (a_j - c_j) / r_j` for every micro cell.
///
/// Values more than `1e-9` outside their interval are an error; values
/// within that tolerance are clamped. With `exclude_boundary`, a value equal
/// to the minimum or maximum of its group and variable in the micro table is
/// marked missing, since it was used to form the interval.
pub fn recover_weights(
    micro: &MicroTable,
    macro_data: &IntervalDataset,
    exclude_boundary: bool,
) -> Result<WeightTable> {
    let p = micro.n_variables();
    let cols: Vec<usize> = micro
        .variable_names()
        .iter()
        .map(|name| {
            macro_data.variable_index(name).ok_or_else(|| {
                Error::Dimension(format!("variable {name:?} is not in the macro-data"))
            })
        })
        .collect::<Result<_>>()?;
    let index: HashMap<&str, usize> = macro_data
        .object_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut extrema: IndexMap<&str, Vec<(f64, f64)>> = IndexMap::new();
    if exclude_boundary {
        for (group, values) in micro.rows() {
            let e = extrema
                .entry(group)
                .or_insert_with(|| values.iter().map(|&v| (v, v)).collect());
            for (b, &v) in e.iter_mut().zip(values) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
    }

    let mut values = Vec::with_capacity(micro.n_rows() * p);
    for (group, row) in micro.rows() {
        let &obj = index
            .get(group)
            .ok_or_else(|| Error::UnknownGroup(group.to_owned()))?;
        for (j, &a) in row.iter().enumerate() {
            let cell = macro_data.cell(obj, cols[j]);
            let (lo, hi) = cell.to_limits();
            if a < lo - 1e-9 || a > hi + 1e-9 {
                return Err(Error::OutsideInterval {
                    group: group.to_owned(),
                    variable: micro.variable_names()[j].clone(),
                    value: a,
                    lower: lo,
                    upper: hi,
                });
            }
            let r = cell.range();
            if r == 0.0 {
                values.push(None);
                continue;
            }
            if exclude_boundary {
                let (mn, mx) = extrema[group][j];
                if same(a, mn) || same(a, mx) {
                    values.push(None);
                    continue;
                }
            }
            let u = 2.0 * (a - cell.center()) / r;
            values.push(Some(u.clamp(-1.0, 1.0)));
        }
    }
    Ok(WeightTable {
        group_ids: micro.group_ids().to_vec(),
        variable_names: micro.variable_names().to_vec(),
        values,
    })
}
