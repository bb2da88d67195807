//! Goodness of fit of recovered weights against candidate weight models.
//!
//! Each continuous candidate gets an Anderson-Darling test with a
//! parametric-simulation p-value and a pointwise QQ envelope. The model with
//! the smallest pooled envelope exceedance is recommended; ties go to the
//! larger minimal p-value.
//!
//! Null samples for a `(family, n)` pair are drawn from streams keyed by
//! the seed, the family and the replicate index, so they can be cached and
//! reused across variables and calls.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kind::CovKind;
use crate::microdata::WeightTable;
use crate::rng::{domain, RngSeed};
use crate::weights::{Family, Scenario, WeightModel};

const CDF_CLAMP: f64 = 1e-15;
const SUPPORT_TOL: f64 = 1e-9;
const MIN_QQ_SAMPLE: usize = 10;

/// Anderson-Darling `A^2` of a sorted sample against a continuous family.
pub fn ad_statistic(sample: &[f64], family: Family) -> Result<f64> {
    if !family.is_continuous() {
        return Err(Error::NotContinuous(family));
    }
    if sample.is_empty() {
        return Err(Error::SampleTooSmall {
            needed: 1,
            found: 0,
            context: "Anderson-Darling statistic".into(),
        });
    }
    if sample
        .windows(2)
        .any(|w| !matches!(w[0].partial_cmp(&w[1]), Some(Ordering::Less | Ordering::Equal)))
    {
        return Err(Error::Unsorted);
    }
    if let Some(&value) = sample.iter().find(|u| !family.in_support(**u, 0.0)) {
        return Err(Error::OutsideSupport { value, family });
    }
    let n = sample.len();
    let f: Vec<f64> = sample
        .iter()
        .map(|&u| family.cdf(u).unwrap_or(0.5).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP))
        .collect();
    let mut s = 0.0;
    for i in 0..n {
        s += (2 * i + 1) as f64 * (f[i].ln() + (1.0 - f[n - 1 - i]).ln());
    }
    Ok(-(n as f64) - s / n as f64)
}

fn family_label(family: Family) -> u64 {
    Family::ALL.iter().position(|f| *f == family).unwrap() as u64
}

/// Simulated null distribution of `A^2` and of the order statistics for
/// one family and sample size.
#[derive(Debug)]
pub struct NullReference {
    family: Family,
    n: usize,
    /// Sorted simulated statistics.
    ad: Vec<f64>,
    /// Per-order-statistic quantile band.
    bands: Vec<(f64, f64)>,
    replicates: usize,
}

impl NullReference {
    /// Draws `replicates` samples of size `n`. The band for order
    /// statistic `i` spans the `(1-level)/2` and `(1+level)/2` quantiles of
    /// its simulated values.
    pub fn simulate(
        family: Family,
        n: usize,
        replicates: usize,
        level: f64,
        seed: RngSeed,
    ) -> Result<Self> {
        if !family.is_continuous() {
            return Err(Error::NotContinuous(family));
        }
        if n == 0 || replicates == 0 {
            return Err(Error::SampleTooSmall {
                needed: 1,
                found: n.min(replicates),
                context: "null simulation".into(),
            });
        }
        let mut order_stats = vec![0.0; n * replicates];
        let mut ad: Vec<f64> = order_stats
            .par_chunks_mut(n)
            .enumerate()
            .map(|(b, xs)| {
                let mut rng =
                    seed.stream(domain::NULL_SAMPLE, &[family_label(family), n as u64, b as u64]);
                for x in xs.iter_mut() {
                    *x = family.sample(&mut rng);
                }
                xs.sort_by(f64::total_cmp);
                ad_statistic(xs, family).expect("null draws lie in the support")
            })
            .collect();
        ad.sort_by(f64::total_cmp);
        let (lo_q, hi_q) = ((1.0 - level) / 2.0, (1.0 + level) / 2.0);
        let bands = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut col: Vec<f64> = (0..replicates).map(|b| order_stats[b * n + i]).collect();
                col.sort_by(f64::total_cmp);
                (quantile(&col, lo_q), quantile(&col, hi_q))
            })
            .collect();
        Ok(Self {
            family,
            n,
            ad,
            bands,
            replicates,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// `(count + 1) / (B + 1)` where `count` is the number of simulated
    /// statistics at least as large as `stat`.
    pub fn p_value(&self, stat: f64) -> f64 {
        let below = self.ad.partition_point(|&x| x < stat);
        let count = self.ad.len() - below;
        (count + 1) as f64 / (self.replicates + 1) as f64
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }
}

/// Linear interpolation between order statistics (R type 7).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdTest {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqBand {
    pub order: usize,
    pub lo: f64,
    pub hi: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqEnvelope {
    pub bands: Vec<QqBand>,
    pub exceedance: f64,
}

fn sorted_copy(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub replicates: usize,
    pub level: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            replicates: 10_000,
            level: 0.95,
        }
    }
}

/// Runs the tests and caches null references per `(family, n)`.
pub struct ModelSelector {
    config: FitConfig,
    seed: RngSeed,
    cache: Mutex<HashMap<(Family, usize), Arc<NullReference>>>,
}

impl ModelSelector {
    pub fn new(config: FitConfig, seed: RngSeed) -> Self {
        Self {
            config,
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> FitConfig {
        self.config
    }

    pub fn reference(&self, family: Family, n: usize) -> Result<Arc<NullReference>> {
        if let Some(r) = self.cache.lock().unwrap().get(&(family, n)) {
            return Ok(Arc::clone(r));
        }
        let r = Arc::new(NullReference::simulate(
            family,
            n,
            self.config.replicates,
            self.config.level,
            self.seed,
        )?);
        self.cache
            .lock()
            .unwrap()
            .entry((family, n))
            .or_insert_with(|| Arc::clone(&r));
        Ok(r)
    }

    pub fn ad_test(&self, sample: &[f64], model: &WeightModel) -> Result<AdTest> {
        model.require_continuous()?;
        let sorted = sorted_copy(sample);
        let statistic = ad_statistic(&sorted, model.family)?;
        let reference = self.reference(model.family, sorted.len())?;
        Ok(AdTest {
            statistic,
            p_value: reference.p_value(statistic),
        })
    }

    pub fn qq_envelope(&self, sample: &[f64], model: &WeightModel) -> Result<QqEnvelope> {
        model.require_continuous()?;
        if sample.len() < MIN_QQ_SAMPLE {
            return Err(Error::SampleTooSmall {
                needed: MIN_QQ_SAMPLE,
                found: sample.len(),
                context: "QQ envelope".into(),
            });
        }
        let sorted = sorted_copy(sample);
        let reference = self.reference(model.family, sorted.len())?;
        let bands: Vec<QqBand> = reference
            .bands()
            .iter()
            .zip(&sorted)
            .enumerate()
            .map(|(i, (&(lo, hi), &observed))| QqBand {
                order: i + 1,
                lo,
                hi,
                observed,
            })
            .collect();
        let outside = bands
            .iter()
            .filter(|b| b.observed < b.lo || b.observed > b.hi)
            .count();
        Ok(QqEnvelope {
            exceedance: outside as f64 / bands.len() as f64,
            bands,
        })
    }

    fn evaluate(&self, sample: &[f64], model: &WeightModel) -> Result<SampleFit> {
        let n = sample.len();
        if !model.family.is_continuous() {
            let outside = sample
                .iter()
                .filter(|u| !model.family.in_support(**u, SUPPORT_TOL))
                .count();
            return Ok(SampleFit {
                n,
                ad: None,
                p: None,
                exceedance: (n > 0).then(|| outside as f64 / n as f64),
            });
        }
        if n < MIN_QQ_SAMPLE {
            return Ok(SampleFit {
                n,
                ad: None,
                p: None,
                exceedance: None,
            });
        }
        let ad = self.ad_test(sample, model)?;
        let qq = self.qq_envelope(sample, model)?;
        Ok(SampleFit {
            n,
            ad: Some(ad.statistic),
            p: Some(ad.p_value),
            exceedance: Some(qq.exceedance),
        })
    }

    /// Scores every candidate on the pooled weights and on each variable.
    ///
    /// The pooled sample follows [`pooled_sample`].
    pub fn select_model(&self, table: &WeightTable, candidates: &[WeightModel]) -> Result<FitReport> {
        if candidates.is_empty() {
            return Err(Error::Empty("no candidate models"));
        }
        let p = table.n_variables();
        let scenario2_evidence = shared_weight_evidence(table);
        let pooled = pooled_sample(table);
        if pooled.is_empty() {
            return Err(Error::NoUsableWeights);
        }
        if pooled.len() < MIN_QQ_SAMPLE {
            return Err(Error::SampleTooSmall {
                needed: MIN_QQ_SAMPLE,
                found: pooled.len(),
                context: "pooled weights".into(),
            });
        }
        let columns: Vec<Vec<f64>> = (0..p).map(|j| table.column(j)).collect();

        let jobs: Vec<(usize, Option<usize>)> = (0..candidates.len())
            .flat_map(|c| std::iter::once((c, None)).chain((0..p).map(move |j| (c, Some(j)))))
            .collect();
        let fits: Vec<SampleFit> = jobs
            .par_iter()
            .map(|&(c, j)| {
                let sample = j.map_or(&pooled, |j| &columns[j]);
                self.evaluate(sample, &candidates[c])
            })
            .collect::<Result<_>>()?;

        let mut fits = fits.into_iter();
        let mut scored = Vec::with_capacity(candidates.len());
        for model in candidates {
            let pooled_fit = fits.next().unwrap();
            let variables: Vec<VariableFit> = table
                .variable_names()
                .iter()
                .map(|name| VariableFit {
                    variable: name.clone(),
                    fit: fits.next().unwrap(),
                })
                .collect();
            let exceedance = Exceedance {
                pooled: pooled_fit.exceedance.unwrap_or(1.0),
                per_variable: variables
                    .iter()
                    .map(|v| (v.variable.clone(), v.fit.exceedance))
                    .collect(),
            };
            scored.push(CandidateFit {
                model: *model,
                k: model.cov_kind().map(CovKind::index),
                n: pooled_fit.n,
                ad: pooled_fit.ad,
                p: pooled_fit.p,
                exceedance,
                variables,
            });
        }

        let best = (0..scored.len())
            .min_by(|&a, &b| {
                let (x, y) = (&scored[a], &scored[b]);
                x.exceedance
                    .pooled
                    .total_cmp(&y.exceedance.pooled)
                    .then_with(|| y.min_p().total_cmp(&x.min_p()))
                    .then(a.cmp(&b))
            })
            .unwrap();
        let recommended = scored[best].model;
        Ok(FitReport {
            candidates: scored,
            scenario_correlations: weight_correlations(table),
            scenario2_evidence,
            recommended,
            recommended_k: recommended.cov_kind().map(CovKind::index),
            n_rows: table.n_rows(),
            n_missing: table.n_missing(),
            replicates: self.config.replicates,
        })
    }
}

/// One-shot helpers; prefer a shared [`ModelSelector`] for repeated calls.
pub fn ad_test(sample: &[f64], model: &WeightModel, replicates: usize, seed: RngSeed) -> Result<AdTest> {
    let config = FitConfig {
        replicates,
        ..FitConfig::default()
    };
    ModelSelector::new(config, seed).ad_test(sample, model)
}

pub fn qq_envelope(
    sample: &[f64],
    model: &WeightModel,
    level: f64,
    replicates: usize,
    seed: RngSeed,
) -> Result<QqEnvelope> {
    ModelSelector::new(FitConfig { replicates, level }, seed).qq_envelope(sample, model)
}

pub fn select_model(
    table: &WeightTable,
    candidates: &[WeightModel],
    config: FitConfig,
    seed: RngSeed,
) -> Result<FitReport> {
    ModelSelector::new(config, seed).select_model(table, candidates)
}

/// True when every row with two or more present weights has them all
/// equal to within `1e-9`, and at least one such row exists.
pub fn shared_weight_evidence(table: &WeightTable) -> bool {
    let mut any = false;
    for row in table.rows() {
        let mut present = row.iter().flatten();
        let Some(first) = present.next() else { continue };
        for u in present {
            if (u - first).abs() > SUPPORT_TOL {
                return false;
            }
            any = true;
        }
    }
    any
}

/// The sample the pooled fit uses: every present weight, or one per row
/// under scenario 2 evidence, since the copies are not independent draws.
pub fn pooled_sample(table: &WeightTable) -> Vec<f64> {
    if shared_weight_evidence(table) {
        table
            .rows()
            .filter_map(|r| r.iter().flatten().next().copied())
            .collect()
    } else {
        table.pooled()
    }
}

/// Pearson correlation of each pair of weight columns over rows where both
/// are present. `None` when fewer than three such rows exist or a column is
/// constant.
pub fn weight_correlations(table: &WeightTable) -> Vec<Vec<Option<f64>>> {
    let p = table.n_variables();
    let mut out = vec![vec![None; p]; p];
    for j in 0..p {
        out[j][j] = Some(1.0);
        for l in 0..j {
            let pairs: Vec<(f64, f64)> = table
                .rows()
                .filter_map(|r| Some((r[j]?, r[l]?)))
                .collect();
            let r = pearson(&pairs);
            out[j][l] = r;
            out[l][j] = r;
        }
    }
    out
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 3 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFit {
    pub n: usize,
    pub ad: Option<f64>,
    pub p: Option<f64>,
    pub exceedance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableFit {
    pub variable: String,
    #[serde(flatten)]
    pub fit: SampleFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub pooled: f64,
    pub per_variable: IndexMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub model: WeightModel,
    pub k: Option<u8>,
    /// Size of the pooled sample.
    pub n: usize,
    pub ad: Option<f64>,
    pub p: Option<f64>,
    pub exceedance: Exceedance,
    pub variables: Vec<VariableFit>,
}

impl CandidateFit {
    /// Smallest p-value over the pooled and per-variable tests. Discrete
    /// candidates score 1 when every weight is in their support, else 0.
    pub fn min_p(&self) -> f64 {
        if !self.model.family.is_continuous() {
            return if self.exceedance.pooled == 0.0 { 1.0 } else { 0.0 };
        }
        std::iter::once(self.p)
            .chain(self.variables.iter().map(|v| v.fit.p))
            .flatten()
            .fold(1.0, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub candidates: Vec<CandidateFit>,
    pub scenario_correlations: Vec<Vec<Option<f64>>>,
    pub scenario2_evidence: bool,
    pub recommended: WeightModel,
    pub recommended_k: Option<u8>,
    pub n_rows: usize,
    pub n_missing: usize,
    pub replicates: usize,
}

impl FitReport {
    pub fn recommended_fit(&self) -> &CandidateFit {
        self.candidates
            .iter()
            .find(|c| c.model == self.recommended)
            .expect("recommendation is a candidate")
    }
}

/// Candidate models for a list of families, all under `scenario`.
pub fn candidates_for(families: &[Family], scenario: Scenario) -> Vec<WeightModel> {
    families.iter().map(|&f| WeightModel::new(f, scenario)).collect()
}
