use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use symcov_core::fit::{candidates_for, pooled_sample, shared_weight_evidence};
use symcov_core::io::{
    read_macro_csv, read_micro_csv, read_params_json, write_macro_csv, write_micro_csv,
    write_qq_csv, write_weight_csv, MatrixJson,
};
use symcov_core::microdata::simulate_macrodata;
use symcov_core::{
    aggregate_microdata, population_cor_matrix, population_cov_matrix, recover_weights,
    sample_cor_matrix, sample_cov_matrix, sample_mean, simulate_microdata, FitConfig,
    IntervalDataset, MicroTable, ModelSelector, PopulationParams, RngSeed, Scenario, WeightModel,
};

use crate::report::MatrixSet;
use crate::svg::{self, PlotSpec};
use crate::{AggregateArgs, FitArgs, PairsArgs, PopulationCovArgs, SimulateArgs, StatsArgs};

fn open(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(f)))
}

fn create(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn read_macro(path: &Path) -> Result<IntervalDataset> {
    read_macro_csv(open(path)?).with_context(|| format!("reading macro-data {}", path.display()))
}

fn read_micro(path: &Path) -> Result<MicroTable> {
    read_micro_csv(open(path)?).with_context(|| format!("reading micro-data {}", path.display()))
}

fn read_params(path: &Path) -> Result<PopulationParams> {
    read_params_json(open(path)?).with_context(|| format!("reading parameters {}", path.display()))
}

fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn list_some(items: &[&str]) -> String {
    const SHOWN: usize = 5;
    let mut s = items.iter().take(SHOWN).copied().collect::<Vec<_>>().join(", ");
    if items.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", items.len() - SHOWN));
    }
    s
}

pub fn aggregate(a: &AggregateArgs) -> Result<()> {
    let micro = read_micro(&a.micro)?;
    let sizes = micro.group_sizes();
    let singles: Vec<&str> = sizes.iter().filter(|(_, n)| **n == 1).map(|(g, _)| *g).collect();
    if !singles.is_empty() {
        warn(format!(
            "{} group(s) have a single row and get zero-width intervals: {}",
            singles.len(),
            list_some(&singles)
        ));
    }
    let d = aggregate_microdata(&micro)?;
    let mut out = create(a.out.as_ref())?;
    write_macro_csv(&mut out, &d)?;
    out.flush()?;
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let d = read_macro(&a.input)?;
    let names = d.variable_names().to_vec();
    let single = d.n_objects() == 1;
    if single {
        warn("a single object: center variances vanish, so covariances hold only range terms; correlations omitted");
    }
    let covariance = a
        .k
        .0
        .iter()
        .map(|&kind| MatrixJson {
            kind,
            variables: names.clone(),
            matrix: sample_cov_matrix(&d, kind),
        })
        .collect();
    let mut correlation = Vec::new();
    if !a.no_correlation && !single {
        for &kind in &a.k.0 {
            let matrix = sample_cor_matrix(&d, kind)
                .with_context(|| format!("correlation for k = {kind} (use --no-correlation to skip)"))?;
            correlation.push(MatrixJson {
                kind,
                variables: names.clone(),
                matrix,
            });
        }
    }
    let set = MatrixSet {
        n_objects: Some(d.n_objects()),
        variables: names,
        mean: sample_mean(&d),
        covariance,
        correlation,
    };
    let mut out = create(a.out.as_ref())?;
    set.write(&mut out, a.format)?;
    out.flush()?;
    Ok(())
}

/// Share of negative range draws above which `simulate` warns.
const NEGATIVE_RANGE_WARNING: f64 = 0.01;

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let params = read_params(&a.params)?;
    let seed = RngSeed(a.seed);
    let probs = params.negative_range_probability();
    let worst = probs
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .filter(|(_, p)| **p > NEGATIVE_RANGE_WARNING);
    if let Some((j, p)) = worst {
        warn(format!(
            "range of variable X{} is negative with probability {:.4}; such draws are rejected, which biases ranges upward",
            j + 1,
            p
        ));
    }
    let sim = simulate_macrodata(&params, a.n, seed)?;
    if worst.is_some() {
        warn(format!(
            "rejected {} draws (rate {:.4})",
            sim.rejected,
            sim.rejection_rate()
        ));
    }
    let mut out = create(a.out.as_ref())?;
    write_macro_csv(&mut out, &sim.dataset)?;
    out.flush()?;

    if let Some(path) = &a.micro_out {
        let model = match a.k {
            Some(kind) => kind.weight_model(),
            None => WeightModel::new(a.model, a.scenario),
        };
        let micro = simulate_microdata(&sim.dataset, &model, a.points_per_object, seed)?;
        let mut out = create(Some(path))?;
        write_micro_csv(&mut out, &micro)?;
        out.flush()?;
    }
    Ok(())
}

pub fn fit(a: &FitArgs) -> Result<()> {
    if a.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let micro = read_micro(&a.micro)?;
    let (macro_data, exclude) = match &a.macro_data {
        Some(path) => (read_macro(path)?, a.exclude_boundary),
        None => (aggregate_microdata(&micro)?, true),
    };
    let table = recover_weights(&micro, &macro_data, exclude)?;
    let shared = shared_weight_evidence(&table);
    let scenario = if shared {
        Scenario::Shared
    } else {
        Scenario::Independent
    };
    let candidates = candidates_for(&a.candidates, scenario);
    let config = FitConfig {
        replicates: a.replicates,
        ..FitConfig::default()
    };
    let selector = ModelSelector::new(config, RngSeed(a.seed));
    let report = selector
        .select_model(&table, &candidates)
        .context("selecting a weight model")?;

    let mut out = create(a.out.as_ref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;

    if shared {
        eprintln!("scenario 2 evidence: every row carries a single shared weight");
    }
    let k = report
        .recommended_k
        .map_or_else(|| "none".to_string(), |k| k.to_string());
    eprintln!(
        "recommended: {} (scenario {}), k = {}",
        report.recommended.family,
        report.recommended.scenario.number(),
        k
    );

    if let Some(path) = &a.weights_out {
        let mut w = create(Some(path))?;
        write_weight_csv(&mut w, &table)?;
        w.flush()?;
    }
    if let Some(path) = &a.qq_out {
        if report.recommended.family.is_continuous() {
            let qq = selector.qq_envelope(&pooled_sample(&table), &report.recommended)?;
            let mut w = create(Some(path))?;
            write_qq_csv(&mut w, &qq.bands)?;
            w.flush()?;
        } else {
            warn(format!(
                "no QQ bands for the discrete model {}; {} not written",
                report.recommended.family,
                path.display()
            ));
        }
    }
    Ok(())
}

/// Category of each object from a labels CSV with an `id` column.
fn read_categories(path: &Path, column: &str, d: &IntervalDataset) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let id_col = find("id").with_context(|| format!("{} has no `id` column", path.display()))?;
    let cat_col = find(column)
        .with_context(|| format!("{} has no column {column:?}", path.display()))?;
    let mut map = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let id = rec.get(id_col).unwrap_or_default().to_string();
        map.insert(id, rec.get(cat_col).unwrap_or_default().to_string());
    }
    d.object_ids()
        .iter()
        .map(|id| {
            map.get(id)
                .cloned()
                .with_context(|| format!("object {id:?} has no label in {}", path.display()))
        })
        .collect()
}

pub fn pairs(a: &PairsArgs) -> Result<()> {
    let d = read_macro(&a.input)?;
    if d.n_variables() < 2 {
        bail!("a pairs plot needs at least two variables, found {}", d.n_variables());
    }
    if a.width == 0 || a.height == 0 {
        bail!("--width and --height must be positive");
    }
    let categories = match (&a.labels, &a.color_by) {
        (Some(path), Some(column)) => Some(read_categories(path, column, &d)?),
        _ => None,
    };
    let spec = PlotSpec {
        width: a.width,
        height: a.height,
        k_list: a.k.0.clone(),
        categories,
    };
    let mut out = create(a.out.as_ref())?;
    out.write_all(svg::render(&d, &spec).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn population_cov(a: &PopulationCovArgs) -> Result<()> {
    let params = read_params(&a.params)?;
    let names: Vec<String> = (1..=params.dim()).map(|j| format!("X{j}")).collect();
    let covariance = a
        .k
        .0
        .iter()
        .map(|&kind| MatrixJson {
            kind,
            variables: names.clone(),
            matrix: population_cov_matrix(&params, kind),
        })
        .collect();
    let mut correlation = Vec::new();
    if a.correlation {
        for &kind in &a.k.0 {
            correlation.push(MatrixJson {
                kind,
                variables: names.clone(),
                matrix: population_cor_matrix(&params, kind)?,
            });
        }
    }
    let set = MatrixSet {
        n_objects: None,
        variables: names,
        mean: params.mu_c().to_vec(),
        covariance,
        correlation,
    };
    let mut out = create(a.out.as_ref())?;
    set.write(&mut out, a.format)?;
    out.flush()?;
    Ok(())
}
