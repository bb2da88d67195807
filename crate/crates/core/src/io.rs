//! CSV and JSON formats.
//!
//! * macro CSV: `id,<var>_min,<var>_max,...`, one row per object
//! * micro CSV: `id,<var1>,...,<varp>`, the id naming the group
//! * weight CSV: as micro, with empty cells for missing weights
//! * matrix CSV: `variable,<var1>,...` then one row per variable
//! * QQ band CSV: `order,lo,hi,observed`
//!
//! Numbers are written in Rust's shortest round-trip form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::QqBand;
use crate::interval::{validate_dataset, Interval, IntervalDataset, MicroTable};
use crate::kind::CovKind;
use crate::matrix::SymmetricMatrix;
use crate::microdata::WeightTable;
use crate::population::PopulationParams;

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Reads every record with its 1-based line number; the first is the
/// header.
fn records<R: Read>(r: R) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_num(field: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::format(line, format!("column {column:?}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::format(line, format!("column {column:?}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn check_width(rec: &csv::StringRecord, line: u64, expected: usize) -> Result<()> {
    if rec.len() != expected {
        return Err(Error::format(
            line,
            format!("expected {expected} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

pub fn read_macro_csv<R: Read>(r: R) -> Result<IntervalDataset> {
    let recs = records(r)?;
    let Some((hline, header)) = recs.first() else {
        return Err(Error::Empty("macro CSV has no header"));
    };
    let width = header.len();
    if width < 3 || width % 2 == 0 {
        return Err(Error::format(
            *hline,
            "header must be id followed by <var>_min,<var>_max pairs",
        ));
    }
    let mut names = Vec::with_capacity(width / 2);
    for j in 0..width / 2 {
        let (lo, hi) = (&header[1 + 2 * j], &header[2 + 2 * j]);
        let name = lo.strip_suffix("_min").filter(|n| !n.is_empty()).ok_or_else(|| {
            Error::format(*hline, format!("column {lo:?} should be <var>_min"))
        })?;
        if hi.strip_suffix("_max") != Some(name) {
            return Err(Error::format(
                *hline,
                format!("column {hi:?} should be {name}_max"),
            ));
        }
        names.push(name.to_owned());
    }
    if recs.len() == 1 {
        return Err(Error::Empty("macro CSV has no rows"));
    }
    let mut ids = Vec::with_capacity(recs.len() - 1);
    let mut rows = Vec::with_capacity(recs.len() - 1);
    for (line, rec) in &recs[1..] {
        check_width(rec, *line, width)?;
        ids.push(rec[0].to_owned());
        let mut row = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let a = parse_num(&rec[1 + 2 * j], *line, &header[1 + 2 * j])?;
            let b = parse_num(&rec[2 + 2 * j], *line, &header[2 + 2 * j])?;
            let iv = Interval::from_limits(a, b)
                .map_err(|e| Error::format(*line, format!("variable {name:?}: {e}")))?;
            row.push(iv);
        }
        rows.push(row);
    }
    let d = IntervalDataset::from_rows_unchecked(ids, names, rows)?;
    validate_dataset(&d).map_err(|e| match e {
        Error::DuplicateId(id) => {
            let line = recs[1..]
                .iter()
                .filter(|(_, rec)| rec[0] == *id)
                .nth(1)
                .map_or(0, |(l, _)| *l);
            Error::format(line, format!("duplicate object id {id:?}"))
        }
        other => other,
    })?;
    Ok(d)
}

pub fn write_macro_csv<W: Write>(mut w: W, d: &IntervalDataset) -> Result<()> {
    let mut line = String::from("id");
    for name in d.variable_names() {
        line.push_str(&format!(",{name}_min,{name}_max"));
    }
    writeln!(w, "{line}")?;
    for (id, row) in d.object_ids().iter().zip(d.rows()) {
        let mut line = csv_field(id);
        for iv in row {
            let (a, b) = iv.to_limits();
            line.push_str(&format!(",{a},{b}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn read_micro_csv<R: Read>(r: R) -> Result<MicroTable> {
    let recs = records(r)?;
    let Some((hline, header)) = recs.first() else {
        return Err(Error::Empty("micro CSV has no header"));
    };
    if header.len() < 2 {
        return Err(Error::format(*hline, "header must be id followed by variable names"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut groups = Vec::with_capacity(recs.len());
    let mut rows = Vec::with_capacity(recs.len());
    for (line, rec) in &recs[1..] {
        check_width(rec, *line, header.len())?;
        groups.push(rec[0].to_owned());
        rows.push(
            (1..rec.len())
                .map(|c| parse_num(&rec[c], *line, &header[c]))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(Error::Empty("micro CSV has no rows"));
    }
    MicroTable::new(groups, names, rows)
}

pub fn write_micro_csv<W: Write>(mut w: W, m: &MicroTable) -> Result<()> {
    writeln!(w, "id,{}", join_names(m.variable_names()))?;
    for (g, row) in m.rows() {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{}", csv_field(g), vals.join(","))?;
    }
    Ok(())
}

fn join_names(names: &[String]) -> String {
    names.iter().map(|n| csv_field(n)).collect::<Vec<_>>().join(",")
}

pub fn write_weight_csv<W: Write>(mut w: W, t: &WeightTable) -> Result<()> {
    writeln!(w, "id,{}", join_names(t.variable_names()))?;
    for (g, row) in t.group_ids().iter().zip(t.rows()) {
        let vals: Vec<String> = row
            .iter()
            .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
            .collect();
        writeln!(w, "{},{}", csv_field(g), vals.join(","))?;
    }
    Ok(())
}

pub fn read_weight_csv<R: Read>(r: R) -> Result<WeightTable> {
    let recs = records(r)?;
    let Some((hline, header)) = recs.first() else {
        return Err(Error::Empty("weight CSV has no header"));
    };
    if header.len() < 2 {
        return Err(Error::format(*hline, "header must be id followed by variable names"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut groups = Vec::new();
    let mut rows = Vec::new();
    for (line, rec) in &recs[1..] {
        check_width(rec, *line, header.len())?;
        groups.push(rec[0].to_owned());
        rows.push(
            (1..rec.len())
                .map(|c| match &rec[c] {
                    "" => Ok(None),
                    f => parse_num(f, *line, &header[c]).map(Some),
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    WeightTable::new(groups, names, rows)
}

pub fn write_matrix_csv<W: Write>(mut w: W, names: &[String], m: &SymmetricMatrix) -> Result<()> {
    if names.len() != m.dim() {
        return Err(Error::Dimension(format!(
            "{} names for a {}x{} matrix",
            names.len(),
            m.dim(),
            m.dim()
        )));
    }
    writeln!(w, "variable,{}", join_names(names))?;
    for (i, name) in names.iter().enumerate() {
        let vals: Vec<String> = (0..m.dim()).map(|j| m.get(i, j).to_string()).collect();
        writeln!(w, "{},{}", csv_field(name), vals.join(","))?;
    }
    Ok(())
}

/// JSON form of one covariance or correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub kind: CovKind,
    pub variables: Vec<String>,
    pub matrix: SymmetricMatrix,
}

pub fn read_params_json<R: Read>(r: R) -> Result<PopulationParams> {
    Ok(serde_json::from_reader(r)?)
}

pub fn write_qq_csv<W: Write>(mut w: W, bands: &[QqBand]) -> Result<()> {
    writeln!(w, "order,lo,hi,observed")?;
    for b in bands {
        writeln!(w, "{},{},{},{}", b.order, b.lo, b.hi, b.observed)?;
    }
    Ok(())
}
