//! Matrix-set output shared by `stats` and `population-cov`.
//!
//! CSV layout: `statistic,k,variable,<var1>,...` with a `mean` row (empty
//! `k` and `variable`) followed by one row per variable for every `cov`
//! and `cor` matrix.

use std::io::Write;

use serde::Serialize;
use symcov_core::io::MatrixJson;
use symcov_core::SymmetricMatrix;

use crate::Format;

#[derive(Serialize)]
pub struct MatrixSet {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_objects: Option<usize>,
    pub variables: Vec<String>,
    pub mean: Vec<f64>,
    pub covariance: Vec<MatrixJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub correlation: Vec<MatrixJson>,
}

impl MatrixSet {
    pub fn write<W: Write>(&self, w: W, format: Format) -> anyhow::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                let mut w = w;
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
                Ok(())
            }
        }
    }

    fn write_csv<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["statistic".to_string(), "k".into(), "variable".into()];
        header.extend(self.variables.iter().cloned());
        out.write_record(&header)?;

        let mut row = vec!["mean".to_string(), String::new(), String::new()];
        row.extend(self.mean.iter().map(f64::to_string));
        out.write_record(&row)?;

        let blocks = [("cov", &self.covariance), ("cor", &self.correlation)];
        for (label, mats) in blocks {
            for m in mats {
                write_matrix_rows(&mut out, label, m.kind.index(), &self.variables, &m.matrix)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn write_matrix_rows<W: Write>(
    out: &mut csv::Writer<W>,
    label: &str,
    k: u8,
    names: &[String],
    m: &SymmetricMatrix,
) -> anyhow::Result<()> {
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![label.to_string(), k.to_string(), name.clone()];
        row.extend((0..m.dim()).map(|j| m.get(i, j).to_string()));
        out.write_record(&row)?;
    }
    Ok(())
}
