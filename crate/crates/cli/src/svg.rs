//! Scatterplot matrix of interval data.
//!
//! Lower panels draw one rectangle per object spanning its intervals on the
//! two variables, upper panels list the sample correlations and the
//! diagonal carries the variable names. Output is a pure function of the
//! inputs.

use std::fmt::Write;

use symcov_core::{sample_cor_pair, CovKind, IntervalDataset};

const MARGIN: f64 = 10.0;
const PAD: f64 = 0.06;
const DEFAULT_STROKE: &str = "#1f77b4";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub k_list: Vec<CovKind>,
    /// Category per object, in dataset order.
    pub categories: Option<Vec<String>>,
}

/// Palette color of the `i`-th distinct category; spreads hues beyond the
/// palette.
fn color(i: usize) -> String {
    match PALETTE.get(i) {
        Some(c) => (*c).to_string(),
        None => format!("hsl({},65%,45%)", (i * 137) % 360),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn axis_limits(d: &IntervalDataset, j: usize) -> (f64, f64) {
    let lo = d.column(j).map(|x| x.lower()).fold(f64::INFINITY, f64::min);
    let hi = d.column(j).map(|x| x.upper()).fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn stroke_colors(spec: &PlotSpec, n: usize) -> Vec<String> {
    match &spec.categories {
        None => vec![DEFAULT_STROKE.to_string(); n],
        Some(cats) => {
            let mut seen: Vec<&str> = Vec::new();
            cats.iter()
                .map(|c| {
                    let i = seen.iter().position(|s| *s == c).unwrap_or_else(|| {
                        seen.push(c);
                        seen.len() - 1
                    });
                    color(i)
                })
                .collect()
        }
    }
}

/// Caller guarantees at least two variables.
pub fn render(d: &IntervalDataset, spec: &PlotSpec) -> String {
    let p = d.n_variables();
    let pw = (spec.width as f64 - 2.0 * MARGIN) / p as f64;
    let ph = (spec.height as f64 - 2.0 * MARGIN) / p as f64;
    let limits: Vec<(f64, f64)> = (0..p).map(|j| axis_limits(d, j)).collect();
    let strokes = stroke_colors(spec, d.n_objects());
    let font = (ph / (spec.k_list.len() as f64 + 3.0)).clamp(6.0, 14.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = spec.width,
        h = spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for row in 0..p {
        for col in 0..p {
            let x0 = MARGIN + col as f64 * pw;
            let y0 = MARGIN + row as f64 * ph;
            let _ = writeln!(
                s,
                r#"<g class="panel" data-row="{row}" data-col="{col}" transform="translate({x0:.2},{y0:.2})">"#
            );
            let _ = writeln!(
                s,
                r#"<rect class="frame" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="gray"/>"#
            );
            if row == col {
                let _ = writeln!(
                    s,
                    r#"<text class="name" x="{:.2}" y="{:.2}" text-anchor="middle" dominant-baseline="middle" font-size="{:.1}">{}</text>"#,
                    pw / 2.0,
                    ph / 2.0,
                    font * 1.3,
                    escape(&d.variable_names()[row])
                );
            } else if row > col {
                lower_panel(&mut s, d, col, row, limits[col], limits[row], pw, ph, &strokes);
            } else {
                upper_panel(&mut s, d, row, col, &spec.k_list, pw, ph, font);
            }
            let _ = writeln!(s, "</g>");
        }
    }
    s.push_str("</svg>\n");
    s
}

#[allow(clippy::too_many_arguments)]
fn lower_panel(
    s: &mut String,
    d: &IntervalDataset,
    xj: usize,
    yj: usize,
    (xlo, xhi): (f64, f64),
    (ylo, yhi): (f64, f64),
    pw: f64,
    ph: f64,
    strokes: &[String],
) {
    let sx = |v: f64| pw * (PAD + (1.0 - 2.0 * PAD) * (v - xlo) / (xhi - xlo));
    let sy = |v: f64| ph * (1.0 - PAD - (1.0 - 2.0 * PAD) * (v - ylo) / (yhi - ylo));
    for (i, id) in d.object_ids().iter().enumerate() {
        let (a, b) = d.cell(i, xj).to_limits();
        let (c, e) = d.cell(i, yj).to_limits();
        let _ = writeln!(
            s,
            r#"<rect class="obj" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{}"><title>{}</title></rect>"#,
            sx(a),
            sy(e),
            sx(b) - sx(a),
            sy(c) - sy(e),
            strokes[i],
            escape(id)
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn upper_panel(
    s: &mut String,
    d: &IntervalDataset,
    j: usize,
    l: usize,
    k_list: &[CovKind],
    pw: f64,
    ph: f64,
    font: f64,
) {
    let step = ph / (k_list.len() as f64 + 1.0);
    for (t, kind) in k_list.iter().enumerate() {
        let value = match sample_cor_pair(d, j, l, *kind) {
            Ok(r) => format!("{r:.3}"),
            Err(_) => "NA".to_string(),
        };
        let _ = writeln!(
            s,
            r#"<text class="cor" x="{:.2}" y="{:.2}" text-anchor="middle" dominant-baseline="middle" font-size="{font:.1}">Cor{} = {}</text>"#,
            pw / 2.0,
            step * (t as f64 + 1.0),
            kind.index(),
            value
        );
    }
}
