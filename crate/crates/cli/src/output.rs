//! CSV and SVG writers.

use std::fmt::Write as _;
use std::io::Write;

#[cfg(test)]
use anyhow::{bail, Context};
use quadham::dynamics::Trajectory;
use quadham::opalg::OpSymbol;
use quadham::sweep::SweepGrid;

pub const COLOR_REAL: &str = "#2b83ba";
pub const COLOR_BROKEN: &str = "#d7191c";
pub const COLOR_EXCEPTIONAL: &str = "#fdae61";
pub const COLOR_ERROR: &str = "#bababa";

/// 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// One sweep CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub max_im: f64,
    pub min_pseudo_norm: f64,
    pub phase: String,
}

impl SweepRow {
    /// Equality that treats NaN as equal to NaN.
    #[cfg(test)]
    pub fn same(&self, other: &SweepRow) -> bool {
        let eq = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| eq(*a, *b))
            && eq(self.max_im, other.max_im)
            && eq(self.min_pseudo_norm, other.min_pseudo_norm)
            && self.phase == other.phase
    }
}

pub fn grid_rows(grid: &SweepGrid) -> Vec<SweepRow> {
    grid.cells
        .iter()
        .map(|c| SweepRow {
            values: c.values.clone(),
            max_im: c.max_im(),
            min_pseudo_norm: c.min_pseudo_norm(),
            phase: c.phase_str().to_string(),
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(grid: &SweepGrid, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = grid.axes.iter().map(|a| a.param.as_str()).collect();
    header.extend(["max_im", "min_pseudo_norm", "phase"]);
    w.write_record(&header)?;
    for row in grid_rows(grid) {
        let mut rec: Vec<String> = row.values.iter().map(|&v| fmt17(v)).collect();
        rec.push(fmt17(row.max_im));
        rec.push(fmt17(row.min_pseudo_norm));
        rec.push(row.phase);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sweep CSV back; returns the axis names and the rows.
#[cfg(test)]
pub fn read_sweep_csv<R: std::io::Read>(input: R) -> anyhow::Result<(Vec<String>, Vec<SweepRow>)> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let n = header.len();
    if n < 4 || header[n - 3..] != ["max_im", "min_pseudo_norm", "phase"] {
        bail!("not a sweep CSV: header {header:?}");
    }
    let axes = header[..n - 3].to_vec();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> anyhow::Result<f64> {
            rec[i].parse::<f64>().with_context(|| format!("bad number `{}`", &rec[i]))
        };
        rows.push(SweepRow {
            values: (0..n - 3).map(num).collect::<anyhow::Result<_>>()?,
            max_im: num(n - 3)?,
            min_pseudo_norm: num(n - 2)?,
            phase: rec[n - 1].to_string(),
        });
    }
    Ok((axes, rows))
}

pub fn write_trajectory_csv<W: Write>(tr: &Trajectory, k: usize, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((0..2 * k).map(|b| OpSymbol::from_basis(b, k).to_string()));
    w.write_record(&header)?;
    for (t, z) in tr.times.iter().zip(&tr.states) {
        let mut rec = vec![fmt17(*t)];
        rec.extend(z.iter().map(|&v| fmt17(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn phase_color(phase: &str) -> &'static str {
    match phase {
        "real" => COLOR_REAL,
        "broken" => COLOR_BROKEN,
        "exceptional" => COLOR_EXCEPTIONAL,
        _ => COLOR_ERROR,
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained heatmap with one rect per cell. The first axis runs
/// left to right, the second bottom to top.
pub fn render_svg(grid: &SweepGrid) -> String {
    let (left, top, pw) = (70.0, 20.0, 480.0);
    let nx = grid.axes[0].n;
    let ny = grid.axes.get(1).map_or(1, |a| a.n);
    let ph = if ny == 1 { 60.0 } else { 360.0 };
    let (cw, ch) = (pw / nx as f64, ph / ny as f64);
    let width = left + pw + 160.0;
    let height = top + ph + 60.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    for (idx, cell) in grid.cells.iter().enumerate() {
        let (i, j) = if ny == 1 { (idx, 0) } else { (idx / ny, idx % ny) };
        let x = left + i as f64 * cw;
        let y = top + ph - (j + 1) as f64 * ch;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}"/>"#,
            phase_color(cell.phase_str())
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let ax = &grid.axes[0];
    let by = top + ph;
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="start">{}</text>"#, by + 16.0, ax.lo);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left + pw, by + 16.0, ax.hi);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        by + 40.0,
        esc(&ax.param)
    );
    if let Some(ay) = grid.axes.get(1) {
        let _ = writeln!(s, r#"<text x="{}" y="{by}" text-anchor="end">{}</text>"#, left - 6.0, ay.lo);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, top + 12.0, ay.hi);
        let (lx, ly) = (left - 40.0, top + ph / 2.0);
        let _ = writeln!(
            s,
            r#"<text x="{lx}" y="{ly}" text-anchor="middle" transform="rotate(-90 {lx} {ly})">{}</text>"#,
            esc(&ay.param)
        );
    }
    let lx = left + pw + 20.0;
    for (k, (name, color)) in [
        ("real", COLOR_REAL),
        ("broken", COLOR_BROKEN),
        ("exceptional", COLOR_EXCEPTIONAL),
        ("error", COLOR_ERROR),
    ]
    .iter()
    .enumerate()
    {
        let y = top + k as f64 * 20.0;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{y}" width="14" height="14" fill="{color}" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 20.0, y + 11.0);
    }
    s.push_str("</svg>\n");
    s
}
