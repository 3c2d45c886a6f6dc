//! CSV and SVG output.
//!
//! Every real is written as `{:.9e}` (ten significant digits) so files are
//! locale-free and byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gensmooth::framework::RunRecord;
use thiserror::Error;

use crate::sweep::{SweepResult, Threshold};

pub const CELLS_HEADER: [&str; 8] = [
    "p",
    "c",
    "eta_index",
    "eta",
    "mean_ratio",
    "std_ratio",
    "n",
    "overflowed",
];
pub const THRESHOLDS_HEADER: [&str; 4] = ["p", "c", "threshold_index", "threshold_eta"];
pub const TRACE_HEADER: [&str; 6] = [
    "step",
    "oracle_calls_cum",
    "F",
    "grad_norm",
    "lambda_min_if_checked",
    "candidate_flag",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

pub fn real(x: f64) -> String {
    format!("{x:.9e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), ReportError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_sweep_cells(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    let rows = result.cells.iter().map(|c| {
        vec![
            c.p.to_string(),
            real(c.c),
            c.eta_index.to_string(),
            real(c.eta),
            real(c.mean_ratio),
            real(c.std_ratio),
            c.n.to_string(),
            c.overflowed.to_string(),
        ]
    });
    write_rows(path, &CELLS_HEADER, rows)
}

fn threshold_row(t: &Threshold) -> Vec<String> {
    vec![
        t.p.to_string(),
        real(t.c),
        t.index.map_or("none".into(), |i| i.to_string()),
        t.eta.map_or("none".into(), real),
    ]
}

pub fn write_thresholds(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    write_rows(path, &THRESHOLDS_HEADER, result.thresholds.iter().map(threshold_row))
}

/// One row per candidate the driver checked, in checking order.
pub fn write_trace(record: &RunRecord, path: &Path) -> Result<(), ReportError> {
    let rows = record.candidates.iter().enumerate().map(|(i, c)| {
        let cum = record
            .steps
            .get(c.step)
            .map_or(record.total_oracle_calls, |s| s.oracle_calls_cum);
        vec![
            c.step.to_string(),
            cum.to_string(),
            real(c.value),
            opt_real(c.certificate.grad_norm),
            opt_real(c.certificate.lambda_min),
            if record.first_hit == Some(i) { "1" } else { "0" }.to_string(),
        ]
    });
    write_rows(path, &TRACE_HEADER, rows)
}

/// Writes `sweep_cells.csv`, `sweep_thresholds.csv` and one chart per row.
pub fn write_sweep_outputs(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = vec![dir.join("sweep_cells.csv"), dir.join("sweep_thresholds.csv")];
    write_sweep_cells(result, &written[0])?;
    write_thresholds(result, &written[1])?;
    for t in &result.thresholds {
        let path = dir.join(format!("sweep_p{}_c{}.svg", t.p, t.c));
        fs::write(&path, sweep_svg(result, t)).map_err(|source| ReportError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

/// Mean ± 2σ of the log ratio against `log₁₀ η`, with the threshold in red.
pub fn sweep_svg(result: &SweepResult, t: &Threshold) -> String {
    let pts: Vec<(f64, f64, f64, f64)> = result
        .row(t.p, t.c)
        .map(|c| {
            let lo = (c.mean_ratio - 2.0 * c.std_ratio).max(c.mean_ratio * 1e-3).max(1e-300);
            let hi = c.mean_ratio + 2.0 * c.std_ratio;
            (c.eta.log10(), c.mean_ratio.max(1e-300).log10(), lo.log10(), hi.log10())
        })
        .collect();
    let (x0, x1) = match (result.grid.first(), result.grid.last()) {
        (Some(a), Some(b)) if b > a => (a.log10(), b.log10()),
        _ => (0.0, 1.0),
    };
    let mut y0 = pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let mut y1 = pts.iter().map(|p| p.3).fold(f64::NEG_INFINITY, f64::max);
    if !(y0.is_finite() && y1.is_finite() && y1 > y0) {
        y0 = -1.0;
        y1 = 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{a} {b} L{a} {c} L{d} {c}" stroke="black" fill="none"/>"#,
        a = PAD,
        b = PAD,
        c = H - PAD,
        d = W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">p = {}, c = {}</text>"#,
        W / 2.0,
        PAD / 2.0,
        t.p,
        t.c
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log10 eta</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">log10 ratio</text>"#,
        H / 2.0,
        H / 2.0
    );
    if !pts.is_empty() {
        let mut band = String::new();
        for (i, p) in pts.iter().enumerate() {
            let _ = write!(band, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, sx(p.0), sy(p.3));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "L{:.2} {:.2} ", sx(p.0), sy(p.2));
        }
        let _ = writeln!(s, r#"<path d="{}Z" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#, band);
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            line.join(" ")
        );
    }
    if let Some(eta) = t.eta {
        let x = sx(eta.log10());
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="red" stroke-width="1.5"/>"#,
            PAD,
            H - PAD
        );
    }
    s.push_str("</svg>\n");
    s
}
