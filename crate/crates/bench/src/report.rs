//! CSV tables and SVG profile plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::Statistic;
use crate::profile::{performance_profile, ProfileCurve, RecordRow, RECORD_HEADER};
use crate::table1::Table1Row;
use crate::BenchError;

pub const TABLE1_HEADER: [&str; 5] = ["omega", "its_bb2", "evals_bb2", "its_shi", "evals_shi"];

fn csv_err(path: &Path, e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BenchError::io(path, io),
        other => BenchError::Config(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_records(path: &Path, rows: &[RecordRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(RECORD_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>, BenchError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(BenchError::Config(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| BenchError::Config(format!("{}: {e}", path.display()))))
        .collect()
}

/// `chi` then one column per curve. All curves share their breakpoints.
pub fn profile_csv(curves: &[ProfileCurve]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["chi".to_string()];
    header.extend(curves.iter().map(|c| c.algorithm.clone()));
    w.write_record(&header).expect("in-memory write");
    if let Some(first) = curves.first() {
        for (i, chi) in first.chi.iter().enumerate() {
            let mut rec = vec![chi.to_string()];
            rec.extend(curves.iter().map(|c| c.pi[i].to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Step plot of `pi` against `log2(chi)`, one polyline per curve.
pub fn profile_svg(curves: &[ProfileCurve], stat: Statistic) -> String {
    let (w, h, m) = (640.0, 420.0, 50.0);
    let chi_max = curves.iter().flat_map(|c| c.chi.last()).copied().fold(1.0, f64::max);
    let x_end = (chi_max.log2() * 1.05).max(1.0);
    let px = |chi: f64| m + (chi.log2() / x_end).min(1.0) * (w - 2.0 * m);
    let py = |pi: f64| h - m - pi * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<title>performance profile ({})</title>"#, stat.short());
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {} V{} H{}" fill="none" stroke="black"/>"#,
        m,
        h - m,
        w - m
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log2(chi)</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">pi(chi)</text>"#, h / 2.0, h / 2.0);
    for (k, c) in curves.iter().enumerate() {
        let mut pts = vec![(px(1.0), py(0.0))];
        let mut prev = 0.0;
        for (&chi, &pi) in c.chi.iter().zip(&c.pi) {
            pts.push((px(chi), py(prev)));
            pts.push((px(chi), py(pi)));
            prev = pi;
        }
        pts.push((w - m, py(prev)));
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&c.algorithm)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            w - m - 150.0,
            m + 15.0 * (k as f64 + 1.0),
            escape(&c.algorithm)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Writes `profile_<stat>.csv` and, when there is anything to plot,
/// `profile_<stat>.svg`. Returns the files written.
pub fn emit_profile(rows: &[RecordRow], stat: Statistic, outdir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let curves = performance_profile(rows, stat);
    let mut written = Vec::new();
    let csv_path = outdir.join(format!("profile_{}.csv", stat.short()));
    write_file(&csv_path, &profile_csv(&curves))?;
    written.push(csv_path);
    if !rows.is_empty() {
        let svg_path = outdir.join(format!("profile_{}.svg", stat.short()));
        write_file(&svg_path, &profile_svg(&curves, stat))?;
        written.push(svg_path);
    }
    Ok(written)
}

/// `records.csv` plus a profile per statistic.
pub fn emit_reports(rows: &[RecordRow], stats: &[Statistic], outdir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(outdir).map_err(|e| BenchError::io(outdir, e))?;
    let records = outdir.join("records.csv");
    write_records(&records, rows)?;
    let mut written = vec![records];
    for &s in stats {
        written.extend(emit_profile(rows, s, outdir)?);
    }
    Ok(written)
}

pub fn write_table1(path: &Path, rows: &[Table1Row]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TABLE1_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        let rec = [format!("{:e}", r.omega), r.its_bb2.to_string(), r.evals_bb2.to_string(), r.its_shi.to_string(), r.evals_shi.to_string()];
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Records with the wall-time column removed, for determinism comparisons.
pub fn strip_wall_time(records_csv: &str) -> String {
    records_csv
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}
