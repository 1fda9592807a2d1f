use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::boundary::{ElasticBoundReport, SymbolBoundRow};

use super::runs::HpRecord;
use super::{ConvergenceRecord, ErrorKind, StudyError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub fn write_csv<W: Write>(records: &[ConvergenceRecord], out: W) -> Result<(), StudyError> {
    if records.is_empty() {
        return Err(StudyError::Empty);
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ConvergenceRecord], path: &Path) -> Result<(), StudyError> {
    write_csv(records, BufWriter::new(File::create(path)?))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ConvergenceRecord>, StudyError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let expected = CSV_HEADER;
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(StudyError::Csv(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(StudyError::from)).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ConvergenceRecord>, StudyError> {
    parse_csv(File::open(path)?)
}

/// Column order of convergence CSV files.
pub const CSV_HEADER: [&str; 10] = [
    "example",
    "p",
    "level",
    "h_max",
    "n_dof",
    "k",
    "n_lambda",
    "err_l2_rel",
    "err_energy_rel",
    "wall_time_ms",
];

/// Endpoints `(n_lambda, err)` of a reference line with log-log slope
/// `slope`, spanning the records' `n_lambda` range and passing a factor 2
/// above the point of largest `n_lambda`.
pub fn reference_line(records: &[ConvergenceRecord], kind: ErrorKind, slope: f64) -> Option<([f64; 2], [f64; 2])> {
    let pts = finite_points(records, kind);
    let (x0, x1) = pts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let anchor = pts.iter().max_by(|a, b| a.0.total_cmp(&b.0))?;
    let y1 = 2.0 * anchor.1;
    let y0 = y1 * (x0 / x1).powf(slope);
    Some(([x0, y0], [x1, y1]))
}

fn finite_points(records: &[ConvergenceRecord], kind: ErrorKind) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| (r.n_lambda, r.error_value(kind)))
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        .collect()
}

/// Log-log plot of error against `n_lambda`: one path per `p`, and a dashed
/// reference line of log-log slope `reference_slope`.
pub fn render_svg(records: &[ConvergenceRecord], kind: ErrorKind, reference_slope: f64) -> Result<String, StudyError> {
    let all = finite_points(records, kind);
    if all.is_empty() {
        return Err(StudyError::Empty);
    }
    let line = reference_line(records, kind, reference_slope).expect("points exist");
    let xs = all.iter().map(|p| p.0.log10());
    let ys = all.iter().map(|p| p.1.log10()).chain([line.0[1].log10(), line.1[1].log10()]);
    let (xlo, xhi) = padded(xs);
    let (ylo, yhi) = padded(ys);
    let sx = |x: f64| MARGIN + (x.log10() - xlo) / (xhi - xlo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.log10() - ylo) / (yhi - ylo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for d in xlo.ceil() as i32..=xhi.floor() as i32 {
        let x = sx(10f64.powi(d));
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" font-size="12" text-anchor="middle">1e{d}</text>"#, b + 18.0);
    }
    for d in ylo.ceil() as i32..=yhi.floor() as i32 {
        let y = sy(10f64.powi(d));
        let _ = writeln!(s, r#"<text x="{}" y="{y:.2}" font-size="12" text-anchor="end">1e{d}</text>"#, l - 6.0);
    }
    let label = match kind {
        ErrorKind::L2 => "relative L2 error",
        ErrorKind::Energy => "relative energy error",
    };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">N_lambda</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-size="13" transform="rotate(-90 15 {})" text-anchor="middle">{label}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0);

    let mut by_p: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in records {
        let (x, y) = (rec.n_lambda, rec.error_value(kind));
        if x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0 {
            by_p.entry(rec.p).or_default().push((x, y));
        }
    }
    for (i, (p, mut pts)) in by_p.into_iter().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(j, &(x, y))| format!("{}{:.2},{:.2}", if j == 0 { 'M' } else { 'L' }, sx(x), sy(y)))
            .collect();
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"><title>p = {p}</title></path>"#, d.join(" "));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="{color}">p = {p}</text>"#, r - 50.0, t + 16.0 * (i + 1) as f64);
    }
    let (a, c) = line;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
        sx(a[0]),
        sy(a[1]),
        sx(c[0]),
        sy(c[1])
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn padded(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = ((hi - lo) * 0.05).max(0.05);
    (lo - pad, hi + pad)
}

pub fn emit_svg(records: &[ConvergenceRecord], path: &Path, kind: ErrorKind, reference_slope: f64) -> Result<(), StudyError> {
    std::fs::write(path, render_svg(records, kind, reference_slope)?)?;
    Ok(())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// `mode,k,re,im,slack_re_bound,slack_im_bound,slack_2k_bound` rows.
pub fn write_symbol_csv<W: Write>(rows: &[SymbolBoundRow], out: W) -> Result<(), StudyError> {
    let mut w = writer(out);
    w.write_record(["mode", "k", "re", "im", "slack_re_bound", "slack_im_bound", "slack_2k_bound"])?;
    for r in rows {
        w.write_record([
            r.mode.to_string(),
            r.k.to_string(),
            r.z.re.to_string(),
            r.z.im.to_string(),
            r.slack_re.to_string(),
            r.slack_im.to_string(),
            r.slack_2k.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `mode,k,lambda,mu,ratio` rows of elastic high-mode reports.
pub fn write_elastic_csv<W: Write>(reports: &[ElasticBoundReport], out: W) -> Result<(), StudyError> {
    let mut w = writer(out);
    w.write_record(["mode", "k", "lambda", "mu", "ratio"])?;
    for rep in reports {
        for (n, ratio) in rep.modes.iter().zip(&rep.ratios) {
            w.write_record([n.to_string(), rep.k.to_string(), rep.lambda.to_string(), rep.mu.to_string(), ratio.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per wavenumber of an hp study.
pub fn write_hp_csv<W: Write>(records: &[HpRecord], out: W) -> Result<(), StudyError> {
    let mut w = writer(out);
    w.write_record([
        "k",
        "p",
        "level",
        "h_max",
        "n_dof",
        "kh_over_p",
        "err_energy_rel",
        "interp_energy_rel",
        "proj_energy_rel",
        "ratio_interp",
        "ratio_proj",
        "skipped",
    ])?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.p.to_string(),
            r.level.to_string(),
            r.h_max.to_string(),
            r.n_dof.to_string(),
            r.kh_over_p.to_string(),
            r.err_energy_rel.to_string(),
            r.interp_energy_rel.to_string(),
            r.proj_energy_rel.to_string(),
            r.ratio_interp.to_string(),
            r.ratio_proj.to_string(),
            r.skipped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `dof,re,im` rows of a discrete solution.
pub fn write_solution_csv<W: Write>(uh: &[Complex64], out: W) -> Result<(), StudyError> {
    let mut w = writer(out);
    w.write_record(["dof", "re", "im"])?;
    for (i, z) in uh.iter().enumerate() {
        w.write_record([i.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
