use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{Method, ResultRow};
use crate::error::{invalid, Result};
use crate::fmt_f64;

pub const RESULTS_HEADER: &str =
    "scenario,trial,seed,method,n,p,r,h,kappa,sigma2,mean_perturbation,embedding_error,s_stress,wall_time_ms,laterable";

/// Writes rows under [`RESULTS_HEADER`], floats at 17 significant digits.
pub fn write_results_csv<W: Write>(rows: &[ResultRow], mut writer: W) -> Result<()> {
    writeln!(writer, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.trial,
            r.seed,
            r.method,
            r.n,
            r.p,
            fmt_f64(r.r),
            fmt_f64(r.h),
            fmt_f64(r.kappa),
            fmt_f64(r.sigma2),
            fmt_f64(r.mean_perturbation),
            fmt_f64(r.embedding_error),
            fmt_f64(r.s_stress),
            fmt_f64(r.wall_time_ms),
            r.laterable
        )?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != RESULTS_HEADER {
        return invalid(format!("unexpected results header '{}'", header.join(",")));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn method_color(m: Method) -> &'static str {
    COLORS[Method::ALL.iter().position(|x| *x == m).unwrap_or(0)]
}

/// Log-log scatter of embedding error against mean perturbation, one
/// `circle.point` per row with positive coordinates, plus the dashed
/// `line.reference` where error equals mean perturbation.
pub fn write_svg_scatter<W: Write>(rows: &[ResultRow], title: &str, mut w: W) -> Result<()> {
    if rows.is_empty() {
        return invalid("cannot plot an empty result set");
    }
    let pts: Vec<(f64, f64, Method)> = rows
        .iter()
        .filter(|r| r.mean_perturbation > 0.0 && r.embedding_error > 0.0 && r.embedding_error.is_finite())
        .map(|r| (r.mean_perturbation.log10(), r.embedding_error.log10(), r.method))
        .collect();
    let (mut lo, mut hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y, _)| (lo.min(x).min(y), hi.max(x).max(y)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let sx = |v: f64| MARGIN + (v - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        w,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )?;
    writeln!(
        w,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )?;
    let mut e = lo as i64;
    while e as f64 <= hi {
        let v = e as f64;
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">1e{e}</text>"#,
            sx(v),
            HEIGHT - MARGIN + 16.0
        )?;
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">1e{e}</text>"#,
            MARGIN - 6.0,
            sy(v) + 3.0
        )?;
        e += 1;
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">mean perturbation</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    )?;
    writeln!(
        w,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">embedding error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )?;
    writeln!(
        w,
        r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
        sx(lo),
        sy(lo),
        sx(hi),
        sy(hi)
    )?;
    for &(x, y, m) in &pts {
        writeln!(
            w,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.6"><title>{m}</title></circle>"#,
            sx(x),
            sy(y),
            method_color(m)
        )?;
    }
    let mut legend: BTreeMap<Method, ()> = BTreeMap::new();
    for &(_, _, m) in &pts {
        legend.insert(m, ());
    }
    for (k, m) in legend.keys().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * k as f64;
        writeln!(
            w,
            r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" fill="{}">{m}</text>"#,
            MARGIN + 8.0,
            method_color(*m)
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
