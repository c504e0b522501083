//! Phase-transition results as CSV and as a minimal SVG line chart.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::phase::{Arm, ExperimentRecord, PhasePoint};
use crate::error::{Error, Result};

pub const PHASE_CSV_HEADER: &str = "k,ratio,arm,success_prob,trials,seed";

/// One CSV row per point. Floats use the shortest representation that
/// parses back to the same value.
pub fn phase_csv(points: &[PhasePoint]) -> String {
    let mut out = String::from(PHASE_CSV_HEADER);
    out.push('\n');
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.k,
            p.ratio,
            p.arm.name(),
            p.success_prob,
            p.trials,
            p.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// A parsed row of [`phase_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub k: usize,
    pub ratio: f64,
    pub arm: Arm,
    pub success_prob: f64,
    pub trials: usize,
    pub seed: u64,
}

impl From<&PhasePoint> for PhaseRow {
    fn from(p: &PhasePoint) -> Self {
        Self {
            k: p.k,
            ratio: p.ratio,
            arm: p.arm,
            success_prob: p.success_prob,
            trials: p.trials,
            seed: p.seed,
        }
    }
}

pub fn parse_phase_csv(text: &str) -> Result<Vec<PhaseRow>> {
    let mut lines = text.lines();
    let mut offset = 0;
    match lines.next() {
        Some(h) if h.trim() == PHASE_CSV_HEADER => offset += h.len() + 1,
        _ => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("expected header '{PHASE_CSV_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            offset += line.len() + 1;
            continue;
        }
        let bad = |what: &str| Error::Parse {
            offset,
            message: format!("bad {what} in row '{line}'"),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad("field count"));
        }
        rows.push(PhaseRow {
            k: f[0].parse().map_err(|_| bad("k"))?,
            ratio: f[1].parse().map_err(|_| bad("ratio"))?,
            arm: f[2].parse().map_err(|_| bad("arm"))?,
            success_prob: f[3].parse().map_err(|_| bad("success_prob"))?,
            trials: f[4].parse().map_err(|_| bad("trials"))?,
            seed: f[5].parse().map_err(|_| bad("seed"))?,
        });
        offset += line.len() + 1;
    }
    Ok(rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart with one polyline per `(k, arm)`: CS ratio (%) against
/// recovery probability. Factored curves are solid, benchmark curves dashed.
pub fn phase_svg(rows: &[PhaseRow]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 160.0, 30.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let ratios: Vec<f64> = rows.iter().map(|p| p.ratio * 100.0).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let sx = |r: f64| left + (r - lo) / (hi - lo) * pw;
    let sy = |p: f64| top + (1.0 - p) * ph;

    let mut curves: BTreeMap<(usize, Arm), Vec<(f64, f64)>> = BTreeMap::new();
    for p in rows {
        curves.entry((p.k, p.arm)).or_default().push((p.ratio * 100.0, p.success_prob));
    }
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in 0..=4 {
        let p = t as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{p:.2}</text>"#, left - 6.0, sy(p) + 4.0);
        let x = lo + (hi - lo) * p;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x:.1}</text>"#, sx(x), top + ph + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">CS ratio (%)</text>"#, left + pw / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">Probability of recovery</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    let ks: Vec<usize> = {
        let mut v: Vec<usize> = curves.keys().map(|c| c.0).collect();
        v.dedup();
        v
    };
    for (i, ((k, arm), pts)) in curves.iter().enumerate() {
        let color = PALETTE[ks.iter().position(|x| x == k).unwrap_or(0) % PALETTE.len()];
        let dash = if *arm == Arm::Benchmark { r#" stroke-dasharray="6 4""# } else { "" };
        let coords: Vec<String> = pts.iter().map(|&(r, p)| format!("{:.2},{:.2}", sx(r), sy(p))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
            coords.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">k = {k}, {}</text>"#, lx + 30.0, ly + 4.0, arm.name());
    }
    s.push_str("</svg>\n");
    s
}

/// CSV and SVG renderings of a record.
pub fn emit_plot_data(record: &ExperimentRecord) -> Result<(String, String)> {
    if record.points.is_empty() {
        return Err(Error::Input("experiment record has no points".into()));
    }
    let rows: Vec<PhaseRow> = record.points.iter().map(PhaseRow::from).collect();
    Ok((phase_csv(&record.points), phase_svg(&rows)))
}
