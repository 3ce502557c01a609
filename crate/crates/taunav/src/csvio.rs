//! Trajectory and track CSV files.
//!
//! Simulated trajectories are written as
//! `t,x,y,theta,u,segment,tau:<feature>...`; tracks are read from any CSV
//! with `t`, `x`, `y` and optionally `z` columns (other columns are
//! ignored). Lines starting with `#` are comments. Floats are written in
//! the shortest form that parses back to the same bits.

use taunav_core::sim::Trajectory;
use taunav_core::trajproc::{ArcCurve, TrackPoint};
use taunav_core::Vec2;

use crate::format::ParseError;

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>, stamp: Option<&str>) -> String {
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output");
    match stamp {
        Some(s) => format!("# {s}\n{body}"),
        None => body,
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Full trajectory CSV. `stamp` becomes a leading comment line.
pub fn write_trajectory(traj: &Trajectory, stamp: Option<&str>) -> String {
    let mut w = writer();
    let mut header: Vec<String> = ["t", "x", "y", "theta", "u", "segment"].iter().map(|s| s.to_string()).collect();
    header.extend(traj.tau_features.iter().map(|f| format!("tau:{f}")));
    w.write_record(&header).expect("in-memory write");
    for s in &traj.samples {
        let mut row = vec![fmt_f64(s.t), fmt_f64(s.pose.x), fmt_f64(s.pose.y), fmt_f64(s.pose.theta), fmt_f64(s.u)];
        row.push(traj.segment_labels.get(s.segment).cloned().unwrap_or_default());
        row.extend(s.taus.iter().map(|t| fmt_f64(*t)));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w, stamp)
}

/// `t,x,y` rows; for resampled curves `t` is the arc length.
pub fn write_curve(curve: &ArcCurve, stamp: Option<&str>) -> String {
    let mut w = writer();
    w.write_record(["t", "x", "y"]).expect("in-memory write");
    let n = curve.samples.len();
    for (i, p) in curve.samples.iter().enumerate() {
        let s = if n > 1 { curve.total_length * i as f64 / (n - 1) as f64 } else { 0.0 };
        w.write_record([fmt_f64(s), fmt_f64(p.x), fmt_f64(p.y)]).expect("in-memory write");
    }
    finish(w, stamp)
}

/// Generic table with a header row.
pub fn write_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = writer();
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    finish(w, None)
}

fn csv_error(e: &csv::Error, line_of: impl Fn(u64) -> usize) -> ParseError {
    let line = e.position().map_or(1, |p| line_of(p.byte()));
    ParseError { line, column: 1, message: format!("malformed CSV: {e}") }
}

/// Rows of a track CSV. `column` in errors is the 1-based field number.
pub fn read_track_points(text: &str) -> Result<Vec<TrackPoint>, ParseError> {
    // Comments become empty lines, so byte offsets map to the file's lines.
    let cleaned: String =
        text.lines().map(|l| if l.trim_start().starts_with('#') { "" } else { l }).flat_map(|l| [l, "\n"]).collect();
    let bytes = cleaned.as_bytes();
    let breaks: Vec<usize> = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i).collect();
    let line_of = |byte: u64| {
        let mut at = (byte as usize).min(bytes.len());
        while at < bytes.len() && (bytes[at] == b'\n' || bytes[at] == b'\r') {
            at += 1;
        }
        breaks.partition_point(|&b| b < at) + 1
    };
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(cleaned.as_bytes());
    let header = r.headers().map_err(|e| csv_error(&e, line_of))?.clone();
    let header_line = r.headers().ok().and_then(|h| h.position()).map_or(1, |p| line_of(p.byte()));
    let find = |name: &str| header.iter().position(|h| h == name);
    let missing = |name: &str| ParseError { line: header_line, column: 1, message: format!("missing `{name}` column") };
    let ti = find("t").ok_or_else(|| missing("t"))?;
    let xi = find("x").ok_or_else(|| missing("x"))?;
    let yi = find("y").ok_or_else(|| missing("y"))?;
    let zi = find("z");
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(&e, line_of))?;
        let line = rec.position().map_or(0, |p| line_of(p.byte()));
        let field = |i: usize| -> Result<f64, ParseError> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| ParseError {
                line,
                column: i + 1,
                message: format!("expected a finite number in `{}`, found `{raw}`", &header[i]),
            })
        };
        out.push(TrackPoint { t: field(ti)?, x: field(xi)?, y: field(yi)?, z: zi.map(field).transpose()? });
    }
    Ok(out)
}

/// Polyline of a CSV's `x,y` columns.
pub fn read_polyline(text: &str) -> Result<Vec<Vec2>, ParseError> {
    Ok(read_track_points(text)?.iter().map(|p| Vec2::new(p.x, p.y)).collect())
}
