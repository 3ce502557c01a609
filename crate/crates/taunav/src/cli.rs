//! The `taunav` command set. The binary only parses arguments and maps
//! [`CliError`] to an exit code.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use taunav_core::control::Gains;
use taunav_core::protocol::{builtin_sequences, run_protocol, triangle_protocol, Protocol, RunError};
use taunav_core::sim::{SimConfig, Trajectory};
use taunav_core::trajproc::{
    arc_reparam, classify_side, curve_distance, fit_smoothing_spline, mean_trajectory, truncate_common, ArcCurve,
    Projection, RawTrack, Side, SideLabel,
};
use taunav_core::{Pose, Scene, Vec2};
use thiserror::Error;

use crate::csvio;
use crate::format::{parse_protocol, parse_scene, print_protocol, ParseError, SceneFile};
use crate::svg;

/// Environment variable naming a directory searched for inputs that do not
/// exist relative to the working directory.
pub const SEED_DIR_VAR: &str = "TAUNAV_SEED_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{}:{}: {}", path.display(), err.line, err.column, err.message)]
    Parse { path: PathBuf, err: ParseError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Timeout(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Timeout(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "taunav", version, about = "Time-to-transit steering simulator and track analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or more protocols over a scene and write trajectory CSVs.
    Simulate(SimulateArgs),
    /// Smooth a track and resample it at equal arc-length spacing.
    Smooth(SmoothArgs),
    /// Classify a directory of tracks by vine side and build class means.
    Analyze(AnalyzeArgs),
    /// RMS and maximum distance between two paths.
    Compare(CompareArgs),
    /// Print the built-in protocols in file syntax.
    Protocols,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Built-in name or protocol file; repeat for several, or `all` for the four field protocols.
    #[arg(long, required = true)]
    pub protocol: Vec<String>,
    /// Initial pose `x,y,theta`; defaults to the scene's `start`.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 60.0)]
    pub tmax: f64,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// CSV file, or a directory when several protocols run. Stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Prefix outputs with a generation-time comment.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl From<Plane> for Projection {
    fn from(p: Plane) -> Self {
        match p {
            Plane::Xy => Projection::DropZ,
            Plane::Xz => Projection::DropY,
            Plane::Yz => Projection::DropX,
        }
    }
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub lambda: f64,
    /// Output sample count.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Truncate to this arc length.
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long, value_enum, default_value_t = Plane::Xy)]
    pub plane: Plane,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of track CSVs.
    pub dir: PathBuf,
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Common length for class means; the shortest track of each class if absent.
    #[arg(long)]
    pub length: Option<f64>,
    /// Depth histogram bin width.
    #[arg(long, default_value_t = 0.5)]
    pub bin: f64,
    #[arg(long, value_enum, default_value_t = Plane::Xy)]
    pub plane: Plane,
    /// Output directory for the report, mean and histogram CSVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stamp: bool,
}

/// `path` itself if it exists, otherwise the same relative path under
/// `$TAUNAV_SEED_DIR` when that exists.
pub fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(SEED_DIR_VAR) {
        let seeded = Path::new(&dir).join(path);
        if seeded.exists() {
            return seeded;
        }
    }
    path.to_path_buf()
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(resolve(path)).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Write via a temporary file in the target directory and rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn create_dir(path: &Path) -> CliResult {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn stamp(on: bool) -> Option<String> {
    on.then(|| {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("generated unix:{secs}")
    })
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

pub fn load_scene(path: &Path) -> CliResult<SceneFile> {
    let text = read(path)?;
    let file = parse_scene(&text).map_err(|err| CliError::Parse { path: path.to_path_buf(), err })?;
    file.scene.validate().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(file)
}

/// Built-in protocol names, the four field protocols first.
pub fn builtin_protocols() -> Vec<Protocol> {
    let mut v: Vec<Protocol> = builtin_sequences().into_iter().map(|(_, p)| p).collect();
    v.push(triangle_protocol());
    v
}

pub fn load_protocols(names: &[String]) -> CliResult<Vec<Protocol>> {
    let builtins = builtin_protocols();
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(builtins.iter().take(4).cloned());
        } else if let Some(p) = builtins.iter().find(|p| &p.name == name) {
            out.push(p.clone());
        } else {
            let path = Path::new(name);
            if !resolve(path).exists() {
                return Err(CliError::Input(format!("unknown protocol `{name}` (not a built-in or a readable file)")));
            }
            let text = read(path)?;
            out.push(parse_protocol(&text).map_err(|err| CliError::Parse { path: path.to_path_buf(), err })?);
        }
    }
    Ok(out)
}

pub fn parse_init(s: &str) -> CliResult<Pose> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.parse::<f64>().ok().filter(|x| x.is_finite())).collect();
    match nums.as_deref() {
        Some([x, y, th]) => Ok(Pose::new(*x, *y, *th)),
        _ => Err(CliError::Input(format!("--init expects x,y,theta, got `{s}`"))),
    }
}

/// Outcome of one protocol run: the (possibly partial) trajectory and an
/// error if the run did not complete.
pub struct RunOutcome {
    pub name: String,
    pub trajectory: Trajectory,
    pub error: Option<CliError>,
}

pub fn run_one(
    scene: &Scene,
    protocol: &Protocol,
    init: Pose,
    gains: &Gains,
    cfg: &SimConfig,
) -> CliResult<RunOutcome> {
    let name = protocol.name.clone();
    match run_protocol(scene, protocol, init, gains, cfg) {
        Ok(trajectory) => Ok(RunOutcome { name, trajectory, error: None }),
        Err(RunError::Invalid(e)) => Err(CliError::Input(format!("{name}: {e}"))),
        Err(e @ RunError::Timeout { .. }) => {
            let msg = format!("{name}: {e}");
            let RunError::Timeout { partial } = e else { unreachable!() };
            Ok(RunOutcome { name, trajectory: partial, error: Some(CliError::Timeout(msg)) })
        }
        Err(e @ RunError::Law { .. }) => {
            let msg = format!("{name}: {e}");
            let RunError::Law { partial, .. } = e else { unreachable!() };
            Ok(RunOutcome { name, trajectory: partial, error: Some(CliError::Failed(msg)) })
        }
    }
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let file = load_scene(&args.scene)?;
    let protocols = load_protocols(&args.protocol)?;
    let init = match &args.init {
        Some(s) => parse_init(s)?,
        None => file.start.ok_or_else(|| CliError::Input("no --init given and the scene has no `start`".into()))?,
    };
    let gains = Gains::new(args.k, args.v).map_err(|e| CliError::Input(format!("gains: {e}")))?;
    let cfg = SimConfig { dt: args.dt, t_max: args.tmax, record_stride: args.stride, ..SimConfig::default() };
    cfg.validate().map_err(|e| CliError::Input(format!("simulation settings: {e}")))?;
    let several = protocols.len() > 1;
    if several && args.out.is_none() {
        return Err(CliError::Input("several protocols need --out <directory>".into()));
    }
    let stamp = stamp(args.stamp);
    let mut runs = Vec::new();
    for p in &protocols {
        runs.push(run_one(&file.scene, p, init, &gains, &cfg)?);
    }
    if several {
        create_dir(args.out.as_ref().expect("checked above"))?;
    }
    for r in &runs {
        let csv = csvio::write_trajectory(&r.trajectory, stamp.as_deref());
        match &args.out {
            None => emit(out, &csv)?,
            Some(o) => {
                let path = if several { o.join(format!("{}.csv", r.name)) } else { o.clone() };
                write_atomic(&path, &csv)?;
                let last = r.trajectory.samples.last().map_or(0.0, |s| s.t);
                let status = if r.error.is_some() { "stopped" } else { "done" };
                emit(
                    out,
                    &format!(
                        "{}: {status} at t = {last}, {} rows -> {}\n",
                        r.name,
                        r.trajectory.samples.len(),
                        path.display()
                    ),
                )?;
            }
        }
    }
    if let Some(path) = &args.svg {
        let paths: Vec<(String, Vec<Vec2>)> = runs
            .iter()
            .map(|r| (r.name.clone(), r.trajectory.samples.iter().map(|s| s.pose.position()).collect()))
            .collect();
        write_atomic(path, &svg::render(&file.scene, &paths))?;
    }
    match runs.into_iter().find_map(|r| r.error) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn read_track(path: &Path) -> CliResult<RawTrack> {
    let text = read(path)?;
    let pts = csvio::read_track_points(&text).map_err(|err| CliError::Parse { path: path.to_path_buf(), err })?;
    let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    RawTrack::new(id, pts).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Smoothed track resampled at `n` equal chords, optionally truncated.
pub fn smooth_track(track: &RawTrack, lambda: f64, n: usize, length: Option<f64>, plane: Plane) -> CliResult<ArcCurve> {
    let what = |e: taunav_core::Error| CliError::Failed(format!("{}: {e}", track.id));
    let spline = fit_smoothing_spline(track, lambda, plane.into()).map_err(what)?;
    let curve = arc_reparam(&spline, n).map_err(what)?;
    match length {
        None => Ok(curve),
        Some(l) => {
            let (mut kept, rejected) = truncate_common(std::slice::from_ref(&curve), l, n).map_err(what)?;
            if let Some(r) = rejected.first() {
                return Err(CliError::Failed(format!("{}: length {} is shorter than {l}", track.id, r.length)));
            }
            Ok(kept.remove(0))
        }
    }
}

pub fn smooth(args: &SmoothArgs, out: &mut dyn Write) -> CliResult {
    if !(0.0..=1.0).contains(&args.lambda) {
        return Err(CliError::Input(format!("--lambda must lie in [0, 1], got {}", args.lambda)));
    }
    let track = read_track(&args.input)?;
    let curve = smooth_track(&track, args.lambda, args.n, args.length, args.plane)?;
    let csv = csvio::write_curve(&curve, stamp(args.stamp).as_deref());
    match &args.out {
        Some(p) => write_atomic(p, &csv),
        None => emit(out, &csv),
    }
}

/// Why a track was left out of the classes.
#[derive(Debug, Clone)]
pub struct TrackIssue {
    /// The file could not be read or parsed as a track.
    pub unreadable: bool,
    pub message: String,
}

/// Per-track result of `analyze`.
#[derive(Debug, Clone)]
pub struct TrackReport {
    pub name: String,
    pub outcome: Result<(SideLabel, ArcCurve), TrackIssue>,
}

pub fn analyze_tracks(paths: &[PathBuf], scene: &Scene, args: &AnalyzeArgs) -> Vec<TrackReport> {
    let vine = scene.vine_feature().cloned();
    let heading = scene.travel_direction();
    let edge = scene.woods_edge_points();
    paths
        .par_iter()
        .map(|p| {
            let name = p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let issue = |unreadable: bool, message: String| TrackIssue { unreadable, message };
            let outcome = (|| {
                let track = read_track(p).map_err(|e| issue(true, e.to_string()))?;
                let vine = vine.as_ref().ok_or_else(|| issue(false, "scene has no vine".into()))?;
                let heading = heading.ok_or_else(|| issue(false, "scene has no travel direction".into()))?;
                let curve = smooth_track(&track, args.lambda, args.n, None, args.plane)
                    .map_err(|e| issue(false, e.to_string()))?;
                let label = classify_side(&curve, vine, heading, &edge).map_err(|e| issue(false, e.to_string()))?;
                Ok((label, curve))
            })();
            TrackReport { name, outcome }
        })
        .collect()
}

pub fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let scene = load_scene(&args.scene)?.scene;
    if args.bin.is_nan() || args.bin <= 0.0 {
        return Err(CliError::Input("--bin must be positive".into()));
    }
    let dir = resolve(&args.dir);
    let entries = std::fs::read_dir(&dir).map_err(|source| CliError::Io { path: args.dir.clone(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    let reports = analyze_tracks(&paths, &scene, args);
    let mut classes: BTreeMap<&'static str, Vec<(&TrackReport, &SideLabel, &ArcCurve)>> = BTreeMap::new();
    let mut report = String::from("track,side,penetration_depth\n");
    let mut skipped = Vec::new();
    for r in &reports {
        match &r.outcome {
            Ok((label, curve)) => {
                report.push_str(&format!("{},{},{}\n", r.name, label.side.name(), label.penetration_depth));
                classes.entry(label.side.name()).or_default().push((r, label, curve));
            }
            Err(e) => skipped.push(format!("{}: {}", r.name, e.message)),
        }
    }
    if reports.iter().all(|r| r.outcome.as_ref().is_err_and(|e| e.unreadable)) {
        let mut msg = format!("{}: no readable track CSVs", args.dir.display());
        for s in &skipped {
            msg.push_str(&format!("\n  {s}"));
        }
        return Err(CliError::Input(msg));
    }
    let count = |side: Side| classes.get(side.name()).map_or(0, Vec::len);
    let mut summary = format!("left {}\nright {}\n", count(Side::LeftOfVine), count(Side::RightOfVine));
    for s in &skipped {
        summary.push_str(&format!("unclassified {s}\n"));
    }
    emit(out, &report)?;
    emit(out, &summary)?;
    let Some(dir_out) = &args.out else { return Ok(()) };
    create_dir(dir_out)?;
    let stamp = stamp(args.stamp);
    let prefix = stamp.as_deref().map(|s| format!("# {s}\n")).unwrap_or_default();
    write_atomic(&dir_out.join("report.csv"), &format!("{prefix}{report}"))?;
    write_atomic(&dir_out.join("summary.txt"), &format!("{prefix}{summary}"))?;
    for (side, members) in &classes {
        let curves: Vec<ArcCurve> = members.iter().map(|m| m.2.clone()).collect();
        let mean =
            class_mean(&curves, args.length, args.n).map_err(|e| CliError::Failed(format!("{side} mean: {e}")))?;
        write_atomic(&dir_out.join(format!("mean_{side}.csv")), &csvio::write_curve(&mean, stamp.as_deref()))?;
    }
    let depths: Vec<(&str, f64)> =
        classes.iter().flat_map(|(s, m)| m.iter().map(|x| (*s, x.1.penetration_depth))).collect();
    write_atomic(&dir_out.join("depth_histogram.csv"), &format!("{prefix}{}", histogram(&depths, args.bin)))?;
    Ok(())
}

/// Mean of curves truncated to a common length (the shortest if `length` is absent).
pub fn class_mean(curves: &[ArcCurve], length: Option<f64>, n: usize) -> Result<ArcCurve, String> {
    let l = length.unwrap_or_else(|| curves.iter().map(|c| c.total_length).fold(f64::INFINITY, f64::min));
    let (kept, rejected) = truncate_common(curves, l, n).map_err(|e| e.to_string())?;
    if kept.is_empty() {
        return Err(format!("every track is shorter than {l}"));
    }
    let _ = rejected;
    mean_trajectory(&kept).map_err(|e| e.to_string())
}

fn histogram(depths: &[(&str, f64)], bin: f64) -> String {
    let max = depths.iter().map(|d| d.1).fold(0.0f64, f64::max);
    let bins = ((max / bin).floor() as usize + 1).max(1);
    let mut rows = Vec::new();
    for i in 0..bins {
        let (lo, hi) = (i as f64 * bin, (i + 1) as f64 * bin);
        let n = |side: &str| depths.iter().filter(|d| d.0 == side && d.1 >= lo && d.1 < hi).count().to_string();
        rows.push(vec![csvio::fmt_f64(lo), csvio::fmt_f64(hi), n("left"), n("right")]);
    }
    csvio::write_table(&["bin_start", "bin_end", "left", "right"], &rows)
}

fn read_curve(path: &Path) -> CliResult<ArcCurve> {
    let text = read(path)?;
    let pts = csvio::read_polyline(&text).map_err(|err| CliError::Parse { path: path.to_path_buf(), err })?;
    if pts.is_empty() {
        return Err(CliError::Input(format!("{}: no samples", path.display())));
    }
    let curve = ArcCurve { samples: pts, total_length: 0.0 };
    Ok(ArcCurve { total_length: curve.polyline_length(), ..curve })
}

pub fn compare(args: &CompareArgs, out: &mut dyn Write) -> CliResult {
    let a = read_curve(&args.a)?;
    let b = read_curve(&args.b)?;
    let d = curve_distance(&a, &b).map_err(|e| CliError::Failed(e.to_string()))?;
    let text = format!("rms {}\nmax {}\n", d.rms, d.max);
    emit(out, &text)?;
    if let Some(p) = &args.out {
        let prefix = stamp(args.stamp).map(|s| format!("# {s}\n")).unwrap_or_default();
        write_atomic(p, &format!("{prefix}{text}"))?;
    }
    Ok(())
}

pub fn protocols(out: &mut dyn Write) -> CliResult {
    let texts: Vec<String> = builtin_protocols().iter().map(print_protocol).collect();
    emit(out, &texts.join("\n"))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Smooth(a) => smooth(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Protocols => protocols(out),
    }
}
