//! Command-line surface: polygon generation, Fourier sampling, recovery,
//! uniqueness verification, oracle cross-checks, and SVG plots with
//! file-based JSON I/O.
//!
//! Exit codes: 0 on success, 1 on a domain failure (validation, recovery),
//! 2 on usage errors. All randomness flows from `--seed` through a ChaCha
//! stream, and floats are serialized with a fixed 17-significant-digit
//! format, so identical invocations produce byte-identical outputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use prony2d::generators::{random_rectilinear_polygon, rng_from_seed};
use prony2d::geometry::{
    bb_transform, edge_frame, ft_triangle_oracle, GeometryError, Polygon, SlopeSet,
};
use prony2d::json::to_string_17;
use prony2d::pipeline::{
    identify_polygon_report, sample_polygon, verify_uniqueness, PipelineError, SlopeMode,
};
use prony2d::sampling::{layered_grid, polygon_grid, FourierSampleSet, LatticeSet2D};
use rand::Rng;

mod svg;

/// Outcome of one invocation.
#[derive(Debug)]
pub struct CommandResult {
    /// 0 success, 1 domain error, 2 usage error.
    pub exit_code: i32,
    /// Files written by the command.
    pub outputs: Vec<PathBuf>,
    /// One human-readable line, printed to stderr.
    pub summary: String,
}

#[derive(Parser)]
#[command(
    name = "prony2d",
    version,
    about = "Polygon identification from Fourier samples"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Known,
    Unknown,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random polygon (axis-parallel edges).
    GenPolygon {
        /// Generate an axis-parallel (rectilinear) polygon.
        #[arg(long)]
        rectilinear: bool,
        /// Upper bound on the vertex count (at least 4).
        #[arg(long)]
        max_vertices: usize,
        /// Campaign seed; identical seeds reproduce the output exactly.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the polygon JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the Fourier transform of a polygon's indicator on a lattice set.
    Sample {
        /// Polygon JSON file.
        #[arg(long)]
        polygon: PathBuf,
        /// Sampling set: `polygon:k,N`, `layered:N,D`, or `csv:PATH`.
        #[arg(long)]
        set: String,
        /// Output path for the samples JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a polygon from Fourier samples with known slopes.
    Recover {
        /// Samples JSON file.
        #[arg(long)]
        samples: PathBuf,
        /// `axis` or a slopes JSON file (`{"slopes": [[x,y],…]}`).
        #[arg(long)]
        slopes: String,
        /// Vertex-count bound N; the samples must cover `A(k, N)`.
        #[arg(long)]
        bound: usize,
        /// Output path for the recovered polygon JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional path for the recovery report JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample two polygons on the predetermined set and compare.
    VerifyUniqueness {
        #[arg(long)]
        p1: PathBuf,
        #[arg(long)]
        p2: PathBuf,
        /// Slope-count parameter k of the sampling set.
        #[arg(long)]
        k: usize,
        /// Vertex-count bound N.
        #[arg(long)]
        bound: usize,
        /// `known` uses A(k,N); `unknown` uses A(2k,2N).
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Output path for the report JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the vertex-sum transform against the triangulation oracle.
    OracleCheck {
        #[arg(long)]
        polygon: PathBuf,
        /// Number of random evaluation points.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional path for the discrepancy report JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a polygon (and optionally a sampling set) as an SVG.
    Plot {
        #[arg(long)]
        polygon: PathBuf,
        /// Optional sampling set to draw: same syntax as `sample --set`.
        #[arg(long)]
        set: Option<String>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, String),
    BadSetSpec(String),
    Domain(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "io: {}: {e}", p.display()),
            CliError::Parse(p, e) => write!(f, "parse: {}: {e}", p.display()),
            CliError::BadSetSpec(s) => write!(
                f,
                "set-spec: `{s}` (expected polygon:k,N, layered:N,D, or csv:PATH)"
            ),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn vlog(msg: &str) {
    if std::env::var("PRONY2D_LOG").is_ok_and(|v| !v.is_empty()) {
        eprintln!("prony2d: {msg}");
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(path.to_path_buf(), e.to_string()))
}

fn emit(out: &Option<PathBuf>, content: &str, outputs: &mut Vec<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| CliError::Io(path.clone(), e))?;
            outputs.push(path.clone());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(
    out: &Option<PathBuf>,
    value: &T,
    outputs: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let text = to_string_17(value).expect("serialization cannot fail");
    emit(out, &text, outputs)
}

fn parse_set(spec: &str) -> Result<LatticeSet2D, CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::BadSetSpec(spec.into()))?;
    let two_ints = |s: &str| -> Option<(usize, usize)> {
        let (a, b) = s.split_once(',')?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    };
    match kind {
        "polygon" => {
            let (k, n) = two_ints(rest).ok_or_else(|| CliError::BadSetSpec(spec.into()))?;
            polygon_grid(k, n).map_err(|e| CliError::Domain(e.to_string()))
        }
        "layered" => {
            let (n, d) = two_ints(rest).ok_or_else(|| CliError::BadSetSpec(spec.into()))?;
            layered_grid(n, d).map_err(|e| CliError::Domain(e.to_string()))
        }
        "csv" => {
            let path = PathBuf::from(rest);
            let text = read_to_string(&path)?;
            LatticeSet2D::from_csv(&text).map_err(|e| CliError::Parse(path, e.to_string()))
        }
        _ => Err(CliError::BadSetSpec(spec.into())),
    }
}

fn parse_slopes(spec: &str) -> Result<SlopeSet, CliError> {
    if spec == "axis" {
        Ok(SlopeSet::axis())
    } else {
        read_json(Path::new(spec))
    }
}

/// Run one invocation. Output JSON goes to `--out` or stdout; the summary
/// line always goes to stderr.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return CommandResult {
                exit_code: code,
                outputs: Vec::new(),
                summary: if code == 0 {
                    String::new()
                } else {
                    "usage error".into()
                },
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok((outputs, summary)) => {
            eprintln!("{summary}");
            CommandResult {
                exit_code: 0,
                outputs,
                summary,
            }
        }
        Err(e) => {
            let summary = format!("error: {e}");
            eprintln!("{summary}");
            CommandResult {
                exit_code: 1,
                outputs: Vec::new(),
                summary,
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(Vec<PathBuf>, String), CliError> {
    let mut outputs = Vec::new();
    let summary = match cmd {
        Cmd::GenPolygon {
            rectilinear,
            max_vertices,
            seed,
            out,
        } => {
            if !rectilinear {
                return Err(CliError::Domain(
                    "invalid-parameter: only --rectilinear generation is supported".into(),
                ));
            }
            if max_vertices < 4 {
                return Err(CliError::Domain(
                    "invalid-parameter: --max-vertices must be at least 4".into(),
                ));
            }
            let mut rng = rng_from_seed(seed);
            let p = random_rectilinear_polygon(&mut rng, max_vertices);
            vlog(&format!("generated {} vertices from seed {seed}", p.len()));
            emit_json(&out, &p, &mut outputs)?;
            format!("gen-polygon: {} vertices (seed {seed})", p.len())
        }
        Cmd::Sample { polygon, set, out } => {
            let p: Polygon = read_json(&polygon)?;
            let lattice = parse_set(&set)?;
            let samples = sample_polygon(&p, &lattice);
            vlog(&format!("sampled {} lattice points", samples.len()));
            emit_json(&out, &samples, &mut outputs)?;
            format!("sample: {} points of set {set}", samples.len())
        }
        Cmd::Recover {
            samples,
            slopes,
            bound,
            out,
            report,
        } => {
            let sampleset: FourierSampleSet = read_json(&samples)?;
            let slopeset = parse_slopes(&slopes)?;
            let (p, info) = identify_polygon_report(&sampleset, &slopeset, bound)?;
            emit_json(&out, &p, &mut outputs)?;
            if report.is_some() {
                emit_json(&report, &info, &mut outputs)?;
            }
            format!(
                "recover: {} vertices, verification residual {:.3e}",
                p.len(),
                info.verification_residual
            )
        }
        Cmd::VerifyUniqueness {
            p1,
            p2,
            k,
            bound,
            mode,
            out,
        } => {
            let poly1: Polygon = read_json(&p1)?;
            let poly2: Polygon = read_json(&p2)?;
            let mode = match mode {
                ModeArg::Known => SlopeMode::KnownSlopes,
                ModeArg::Unknown => SlopeMode::UnknownSlopes,
            };
            let report = verify_uniqueness(&poly1, &poly2, k, bound, mode)?;
            let verdict = match report.verdict {
                prony2d::pipeline::Verdict::DistinctConfirmed => "distinct-confirmed",
                prony2d::pipeline::Verdict::IndistinguishableOnSet => "indistinguishable-on-set",
            };
            let line = format!(
                "verify-uniqueness: {verdict}, max |Δ| = {:.3e} over {} points",
                report.max_abs_diff, report.set_size
            );
            emit_json(&out, &report, &mut outputs)?;
            line
        }
        Cmd::OracleCheck {
            polygon,
            trials,
            seed,
            out,
        } => {
            let p: Polygon = read_json(&polygon)?;
            let frame = edge_frame(&p);
            let mut rng = rng_from_seed(seed);
            let mut max_disc = 0.0f64;
            let mut done = 0usize;
            while done < trials {
                let t = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
                let singular = frame
                    .units
                    .iter()
                    .any(|u| (u.x * t.0 + u.y * t.1).abs() < 1e-6);
                if singular {
                    continue;
                }
                let a = bb_transform(&p, t).map_err(|e| CliError::Domain(e.to_string()))?;
                let b = ft_triangle_oracle(&p, t);
                max_disc = max_disc.max((a - b).norm() / (1.0 + a.norm()));
                done += 1;
            }
            #[derive(Serialize)]
            struct OracleReport {
                trials: usize,
                max_discrepancy: f64,
            }
            if out.is_some() {
                emit_json(
                    &out,
                    &OracleReport {
                        trials,
                        max_discrepancy: max_disc,
                    },
                    &mut outputs,
                )?;
            }
            format!("oracle-check: max relative discrepancy {max_disc:.3e} over {trials} points")
        }
        Cmd::Plot { polygon, set, out } => {
            let p: Polygon = read_json(&polygon)?;
            let lattice = set.as_deref().map(parse_set).transpose()?;
            let svg = svg::render(&p, lattice.as_ref());
            emit(&Some(out.clone()), &svg, &mut outputs)?;
            format!("plot: wrote {}", out.display())
        }
    };
    Ok((outputs, summary))
}
