//! Command-line front end.
//!
//! Data goes to `--out` (or stdout); human-readable summaries go to stderr.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{ratio_curves, threshold_scan, to_csv, BoundKind};
use crate::constructions::{
    illuminate_2d, illuminate_3d, illuminate_general, illuminate_symmetric, illuminate_unconditional, Construction,
};
use crate::coverings::{greedy_cover, known_cover, verify_cover, CoverReport, CoveringSpec, DEFAULT_CANDIDATES};
use crate::error::Error;
use crate::piercing::{pierce_arcs_exact, pierce_caps_exact, PiercingSolution};
use crate::sphere::{SphericalCap, Tolerance, UnitVector};
use crate::spiky::{gen_instance, is_convex, verify_illumination, DirectionSet, InstanceKind, SpikyBall, Symmetry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
    General,
    Symmetric,
    Unconditional,
}

#[derive(Debug, Parser)]
#[command(name = "spiky", version, about = "Illumination of spiky balls and cap bodies")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol_predicate: Option<f64>,
    #[arg(long, global = true)]
    pub tol_geometry: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded instance.
    Gen {
        /// two_illuminable, symmetric, unconditional or planar_lifted
        kind: String,
        dim: usize,
        /// Vertex count, antipodal pairs for symmetric, orbits for unconditional.
        #[arg(default_value_t = 0)]
        n: usize,
    },
    /// Construct and verify an illuminating direction set.
    Illuminate {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Covering of S^{d-2}; generated when absent.
        #[arg(long)]
        cover: Option<PathBuf>,
    },
    /// Verify a direction set against an instance.
    Verify { instance: PathBuf, directions: PathBuf },
    /// Build and verify a covering of S^m by caps of radius alpha (radians).
    Cover {
        m: usize,
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
        candidates: usize,
    },
    /// Minimum piercing of a cap family on S^1 or S^2 (caps or an instance).
    Pierce { input: PathBuf },
    /// Bound curves and threshold scan.
    Bounds { d_min: usize, d_max: usize },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Assertion(_) => EXIT_ASSERTION,
            Error::CoverNotVerified(_)
            | Error::MeshResolution { .. }
            | Error::Solver(_)
            | Error::RetryBudget { .. } => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn tolerance(cli: &Cli) -> std::result::Result<Tolerance, Failure> {
    let d = Tolerance::default();
    Ok(Tolerance::new(
        cli.tol_predicate.unwrap_or(d.eps_predicate),
        cli.tol_geometry.unwrap_or(d.eps_geometry),
    )?)
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: EXIT_FAILED,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rows_csv(header: &str, rows: &[&[f64]]) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:.17e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn coord_header(prefix: &str, d: usize) -> String {
    (0..d).map(|j| format!("{prefix}{j}")).collect::<Vec<_>>().join(",")
}

fn execute(cli: &Cli) -> CliResult {
    let tol = tolerance(cli)?;
    let format = cli.format;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen { kind, dim, n } => {
            let kind: InstanceKind = kind.parse()?;
            let ball = gen_instance(kind, *dim, *n, cli.seed, &tol)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => ball.to_json() + "\n",
                Format::Csv => {
                    let rows: Vec<&[f64]> = ball.vertices.iter().map(|v| v.as_slice()).collect();
                    rows_csv(&coord_header("x", ball.dim), &rows)
                }
            };
            emit(out, &text)?;
            eprintln!("generated {} vertices in dimension {}", ball.len(), ball.dim);
            Ok(EXIT_OK)
        }
        Command::Illuminate { instance, method, cover } => {
            let ball = SpikyBall::from_json(&read(instance)?, &tol)?;
            let cover = match cover {
                Some(p) => Some(load_cover(p, &tol)?),
                None => None,
            };
            let c = illuminate(&ball, *method, cover, cli.seed, &tol)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => c.directions.to_json() + "\n",
                Format::Csv => {
                    let rows: Vec<&[f64]> = c.directions.directions.iter().map(|u| u.coords()).collect();
                    rows_csv(&coord_header("v", ball.dim), &rows)
                }
            };
            emit(out, &text)?;
            let report = IlluminateReport::from(&c);
            let json = serde_json::to_string_pretty(&report).expect("report serialization") + "\n";
            if let Some(p) = out {
                emit(Some(&sidecar(p)), &json)?;
            }
            eprintln!(
                "{} directions (bound {}), verdict {}, min margin {:.3e}",
                report.size,
                report.bound,
                if report.verdict { "pass" } else { "fail" },
                report.min_margin
            );
            Ok(if report.verdict { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Verify { instance, directions } => {
            let ball = SpikyBall::from_json(&read(instance)?, &tol)?;
            let dirs = DirectionSet::from_json(&read(directions)?)?;
            let report = verify_illumination(&ball, &dirs, &tol)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serialization") + "\n",
                Format::Csv => format!(
                    "verdict,positive_hull_ok,failures,min_margin\n{},{},{},{:.17e}\n",
                    report.verdict,
                    report.positive_hull_ok,
                    report.failures.len(),
                    report.min_margin
                ),
            };
            emit(out, &text)?;
            let mut summary = format!(
                "verdict: {}\npositive hull: {}\nmin margin: {:.3e}\n",
                if report.verdict { "pass" } else { "fail" },
                if report.positive_hull_ok { "full" } else { "not full" },
                report.min_margin
            );
            if !report.failures.is_empty() {
                let _ = writeln!(summary, "unilluminated vertices: {:?}", report.failures);
            }
            eprint!("{summary}");
            Ok(if report.verdict { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Cover { m, alpha, candidates } => {
            let mut spec = match known_cover(*m, *alpha) {
                Some(s) => s,
                None => greedy_cover(*m, *alpha, cli.seed, *candidates, &tol)?,
            };
            let report = verify_cover(&mut spec, &tol)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => spec.to_json() + "\n",
                Format::Csv => {
                    let rows: Vec<&[f64]> = spec.centers.iter().map(|u| u.coords()).collect();
                    rows_csv(&coord_header("c", m + 1), &rows)
                }
            };
            emit(out, &text)?;
            eprintln!(
                "{} centers, status {:?}, worst margin {:.3e}",
                spec.len(),
                report.status,
                report.worst_margin
            );
            Ok(if report.covered { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Pierce { input } => {
            let caps = load_caps(&read(input)?, &tol)?;
            let sol = pierce(&caps, &tol)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&sol).expect("solution serialization") + "\n",
                Format::Csv => {
                    let rows: Vec<&[f64]> = sol.points.iter().map(|p| p.as_slice()).collect();
                    rows_csv(&coord_header("p", caps[0].dim()), &rows)
                }
            };
            emit(out, &text)?;
            eprintln!("{} caps pierced by {} points", caps.len(), sol.len());
            Ok(EXIT_OK)
        }
        Command::Bounds { d_min, d_max } => {
            let rows = ratio_curves(*d_min, *d_max)?;
            let spiky = threshold_scan(BoundKind::Spiky)?;
            let capbody = threshold_scan(BoundKind::Capbody)?;
            let text = match format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&rows),
                Format::Json => {
                    let doc = serde_json::json!({
                        "rows": rows,
                        "thresholds": { "spiky": spiky, "capbody": capbody },
                    });
                    serde_json::to_string_pretty(&doc).expect("bounds serialization") + "\n"
                }
            };
            emit(out, &text)?;
            eprintln!("spiky threshold = {spiky}");
            eprintln!("capbody threshold = {capbody}");
            Ok(EXIT_OK)
        }
    }
}

/// `<out>.report.json` next to the directions file.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".report.json");
    out.with_file_name(name)
}

#[derive(Debug, Serialize)]
struct IlluminateReport {
    size: usize,
    bound: usize,
    piercing_points: usize,
    verdict: bool,
    positive_hull_ok: bool,
    min_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
}

impl From<&Construction> for IlluminateReport {
    fn from(c: &Construction) -> Self {
        IlluminateReport {
            size: c.directions.len(),
            bound: c.bound,
            piercing_points: c.piercing_points,
            verdict: c.report.verdict,
            positive_hull_ok: c.report.positive_hull_ok,
            min_margin: c.report.min_margin,
            phi: c.phi,
        }
    }
}

fn load_cover(path: &Path, tol: &Tolerance) -> std::result::Result<CoveringSpec, Failure> {
    let mut spec = CoveringSpec::from_json(&read(path)?)?;
    let report = verify_cover(&mut spec, tol)?;
    if !report.covered {
        return Err(Failure {
            code: EXIT_FAILED,
            message: format!("cover in {} does not cover (worst margin {:e})", path.display(), report.worst_margin),
        });
    }
    Ok(spec)
}

fn default_cover(m: usize, alpha: f64, seed: u64, tol: &Tolerance) -> std::result::Result<CoveringSpec, Failure> {
    let mut spec = match known_cover(m, alpha) {
        Some(s) => s,
        None => greedy_cover(m, alpha, seed, DEFAULT_CANDIDATES, tol)?,
    };
    let report: CoverReport = verify_cover(&mut spec, tol)?;
    if !report.covered {
        return Err(Error::CoverNotVerified(format!("generated cover of S^{m} at radius {alpha}")).into());
    }
    Ok(spec)
}

fn illuminate(
    ball: &SpikyBall,
    method: Method,
    cover: Option<CoveringSpec>,
    seed: u64,
    tol: &Tolerance,
) -> std::result::Result<Construction, Failure> {
    let d = ball.dim;
    let symmetric = ball.symmetry != Symmetry::None;
    let method = match method {
        Method::Auto => match d {
            2 => Method::TwoD,
            _ if ball.symmetry == Symmetry::Unconditional && d >= 3 => Method::Unconditional,
            _ if symmetric && is_convex(ball, tol) => Method::Symmetric,
            3 => Method::ThreeD,
            _ => Method::General,
        },
        m => m,
    };
    let with_cover = |alpha: f64| match cover.clone() {
        Some(c) => Ok(c),
        None if d >= 3 => default_cover(d - 2, alpha, seed, tol),
        None => Err(usage("this method needs d >= 3")),
    };
    Ok(match method {
        Method::TwoD => illuminate_2d(ball, tol)?,
        Method::ThreeD => illuminate_3d(ball, seed, tol)?,
        Method::General => illuminate_general(ball, &with_cover(FRAC_PI_6)?, seed, tol)?,
        Method::Symmetric => illuminate_symmetric(ball, &with_cover(FRAC_PI_4)?, seed, tol)?,
        Method::Unconditional => illuminate_unconditional(ball, tol)?,
        Method::Auto => unreachable!("resolved above"),
    })
}

/// Caps from an instance file (its piercing caps) or a JSON list of caps.
fn load_caps(text: &str, tol: &Tolerance) -> std::result::Result<Vec<SphericalCap>, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(format!("input JSON: {e}")))?;
    let caps = if value.get("vertices").is_some() {
        SpikyBall::from_json(text, tol)?.piercing_caps()?
    } else {
        let list = value.get("caps").cloned().unwrap_or(value);
        let raw: Vec<SphericalCap> = serde_json::from_value(list).map_err(|e| usage(format!("cap list: {e}")))?;
        raw.into_iter()
            .map(|c| SphericalCap::new(UnitVector::new(c.center.into_inner())?, c.radius, c.open))
            .collect::<crate::Result<_>>()?
    };
    if caps.is_empty() {
        return Err(usage("no caps in input"));
    }
    Ok(caps)
}

fn pierce(caps: &[SphericalCap], tol: &Tolerance) -> std::result::Result<PiercingSolution, Failure> {
    match caps[0].dim() {
        2 => Ok(pierce_arcs_exact(caps, tol)?),
        3 => Ok(pierce_caps_exact(caps, tol)?),
        d => Err(usage(format!("exact piercing supports caps on S^1 and S^2, got dimension {d}"))),
    }
}
