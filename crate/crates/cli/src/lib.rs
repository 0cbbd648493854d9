//! The `sol-geo` command line.
//!
//! Every command prints a JSON summary on standard output holding the tool
//! version, the fully resolved arguments and the results. Exit codes: 0 ok,
//! 2 usage or parse error, 3 numerical failure or violated precondition,
//! 4 internal error.

use std::io::Write;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod commands;
pub mod config;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser, Serialize)]
#[command(name = "sol-geo", version, about = "Sub-Riemannian geometry of the Sol group E(1,1)")]
pub struct Cli {
    /// Flat key = value file; keys are long flag names of the subcommand.
    /// Command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write the JSON summary to this file.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Mean curvature and minimal-surface residual on a level set.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Residual(ResidualArgs),
    /// Sample a characteristic curve in closed form.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Curve(CurveArgs),
    /// Sweep a horizontal curve by characteristic curves.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Second-variation checks.
    Stability {
        #[command(subcommand)]
        command: StabilityCommand,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityCommand {
    /// Evaluate the stability form on a seeded battery of test functions.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Qform(QformArgs),
    /// Test the one-sided sufficient condition on a coordinate window.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Sufficient(SufficientArgs),
    /// Compare the area of a plane with graph perturbations of it.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Area(AreaArgs),
    /// Closed-form vertical Jacobi profile along a characteristic curve.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Jacobi(JacobiArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SurfaceArgs {
    /// Catalog surface.
    #[arg(long, value_parser = PossibleValuesParser::new(sol_geo::CatalogSurface::NAMES), conflicts_with = "u")]
    pub surface: Option<String>,
    /// Positional catalog parameters.
    #[arg(long, num_args = 1..)]
    pub params: Vec<f64>,
    /// Level-set function u(x, y, z).
    #[arg(long)]
    pub u: Option<String>,
    /// Use −u (reverses the unit normal).
    #[arg(long)]
    pub flip_orientation: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// x0 x1 y0 y1 z0 z1
    #[arg(long, num_args = 6, default_values_t = [-2.0, 2.0, -2.0, 2.0, -2.0, 2.0])]
    pub window: Vec<f64>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// |N_h| below which a point is singular.
    #[arg(long, default_value_t = sol_geo::surface::EPS_SING)]
    pub eps_sing: f64,
    /// Largest |normalized residual| accepted as minimal.
    #[arg(long, default_value_t = 1e-9)]
    pub minimal_tol: f64,
    /// Per-point CSV (x, y, z, |N_h|, H, residual, ⟨N,T⟩).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long, num_args = 3, default_values_t = [0.0, 0.0, 0.0])]
    pub p0: Vec<f64>,
    /// Initial direction cos α X + sin α Y.
    #[arg(long, conflicts_with = "v", required_unless_present = "v")]
    pub alpha: Option<f64>,
    /// Initial coordinate velocity; must be horizontal.
    #[arg(long, num_args = 3)]
    pub v: Option<Vec<f64>>,
    #[arg(long, num_args = 2, default_values_t = [0.0, 1.0])]
    pub t: Vec<f64>,
    /// Number of intervals.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Compare against the adaptive integrator.
    #[arg(long)]
    pub oracle: bool,
    /// Sample CSV (t, x, y, z, ẋ, ẏ, ż).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaKind {
    /// Characteristic curve (either closed-form family).
    Characteristic,
    /// Alias of `characteristic`.
    Exp,
    /// Alias of `characteristic`.
    Line,
    XLine,
    YLine,
    /// z = z₀ + wε, ẋe^{−z} − ẏe^{z} = μ₀ + μ₁ε.
    Ramp,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = GammaKind::Characteristic)]
    pub gamma: GammaKind,
    /// Base point Γ(0).
    #[arg(long, num_args = 3, default_values_t = [0.0, 0.0, 0.0])]
    pub x0: Vec<f64>,
    /// Coordinate velocity of a characteristic Γ at Γ(0); must be horizontal.
    #[arg(long, num_args = 3, conflicts_with = "alpha")]
    pub v0: Option<Vec<f64>>,
    /// Direction angle of a characteristic Γ.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub w: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mu0: f64,
    #[arg(long, default_value_t = -2.0)]
    pub mu1: f64,
    #[arg(long, num_args = 2, default_values_t = [-1.0, 1.0])]
    pub eps: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [-1.0, 1.0])]
    pub t: Vec<f64>,
    /// n_eps n_t
    #[arg(long, num_args = 2, default_values_t = [21, 21])]
    pub grid: Vec<usize>,
    /// Turn the rulings away from J(Γ̇) by this angle (negative control).
    #[arg(long, default_value_t = 0.0)]
    pub skew: f64,
    /// List the zero loci of ⟨V,T⟩.
    #[arg(long)]
    pub scan_singular: bool,
    #[arg(long)]
    pub obj: Option<PathBuf>,
    /// Grid CSV (ε, t, x, y, z, |N_h|, ⟨V,T⟩).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct QformArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Graph axis (0, 1, 2) for --u surfaces.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    #[arg(long, default_value_t = 50)]
    pub battery: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Coarse cells per axis; the fine level doubles it.
    #[arg(long, default_value_t = 8)]
    pub cells: usize,
    /// Tube half-width around the singular set (default 10% of the range).
    #[arg(long)]
    pub tube: Option<f64>,
    /// Half-width of the parameter domain.
    #[arg(long, default_value_t = 1.0)]
    pub half_width: f64,
    /// Also evaluate the closed-form integrand printed for the surface's family.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SufficientArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, num_args = 6, default_values_t = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0])]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AreaArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, num_args = 1.., default_values_t = [0.1, 0.2, 0.4])]
    pub eta: Vec<f64>,
    /// p1_min p1_max p2_min p2_max over the two free coordinates.
    #[arg(long, num_args = 4, default_values_t = [-1.0, 1.0, -1.0, 1.0])]
    pub window: Vec<f64>,
    /// Coarse cells per axis; the fine level doubles it.
    #[arg(long, default_value_t = 50)]
    pub cells: usize,
    #[arg(long, num_args = 2, default_values_t = [0.0, 0.0])]
    pub bump_center: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    pub bump_radius: f64,
    #[arg(long, default_value_t = 0.1)]
    pub bump_plateau: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct JacobiArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Point projected onto the surface.
    #[arg(long, num_args = 3)]
    pub point: Vec<f64>,
    #[arg(long, num_args = 2, default_values_t = [-1.0, 1.0])]
    pub s: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Also differentiate the actual foliation numerically.
    #[arg(long)]
    pub foliation: bool,
}

/// Failure classes mapped to exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Internal(m) => m,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a Cli,
    result: R,
}

/// Run with the given arguments (including the program name). Returns the
/// exit code.
pub fn run(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match config::expand(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    match commands::execute(&cli) {
        Ok(result) => {
            let summary = Summary { tool: "sol-geo", version: VERSION, config: &cli, result };
            let text = match serde_json::to_string_pretty(&summary) {
                Ok(t) => t + "\n",
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 4;
                }
            };
            if let Some(p) = &cli.summary {
                if let Err(e) = std::fs::write(p, &text) {
                    let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
                    return 4;
                }
            }
            if out.write_all(text.as_bytes()).is_err() {
                return 4;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}
