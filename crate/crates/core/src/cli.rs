//! Command-line front end: load an inducer image, run the solver, write the
//! phase field, the shape mask, the energy log and a JSON run summary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::canyon::{build_canyon, CanyonParams, ConfigurationMask, EdgeKind, GradientScaling};
use crate::elliptic::CgParams;
use crate::energy::{ModelParams, PhaseField};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::grid::{GridField, GridGeometry};
use crate::pgm;
use crate::shape::{connected_components, extract_shape};
use crate::solver::{run, IterationReport, RunStatus, SolverConfig};

/// Reads an 8-bit graymap and marks dark pixels (`luminance < bin_threshold`)
/// as inducers, or light pixels when `invert` is set.
pub fn load_mask(path: &Path, invert: bool, bin_threshold: u8) -> Result<ConfigurationMask> {
    let img = pgm::read(path)?;
    let geometry = GridGeometry::new(img.width, img.height)?;
    let inside: Vec<bool> = img
        .pixels
        .iter()
        .map(|&v| (v < bin_threshold) != invert)
        .collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::EmptyConfiguration);
    }
    ConfigurationMask::new(geometry, inside)
}

/// `round(255 · clamp(v, 0, 1))`, halves rounded up.
pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0) + 0.5).floor() as u8
}

pub fn save_field_image(f: &GridField, path: &Path) -> Result<()> {
    let g = f.geometry();
    let pixels: Vec<u8> = f.values().iter().map(|&v| quantize(v)).collect();
    pgm::write_p5(path, g.width(), g.height(), &pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EdgeArg {
    Exp,
    Rational,
}

impl From<EdgeArg> for EdgeKind {
    fn from(a: EdgeArg) -> Self {
        match a {
            EdgeArg::Exp => EdgeKind::ExpSquare,
            EdgeArg::Rational => EdgeKind::Rational,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    Max,
    Raw,
}

impl From<ScalingArg> for GradientScaling {
    fn from(a: ScalingArg) -> Self {
        match a {
            ScalingArg::Max => GradientScaling::MaxNormalized,
            ScalingArg::Raw => GradientScaling::Raw,
        }
    }
}

/// Compute illusory shapes from binary inducer images.
#[derive(Debug, Parser)]
#[command(name = "illusory", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one of the built-in inducer images as a P5 graymap.
    Fixture {
        /// kanizsa, disk or ellipse_triangle
        name: String,
        output: PathBuf,
        /// Side length in pixels (kanizsa, disk) or scale unit (ellipse_triangle, 16 gives 176x112).
        #[arg(long)]
        size: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Inducer image (P2 or P5 graymap); dark pixels are inducers.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Take parameters from a previous summary.json; flags given explicitly still win.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Transition bandwidth in grid cells.
    #[arg(long, default_value_t = 3.0)]
    epsilon_factor: f64,
    /// Mollification scale in grid cells.
    #[arg(long, default_value_t = 2.0)]
    sigma_factor: f64,
    #[arg(long, default_value_t = 3.0)]
    gain: f64,
    #[arg(long = "g", value_enum, default_value = "exp")]
    g: EdgeArg,
    /// Scale edge strength by its maximum (max) or use it as is (raw).
    #[arg(long, value_enum, default_value = "max")]
    gradient_scaling: ScalingArg,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 5000)]
    max_outer: usize,
    #[arg(long, default_value_t = 1e-10)]
    cg_tol: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    presmooth: usize,
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
    #[arg(long)]
    invert: bool,
    #[arg(long, default_value_t = 128)]
    bin_threshold: u8,
}

/// Every tunable of a run. Stored verbatim in `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub epsilon_factor: f64,
    pub sigma_factor: f64,
    pub gain: f64,
    pub g_kind: EdgeKind,
    pub gradient_scaling: GradientScaling,
    pub delta: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub threshold: f64,
    pub presmooth: usize,
    pub snapshot_every: usize,
    pub invert: bool,
    pub bin_threshold: u8,
}

impl Default for RunParameters {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 1.0,
            lambda: 1.0,
            epsilon_factor: 3.0,
            sigma_factor: 2.0,
            gain: 3.0,
            g_kind: EdgeKind::ExpSquare,
            gradient_scaling: GradientScaling::MaxNormalized,
            delta: 1e-6,
            max_outer: 5000,
            cg_tol: 1e-10,
            threshold: 0.5,
            presmooth: 0,
            snapshot_every: 0,
            invert: false,
            bin_threshold: 128,
        }
    }
}

impl RunParameters {
    pub fn canyon_params(&self, geometry: &GridGeometry) -> CanyonParams {
        CanyonParams {
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma_factor * geometry.h(),
            g_kind: self.g_kind,
            gain: self.gain,
            scaling: self.gradient_scaling,
        }
    }

    /// Builds the canyon and model for `mask` and wraps them in a solver config.
    pub fn solver_config(&self, mask: &ConfigurationMask) -> Result<SolverConfig> {
        let geometry = *mask.geometry();
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        let canyon = build_canyon(mask, &self.canyon_params(&geometry))?;
        let model = ModelParams::new(
            self.epsilon_factor * geometry.h(),
            self.lambda,
            canyon,
            mask.clone(),
        )?;
        let cfg = SolverConfig {
            model,
            cg: CgParams {
                rel_tol: self.cg_tol,
                max_iters: None,
            },
            delta: self.delta,
            max_outer: self.max_outer,
            presmooth_steps: self.presmooth,
            snapshot_every: self.snapshot_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_args(a: &RunArgs) -> Self {
        Self {
            alpha: a.alpha,
            beta: a.beta,
            lambda: a.lambda,
            epsilon_factor: a.epsilon_factor,
            sigma_factor: a.sigma_factor,
            gain: a.gain,
            g_kind: a.g.into(),
            gradient_scaling: a.gradient_scaling.into(),
            delta: a.delta,
            max_outer: a.max_outer,
            cg_tol: a.cg_tol,
            threshold: a.threshold,
            presmooth: a.presmooth,
            snapshot_every: a.snapshot_every,
            invert: a.invert,
            bin_threshold: a.bin_threshold,
        }
    }

    /// Starts from `base` and takes every value given explicitly on the command line.
    fn overridden_by(mut base: Self, a: &RunArgs, m: &clap::ArgMatches) -> Self {
        let explicit = |id: &str| m.value_source(id) == Some(ValueSource::CommandLine);
        let from_args = Self::from_args(a);
        macro_rules! take {
            ($($field:ident => $id:literal),* $(,)?) => {
                $(if explicit($id) { base.$field = from_args.$field.clone(); })*
            };
        }
        take!(
            alpha => "alpha", beta => "beta", lambda => "lambda",
            epsilon_factor => "epsilon_factor", sigma_factor => "sigma_factor",
            gain => "gain", g_kind => "g", gradient_scaling => "gradient_scaling",
            delta => "delta", max_outer => "max_outer", cg_tol => "cg_tol",
            threshold => "threshold", presmooth => "presmooth",
            snapshot_every => "snapshot_every", invert => "invert",
            bin_threshold => "bin_threshold",
        );
        base
    }
}

/// Reads parameters from either a run summary or a bare parameter object.
pub fn read_parameters(path: &Path) -> Result<RunParameters> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    let params = value.get("parameters").cloned().unwrap_or(value);
    serde_json::from_value(params)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScales {
    pub width: usize,
    pub height: usize,
    pub h: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub input: String,
    pub parameters: RunParameters,
    pub resolved: ResolvedScales,
    pub status: RunStatus,
    pub outer_iterations: usize,
    pub final_energy: f64,
    pub final_rms_update: f64,
    pub euler_lagrange_residual: f64,
    pub shape_cells: usize,
    pub component_count: usize,
    pub component_areas: Vec<usize>,
    /// `Σ √ρ_n` over all steps.
    pub sqrt_rho_sum: f64,
    pub max_clamp_excursion: f64,
    pub elapsed_seconds: f64,
}

pub fn energy_csv(report: &IterationReport) -> String {
    let mut out = String::from("iter,energy,rho,rms_update,cg_iters,cg_residual\n");
    for s in &report.steps {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            s.iter, s.energy, s.rho, s.rms_update, s.cg_iters, s.cg_residual
        )
        .expect("writing to a String");
    }
    out
}

/// Runs the whole pipeline for one input and writes every output into `out_dir`.
pub fn execute(input: &Path, out_dir: &Path, params: &RunParameters) -> Result<RunSummary> {
    let started = Instant::now();
    let mask = load_mask(input, params.invert, params.bin_threshold)?;
    let cfg = params.solver_config(&mask)?;
    fs::create_dir_all(out_dir)?;

    let mut snapshot_error = None;
    let mut sink = |n: usize, z: &PhaseField| {
        if snapshot_error.is_none() {
            let path = out_dir.join(format!("snap_{n:06}.pgm"));
            if let Err(e) = save_field_image(z.field(), &path) {
                snapshot_error = Some(e);
            }
        }
    };
    let outcome = run(&cfg, Some(&mut sink))?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    let report = &outcome.report;

    let shape = extract_shape(&outcome.field, params.threshold)?;
    let components = connected_components(&shape);
    fs::write(out_dir.join("energy.csv"), energy_csv(report))?;
    save_field_image(outcome.field.field(), &out_dir.join("final_phase.pgm"))?;
    let geo = *mask.geometry();
    let shape_pixels: Vec<u8> = shape.inside().iter().map(|&b| if b { 255 } else { 0 }).collect();
    pgm::write_p5(&out_dir.join("shape.pgm"), geo.width(), geo.height(), &shape_pixels)?;

    let summary = RunSummary {
        input: input.display().to_string(),
        parameters: params.clone(),
        resolved: ResolvedScales {
            width: geo.width(),
            height: geo.height(),
            h: geo.h(),
            epsilon: cfg.model.epsilon,
            sigma: params.sigma_factor * geo.h(),
        },
        status: report.status,
        outer_iterations: report.outer_iterations(),
        final_energy: report.final_energy,
        final_rms_update: report.final_rms_update,
        euler_lagrange_residual: report.euler_lagrange_residual,
        shape_cells: shape.count(),
        component_count: components.count,
        component_areas: components.areas.clone(),
        sqrt_rho_sum: report.sqrt_rho_partial_sums().last().copied().unwrap_or(0.0),
        max_clamp_excursion: report
            .steps
            .iter()
            .map(|s| (-s.pre_clamp_min).max(s.pre_clamp_max - 1.0).max(0.0))
            .fold(0.0, f64::max),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::InvalidParameter(format!("summary serialization: {e}")))?;
    fs::write(out_dir.join("summary.json"), json + "\n")?;
    Ok(summary)
}

fn write_fixture(name: &str, size: Option<usize>, output: &Path) -> Result<()> {
    let size = size.unwrap_or(if name == "ellipse_triangle" { 16 } else { 128 });
    let fixture = fixtures::by_name(name, size)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture {name}")))?;
    let g = fixture.geometry;
    pgm::write_p5(output, g.width(), g.height(), &fixture.luminance())
}

/// Parses `args` (including the program name) and runs. Returns the process
/// exit code: 0 converged, 2 iteration limit reached, 1 on any error.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };

    if let Some(Command::Fixture { name, output, size }) = &cli.command {
        return match write_fixture(name, *size, output) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        };
    }

    let result = (|| {
        let input = cli
            .run
            .input
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("--input is required".into()))?;
        let params = match &cli.run.config {
            Some(path) => RunParameters::overridden_by(read_parameters(path)?, &cli.run, &matches),
            None => RunParameters::from_args(&cli.run),
        };
        execute(input, &cli.run.out_dir, &params)
    })();

    match result {
        Ok(summary) => {
            println!(
                "{:?} after {} iterations: E = {:.6e}, {} component(s) {:?}, {:.2}s",
                summary.status,
                summary.outer_iterations,
                summary.final_energy,
                summary.component_count,
                summary.component_areas,
                summary.elapsed_seconds
            );
            match summary.status {
                RunStatus::Converged => 0,
                RunStatus::MaxOuterReached => 2,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
