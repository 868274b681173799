//! Command-line front end: configuration, task dispatch, CSV and manifest output.
//!
//! A run is described by a [`RunConfig`] (JSON, unknown keys rejected), possibly
//! seeded from a figure [`Preset`] and overridden by command-line flags. Every
//! run writes its CSV table plus a manifest `<output stem>.manifest.json`
//! holding the fully resolved configuration, tolerances, code version and wall
//! time. A manifest is itself accepted as a configuration and reproduces the
//! run.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::channels::IdealVariant;
use crate::metrics::{DiamondStatus, PRECISION_FLOOR};
use crate::spectrum::{crossover_estimates, mixing_angle, SystemParams};
use crate::sweeps::{self, Axis, GammaScan, Reference, SweepRow};
use crate::Result;

pub use config::{load_config, parse_config, ParamsConfig, Preset, Resolved, RunConfig, Task, MANIFEST_CONFIG_KEY};
pub use output::{
    fmt_sci, minima_csv, scan_csv, spectrum_csv, sweep_csv, sweep_header, CROSSOVER_HEADER, MINIMA_HEADER,
    SCAN_HEADER, SPECTRUM_HEADER,
};

/// A truncation spot check is accepted when raising `n_max` moves the
/// readout channel by less than this in Choi trace norm.
pub const TRUNCATION_TOL: f64 = 1e-8;

/// Exit status when some rows carry a failed diamond-norm solve.
pub const EXIT_FAILED_ROWS: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qmb",
    version,
    about = "Two-qubit dispersive readout: measurement superoperators and certified diamond distances"
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// JSON configuration (or a manifest of an earlier run).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// CSV output path; the manifest is written alongside.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Certificate width requested for every diamond distance.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,

    /// Fock-space truncation.
    #[arg(long, global = true, value_name = "N")]
    pub nmax: Option<usize>,

    /// Construction of the non-bare reference measurements.
    #[arg(long, global = true, value_enum)]
    pub variant: Option<VariantArg>,

    /// Named parameter set (fig2, fig3, fig4).
    #[arg(long, global = true, value_enum, value_name = "NAME")]
    pub preset: Option<Preset>,

    /// Evaluate both readout outcomes and fail if their distances differ.
    #[arg(long, global = true)]
    pub check_outcomes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mixing angles and eigenenergies per Fock sector.
    Spectrum,
    /// The four reference distances at one parameter point.
    Distance,
    /// Distances against χ.
    Fig2,
    /// Distance over basis angle γ and χ, with per-χ minima.
    Fig3,
    /// Distances against probe amplitude α.
    Fig4,
    /// Where the bare and dressed references are equally good.
    Crossover,
}

impl From<Command> for Task {
    fn from(c: Command) -> Self {
        match c {
            Command::Spectrum => Task::Spectrum,
            Command::Distance => Task::Distance,
            Command::Fig2 => Task::Fig2,
            Command::Fig3 => Task::Fig3,
            Command::Fig4 => Task::Fig4,
            Command::Crossover => Task::Crossover,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Diagonal,
    Literal,
}

impl From<VariantArg> for IdealVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Diagonal => IdealVariant::Diagonal,
            VariantArg::Literal => IdealVariant::Literal,
        }
    }
}

impl Args {
    /// The file configuration with command-line overrides applied.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(tol) = self.tol {
            cfg.tol = Some(tol);
        }
        if let Some(n) = self.nmax {
            cfg.params.n_max = Some(n);
        }
        if let Some(v) = self.variant {
            cfg.variant = Some(v.into());
        }
        if let Some(p) = self.preset {
            cfg.preset = Some(p);
        }
        if self.check_outcomes {
            cfg.check_outcomes = Some(true);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub diamond_tol: f64,
    pub precision_floor: f64,
    pub gamma_tol: f64,
    pub crossover_rel_width: f64,
    pub truncation_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationCheck {
    pub chi: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub probe_n_max: usize,
    /// Choi trace-norm change of the readout channel, an upper bound on the
    /// change of every distance.
    pub shift: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedRow {
    pub index: usize,
    pub chi: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// Run record written next to the CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub resolved_config: RunConfig,
    pub version: String,
    pub tolerances: Tolerances,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
    pub rows: usize,
    pub failed_rows: Vec<FailedRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_check: Option<TruncationCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<f64>,
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    /// Human-readable result lines for the terminal.
    pub summary: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.failed_rows.is_empty() {
            0
        } else {
            EXIT_FAILED_ROWS
        }
    }
}

fn failed_sweep_rows(rows: &[SweepRow]) -> Vec<FailedRow> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.any_failed())
        .map(|(index, r)| FailedRow {
            index,
            chi: r.chi,
            alpha: r.alpha,
            gamma: r.gamma,
        })
        .collect()
}

fn failed_scan_rows(scan: &GammaScan) -> Vec<FailedRow> {
    scan.slices
        .iter()
        .flat_map(|s| s.points.iter().map(move |p| (s, p)))
        .enumerate()
        .filter(|(_, (_, p))| p.distance.status == DiamondStatus::Failed)
        .map(|(index, (s, p))| FailedRow {
            index,
            chi: s.chi,
            alpha: s.alpha,
            gamma: Some(p.gamma),
        })
        .collect()
}

fn truncation_check(params: &SystemParams) -> Result<TruncationCheck> {
    let shift = sweeps::truncation_shift(params)?;
    let ok = shift <= TRUNCATION_TOL;
    if !ok {
        warn!(
            "raising n_max from {} to {} moves the readout channel by {shift:.3e} (chi = {}, alpha = {})",
            params.n_max,
            params.n_max + sweeps::TRUNCATION_PROBE,
            params.chi,
            params.alpha
        );
    }
    Ok(TruncationCheck {
        chi: params.chi,
        alpha: params.alpha,
        n_max: params.n_max,
        probe_n_max: params.n_max + sweeps::TRUNCATION_PROBE,
        shift,
        ok,
    })
}

fn row_summary(row: &SweepRow) -> Vec<String> {
    Reference::ALL
        .iter()
        .map(|r| {
            let d = row.get(*r);
            format!(
                "d_{:<12} = {}  [{}, {}]  {}",
                r.name(),
                fmt_sci(d.value),
                fmt_sci(d.lower_cert),
                fmt_sci(d.upper_cert),
                d.status.as_str()
            )
        })
        .collect()
}

/// Execute a resolved configuration, writing the CSV output(s) and the manifest.
pub fn run(cfg: &Resolved) -> Result<RunReport> {
    let start = Instant::now();
    let opts = &cfg.options;
    let mut outputs = vec![cfg.output.clone()];
    let mut summary = Vec::new();
    let mut failed_rows = Vec::new();
    let mut truncation = None;
    let mut crossover = None;
    let rows;

    match cfg.task {
        Task::Spectrum => {
            let p = &cfg.params;
            output::write_file(&cfg.output, &spectrum_csv(p))?;
            rows = p.n_max + 1;
            let est = crossover_estimates(p);
            summary.push(format!("t_m     = {}", fmt_sci(p.t_m())));
            summary.push(format!("gamma_0 = {}", fmt_sci(mixing_angle(p, 0.0).map(|b| b.gamma()).unwrap_or(0.0))));
            if let Some(c) = est.chi_c {
                summary.push(format!("chi_c   = {}", fmt_sci(c)));
            }
            if let Some(a) = est.alpha_c {
                summary.push(format!("alpha_c = {}", fmt_sci(a)));
            }
        }
        Task::Distance => {
            let row = sweeps::evaluate(&cfg.params, opts)?;
            output::write_file(&cfg.output, &sweep_csv(&[row]))?;
            rows = 1;
            failed_rows = failed_sweep_rows(&[row]);
            summary = row_summary(&row);
        }
        Task::Fig2 => {
            let table = sweeps::sweep_chi(&cfg.params, &cfg.chi_grid, opts)?;
            output::write_file(&cfg.output, &sweep_csv(&table))?;
            rows = table.len();
            failed_rows = failed_sweep_rows(&table);
            let mid = cfg.chi_grid[cfg.chi_grid.len() / 2];
            truncation = Some(truncation_check(&cfg.params.with_chi(mid))?);
            summary.push(format!("{rows} rows written to {}", cfg.output.display()));
        }
        Task::Fig3 => {
            let scan = sweeps::scan_gamma_chi(&cfg.params, &cfg.chi_grid, cfg.gamma_points, opts)?;
            let minima = cfg.minima_path();
            output::write_file(&cfg.output, &scan_csv(&scan))?;
            output::write_file(&minima, &minima_csv(&scan))?;
            outputs.push(minima.clone());
            rows = scan.slices.iter().map(|s| s.points.len()).sum();
            failed_rows = failed_scan_rows(&scan);
            summary.push(format!(
                "{rows} grid points written to {}, per-chi minima to {}",
                cfg.output.display(),
                minima.display()
            ));
        }
        Task::Fig4 => {
            let table = sweeps::sweep_alpha(&cfg.params, &cfg.alpha_grid, opts)?;
            output::write_file(&cfg.output, &sweep_csv(&table))?;
            rows = table.len();
            failed_rows = failed_sweep_rows(&table);
            let top = *cfg.alpha_grid.last().expect("validated non-empty grid");
            truncation = Some(truncation_check(&cfg.params.with_alpha(top))?);
            summary.push(format!("{rows} rows written to {}", cfg.output.display()));
        }
        Task::Crossover => {
            let value = sweeps::find_crossover(&cfg.params, cfg.axis, cfg.bracket, opts)?;
            let (axis, estimate) = match cfg.axis {
                Axis::Chi => ("chi", crossover_estimates(&cfg.params).chi_c),
                Axis::Alpha => ("alpha", crossover_estimates(&cfg.params).alpha_c),
            };
            let csv = format!(
                "{CROSSOVER_HEADER}\n{axis},{},{},{},{}\n",
                fmt_sci(value),
                fmt_sci(cfg.bracket.0),
                fmt_sci(cfg.bracket.1),
                estimate.map(fmt_sci).unwrap_or_default()
            );
            output::write_file(&cfg.output, &csv)?;
            rows = 1;
            crossover = Some(value);
            summary.push(format!("{axis}* = {}", fmt_sci(value)));
            if let Some(e) = estimate {
                summary.push(format!("closed-form estimate = {}", fmt_sci(e)));
            }
        }
    }

    let manifest = Manifest {
        resolved_config: cfg.to_config(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        tolerances: Tolerances {
            diamond_tol: opts.tol,
            precision_floor: PRECISION_FLOOR,
            gamma_tol: sweeps::GAMMA_TOL,
            crossover_rel_width: sweeps::CROSSOVER_REL_WIDTH,
            truncation_tol: TRUNCATION_TOL,
        },
        threads: sweeps::worker_count(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        rows,
        failed_rows,
        truncation_check: truncation,
        crossover,
    };
    let manifest_path = cfg.manifest_path();
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    output::write_file(&manifest_path, &(json + "\n"))?;
    info!("manifest written to {}", manifest_path.display());
    if !manifest.failed_rows.is_empty() {
        summary.push(format!("{} row(s) failed; see {}", manifest.failed_rows.len(), manifest_path.display()));
    }
    Ok(RunReport {
        manifest,
        manifest_path,
        summary,
    })
}

/// Parse arguments, run, print the summary; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let result = args
        .config()
        .and_then(|cfg| cfg.resolve(args.command.map(Task::from)))
        .and_then(|resolved| run(&resolved));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
