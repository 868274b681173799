//! JSON run configuration: schema, presets and resolution to concrete values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channels::IdealVariant;
use crate::metrics::DEFAULT_TOL;
use crate::spectrum::SystemParams;
use crate::sweeps::{self, Axis, SweepOptions};
use crate::{Error, Result};

/// Key under which a run manifest stores the configuration it ran with.
pub const MANIFEST_CONFIG_KEY: &str = "resolved_config";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Spectrum,
    Distance,
    Fig2,
    Fig3,
    Fig4,
    Crossover,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Distance => "distance",
            Task::Fig2 => "fig2",
            Task::Fig3 => "fig3",
            Task::Fig4 => "fig4",
            Task::Crossover => "crossover",
        }
    }

    /// Preset applied when a figure task is run without an explicit one.
    fn implied_preset(self) -> Option<Preset> {
        match self {
            Task::Fig2 => Some(Preset::Fig2),
            Task::Fig3 => Some(Preset::Fig3),
            Task::Fig4 => Some(Preset::Fig4),
            _ => None,
        }
    }
}

/// Named parameter sets, one per figure task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn params(self) -> ParamsConfig {
        match self {
            Preset::Fig2 => ParamsConfig {
                delta0: Some(102.0),
                j: Some(3.8),
                chi_grid: Some(sweeps::default_chi_grid()),
                alpha: Some(2.0),
                n_max: Some(40),
                ..Default::default()
            },
            Preset::Fig3 => ParamsConfig {
                chi_grid: Some(sweeps::default_scan_chi_grid()),
                ..Preset::Fig2.params()
            },
            Preset::Fig4 => ParamsConfig {
                delta0: Some(80.0),
                j: Some(10.0),
                chi: Some(20.0),
                alpha_grid: Some(sweeps::default_alpha_grid()),
                n_max: Some(40),
                ..Default::default()
            },
        }
    }
}

/// Physical parameters as written in a config file. Detuning is given either
/// as `delta0` or as the pair `omega1`, `omega2` (or both, if consistent).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

impl ParamsConfig {
    /// `self` with gaps filled from `defaults`. Each alternative family
    /// (detuning, χ, α) is taken as a whole from whichever side mentions it.
    fn over(self, defaults: ParamsConfig) -> ParamsConfig {
        let detuning_given = self.delta0.is_some() || self.omega1.is_some() || self.omega2.is_some();
        let chi_given = self.chi.is_some() || self.chi_grid.is_some();
        let alpha_given = self.alpha.is_some() || self.alpha_grid.is_some();
        let (delta0, omega1, omega2) = if detuning_given {
            (self.delta0, self.omega1, self.omega2)
        } else {
            (defaults.delta0, defaults.omega1, defaults.omega2)
        };
        let (chi, chi_grid) = if chi_given {
            (self.chi, self.chi_grid)
        } else {
            (defaults.chi, defaults.chi_grid)
        };
        let (alpha, alpha_grid) = if alpha_given {
            (self.alpha, self.alpha_grid)
        } else {
            (defaults.alpha, defaults.alpha_grid)
        };
        ParamsConfig {
            delta0,
            omega1,
            omega2,
            j: self.j.or(defaults.j),
            chi,
            chi_grid,
            alpha,
            alpha_grid,
            n_max: self.n_max.or(defaults.n_max),
        }
    }
}

/// A run request. Every field is optional in the file; [`RunConfig::resolve`]
/// fills defaults and validates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub params: ParamsConfig,
    /// Requested certificate width of each diamond distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<IdealVariant>,
    /// CSV output path; the manifest is written next to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Number of γ grid points per χ (task `fig3`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_points: Option<usize>,
    /// Swept parameter (task `crossover`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    /// Search interval (task `crossover`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    /// Evaluate both readout outcomes and require equal distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_outcomes: Option<bool>,
}

/// A validated configuration with every default made explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub task: Task,
    pub preset: Option<Preset>,
    /// Parameters with `chi`, `alpha` set to the first grid value when a grid is swept.
    pub params: SystemParams,
    pub chi_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub options: SweepOptions,
    pub output: PathBuf,
    pub gamma_points: usize,
    pub axis: Axis,
    pub bracket: (f64, f64),
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        line: None,
        message: message.into(),
    }
}

/// Parse a config document, or a run manifest (whose stored configuration is
/// used). Unknown keys are rejected; errors carry the key path and line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
        path: ".".into(),
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    if let Some(inner) = value.get(MANIFEST_CONFIG_KEY) {
        return serde_path_to_error::deserialize(inner.clone()).map_err(|e| Error::Config {
            path: format!("{MANIFEST_CONFIG_KEY}.{}", e.path()),
            line: None,
            message: e.inner().to_string(),
        });
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        line: Some(e.inner().line()),
        message: e.inner().to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Whether `task` sweeps (χ, α).
fn swept(task: Task, axis: Axis) -> (bool, bool) {
    match task {
        Task::Fig2 | Task::Fig3 => (true, false),
        Task::Fig4 => (false, true),
        Task::Crossover => (axis == Axis::Chi, axis == Axis::Alpha),
        Task::Spectrum | Task::Distance => (false, false),
    }
}

fn check_grid(key: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(config_error(key, "grid is empty"));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(config_error(key, format!("non-finite grid value {v}")));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(config_error(key, "grid must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    /// Validate and fill every default. The task comes from the file unless
    /// `task` overrides it; the two must agree when both are present.
    pub fn resolve(&self, task: Option<Task>) -> Result<Resolved> {
        let task = match (self.task, task) {
            (Some(a), Some(b)) if a != b => {
                return Err(config_error(
                    "task",
                    format!("config asks for `{}` but `{}` was requested", a.name(), b.name()),
                ))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => {
                return Err(config_error(
                    "task",
                    "no task given (one of spectrum, distance, fig2, fig3, fig4, crossover)",
                ))
            }
        };
        let axis = self.axis.unwrap_or(Axis::Chi);
        // Which parameters the task sweeps; the others must be scalars.
        let (chi_swept, alpha_swept) = swept(task, axis);
        let preset = self.preset.or(task.implied_preset());
        let p = match preset {
            Some(pr) => {
                let mut defaults = pr.params();
                if !chi_swept {
                    defaults.chi_grid = None;
                }
                if !alpha_swept {
                    defaults.alpha_grid = None;
                }
                self.params.clone().over(defaults)
            }
            None => self.params.clone(),
        };

        let omega = match (p.delta0, p.omega1, p.omega2) {
            (None, None, None) => {
                return Err(config_error("params", "missing detuning: give `delta0` or `omega1` and `omega2`"))
            }
            (Some(d), None, None) => (-d, d),
            (_, Some(_), None) | (_, None, Some(_)) => {
                return Err(config_error("params", "`omega1` and `omega2` must be given together"))
            }
            (d, Some(w1), Some(w2)) => {
                if let Some(d) = d {
                    let implied = (w2 - w1) / 2.0;
                    if (d - implied).abs() > 1e-12 * d.abs().max(implied.abs()).max(1.0) {
                        return Err(config_error(
                            "params.delta0",
                            format!("delta0 = {d} is inconsistent with (omega2 - omega1)/2 = {implied}"),
                        ));
                    }
                }
                (w1, w2)
            }
        };
        let j = p.j.ok_or_else(|| config_error("params.j", "missing coupling `j`"))?;

        let chi_grid = match (p.chi, &p.chi_grid) {
            (Some(_), Some(_)) => return Err(config_error("params", "give `chi` or `chi_grid`, not both")),
            (None, None) => Vec::new(),
            (Some(c), None) => vec![c],
            (None, Some(g)) => {
                check_grid("params.chi_grid", g)?;
                g.clone()
            }
        };
        let alpha_grid = match (p.alpha, &p.alpha_grid) {
            (Some(_), Some(_)) => return Err(config_error("params", "give `alpha` or `alpha_grid`, not both")),
            (None, None) => Vec::new(),
            (Some(a), None) => vec![a],
            (None, Some(g)) => {
                check_grid("params.alpha_grid", g)?;
                g.clone()
            }
        };

        if chi_grid.is_empty() && !(task == Task::Crossover && chi_swept) {
            return Err(config_error("params", "missing `chi` and `chi_grid` (give one of them)"));
        }
        if !chi_swept && p.chi_grid.is_some() {
            return Err(config_error(
                "params.chi_grid",
                format!("task `{}` takes a single `chi`", task.name()),
            ));
        }
        if alpha_grid.is_empty() && !(task == Task::Crossover && alpha_swept) {
            if task == Task::Spectrum {
                // The spectrum does not depend on α; only the truncation default does.
            } else {
                return Err(config_error("params", "missing `alpha` and `alpha_grid` (give one of them)"));
            }
        }
        if !alpha_swept && p.alpha_grid.is_some() {
            return Err(config_error(
                "params.alpha_grid",
                format!("task `{}` takes a single `alpha`", task.name()),
            ));
        }
        if let Some(a) = alpha_grid.iter().find(|a| **a < 0.0) {
            return Err(config_error("params.alpha", format!("alpha must be >= 0, got {a}")));
        }
        if chi_grid.iter().any(|c| *c == 0.0) {
            return Err(config_error("params.chi", "chi must be nonzero"));
        }

        let max_alpha = alpha_grid.iter().cloned().fold(0.0, f64::max);
        let n_max = p
            .n_max
            .unwrap_or_else(|| SystemParams::recommended_n_max(max_alpha).max(40));
        if n_max < 1 {
            return Err(config_error("params.n_max", "n_max must be at least 1"));
        }

        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(config_error("tol", format!("tolerance must be positive, got {tol}")));
        }
        let gamma_points = self.gamma_points.unwrap_or(sweeps::DEFAULT_GAMMA_POINTS);
        if gamma_points < 3 {
            return Err(config_error("gamma_points", "need at least 3 gamma points"));
        }
        let bracket = match self.bracket {
            Some([lo, hi]) => (lo, hi),
            None => match axis {
                Axis::Chi => (1.0, 1000.0),
                Axis::Alpha => (0.25, 8.0),
            },
        };

        let chi0 = chi_grid.first().copied().unwrap_or(bracket.0);
        let alpha0 = alpha_grid.first().copied().unwrap_or(if alpha_swept { bracket.0 } else { 0.0 });
        let params = SystemParams::new(omega.0, omega.1, j, chi0, alpha0, n_max)
            .map_err(|e| config_error("params", e.to_string()))?;

        Ok(Resolved {
            task,
            preset,
            params,
            chi_grid,
            alpha_grid,
            options: SweepOptions {
                tol,
                variant: self.variant.unwrap_or_default(),
                check_outcomes: self.check_outcomes.unwrap_or(false),
            },
            output: self
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", task.name()))),
            gamma_points,
            axis,
            bracket,
        })
    }
}

impl Resolved {
    /// The configuration with every value explicit; resolving it again gives `self`.
    pub fn to_config(&self) -> RunConfig {
        let grid_or_scalar = |g: &[f64], swept: bool| -> (Option<f64>, Option<Vec<f64>>) {
            if g.is_empty() {
                (None, None)
            } else if swept {
                (None, Some(g.to_vec()))
            } else {
                (Some(g[0]), None)
            }
        };
        let (chi_swept, alpha_swept) = swept(self.task, self.axis);
        let (chi, chi_grid) = grid_or_scalar(&self.chi_grid, chi_swept);
        let (alpha, alpha_grid) = grid_or_scalar(&self.alpha_grid, alpha_swept);
        RunConfig {
            task: Some(self.task),
            preset: self.preset,
            params: ParamsConfig {
                delta0: Some(self.params.delta0()),
                omega1: Some(self.params.omega1),
                omega2: Some(self.params.omega2),
                j: Some(self.params.j),
                chi,
                chi_grid,
                alpha,
                alpha_grid,
                n_max: Some(self.params.n_max),
            },
            tol: Some(self.options.tol),
            variant: Some(self.options.variant),
            output: Some(self.output.clone()),
            gamma_points: Some(self.gamma_points),
            axis: Some(self.axis),
            bracket: Some([self.bracket.0, self.bracket.1]),
            check_outcomes: Some(self.options.check_outcomes),
        }
    }

    /// Manifest path belonging to the CSV output.
    pub fn manifest_path(&self) -> PathBuf {
        self.output.with_extension("manifest.json")
    }

    /// Companion file of the γ scan holding the per-χ minima.
    pub fn minima_path(&self) -> PathBuf {
        let stem = self
            .output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "fig3".into());
        self.output.with_file_name(format!("{stem}_minima.csv"))
    }
}
