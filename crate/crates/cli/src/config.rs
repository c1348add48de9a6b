//! Run configuration: one TOML file describes one batch run.
//!
//! The file is a flat table of scalars plus one optional sub-table per
//! command family.  Everything has a workable default except the phase
//! pair, so a minimal config is just `family`, `beta`, `alpha`.  Parse and
//! validation problems are reported with the offending line or field and
//! exit with status 2 before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};

use oscint_core::{GridLaw, OperatorSpec, PhasePair, ScanRegion};
use serde::Deserialize;

/// Which batch command a config is driving; doubles as the CLI subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Scan,
    Sharpness,
    Lp,
    Apply,
    Converge,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Check => "check",
            Command::Scan => "scan",
            Command::Sharpness => "sharpness",
            Command::Lp => "lp",
            Command::Apply => "apply",
            Command::Converge => "converge",
        };
        f.write_str(name)
    }
}

/// A configuration problem: what field, what is wrong.  Always exits 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub problem: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.problem)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, problem: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        problem: problem.into(),
    }
}

// ---------------------------------------------------------------------------
// Raw file shape (serde target)
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    /// Optional; when present it must agree with the invoked subcommand.
    command: Option<Command>,
    family: String,
    beta: Option<f64>,
    alpha: Option<f64>,
    sigma_gamma: Option<f64>,
    sigma_psi: Option<f64>,
    #[serde(default = "default_k")]
    k: u32,
    #[serde(default = "default_theta")]
    theta: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default)]
    seed: u64,
    out_dir: Option<PathBuf>,
    #[serde(default)]
    region: RawRegion,
    #[serde(default)]
    sharpness: RawSharpness,
    #[serde(default)]
    lp: RawLp,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    converge: RawConverge,
}

fn default_k() -> u32 {
    2
}
fn default_theta() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    xi_min: f64,
    xi_max: f64,
    n_xi: usize,
    eta_min: f64,
    eta_max: f64,
    n_eta: usize,
    law: String,
    refinements: u32,
}

impl Default for RawRegion {
    fn default() -> Self {
        RawRegion {
            xi_min: -100.0,
            xi_max: 100.0,
            n_xi: 40,
            eta_min: -100.0,
            eta_max: 100.0,
            n_eta: 40,
            law: "two-sided-log".to_string(),
            refinements: 2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSharpness {
    /// Ladder length when `t_list` is absent (geometric t = 2^-n).
    count: usize,
    /// Explicit ladder, strictly decreasing inside (0, 1); overrides `count`.
    t_list: Option<Vec<f64>>,
}

impl Default for RawSharpness {
    fn default() -> Self {
        RawSharpness {
            count: 6,
            t_list: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLp {
    j_max: u32,
    rel_tol: f64,
    taus: Vec<f64>,
    /// Depth of the closed-form interpolated series (quadrature-free).
    series_j_max: u32,
}

impl Default for RawLp {
    fn default() -> Self {
        RawLp {
            j_max: 10,
            rel_tol: 1e-3,
            taus: vec![0.25, 0.4],
            series_j_max: 600,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    domain: f64,
    eps: f64,
    max_mode: i32,
}

impl Default for RawGrid {
    fn default() -> Self {
        RawGrid {
            n: 64,
            domain: 4.0,
            eps: 0.4,
            max_mode: 5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverge {
    eps0: f64,
    n_steps: usize,
    x: f64,
    y: f64,
}

impl Default for RawConverge {
    fn default() -> Self {
        RawConverge {
            eps0: 0.5,
            n_steps: 6,
            x: 0.5,
            y: 0.5,
        }
    }
}

// ---------------------------------------------------------------------------
// Validated run configuration
// ---------------------------------------------------------------------------

/// Everything one run needs, already validated: the library constructors
/// have accepted the phase pair and operator, the tolerances are positive,
/// and the output directory is set (creation happens at run time, before
/// any artifact is written).
pub struct RunConfig {
    pub command: Command,
    pub pair: PhasePair,
    pub pair_label: String,
    pub spec: OperatorSpec,
    pub tol: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub region: ScanRegion,
    pub refinements: u32,
    pub sharpness_count: usize,
    pub sharpness_t_list: Option<Vec<f64>>,
    pub lp_j_max: u32,
    pub lp_rel_tol: f64,
    pub lp_taus: Vec<f64>,
    pub lp_series_j_max: u32,
    pub grid_n: usize,
    pub grid_domain: f64,
    pub grid_eps: f64,
    pub grid_max_mode: i32,
    pub converge_eps0: f64,
    pub converge_n_steps: usize,
    pub converge_point: (f64, f64),
}

impl RunConfig {
    /// Read and validate a config file for the given subcommand.
    pub fn load(path: &Path, command: Command, out_override: Option<PathBuf>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            bad("config", format!("cannot read {}: {e}", path.display()))
        })?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| {
            // toml errors carry a line/column span; message() is the field
            // diagnostic
            let place = e
                .span()
                .map(|s| {
                    let line = text[..s.start].chars().filter(|&c| c == '\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "unknown line".to_string());
            bad(&place, e.message().to_string())
        })?;
        Self::from_raw(raw, command, out_override)
    }

    fn from_raw(
        raw: RawConfig,
        command: Command,
        out_override: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        if let Some(c) = raw.command {
            if c != command {
                return Err(bad(
                    "command",
                    format!("config says `{c}` but the `{command}` subcommand was invoked"),
                ));
            }
        }

        let (pair, pair_label) = match raw.family.as_str() {
            "power" => {
                let beta = raw.beta.ok_or_else(|| bad("beta", "required for family = \"power\""))?;
                let alpha = raw
                    .alpha
                    .ok_or_else(|| bad("alpha", "required for family = \"power\""))?;
                let pair = PhasePair::power(beta, alpha)
                    .map_err(|e| bad("beta/alpha", e.to_string()))?;
                (pair, format!("power(beta = {beta}, alpha = {alpha})"))
            }
            "exp" => {
                let sg = raw
                    .sigma_gamma
                    .ok_or_else(|| bad("sigma_gamma", "required for family = \"exp\""))?;
                let sp = raw
                    .sigma_psi
                    .ok_or_else(|| bad("sigma_psi", "required for family = \"exp\""))?;
                let pair = PhasePair::exp(sg, sp)
                    .map_err(|e| bad("sigma_gamma/sigma_psi", e.to_string()))?;
                (pair, format!("exp(sigma_gamma = {sg}, sigma_psi = {sp})"))
            }
            other => {
                return Err(bad(
                    "family",
                    format!("unknown phase family `{other}` (expected \"power\" or \"exp\")"),
                ))
            }
        };

        let spec = OperatorSpec::new(raw.k, raw.theta)
            .map_err(|e| bad("k/theta", e.to_string()))?;
        if !(raw.tol > 0.0 && raw.tol.is_finite()) {
            return Err(bad("tol", format!("must be positive and finite, got {}", raw.tol)));
        }

        let law = match raw.region.law.as_str() {
            "linear" => GridLaw::Linear,
            "log" => GridLaw::Log,
            "two-sided-log" => GridLaw::TwoSidedLog,
            other => {
                return Err(bad(
                    "region.law",
                    format!("unknown law `{other}` (expected \"linear\", \"log\", or \"two-sided-log\")"),
                ))
            }
        };
        let region = ScanRegion {
            xi_min: raw.region.xi_min,
            xi_max: raw.region.xi_max,
            n_xi: raw.region.n_xi,
            eta_min: raw.region.eta_min,
            eta_max: raw.region.eta_max,
            n_eta: raw.region.n_eta,
            law,
        };
        if region.n_xi == 0 || region.n_eta == 0 {
            return Err(bad("region.n_xi/n_eta", "scan region is empty (zero points on an axis)"));
        }

        if raw.sharpness.count == 0 && raw.sharpness.t_list.is_none() {
            return Err(bad("sharpness.count", "ladder needs at least one point"));
        }
        if !(raw.lp.rel_tol > 0.0 && raw.lp.rel_tol.is_finite()) {
            return Err(bad("lp.rel_tol", "must be positive and finite"));
        }
        if !(raw.grid.domain > 0.0 && raw.grid.domain.is_finite()) {
            return Err(bad("grid.domain", "must be positive and finite"));
        }

        let out_dir = out_override
            .or(raw.out_dir)
            .unwrap_or_else(|| PathBuf::from("."));

        Ok(RunConfig {
            command,
            pair,
            pair_label,
            spec,
            tol: raw.tol,
            seed: raw.seed,
            out_dir,
            region,
            refinements: raw.region.refinements,
            sharpness_count: raw.sharpness.count,
            sharpness_t_list: raw.sharpness.t_list,
            lp_j_max: raw.lp.j_max,
            lp_rel_tol: raw.lp.rel_tol,
            lp_taus: raw.lp.taus,
            lp_series_j_max: raw.lp.series_j_max,
            grid_n: raw.grid.n,
            grid_domain: raw.grid.domain,
            grid_eps: raw.grid.eps,
            grid_max_mode: raw.grid.max_mode,
            converge_eps0: raw.converge.eps0,
            converge_n_steps: raw.converge.n_steps,
            converge_point: (raw.converge.x, raw.converge.y),
        })
    }
}
