//! JSON run configuration: serde model, semantic validation, and
//! resolution into solver types. Validation failures carry the config
//! path they refer to and map to exit code 2.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use spdd_core::analysis::{MRule, MeshOptions, SpecFamily, SweepConfig};
use spdd_core::expr::Expr;
use spdd_core::mesh::{default_sigma0, FactorChoice, MeshError, SpatialMesh, TimeGrid};
use spdd_core::problem::{BuiltinId, CustomProblem, ProblemSpec};
use spdd_core::scheme::SchemeKind;

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub scheme: SchemeName,
    #[serde(default)]
    pub extrapolate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for sweeps; 0 picks the machine parallelism.
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Builtin {
        id: BuiltinName,
        p: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Custom {
        #[serde(default = "default_label")]
        label: String,
        p: u32,
        a0: String,
        b: String,
        c: String,
        e: String,
        f: String,
        s: String,
        q0: String,
        q1: String,
        tau: f64,
        horizon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
}

fn default_label() -> String {
    String::from("custom")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    Problem1,
    Problem2,
}

impl From<BuiltinName> for BuiltinId {
    fn from(name: BuiltinName) -> BuiltinId {
        match name {
            BuiltinName::Problem1 => BuiltinId::Problem1,
            BuiltinName::Problem2 => BuiltinId::Problem2,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorConfig>,
}

/// `"ln"`, `"minimal"`, or a literal factor value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorConfig {
    Named(FactorName),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorName {
    Ln,
    Minimal,
}

impl FactorConfig {
    pub fn choice(self) -> FactorChoice {
        match self {
            FactorConfig::Named(FactorName::Ln) => FactorChoice::LnN,
            FactorConfig::Named(FactorName::Minimal) => FactorChoice::MinimalAdmissible,
            FactorConfig::Value(l) => FactorChoice::Custom(l),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Steps per delay interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_tau: Option<usize>,
    /// Total steps across the horizon (must split into delay intervals).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_total: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Hybrid,
    UpwindShishkin,
    UpwindUniform,
}

impl SchemeName {
    pub fn kind(self) -> SchemeKind {
        match self {
            SchemeName::Hybrid => SchemeKind::Hybrid,
            SchemeName::UpwindShishkin => SchemeKind::UpwindShishkin,
            SchemeName::UpwindUniform => SchemeKind::UpwindUniform,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeName::Hybrid => "hybrid",
            SchemeName::UpwindShishkin => "upwind-shishkin",
            SchemeName::UpwindUniform => "upwind-uniform",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<usize>,
    /// Raw epsilon values; exactly one of `eps` / `eps_exponents`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Exponents k meaning `eps = 2^-k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_exponents: Option<Vec<i32>>,
    /// Fixed total step count; absent ties M = N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_total: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn default_dir() -> String {
    String::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Md,
    Json,
}

/// Everything a command needs, with the normalized config to echo.
pub struct Resolved {
    pub config: RunConfig,
    pub family: SpecFamily,
    pub scheme: SchemeKind,
    pub mesh_opts: MeshOptions,
}

pub struct SolveSetup {
    pub spec: ProblemSpec,
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|err| ConfigError::at("(file)", format!("{}: {err}", path.display())))?;
    serde_json::from_str(&text).map_err(|err| ConfigError::at("(schema)", err))
}

fn mesh_error_path(err: &MeshError) -> &'static str {
    match err {
        MeshError::OddIntervals(_) | MeshError::TooFewIntervals(_) => "mesh.n",
        MeshError::BadSigma0(_) => "mesh.sigma0",
        MeshError::BadFactor { .. } => "mesh.factor",
        _ => "mesh",
    }
}

/// Shared validation: problem family, scheme, mesh options. Fills the
/// config's defaulted fields in place so the echo is explicit.
pub fn resolve(mut config: RunConfig) -> Result<Resolved, ConfigError> {
    let family = match &config.problem {
        ProblemConfig::Builtin { id, p, .. } => SpecFamily::Builtin {
            id: BuiltinId::from(*id),
            p: *p,
        },
        ProblemConfig::Custom {
            label,
            p,
            a0,
            b,
            c,
            e,
            f,
            s,
            q0,
            q1,
            tau,
            horizon,
            alpha,
            beta,
            gamma,
            epsilon,
        } => {
            let parse = |field: &'static str, src: &str| {
                Expr::parse(src).map_err(|err| ConfigError::at(&format!("problem.{field}"), err))
            };
            SpecFamily::Custom(CustomProblem {
                label: label.clone(),
                epsilon: epsilon.unwrap_or(1.0),
                p: *p,
                a0: parse("a0", a0)?,
                b: parse("b", b)?,
                c: parse("c", c)?,
                e: parse("e", e)?,
                f: parse("f", f)?,
                s: parse("s", s)?,
                q0: parse("q0", q0)?,
                q1: parse("q1", q1)?,
                tau: *tau,
                horizon: *horizon,
                alpha: *alpha,
                beta: *beta,
                gamma: *gamma,
            })
        }
    };

    // instantiate once to validate the data and learn gamma; epsilon
    // 1.0 is always in range, the real values are validated per run
    let probe = family
        .instantiate(1.0)
        .map_err(|err| ConfigError::at("problem", err))?;

    let sigma0 = config
        .mesh
        .sigma0
        .unwrap_or_else(|| default_sigma0(probe.gamma));
    if !(sigma0 > 0.0) {
        return Err(ConfigError::at("mesh.sigma0", "must be positive"));
    }
    let factor = config
        .mesh
        .factor
        .unwrap_or(FactorConfig::Named(FactorName::Ln));
    config.mesh.sigma0 = Some(sigma0);
    config.mesh.factor = Some(factor);

    let mesh_opts = MeshOptions {
        sigma0: Some(sigma0),
        factor: factor.choice(),
    };

    Ok(Resolved {
        family,
        scheme: config.scheme.kind(),
        mesh_opts,
        config,
    })
}

/// Validate the single-solve sections (mesh.n, time, problem.epsilon)
/// and build the solver inputs.
pub fn resolve_solve(resolved: &mut Resolved) -> Result<SolveSetup, ConfigError> {
    let epsilon = match &resolved.config.problem {
        ProblemConfig::Builtin { epsilon, .. } | ProblemConfig::Custom { epsilon, .. } => {
            epsilon.ok_or_else(|| ConfigError::at("problem.epsilon", "required by this command"))?
        }
    };
    let spec = resolved
        .family
        .instantiate(epsilon)
        .map_err(|err| ConfigError::at("problem.epsilon", err))?;

    let n = resolved
        .config
        .mesh
        .n
        .ok_or_else(|| ConfigError::at("mesh.n", "required by this command"))?;
    let mesh = build_mesh(resolved.scheme, n, &spec, &resolved.mesh_opts)?;

    let time = &resolved.config.time;
    let m_tau = match (time.m_tau, time.m_total) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::at(
                "time",
                "give exactly one of m_tau / m_total",
            ))
        }
        (Some(m), None) => m,
        (None, Some(total)) => {
            let k = spec.delay_ratio();
            if total == 0 || total % k != 0 {
                return Err(ConfigError::at(
                    "time.m_total",
                    format!("must be a positive multiple of the horizon/tau ratio {k}"),
                ));
            }
            total / k
        }
        (None, None) => return Err(ConfigError::at("time", "give one of m_tau / m_total")),
    };
    let grid =
        TimeGrid::new(spec.tau, spec.horizon, m_tau).map_err(|err| ConfigError::at("time", err))?;
    resolved.config.time.m_tau = Some(m_tau);
    resolved.config.time.m_total = None;

    Ok(SolveSetup { spec, mesh, grid })
}

fn build_mesh(
    scheme: SchemeKind,
    n: usize,
    spec: &ProblemSpec,
    opts: &MeshOptions,
) -> Result<SpatialMesh, ConfigError> {
    spdd_core::analysis::mesh_for(scheme, n, spec.epsilon, opts, spec.gamma)
        .map_err(|err| ConfigError::at(mesh_error_path(&err), err))
}

/// Validate the sweep section and build the sweep config, normalizing
/// the epsilon list in the echoed config.
pub fn resolve_sweep(resolved: &mut Resolved) -> Result<SweepConfig, ConfigError> {
    let section = resolved
        .config
        .sweep
        .clone()
        .ok_or_else(|| ConfigError::at("sweep", "section required by this command"))?;

    if section.n_list.is_empty() {
        return Err(ConfigError::at("sweep.n_list", "must not be empty"));
    }
    if section.n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(ConfigError::at(
            "sweep.n_list",
            "entries must double: orders compare N against 2N",
        ));
    }

    let eps_list: Vec<f64> = match (&section.eps, &section.eps_exponents) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::at(
                "sweep",
                "give exactly one of eps / eps_exponents",
            ))
        }
        (Some(list), None) => list.clone(),
        (None, Some(ks)) => ks.iter().map(|&k| 2f64.powi(-k)).collect(),
        (None, None) => return Err(ConfigError::at("sweep", "give one of eps / eps_exponents")),
    };
    if eps_list.is_empty() {
        return Err(ConfigError::at("sweep.eps", "must not be empty"));
    }

    let m_rule = match section.m_total {
        Some(0) => return Err(ConfigError::at("sweep.m_total", "must be positive")),
        Some(m) => MRule::Fixed(m),
        None => MRule::MatchN,
    };

    // per-epsilon instantiation validates the range; per-N construction
    // validates the factor band, which depends on N
    for (i, &eps) in eps_list.iter().enumerate() {
        let spec = resolved
            .family
            .instantiate(eps)
            .map_err(|err| ConfigError::at(&format!("sweep.eps[{i}]"), err))?;
        if let MRule::Fixed(m) = m_rule {
            let k = spec.delay_ratio();
            if m % k != 0 {
                return Err(ConfigError::at(
                    "sweep.m_total",
                    format!("must be a multiple of the horizon/tau ratio {k}"),
                ));
            }
        }
        for &n in &section.n_list {
            build_mesh(resolved.scheme, n, &spec, &resolved.mesh_opts)?;
        }
    }

    let mut echoed = section;
    echoed.eps = Some(eps_list.clone());
    echoed.eps_exponents = None;
    resolved.config.sweep = Some(echoed);

    Ok(SweepConfig {
        family: resolved.family.clone(),
        scheme: resolved.scheme,
        extrapolate: resolved.config.extrapolate,
        n_list: resolved.config.sweep.as_ref().unwrap().n_list.clone(),
        eps_list,
        m_rule,
        mesh: resolved.mesh_opts,
    })
}
