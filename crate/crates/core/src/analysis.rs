//! Double-mesh error estimation and convergence tables.
//!
//! With no closed-form solutions available, accuracy is measured by the
//! double-mesh principle: solve at (N, M), solve again on the bisected
//! mesh with halved time step, and take the max difference over the
//! coarse grid points. Orders are `q = log2(E_N / E_2N)`. A sweep runs
//! the procedure over an (epsilon, N) grid and the epsilon-uniform
//! footer takes column-wise maxima.
//!
//! Every cell is self-contained (its fine mesh is the bisection of its
//! own coarse mesh, which keeps the transition point fixed and the nodes
//! nested), so cells can run on any number of workers in any order.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::extrapolation::{richardson, ExtrapolationError};
use crate::mesh::{default_sigma0, FactorChoice, MeshError, SpatialMesh, TimeGrid};
use crate::problem::{BuiltinId, CustomProblem, ProblemError, ProblemSpec};
use crate::real;
use crate::scheme::{admissibility_check, SchemeKind};
use crate::solver::{solve, GridField, SolveStats, SolverError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error("{m} total time steps cannot be split into {k} delay intervals")]
    IndivisibleSteps { m: usize, k: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("observed order undefined for non-positive error {value}")]
    NonPositiveError { value: f64 },
    #[error("cell (epsilon={epsilon:e}, N={n}): {source}")]
    Cell {
        epsilon: f64,
        n: usize,
        source: Box<AnalysisError>,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Extrapolation(#[from] ExtrapolationError),
}

/// A problem family parameterized by the perturbation strength.
#[derive(Debug, Clone)]
pub enum SpecFamily {
    Builtin { id: BuiltinId, p: u32 },
    Custom(CustomProblem),
}

impl SpecFamily {
    pub fn instantiate(&self, epsilon: f64) -> Result<ProblemSpec, ProblemError> {
        match self {
            SpecFamily::Builtin { id, p } => ProblemSpec::builtin(*id, *p, epsilon),
            SpecFamily::Custom(custom) => {
                let mut custom = custom.clone();
                custom.epsilon = epsilon;
                ProblemSpec::custom(custom)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpecFamily::Builtin { id, .. } => String::from(id.name()),
            SpecFamily::Custom(custom) => custom.label.clone(),
        }
    }
}

/// How the total step count M couples to N in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRule {
    MatchN,
    Fixed(usize),
}

impl MRule {
    pub fn total_steps(self, n: usize) -> usize {
        match self {
            MRule::MatchN => n,
            MRule::Fixed(m) => m,
        }
    }
}

/// Mesh grading knobs; `sigma0 = None` uses the problem's default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub sigma0: Option<f64>,
    pub factor: FactorChoice,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            sigma0: None,
            factor: FactorChoice::LnN,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: SpecFamily,
    pub scheme: SchemeKind,
    pub extrapolate: bool,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub m_rule: MRule,
    pub mesh: MeshOptions,
}

/// One (epsilon, N) entry of a table plus the diagnostics gathered from
/// the solves feeding it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub epsilon: f64,
    pub n: usize,
    pub m: usize,
    pub error: f64,
    pub q: Option<f64>,
    pub solves: usize,
    pub admissible_solves: usize,
    pub sign_violations: usize,
    pub gated_sign_violations: usize,
    pub rows_checked: usize,
    pub stability_slack: f64,
    pub i_set_min: usize,
    pub i_set_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub scheme: SchemeKind,
    pub extrapolated: bool,
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    cells: Vec<CellResult>,
}

impl ConvergenceTable {
    /// Assemble from per-cell results in any order; fills the q cells.
    pub fn from_cells(
        scheme: SchemeKind,
        extrapolated: bool,
        eps_list: Vec<f64>,
        n_list: Vec<usize>,
        cells: Vec<CellResult>,
    ) -> Result<Self, AnalysisError> {
        let cols = n_list.len();
        let mut slots: Vec<Option<CellResult>> = Vec::new();
        slots.resize_with(eps_list.len() * cols, || None);
        for cell in cells {
            let ei = eps_list
                .iter()
                .position(|&e| e == cell.epsilon)
                .ok_or(AnalysisError::InvalidSweep("cell epsilon not in sweep"))?;
            let ni = n_list
                .iter()
                .position(|&n| n == cell.n)
                .ok_or(AnalysisError::InvalidSweep("cell N not in sweep"))?;
            let slot = &mut slots[ei * cols + ni];
            if slot.is_some() {
                return Err(AnalysisError::InvalidSweep("duplicate cell"));
            }
            *slot = Some(cell);
        }
        let mut cells = Vec::with_capacity(slots.len());
        for slot in slots {
            cells.push(slot.ok_or(AnalysisError::InvalidSweep("missing cell"))?);
        }
        for ei in 0..eps_list.len() {
            for ni in 0..cols {
                let q = if ni + 1 < cols {
                    Some(order(
                        cells[ei * cols + ni].error,
                        cells[ei * cols + ni + 1].error,
                    )?)
                } else {
                    None
                };
                cells[ei * cols + ni].q = q;
            }
        }
        Ok(ConvergenceTable {
            scheme,
            extrapolated,
            eps_list,
            n_list,
            cells,
        })
    }

    pub fn cell(&self, eps_idx: usize, n_idx: usize) -> &CellResult {
        &self.cells[eps_idx * self.n_list.len() + n_idx]
    }

    pub fn cells(&self) -> &[CellResult] {
        &self.cells
    }

    /// Epsilon-uniform error: column-wise max over the epsilon rows.
    pub fn footer_error(&self, n_idx: usize) -> f64 {
        (0..self.eps_list.len())
            .map(|ei| self.cell(ei, n_idx).error)
            .fold(0.0, f64::max)
    }

    /// Order of the epsilon-uniform errors; `None` for the last column.
    pub fn footer_order(&self, n_idx: usize) -> Option<f64> {
        if n_idx + 1 >= self.n_list.len() {
            return None;
        }
        order(self.footer_error(n_idx), self.footer_error(n_idx + 1)).ok()
    }
}

/// Observed convergence order `log2(E_coarse / E_fine)`.
pub fn order(e_coarse: f64, e_fine: f64) -> Result<f64, AnalysisError> {
    for value in [e_coarse, e_fine] {
        if !(value > 0.0) {
            return Err(AnalysisError::NonPositiveError { value });
        }
    }
    Ok(real::log2(e_coarse / e_fine))
}

fn check_time_ratio(coarse: &TimeGrid, fine: &TimeGrid) -> Result<(), AnalysisError> {
    if fine.steps != 2 * coarse.steps || fine.delay_steps != 2 * coarse.delay_steps {
        return Err(AnalysisError::GridMismatch(
            "time grids are not in a 1:2 ratio",
        ));
    }
    Ok(())
}

/// Max difference over the coarse grid (all levels with t >= 0, boundary
/// columns included), the fine field read at even nodes and levels.
pub fn double_mesh_error(
    coarse: &impl GridField,
    fine: &impl GridField,
) -> Result<f64, AnalysisError> {
    let cm = coarse.mesh();
    let fm = fine.mesh();
    if fm.n != 2 * cm.n {
        return Err(AnalysisError::GridMismatch(
            "fine mesh does not double the coarse mesh",
        ));
    }
    if (0..=cm.n).any(|i| !real::ulp_eq(fm.nodes[2 * i], cm.nodes[i])) {
        return Err(AnalysisError::GridMismatch("meshes are not nested"));
    }
    check_time_ratio(coarse.time_grid(), fine.time_grid())?;
    let mut worst = 0.0f64;
    for n in 0..=coarse.time_grid().steps as i64 {
        for i in 0..=cm.n {
            worst = worst.max((coarse.value(n, i) - fine.value(2 * n, 2 * i)).abs());
        }
    }
    Ok(worst)
}

/// Same-mesh variant comparing a solve against its halved-time-step
/// partner; isolates the temporal error component.
pub fn temporal_error(
    coarse: &impl GridField,
    fine: &impl GridField,
) -> Result<f64, AnalysisError> {
    let cm = coarse.mesh();
    let fm = fine.mesh();
    if fm.n != cm.n || (0..=cm.n).any(|i| !real::ulp_eq(fm.nodes[i], cm.nodes[i])) {
        return Err(AnalysisError::GridMismatch(
            "fields live on different meshes",
        ));
    }
    check_time_ratio(coarse.time_grid(), fine.time_grid())?;
    let mut worst = 0.0f64;
    for n in 0..=coarse.time_grid().steps as i64 {
        for i in 0..=cm.n {
            worst = worst.max((coarse.value(n, i) - fine.value(2 * n, i)).abs());
        }
    }
    Ok(worst)
}

/// Spatial mesh for one solve; the uniform-baseline scheme pins the
/// transition parameter to 1/2 regardless of epsilon.
pub fn mesh_for(
    scheme: SchemeKind,
    n: usize,
    epsilon: f64,
    opts: &MeshOptions,
    gamma: f64,
) -> Result<SpatialMesh, MeshError> {
    match scheme {
        SchemeKind::UpwindUniform => SpatialMesh::uniform(n),
        SchemeKind::Hybrid | SchemeKind::UpwindShishkin => {
            let sigma0 = opts.sigma0.unwrap_or_else(|| default_sigma0(gamma));
            SpatialMesh::shishkin(n, epsilon, sigma0, opts.factor)
        }
    }
}

/// Time grid for `m_total` steps across the whole horizon.
pub fn grid_for(spec: &ProblemSpec, m_total: usize) -> Result<TimeGrid, AnalysisError> {
    let k = spec.delay_ratio();
    if k == 0 || m_total % k != 0 || m_total / k == 0 {
        return Err(AnalysisError::IndivisibleSteps { m: m_total, k });
    }
    Ok(TimeGrid::new(spec.tau, spec.horizon, m_total / k)?)
}

struct CellAccum {
    solves: usize,
    admissible_solves: usize,
    sign_violations: usize,
    gated_sign_violations: usize,
    rows_checked: usize,
    stability_slack: f64,
}

impl CellAccum {
    fn new() -> Self {
        CellAccum {
            solves: 0,
            admissible_solves: 0,
            sign_violations: 0,
            gated_sign_violations: 0,
            rows_checked: 0,
            stability_slack: f64::NEG_INFINITY,
        }
    }

    fn note(&mut self, admissible: bool, stats: &SolveStats, spec: &ProblemSpec) {
        self.solves += 1;
        self.admissible_solves += admissible as usize;
        self.sign_violations += stats.sign_violations;
        if admissible {
            self.gated_sign_violations += stats.sign_violations;
        }
        self.rows_checked += stats.rows_checked;
        self.stability_slack = self
            .stability_slack
            .max(stats.stability_slack(spec.horizon, spec.beta));
    }
}

/// One table cell: E at (N, M) against the bisected (2N, 2M) solve,
/// each side Richardson-combined first when `extrapolate` is set.
pub fn compute_cell(
    cfg: &SweepConfig,
    epsilon: f64,
    n: usize,
) -> Result<CellResult, AnalysisError> {
    let spec = cfg.family.instantiate(epsilon)?;
    let sigma0 = cfg
        .mesh
        .sigma0
        .unwrap_or_else(|| default_sigma0(spec.gamma));
    let m_total = cfg.m_rule.total_steps(n);

    let coarse_mesh = mesh_for(cfg.scheme, n, epsilon, &cfg.mesh, spec.gamma)?;
    let fine_mesh = coarse_mesh.bisect();
    let grid_m = grid_for(&spec, m_total)?;
    let grid_2m = grid_m.halved();

    let mut acc = CellAccum::new();
    let mut i_set = (0usize, 0usize);
    let mut run = |mesh: &SpatialMesh,
                   grid: &TimeGrid,
                   acc: &mut CellAccum|
     -> Result<crate::solver::SolutionField, AnalysisError> {
        let (field, stats) = solve(&spec, mesh, grid, cfg.scheme)?;
        let report = admissibility_check(mesh, grid, &spec, sigma0)?;
        acc.note(report.satisfied(), &stats, &spec);
        if mesh.n == n && grid.steps == grid_m.steps {
            i_set = (stats.i_set_min, stats.i_set_max);
        }
        Ok(field)
    };

    let u_nm = run(&coarse_mesh, &grid_m, &mut acc)?;
    let u_2n2m = run(&fine_mesh, &grid_2m, &mut acc)?;
    let error = if cfg.extrapolate {
        let u_n2m = run(&coarse_mesh, &grid_2m, &mut acc)?;
        let u_2n4m = run(&fine_mesh, &grid_2m.halved(), &mut acc)?;
        let ext_coarse = richardson(&u_nm, &u_n2m)?;
        let ext_fine = richardson(&u_2n2m, &u_2n4m)?;
        double_mesh_error(&ext_coarse, &ext_fine)?
    } else {
        double_mesh_error(&u_nm, &u_2n2m)?
    };

    Ok(CellResult {
        epsilon,
        n,
        m: m_total,
        error,
        q: None,
        solves: acc.solves,
        admissible_solves: acc.admissible_solves,
        sign_violations: acc.sign_violations,
        gated_sign_violations: acc.gated_sign_violations,
        rows_checked: acc.rows_checked,
        stability_slack: acc.stability_slack,
        i_set_min: i_set.0,
        i_set_max: i_set.1,
    })
}

pub fn validate_sweep(cfg: &SweepConfig) -> Result<(), AnalysisError> {
    if cfg.n_list.is_empty() {
        return Err(AnalysisError::InvalidSweep("empty N list"));
    }
    if cfg.n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(AnalysisError::InvalidSweep("N list must strictly double"));
    }
    if cfg.eps_list.is_empty() {
        return Err(AnalysisError::InvalidSweep("empty epsilon list"));
    }
    if cfg.eps_list.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(AnalysisError::InvalidSweep(
            "epsilon entries must lie in (0, 1]",
        ));
    }
    Ok(())
}

/// Sequential sweep over the (epsilon, N) grid.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ConvergenceTable, AnalysisError> {
    validate_sweep(cfg)?;
    let mut cells = Vec::with_capacity(cfg.eps_list.len() * cfg.n_list.len());
    for &epsilon in &cfg.eps_list {
        for &n in &cfg.n_list {
            let cell = compute_cell(cfg, epsilon, n).map_err(|source| AnalysisError::Cell {
                epsilon,
                n,
                source: Box::new(source),
            })?;
            cells.push(cell);
        }
    }
    ConvergenceTable::from_cells(
        cfg.scheme,
        cfg.extrapolate,
        cfg.eps_list.clone(),
        cfg.n_list.clone(),
        cells,
    )
}

/// Temporal refinement study at fixed N: errors from same-mesh halved
/// time-step comparisons across a doubling M list.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalStudy {
    pub m_list: Vec<usize>,
    pub errors: Vec<f64>,
}

impl TemporalStudy {
    pub fn orders(&self) -> Result<Vec<f64>, AnalysisError> {
        self.errors.windows(2).map(|w| order(w[0], w[1])).collect()
    }
}

pub fn temporal_sweep(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    scheme: SchemeKind,
    extrapolate: bool,
    m_list: &[usize],
) -> Result<TemporalStudy, AnalysisError> {
    if m_list.is_empty() {
        return Err(AnalysisError::InvalidSweep("empty M list"));
    }
    if m_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(AnalysisError::InvalidSweep("M list must strictly double"));
    }
    let mut errors = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let grid = grid_for(spec, m)?;
        let grid_2 = grid.halved();
        let (u_m, _) = solve(spec, mesh, &grid, scheme)?;
        let (u_2m, _) = solve(spec, mesh, &grid_2, scheme)?;
        let error = if extrapolate {
            let (u_4m, _) = solve(spec, mesh, &grid_2.halved(), scheme)?;
            temporal_error(&richardson(&u_m, &u_2m)?, &richardson(&u_2m, &u_4m)?)?
        } else {
            temporal_error(&u_m, &u_2m)?
        };
        errors.push(error);
    }
    Ok(TemporalStudy {
        m_list: m_list.to_vec(),
        errors,
    })
}
