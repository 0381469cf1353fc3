//! Implicit-Euler time marching over the full delay horizon.
//!
//! One solve advances level by level: assemble interior rows (hybrid
//! dispatches central rows on the set `I` and midpoint rows elsewhere;
//! the upwind kinds use upwind rows everywhere), pin the boundary rows
//! to the Dirichlet data with identity rows, and run the Thomas solver.
//! The delayed value at level `n` is read from stored level `n - m_tau`;
//! for `n <= m_tau` that is a history row, which is the method of steps.
//!
//! Coefficient arrays are cached per level and re-evaluated only for
//! fields that actually depend on `t`, which makes solves with constant
//! coefficients cheap at large `N`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::Var;
use crate::linalg::{thomas_solve_into, ThomasWorkspace, TridiagonalSystem};
use crate::mesh::{SpatialMesh, TimeGrid};
use crate::problem::{Field, ProblemError, ProblemSpec};
use crate::scheme::{
    central_row, in_central_set, midpoint_row, upwind_row, LevelCoeffs, RowKind, SchemeKind,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("singular tridiagonal system at level {level}, row {row}")]
    Singular { level: i64, row: usize },
    #[error("non-finite value at level {level}, node {index}")]
    NonFinite { level: i64, index: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Read access shared by plain and extrapolated solution fields.
pub trait GridField {
    fn mesh(&self) -> &SpatialMesh;
    fn time_grid(&self) -> &TimeGrid;
    fn value(&self, n: i64, i: usize) -> f64;
}

/// Diagnostics accumulated while marching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    /// Levels advanced.
    pub levels: usize,
    /// Smallest / largest per-level size of the central set `I`.
    pub i_set_min: usize,
    pub i_set_max: usize,
    /// Interior rows assembled and how many failed the monotone
    /// sign pattern.
    pub rows_checked: usize,
    pub sign_violations: usize,
    /// Extrema feeding the discrete stability bound.
    pub max_interior_abs: f64,
    pub max_boundary_abs: f64,
    pub max_rhs_abs: f64,
}

impl SolveStats {
    fn empty() -> Self {
        SolveStats {
            levels: 0,
            i_set_min: usize::MAX,
            i_set_max: 0,
            rows_checked: 0,
            sign_violations: 0,
            max_interior_abs: 0.0,
            max_boundary_abs: 0.0,
            max_rhs_abs: 0.0,
        }
    }

    /// `max_int |U| - (max_bd |U| + (T/beta) max |f~|)`; positive values
    /// flag a violation of the discrete stability bound.
    pub fn stability_slack(&self, horizon: f64, beta: f64) -> f64 {
        self.max_interior_abs - (self.max_boundary_abs + horizon / beta * self.max_rhs_abs)
    }

    pub fn merge(&mut self, other: &SolveStats) {
        self.levels += other.levels;
        self.i_set_min = self.i_set_min.min(other.i_set_min);
        self.i_set_max = self.i_set_max.max(other.i_set_max);
        self.rows_checked += other.rows_checked;
        self.sign_violations += other.sign_violations;
        self.max_interior_abs = self.max_interior_abs.max(other.max_interior_abs);
        self.max_boundary_abs = self.max_boundary_abs.max(other.max_boundary_abs);
        self.max_rhs_abs = self.max_rhs_abs.max(other.max_rhs_abs);
    }
}

/// Solution on the space-time grid, history rows included: row `n` holds
/// the level at `t_n = n dt` for `n` in `-m_tau ..= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
    pub scheme: SchemeKind,
    values: Vec<f64>,
}

impl SolutionField {
    /// Allocate the field and fill rows `n <= 0` with the history data.
    pub fn seeded(
        spec: &ProblemSpec,
        mesh: &SpatialMesh,
        grid: &TimeGrid,
        scheme: SchemeKind,
    ) -> Result<Self, SolverError> {
        if !rel_eq(grid.tau, spec.tau) {
            return Err(SolverError::GridMismatch(
                "time grid delay differs from problem tau",
            ));
        }
        if !rel_eq(grid.horizon, spec.horizon) {
            return Err(SolverError::GridMismatch(
                "time grid horizon differs from problem T",
            ));
        }
        let width = mesh.n + 1;
        let mut field = SolutionField {
            mesh: mesh.clone(),
            grid: grid.clone(),
            scheme,
            values: vec![0.0; grid.rows() * width],
        };
        let mut row = Vec::with_capacity(width);
        for n in field.first_level()..=0 {
            history_row(spec, mesh, grid, n, &mut row)?;
            field.level_mut(n).copy_from_slice(&row);
        }
        Ok(field)
    }

    pub fn first_level(&self) -> i64 {
        -(self.grid.delay_steps as i64)
    }

    pub fn last_level(&self) -> i64 {
        self.grid.steps as i64
    }

    fn offset(&self, n: i64) -> usize {
        let r = n + self.grid.delay_steps as i64;
        debug_assert!(
            r >= 0 && (r as usize) < self.grid.rows(),
            "level {n} out of range"
        );
        r as usize * (self.mesh.n + 1)
    }

    pub fn level(&self, n: i64) -> &[f64] {
        let at = self.offset(n);
        &self.values[at..at + self.mesh.n + 1]
    }

    fn level_mut(&mut self, n: i64) -> &mut [f64] {
        let at = self.offset(n);
        let width = self.mesh.n + 1;
        &mut self.values[at..at + width]
    }

    pub fn value(&self, n: i64, i: usize) -> f64 {
        self.values[self.offset(n) + i]
    }

    pub fn set_value(&mut self, n: i64, i: usize, v: f64) {
        let at = self.offset(n) + i;
        self.values[at] = v;
    }

    /// Raw storage, row-major from level `-m_tau` upward.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }
}

impl GridField for SolutionField {
    fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn value(&self, n: i64, i: usize) -> f64 {
        SolutionField::value(self, n, i)
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn history_row(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    n: i64,
    row: &mut Vec<f64>,
) -> Result<(), SolverError> {
    let t = grid.time(n).clamp(-spec.tau, 0.0);
    row.clear();
    for &x in &mesh.nodes {
        row.push(spec.history(x, t)?);
    }
    Ok(())
}

/// Nodal coefficient arrays for one level; fields independent of `t` are
/// evaluated once and kept.
struct CoeffCache {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    e: Vec<f64>,
    f: Vec<f64>,
    time_dep: [bool; 5],
    primed: bool,
}

impl CoeffCache {
    fn new(spec: &ProblemSpec, mesh: &SpatialMesh) -> Self {
        let width = mesh.n + 1;
        CoeffCache {
            a: vec![0.0; width],
            b: vec![0.0; width],
            c: vec![0.0; width],
            e: vec![0.0; width],
            f: vec![0.0; width],
            time_dep: [
                spec.a0.depends_on(Var::T),
                spec.b.depends_on(Var::T),
                spec.c.depends_on(Var::T),
                spec.e.depends_on(Var::T),
                spec.f.depends_on(Var::T),
            ],
            primed: false,
        }
    }

    fn refresh(
        &mut self,
        spec: &ProblemSpec,
        mesh: &SpatialMesh,
        t: f64,
    ) -> Result<(), ProblemError> {
        let fields = [Field::A, Field::B, Field::C, Field::E, Field::F];
        for (k, field) in fields.into_iter().enumerate() {
            if self.primed && !self.time_dep[k] {
                continue;
            }
            let dst = match field {
                Field::A => &mut self.a,
                Field::B => &mut self.b,
                Field::C => &mut self.c,
                Field::E => &mut self.e,
                Field::F => &mut self.f,
            };
            for (v, &x) in dst.iter_mut().zip(&mesh.nodes) {
                *v = spec.sample(field, x, t)?;
            }
        }
        self.primed = true;
        Ok(())
    }

    fn coeffs(&self) -> LevelCoeffs<'_> {
        LevelCoeffs {
            a: &self.a,
            b: &self.b,
            c: &self.c,
            e: &self.e,
            f: &self.f,
        }
    }
}

/// One-level state machine shared by the in-memory and streaming drivers.
struct Stepper<'s> {
    spec: &'s ProblemSpec,
    mesh: SpatialMesh,
    dt: f64,
    scheme: SchemeKind,
    cache: CoeffCache,
    sys: TridiagonalSystem,
    work: ThomasWorkspace,
    mask: Vec<bool>,
}

impl<'s> Stepper<'s> {
    fn new(spec: &'s ProblemSpec, mesh: SpatialMesh, grid: &TimeGrid, scheme: SchemeKind) -> Self {
        let cache = CoeffCache::new(spec, &mesh);
        let width = mesh.n + 1;
        Stepper {
            spec,
            mesh,
            dt: grid.dt,
            scheme,
            cache,
            sys: TridiagonalSystem::zeroed(width),
            work: ThomasWorkspace::new(),
            mask: vec![false; width],
        }
    }

    fn step(
        &mut self,
        n: i64,
        u_prev: &[f64],
        u_delay: &[f64],
        out: &mut Vec<f64>,
        stats: &mut SolveStats,
    ) -> Result<(), SolverError> {
        let t = (n as f64 * self.dt).clamp(0.0, self.spec.horizon);
        self.cache.refresh(self.spec, &self.mesh, t)?;
        let n_x = self.mesh.n;
        let eps = self.spec.epsilon;

        let mut i_size = 0usize;
        for i in 1..n_x {
            self.mask[i] = in_central_set(self.cache.a[i], self.mesh.step(i), eps);
            i_size += self.mask[i] as usize;
        }

        self.sys.diag[0] = 1.0;
        self.sys.sup[0] = 0.0;
        self.sys.rhs[0] = self.spec.boundary_left(t)?;
        self.sys.sub[n_x] = 0.0;
        self.sys.diag[n_x] = 1.0;
        self.sys.rhs[n_x] = self.spec.boundary_right(t)?;

        let lc = self.cache.coeffs();
        for i in 1..n_x {
            let row = match self.scheme {
                SchemeKind::Hybrid => {
                    if self.mask[i] {
                        central_row(i, eps, &self.mesh, self.dt, &lc, u_prev, u_delay)
                    } else {
                        midpoint_row(i, eps, &self.mesh, self.dt, &lc, u_prev, u_delay)
                    }
                }
                SchemeKind::UpwindShishkin | SchemeKind::UpwindUniform => {
                    upwind_row(i, eps, &self.mesh, self.dt, &lc, u_prev, u_delay)
                }
            };
            self.sys.sub[i] = row.r_minus;
            self.sys.diag[i] = row.r_zero;
            self.sys.sup[i] = row.r_plus;
            self.sys.rhs[i] = row.rhs;
            stats.rows_checked += 1;
            stats.sign_violations += !row.has_sign_pattern() as usize;
            let f_op = match row.kind {
                RowKind::Central | RowKind::Upwind => lc.f[i] + lc.e[i] * u_delay[i],
                RowKind::MidpointUpwind => {
                    0.5 * (lc.f[i] + lc.f[i + 1])
                        + 0.25 * (lc.e[i] + lc.e[i + 1]) * (u_delay[i] + u_delay[i + 1])
                }
            };
            stats.max_rhs_abs = stats.max_rhs_abs.max(f_op.abs());
        }

        thomas_solve_into(&self.sys, &mut self.work, out).map_err(|s| SolverError::Singular {
            level: n,
            row: s.row,
        })?;
        for (i, v) in out.iter().enumerate() {
            if !v.is_finite() {
                return Err(SolverError::NonFinite { level: n, index: i });
            }
        }

        stats.levels += 1;
        stats.i_set_min = stats.i_set_min.min(i_size);
        stats.i_set_max = stats.i_set_max.max(i_size);
        stats.max_boundary_abs = stats.max_boundary_abs.max(out[0].abs()).max(out[n_x].abs());
        for &v in &out[1..n_x] {
            stats.max_interior_abs = stats.max_interior_abs.max(v.abs());
        }
        Ok(())
    }
}

/// Advance an already-seeded (or partially solved) field from level
/// `from` through level `to` inclusive. Levels below `from` must be
/// filled; this is the restart entry point for the method of steps.
pub fn advance(
    field: &mut SolutionField,
    spec: &ProblemSpec,
    from: i64,
    to: i64,
) -> Result<SolveStats, SolverError> {
    if from < 1 || to > field.last_level() {
        return Err(SolverError::GridMismatch("advance range outside 1..=M"));
    }
    let mut stats = SolveStats::empty();
    for n in field.first_level()..=0 {
        for &v in field.level(n) {
            stats.max_boundary_abs = stats.max_boundary_abs.max(v.abs());
        }
    }
    if from > to {
        return Ok(stats);
    }
    let m_tau = field.grid.delay_steps as i64;
    let mut stepper = Stepper::new(spec, field.mesh.clone(), &field.grid, field.scheme);
    let mut u_prev = field.level(from - 1).to_vec();
    let mut u_delay: Vec<f64> = Vec::with_capacity(u_prev.len());
    let mut out: Vec<f64> = Vec::with_capacity(u_prev.len());
    for n in from..=to {
        u_delay.clear();
        u_delay.extend_from_slice(field.level(n - m_tau));
        stepper.step(n, &u_prev, &u_delay, &mut out, &mut stats)?;
        field.level_mut(n).copy_from_slice(&out);
        core::mem::swap(&mut u_prev, &mut out);
    }
    Ok(stats)
}

/// Full solve: seed the history rows and march `n = 1 ..= M`.
pub fn solve(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    scheme: SchemeKind,
) -> Result<(SolutionField, SolveStats), SolverError> {
    let mut field = SolutionField::seeded(spec, mesh, grid, scheme)?;
    let last = field.last_level();
    let stats = advance(&mut field, spec, 1, last)?;
    Ok((field, stats))
}

/// Memory-light solve: every level (history first, then `1 ..= M`) is
/// handed to `sink` and only the last `m_tau` levels are retained.
/// Produces bitwise the same levels as [`solve`].
pub fn solve_streaming(
    spec: &ProblemSpec,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    scheme: SchemeKind,
    mut sink: impl FnMut(i64, &[f64]),
) -> Result<SolveStats, SolverError> {
    if !rel_eq(grid.tau, spec.tau) {
        return Err(SolverError::GridMismatch(
            "time grid delay differs from problem tau",
        ));
    }
    if !rel_eq(grid.horizon, spec.horizon) {
        return Err(SolverError::GridMismatch(
            "time grid horizon differs from problem T",
        ));
    }
    let m_tau = grid.delay_steps as i64;
    let mut stats = SolveStats::empty();
    // window holds levels n-m_tau ..= n-1 while computing level n
    let mut window: VecDeque<Vec<f64>> = VecDeque::with_capacity(grid.delay_steps + 1);
    let mut row = Vec::with_capacity(mesh.n + 1);
    for n in -m_tau..=0 {
        history_row(spec, mesh, grid, n, &mut row)?;
        for &v in &row {
            stats.max_boundary_abs = stats.max_boundary_abs.max(v.abs());
        }
        sink(n, &row);
        if n > -m_tau {
            window.push_back(row.clone());
        }
    }
    // window front..back = levels 1-m_tau ..= 0, exactly m_tau rows
    let mut stepper = Stepper::new(spec, mesh.clone(), grid, scheme);
    let mut out: Vec<f64> = Vec::with_capacity(mesh.n + 1);
    for n in 1..=grid.steps as i64 {
        let u_delay = window.front().expect("window holds m_tau levels");
        let u_prev = window.back().expect("window holds m_tau levels");
        stepper.step(n, u_prev, u_delay, &mut out, &mut stats)?;
        sink(n, &out);
        window.push_back(out);
        out = window.pop_front().expect("window grew past m_tau");
    }
    Ok(stats)
}

/// Discrete stability check: `max_int |U| - (max_bd |U| + (T/beta) max |f~|)`
/// with `f~` reassembled from the problem data and the field's own delayed
/// levels. Non-positive for any field produced by [`solve`] on admissible
/// data; positive flags a violation of the stability bound.
pub fn stability_diagnostic(field: &SolutionField, spec: &ProblemSpec) -> Result<f64, SolverError> {
    let mesh = &field.mesh;
    let n_x = mesh.n;
    let m_tau = field.grid.delay_steps as i64;
    let mut cache = CoeffCache::new(spec, mesh);
    let mut max_interior = 0.0f64;
    let mut max_boundary = 0.0f64;
    let mut max_rhs = 0.0f64;
    for n in field.first_level()..=0 {
        for &v in field.level(n) {
            max_boundary = max_boundary.max(v.abs());
        }
    }
    for n in 1..=field.last_level() {
        let t = field.grid.time(n).clamp(0.0, spec.horizon);
        cache.refresh(spec, mesh, t)?;
        let level = field.level(n);
        let u_delay = field.level(n - m_tau);
        max_boundary = max_boundary.max(level[0].abs()).max(level[n_x].abs());
        for i in 1..n_x {
            max_interior = max_interior.max(level[i].abs());
            let central = match field.scheme {
                SchemeKind::Hybrid => in_central_set(cache.a[i], mesh.step(i), spec.epsilon),
                SchemeKind::UpwindShishkin | SchemeKind::UpwindUniform => true,
            };
            let f_op = if central {
                cache.f[i] + cache.e[i] * u_delay[i]
            } else {
                0.5 * (cache.f[i] + cache.f[i + 1])
                    + 0.25 * (cache.e[i] + cache.e[i + 1]) * (u_delay[i] + u_delay[i + 1])
            };
            max_rhs = max_rhs.max(f_op.abs());
        }
    }
    Ok(max_interior - (max_boundary + spec.horizon / spec.beta * max_rhs))
}
