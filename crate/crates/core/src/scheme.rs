//! Tridiagonal row assembly for one implicit-Euler time level.
//!
//! Three interior row flavors:
//!
//! * central: `eps d2 + a D0 - b Dt- - c`, second order, used on the set
//!   `I = { i : a_i h_i < 2 eps }` where it stays monotone;
//! * midpoint upwind: `eps d2 + a_{i+1/2} D+ - b_{i+1/2} Dt- - c_{i+1/2}`
//!   acting on averaged values, used off `I`;
//! * simple upwind: `eps d2 + a_i D+ - b_i Dt- - c_i`, the first-order
//!   baseline.
//!
//! All rows are multiplied through by `dt` and keep the operator's sign
//! (negative diagonal); the moved time-derivative term contributes
//! `-b U_prev` to the right-hand side and the delay term `+dt e U_delay`.
//! With `h = x_i - x_{i-1}`, `h+ = x_{i+1} - x_i`, `hh = h + h+`:
//!
//! ```text
//! central : r- = 2 eps dt/(hh h) - dt a/hh        r+ = 2 eps dt/(hh h+) + dt a/hh
//!           r0 = -2 eps dt/hh (1/h + 1/h+) - b - dt c
//! midpoint: r- = 2 eps dt/(hh h)                  r+ = 2 eps dt/(hh h+) + dt a*/h+ - b*/2 - dt c*/2
//!           r0 = -2 eps dt/hh (1/h + 1/h+) - dt a*/h+ - b*/2 - dt c*/2
//! upwind  : r- = 2 eps dt/(hh h)                  r+ = 2 eps dt/(hh h+) + dt a/h+
//!           r0 = -2 eps dt/hh (1/h + 1/h+) - dt a/h+ - b - dt c
//! ```
//!
//! (`*` marks arithmetic means of the two nodal values.)

use alloc::vec::Vec;

use crate::mesh::{SpatialMesh, TimeGrid};
use crate::problem::{Field, ProblemError, ProblemSpec};
use crate::real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Hybrid,
    UpwindShishkin,
    UpwindUniform,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Hybrid => "hybrid",
            SchemeKind::UpwindShishkin => "upwind_shishkin",
            SchemeKind::UpwindUniform => "upwind_uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Central,
    MidpointUpwind,
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilRow {
    pub r_minus: f64,
    pub r_zero: f64,
    pub r_plus: f64,
    pub rhs: f64,
    pub kind: RowKind,
}

impl StencilRow {
    /// Monotone (M-matrix) sign pattern: positive off-diagonals strictly
    /// dominated by a negative diagonal.
    pub fn has_sign_pattern(&self) -> bool {
        self.r_minus > 0.0
            && self.r_plus > 0.0
            && self.r_zero < 0.0
            && self.r_minus.abs() + self.r_plus.abs() < self.r_zero.abs()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("row {i} is {actual} of the central set at this level")]
    WrongRegion { i: usize, actual: &'static str },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Nodal coefficient values at one time level (index = mesh node).
#[derive(Debug, Clone, Copy)]
pub struct LevelCoeffs<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub c: &'a [f64],
    pub e: &'a [f64],
    pub f: &'a [f64],
}

pub fn central_row(
    i: usize,
    epsilon: f64,
    mesh: &SpatialMesh,
    dt: f64,
    lc: &LevelCoeffs,
    u_prev: &[f64],
    u_delay: &[f64],
) -> StencilRow {
    let h = mesh.step(i);
    let h_plus = mesh.step(i + 1);
    let hh = h + h_plus;
    let diff = 2.0 * epsilon * dt / hh;
    let adv = dt * lc.a[i] / hh;
    StencilRow {
        r_minus: diff / h - adv,
        r_zero: -diff * (1.0 / h + 1.0 / h_plus) - lc.b[i] - dt * lc.c[i],
        r_plus: diff / h_plus + adv,
        rhs: dt * lc.f[i] - lc.b[i] * u_prev[i] + dt * lc.e[i] * u_delay[i],
        kind: RowKind::Central,
    }
}

pub fn midpoint_row(
    i: usize,
    epsilon: f64,
    mesh: &SpatialMesh,
    dt: f64,
    lc: &LevelCoeffs,
    u_prev: &[f64],
    u_delay: &[f64],
) -> StencilRow {
    let h = mesh.step(i);
    let h_plus = mesh.step(i + 1);
    let hh = h + h_plus;
    let diff = 2.0 * epsilon * dt / hh;
    let a_half = 0.5 * (lc.a[i] + lc.a[i + 1]);
    let b_half = 0.5 * (lc.b[i] + lc.b[i + 1]);
    let c_half = 0.5 * (lc.c[i] + lc.c[i + 1]);
    let e_half = 0.5 * (lc.e[i] + lc.e[i + 1]);
    let lower = 0.5 * b_half + 0.5 * dt * c_half;
    StencilRow {
        r_minus: diff / h,
        r_zero: -diff * (1.0 / h + 1.0 / h_plus) - dt * a_half / h_plus - lower,
        r_plus: diff / h_plus + dt * a_half / h_plus - lower,
        rhs: 0.5 * dt * (lc.f[i] + lc.f[i + 1]) - 0.5 * b_half * (u_prev[i] + u_prev[i + 1])
            + 0.5 * dt * e_half * (u_delay[i] + u_delay[i + 1]),
        kind: RowKind::MidpointUpwind,
    }
}

pub fn upwind_row(
    i: usize,
    epsilon: f64,
    mesh: &SpatialMesh,
    dt: f64,
    lc: &LevelCoeffs,
    u_prev: &[f64],
    u_delay: &[f64],
) -> StencilRow {
    let h = mesh.step(i);
    let h_plus = mesh.step(i + 1);
    let hh = h + h_plus;
    let diff = 2.0 * epsilon * dt / hh;
    let adv = dt * lc.a[i] / h_plus;
    StencilRow {
        r_minus: diff / h,
        r_zero: -diff * (1.0 / h + 1.0 / h_plus) - adv - lc.b[i] - dt * lc.c[i],
        r_plus: diff / h_plus + adv,
        rhs: dt * lc.f[i] - lc.b[i] * u_prev[i] + dt * lc.e[i] * u_delay[i],
        kind: RowKind::Upwind,
    }
}

/// Membership test for the central set at one node.
pub fn in_central_set(a_i: f64, h_i: f64, epsilon: f64) -> bool {
    a_i * h_i < 2.0 * epsilon
}

/// Central-set mask over all nodes at time `t_n` (entries 0 and N are
/// boundary rows and read `false`).
pub fn classify(
    mesh: &SpatialMesh,
    spec: &ProblemSpec,
    t_n: f64,
) -> Result<Vec<f64>, ProblemError> {
    // Returns a(x_i, t_n) values; see `classify_mask` for the set itself.
    let mut a = Vec::with_capacity(mesh.n + 1);
    for &x in &mesh.nodes {
        let a0 = spec
            .a0
            .eval(&crate::expr::Bindings::all(x, t_n, spec.p as f64, spec.tau))
            .map_err(|source| ProblemError::FieldEval {
                field: "a0",
                x,
                t: t_n,
                source,
            })?;
        a.push(a0 * real::powi(x, spec.p as i32));
    }
    Ok(a)
}

/// Central-set mask from nodal convection values.
pub fn classify_mask(a: &[f64], mesh: &SpatialMesh, epsilon: f64) -> Vec<bool> {
    let n = mesh.n;
    let mut mask = alloc::vec![false; n + 1];
    for i in 1..n {
        mask[i] = in_central_set(a[i], mesh.step(i), epsilon);
    }
    mask
}

fn nodal_coeffs(
    mesh: &SpatialMesh,
    spec: &ProblemSpec,
    t_n: f64,
) -> Result<[Vec<f64>; 5], ProblemError> {
    let n = mesh.n;
    let mut a = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n + 1);
    let mut c = Vec::with_capacity(n + 1);
    let mut e = Vec::with_capacity(n + 1);
    let mut f = Vec::with_capacity(n + 1);
    for &x in &mesh.nodes {
        a.push(spec.sample(Field::A, x, t_n)?);
        b.push(spec.sample(Field::B, x, t_n)?);
        c.push(spec.sample(Field::C, x, t_n)?);
        e.push(spec.sample(Field::E, x, t_n)?);
        f.push(spec.sample(Field::F, x, t_n)?);
    }
    Ok([a, b, c, e, f])
}

/// Spec-facing assembly of one central row; rejects nodes outside the
/// central set.
pub fn assemble_row_central(
    i: usize,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &ProblemSpec,
    t_n: f64,
    u_prev: &[f64],
    u_delay: &[f64],
) -> Result<StencilRow, SchemeError> {
    let [a, b, c, e, f] = nodal_coeffs(mesh, spec, t_n)?;
    if !in_central_set(a[i], mesh.step(i), spec.epsilon) {
        return Err(SchemeError::WrongRegion {
            i,
            actual: "outside",
        });
    }
    let lc = LevelCoeffs {
        a: &a,
        b: &b,
        c: &c,
        e: &e,
        f: &f,
    };
    Ok(central_row(
        i,
        spec.epsilon,
        mesh,
        grid.dt,
        &lc,
        u_prev,
        u_delay,
    ))
}

/// Spec-facing assembly of one midpoint-upwind row; rejects nodes inside
/// the central set.
pub fn assemble_row_midpoint(
    i: usize,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &ProblemSpec,
    t_n: f64,
    u_prev: &[f64],
    u_delay: &[f64],
) -> Result<StencilRow, SchemeError> {
    let [a, b, c, e, f] = nodal_coeffs(mesh, spec, t_n)?;
    if in_central_set(a[i], mesh.step(i), spec.epsilon) {
        return Err(SchemeError::WrongRegion {
            i,
            actual: "inside",
        });
    }
    let lc = LevelCoeffs {
        a: &a,
        b: &b,
        c: &c,
        e: &e,
        f: &f,
    };
    Ok(midpoint_row(
        i,
        spec.epsilon,
        mesh,
        grid.dt,
        &lc,
        u_prev,
        u_delay,
    ))
}

/// Spec-facing assembly of one simple-upwind row (any interior node).
pub fn assemble_row_upwind(
    i: usize,
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &ProblemSpec,
    t_n: f64,
    u_prev: &[f64],
    u_delay: &[f64],
) -> Result<StencilRow, SchemeError> {
    let [a, b, c, e, f] = nodal_coeffs(mesh, spec, t_n)?;
    let lc = LevelCoeffs {
        a: &a,
        b: &b,
        c: &c,
        e: &e,
        f: &f,
    };
    Ok(upwind_row(
        i,
        spec.epsilon,
        mesh,
        grid.dt,
        &lc,
        u_prev,
        u_delay,
    ))
}

/// Sufficient condition for the monotonicity lemma:
/// `N kappa >= ||b||/dt + ||c||` and `2 sigma0 ||a0|| < N/(ln N)^2`.
/// `kappa` is the minimum of the convection coefficient over the mesh
/// nodes with index `i >= N/2` (the coarse region), t sampled on the
/// probe grid. Diagnostic only: violations are reported, never fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub n: usize,
    pub dt: f64,
    pub kappa: f64,
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
}

impl AdmissibilityReport {
    pub fn first_ok(&self) -> bool {
        self.first_lhs >= self.first_rhs
    }

    pub fn second_ok(&self) -> bool {
        self.second_lhs < self.second_rhs
    }

    pub fn satisfied(&self) -> bool {
        self.first_ok() && self.second_ok()
    }
}

pub fn admissibility_check(
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    spec: &ProblemSpec,
    sigma0: f64,
) -> Result<AdmissibilityReport, ProblemError> {
    let n = mesh.n;
    let kappa = spec.convection_floor(&mesh.nodes[n / 2..])?;
    let b_sup = spec.sup_abs(Field::B)?;
    let c_sup = spec.sup_abs(Field::C)?;
    let (a0_min, a0_max) = spec.a0_extrema()?;
    let a0_sup = a0_min.abs().max(a0_max.abs());
    let ln_n = real::ln(n as f64);
    Ok(AdmissibilityReport {
        n,
        dt: grid.dt,
        kappa,
        first_lhs: n as f64 * kappa,
        first_rhs: b_sup / grid.dt + c_sup,
        second_lhs: 2.0 * sigma0 * a0_sup,
        second_rhs: n as f64 / (ln_n * ln_n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::FactorChoice;
    use crate::problem::BuiltinId;
    use alloc::vec;

    fn constant_coeffs(n: usize, a: f64, b: f64, c: f64, e: f64, f: f64) -> [Vec<f64>; 5] {
        [
            vec![a; n + 1],
            vec![b; n + 1],
            vec![c; n + 1],
            vec![e; n + 1],
            vec![f; n + 1],
        ]
    }

    fn lc<'x>(arrays: &'x [Vec<f64>; 5]) -> LevelCoeffs<'x> {
        LevelCoeffs {
            a: &arrays[0],
            b: &arrays[1],
            c: &arrays[2],
            e: &arrays[3],
            f: &arrays[4],
        }
    }

    #[test]
    fn central_row_on_uniform_mesh_matches_textbook_form() {
        let mesh = SpatialMesh::uniform(8).unwrap();
        let h = 0.125;
        let (eps, dt, a) = (0.3, 0.25, 0.7);
        let arrays = constant_coeffs(8, a, 1.0, 2.0, 0.0, 0.0);
        let u = vec![0.0; 9];
        let row = central_row(4, eps, &mesh, dt, &lc(&arrays), &u, &u);
        assert!((row.r_minus - (eps * dt / (h * h) - dt * a / (2.0 * h))).abs() < 1e-15);
        assert!((row.r_plus - (eps * dt / (h * h) + dt * a / (2.0 * h))).abs() < 1e-15);
        assert!((row.r_zero - (-2.0 * eps * dt / (h * h) - 1.0 - dt * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn central_constant_state_reproduces_itself() {
        let mesh = SpatialMesh::uniform(8).unwrap();
        let arrays = constant_coeffs(8, 0.0, 1.0, 0.0, 0.0, 0.0);
        let ones = vec![1.0; 9];
        let zeros = vec![0.0; 9];
        let row = central_row(3, 0.5, &mesh, 0.25, &lc(&arrays), &ones, &zeros);
        assert!((row.r_minus + row.r_zero + row.r_plus + 1.0).abs() < 1e-15);
        assert!((row.rhs + 1.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_constant_state_reproduces_itself() {
        let mesh = SpatialMesh::shishkin(8, 0.01, 2.0, FactorChoice::LnN).unwrap();
        let arrays = constant_coeffs(8, 0.4, 1.0, 0.0, 0.0, 0.0);
        let ones = vec![1.0; 9];
        let zeros = vec![0.0; 9];
        for i in [3, 4, 6] {
            let row = midpoint_row(i, 0.01, &mesh, 0.125, &lc(&arrays), &ones, &zeros);
            assert!(
                (row.r_minus + row.r_zero + row.r_plus + 1.0).abs() < 1e-15,
                "i={i}"
            );
            assert!((row.rhs + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn upwind_constant_state_and_degenerate_reduction() {
        let mesh = SpatialMesh::uniform(8).unwrap();
        let arrays = constant_coeffs(8, 0.0, 1.0, 0.0, 0.0, 0.0);
        let ones = vec![1.0; 9];
        let zeros = vec![0.0; 9];
        let up = upwind_row(4, 0.5, &mesh, 0.25, &lc(&arrays), &ones, &zeros);
        let cen = central_row(4, 0.5, &mesh, 0.25, &lc(&arrays), &ones, &zeros);
        assert_eq!(up.r_minus, cen.r_minus);
        assert_eq!(up.r_zero, cen.r_zero);
        assert_eq!(up.r_plus, cen.r_plus);
        assert!((up.r_minus + up.r_zero + up.r_plus + 1.0).abs() < 1e-15);
        assert!((up.rhs + 1.0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_diffusion_midpoint_is_one_sided() {
        let mesh = SpatialMesh::uniform(8).unwrap();
        let h = 0.125;
        let (dt, a) = (0.2, 0.9);
        let arrays = constant_coeffs(8, a, 1.0, 0.8, 0.0, 0.0);
        let u = vec![0.0; 9];
        let row = midpoint_row(5, 0.0, &mesh, dt, &lc(&arrays), &u, &u);
        assert_eq!(row.r_minus, 0.0);
        let lower = 0.5 + 0.5 * dt * 0.8;
        assert!((row.r_plus - (dt * a / h - lower)).abs() < 1e-15);
        assert!((row.r_zero - (-dt * a / h - lower)).abs() < 1e-15);
    }

    #[test]
    fn central_and_midpoint_transport_agree_on_linear_data() {
        // pure transport-diffusion (b=c=e=f=0), constant a, uniform mesh:
        // both rows applied to a linear profile return dt*a*slope
        let mesh = SpatialMesh::uniform(16).unwrap();
        let arrays = constant_coeffs(16, 1.3, 0.0, 0.0, 0.0, 0.0);
        let dt = 0.1;
        let slope = -0.7;
        let u: Vec<f64> = mesh.nodes.iter().map(|&x| 2.0 + slope * x).collect();
        let zeros = vec![0.0; 17];
        for i in 2..15 {
            let c = central_row(i, 0.05, &mesh, dt, &lc(&arrays), &zeros, &zeros);
            let m = midpoint_row(i, 0.05, &mesh, dt, &lc(&arrays), &zeros, &zeros);
            let apply =
                |r: &StencilRow| r.r_minus * u[i - 1] + r.r_zero * u[i] + r.r_plus * u[i + 1];
            assert!((apply(&c) - apply(&m)).abs() < 1e-13);
            assert!((apply(&c) - dt * 1.3 * slope).abs() < 1e-13);
        }
    }

    #[test]
    fn classification_covers_everything_for_large_epsilon() {
        let spec = ProblemSpec::builtin(BuiltinId::Problem1, 1, 1.0).unwrap();
        let mesh = SpatialMesh::shishkin(16, 1.0, 2.0, FactorChoice::LnN).unwrap();
        let a = classify(&mesh, &spec, 1.0).unwrap();
        let mask = classify_mask(&a, &mesh, spec.epsilon);
        assert!(!mask[0] && !mask[16]);
        assert!(mask[1..16].iter().all(|&m| m));
    }

    #[test]
    fn degenerate_convection_is_always_central() {
        let parse = |s: &str| crate::expr::Expr::parse(s).unwrap();
        let spec = ProblemSpec::custom(crate::problem::CustomProblem {
            label: alloc::string::String::from("x"),
            epsilon: 1e-9,
            p: 1,
            a0: parse("1e-300"),
            b: parse("1"),
            c: parse("1"),
            e: parse("0"),
            f: parse("0"),
            s: parse("0"),
            q0: parse("0"),
            q1: parse("0"),
            tau: 1.0,
            horizon: 2.0,
            alpha: None,
            beta: None,
            gamma: None,
        })
        .unwrap();
        let mesh = SpatialMesh::shishkin(16, 1e-9, 2.0, FactorChoice::LnN).unwrap();
        let a = classify(&mesh, &spec, 0.5).unwrap();
        let mask = classify_mask(&a, &mesh, spec.epsilon);
        assert!(mask[1..16].iter().all(|&m| m));
    }

    #[test]
    fn classification_matches_brute_force_predicate() {
        let spec = ProblemSpec::builtin(BuiltinId::Problem1, 1, 2f64.powi(-12)).unwrap();
        let mesh = SpatialMesh::shishkin(64, spec.epsilon, 2.0, FactorChoice::LnN).unwrap();
        let a = classify(&mesh, &spec, 1.0).unwrap();
        let mask = classify_mask(&a, &mesh, spec.epsilon);
        for i in 1..64 {
            let expect = mesh.nodes[i] * (mesh.nodes[i] - mesh.nodes[i - 1]) < 2.0 * spec.epsilon;
            assert_eq!(mask[i], expect, "i={i}");
        }
        // the fine region is central except for an O(1) tail near sigma
        assert!(mask[1..=29].iter().all(|&m| m));
        assert!(!mask[33]);
    }

    #[test]
    fn wrong_region_assembly_is_rejected() {
        let spec = ProblemSpec::builtin(BuiltinId::Problem1, 1, 2f64.powi(-12)).unwrap();
        let mesh = SpatialMesh::shishkin(64, spec.epsilon, 2.0, FactorChoice::LnN).unwrap();
        let grid = TimeGrid::new(1.0, 2.0, 32).unwrap();
        let u = vec![0.0; 65];
        assert!(matches!(
            assemble_row_central(60, &mesh, &grid, &spec, 1.0, &u, &u),
            Err(SchemeError::WrongRegion { i: 60, .. })
        ));
        assert!(matches!(
            assemble_row_midpoint(5, &mesh, &grid, &spec, 1.0, &u, &u),
            Err(SchemeError::WrongRegion { i: 5, .. })
        ));
        assert!(assemble_row_central(5, &mesh, &grid, &spec, 1.0, &u, &u).is_ok());
        assert!(assemble_row_midpoint(60, &mesh, &grid, &spec, 1.0, &u, &u).is_ok());
        assert!(assemble_row_upwind(60, &mesh, &grid, &spec, 1.0, &u, &u).is_ok());
    }

    #[test]
    fn admissibility_inequalities_evaluate_numerically() {
        let eps = 2f64.powi(-8);
        let spec = ProblemSpec::builtin(BuiltinId::Problem1, 1, eps).unwrap();
        // kappa = min over coarse nodes of x^1 = sigma, ||b|| = ||c|| = 1
        let mesh = SpatialMesh::shishkin(4, eps, 2.0, FactorChoice::LnN).unwrap();
        let coarse = TimeGrid::new(1.0, 2.0, 2).unwrap();
        let r = admissibility_check(&mesh, &coarse, &spec, 2.0).unwrap();
        assert_eq!(r.kappa, mesh.sigma);
        assert!((r.first_rhs - 3.0).abs() < 1e-12);
        assert!(!r.first_ok() && !r.satisfied());

        // generous step and large N; sigma clamps to 1/2 so
        // N*kappa = 4096 >= 1024 + 1
        let mesh = SpatialMesh::shishkin(8192, eps, 2.0, FactorChoice::LnN).unwrap();
        let grid = TimeGrid::new(1.0, 2.0, 1024).unwrap();
        let r = admissibility_check(&mesh, &grid, &spec, 2.0).unwrap();
        assert_eq!(r.kappa, 0.5);
        assert!(r.first_ok());
        assert!(r.second_ok());
        assert!(r.satisfied());
    }

    #[test]
    fn admissibility_is_trivial_without_reaction_terms() {
        let parse = |s: &str| crate::expr::Expr::parse(s).unwrap();
        let spec = ProblemSpec::custom(crate::problem::CustomProblem {
            label: alloc::string::String::from("noreact"),
            epsilon: 0.25,
            p: 1,
            a0: parse("1"),
            b: parse("1e-30"),
            c: parse("1e-30"),
            e: parse("0"),
            f: parse("0"),
            s: parse("0"),
            q0: parse("0"),
            q1: parse("0"),
            tau: 1.0,
            horizon: 2.0,
            alpha: None,
            beta: None,
            gamma: None,
        })
        .unwrap();
        let grid = TimeGrid::new(1.0, 2.0, 64).unwrap();
        let mesh = SpatialMesh::shishkin(256, 0.25, 2.0, FactorChoice::LnN).unwrap();
        let r = admissibility_check(&mesh, &grid, &spec, 2.0).unwrap();
        assert!(r.first_ok());
    }

    #[test]
    fn sign_pattern_helper() {
        let good = StencilRow {
            r_minus: 1.0,
            r_zero: -3.0,
            r_plus: 1.5,
            rhs: 0.0,
            kind: RowKind::Central,
        };
        assert!(good.has_sign_pattern());
        let bad = StencilRow {
            r_plus: -0.1,
            ..good
        };
        assert!(!bad.has_sign_pattern());
    }
}
