//! Tridiagonal systems and the Thomas algorithm.
//!
//! No pivoting: every system produced by the discretization is strictly
//! diagonally dominant (the dominance margin survives even where the
//! midpoint row's superdiagonal changes sign), so elimination is stable
//! as-is. Workspaces are reusable across time steps to avoid per-level
//! allocation.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("singular tridiagonal system: zero pivot at row {row}")]
pub struct SingularSystem {
    pub row: usize,
}

/// `sub[i]`, `diag[i]`, `sup[i]` are the coefficients of row `i`
/// (`sub[0]` and `sup[n-1]` are ignored).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeroed(n: usize) -> Self {
        TridiagonalSystem {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// Scratch buffers for [`thomas_solve_into`]; reuse across solves.
#[derive(Debug, Default)]
pub struct ThomasWorkspace {
    upper: Vec<f64>,
    partial: Vec<f64>,
}

impl ThomasWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Forward elimination + back substitution, writing the solution to `x`
/// (resized as needed). The system is left untouched.
pub fn thomas_solve_into(
    sys: &TridiagonalSystem,
    work: &mut ThomasWorkspace,
    x: &mut Vec<f64>,
) -> Result<(), SingularSystem> {
    let n = sys.len();
    debug_assert!(sys.sub.len() == n && sys.sup.len() == n && sys.rhs.len() == n);
    work.upper.resize(n, 0.0);
    work.partial.resize(n, 0.0);
    x.resize(n, 0.0);
    if n == 0 {
        return Ok(());
    }
    if sys.diag[0] == 0.0 {
        return Err(SingularSystem { row: 0 });
    }
    work.upper[0] = sys.sup[0] / sys.diag[0];
    work.partial[0] = sys.rhs[0] / sys.diag[0];
    for i in 1..n {
        let pivot = sys.diag[i] - sys.sub[i] * work.upper[i - 1];
        if pivot == 0.0 {
            return Err(SingularSystem { row: i });
        }
        work.upper[i] = sys.sup[i] / pivot;
        work.partial[i] = (sys.rhs[i] - sys.sub[i] * work.partial[i - 1]) / pivot;
    }
    x[n - 1] = work.partial[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = work.partial[i] - work.upper[i] * x[i + 1];
    }
    Ok(())
}

/// Allocating convenience wrapper.
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>, SingularSystem> {
    let mut x = Vec::new();
    thomas_solve_into(sys, &mut ThomasWorkspace::new(), &mut x)?;
    Ok(x)
}

/// Max-norm residual `||Ax - rhs||_inf` of a candidate solution.
pub fn residual_inf(sys: &TridiagonalSystem, x: &[f64]) -> f64 {
    let n = sys.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut ax = sys.diag[i] * x[i];
        if i > 0 {
            ax += sys.sub[i] * x[i - 1];
        }
        if i + 1 < n {
            ax += sys.sup[i] * x[i + 1];
        }
        worst = worst.max((ax - sys.rhs[i]).abs());
    }
    worst
}
