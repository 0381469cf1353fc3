//! Temporal Richardson extrapolation.
//!
//! Two solves on the same spatial mesh, one with `M` time steps and one
//! with `2M`, are combined level-by-level on the coarse grid as
//! `2 U_fine - U_coarse`. Implicit Euler's leading error term is linear
//! in `dt`, so the combination cancels it and the temporal order rises
//! from one to two.

use alloc::vec::Vec;

use crate::mesh::{SpatialMesh, TimeGrid};
use crate::real::ulp_eq;
use crate::solver::{GridField, SolutionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExtrapolationError {
    #[error("fields live on different spatial meshes")]
    MeshMismatch,
    #[error("fine field must halve the coarse time step: {0}")]
    StepRatio(&'static str),
}

/// `2 U_fine - U_coarse` on the coarse grid, history levels included.
/// `provenance` records the (M, 2M) pair of total step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedField {
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
    pub provenance: (usize, usize),
    values: Vec<f64>,
}

impl ExtrapolatedField {
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

    pub fn value(&self, n: i64, i: usize) -> f64 {
        self.values[self.offset(n) + i]
    }
}

impl GridField for ExtrapolatedField {
    fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn value(&self, n: i64, i: usize) -> f64 {
        ExtrapolatedField::value(self, n, i)
    }
}

/// Combine a coarse-step and a half-step solve on the same mesh.
/// Coarse level `n` pairs with fine level `2n`; both grids share every
/// coarse time point exactly, so boundary columns and history rows pass
/// through unchanged (`2q - q = q`).
pub fn richardson(
    coarse: &SolutionField,
    fine: &SolutionField,
) -> Result<ExtrapolatedField, ExtrapolationError> {
    if coarse.mesh.n != fine.mesh.n
        || coarse
            .mesh
            .nodes
            .iter()
            .zip(&fine.mesh.nodes)
            .any(|(&a, &b)| !ulp_eq(a, b))
    {
        return Err(ExtrapolationError::MeshMismatch);
    }
    if fine.grid.steps != 2 * coarse.grid.steps {
        return Err(ExtrapolationError::StepRatio("step counts are not 1:2"));
    }
    if fine.grid.delay_steps != 2 * coarse.grid.delay_steps {
        return Err(ExtrapolationError::StepRatio(
            "delay resolutions are not 1:2",
        ));
    }
    let width = coarse.mesh.n + 1;
    let mut values = Vec::with_capacity(coarse.grid.rows() * width);
    for n in -(coarse.grid.delay_steps as i64)..=coarse.grid.steps as i64 {
        let fine_level = fine.level(2 * n);
        let coarse_level = coarse.level(n);
        for i in 0..width {
            values.push(2.0 * fine_level[i] - coarse_level[i]);
        }
    }
    Ok(ExtrapolatedField {
        mesh: coarse.mesh.clone(),
        grid: coarse.grid.clone(),
        provenance: (coarse.grid.steps, fine.grid.steps),
        values,
    })
}
