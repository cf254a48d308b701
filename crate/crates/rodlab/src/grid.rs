//! Uniform 1D arc-length grids.

use crate::error::{Result, RodError};

/// Uniform partition of an arc-length interval `[lower, upper]` into
/// `n_cells` cells with nodes `s_i = lower + i*h`, `h = (upper-lower)/n_cells`.
///
/// Problems on the scaled rod live on `[0, 1]`; the localized buckling
/// profiles use a symmetric physical interval `[-L, L]`. The endpoints are
/// stored explicitly so both conventions coexist.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: f64,
    upper: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(lower: f64, upper: f64, n_cells: usize) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(RodError::validation("grid", "endpoints must be finite"));
        }
        if upper <= lower {
            return Err(RodError::validation(
                "grid",
                format!("upper ({upper}) must exceed lower ({lower})"),
            ));
        }
        if n_cells < 2 {
            return Err(RodError::validation(
                "grid.n_cells",
                format!("need at least 2 cells, got {n_cells}"),
            ));
        }
        Ok(Grid {
            lower,
            upper,
            n_cells,
        })
    }

    /// Grid on the scaled interval `[0, 1]`.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Grid::new(0.0, 1.0, n_cells)
    }

    /// Grid on the symmetric interval `[-half_length, half_length]`.
    pub fn symmetric(half_length: f64, n_cells: usize) -> Result<Self> {
        if !(half_length > 0.0) {
            return Err(RodError::validation(
                "grid.half_length",
                "must be positive",
            ));
        }
        Grid::new(-half_length, half_length, n_cells)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        (self.upper - self.lower) / self.n_cells as f64
    }

    /// Node coordinate `s_i`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        self.lower + i as f64 * self.h()
    }

    /// Midpoint of cell `c`, the quadrature point used for energies.
    pub fn midpoint(&self, c: usize) -> f64 {
        debug_assert!(c < self.n_cells);
        self.lower + (c as f64 + 0.5) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_cells).map(|c| self.midpoint(c)).collect()
    }
}
