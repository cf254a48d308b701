//! Banded symmetric matrices with an LDL^T factorization.
//!
//! The rod Hessians couple each node only to its grid neighbours, so in a
//! node-major dof ordering they have half-bandwidth at most 5 (three angles
//! per node, nearest-neighbour cells). An O(n b^2) LDL^T factorization then
//! gives determinant signs, inertia (negative-pivot counts) and linear solves
//! without going dense.

use crate::error::{Result, RodError};

/// Symmetric banded matrix stored by diagonals: `diag[d][i]` holds the entry
/// `(i + d, i)` for `d = 0..=bandwidth`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    dim: usize,
    bandwidth: usize,
    diag: Vec<Vec<f64>>,
}

impl BandedSym {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let diag = (0..=bandwidth)
            .map(|d| vec![0.0; dim.saturating_sub(d)])
            .collect();
        BandedSym {
            dim,
            bandwidth,
            diag,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Add `value` at `(row, col)`; symmetric counterpart is implicit.
    /// Entries outside the band are a programming error.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let (hi, lo) = if row >= col { (row, col) } else { (col, row) };
        let d = hi - lo;
        debug_assert!(d <= self.bandwidth, "entry ({row},{col}) outside band");
        self.diag[d][lo] += value;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (hi, lo) = if row >= col { (row, col) } else { (col, row) };
        let d = hi - lo;
        if d > self.bandwidth || hi >= self.dim {
            0.0
        } else {
            self.diag[d][lo]
        }
    }

    /// `y = y + scale * A x`.
    pub fn mul_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            y[i] += scale * self.diag[0][i] * x[i];
        }
        for d in 1..=self.bandwidth {
            for i in 0..self.dim.saturating_sub(d) {
                let a = self.diag[d][i];
                y[i + d] += scale * a * x[i];
                y[i] += scale * a * x[i + d];
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_add(x, 1.0, &mut y);
        y
    }

    /// `self + scale * other`, band widened as needed.
    pub fn add_scaled(&self, other: &BandedSym, scale: f64) -> BandedSym {
        assert_eq!(self.dim, other.dim);
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = BandedSym::zeros(self.dim, bw);
        for d in 0..=bw {
            let n = self.dim.saturating_sub(d);
            for i in 0..n {
                let a = if d <= self.bandwidth {
                    self.diag[d][i]
                } else {
                    0.0
                };
                let b = if d <= other.bandwidth {
                    other.diag[d][i]
                } else {
                    0.0
                };
                out.diag[d][i] = a + scale * b;
            }
        }
        out
    }

    /// Shift the main diagonal by `sigma` (i.e. `A + sigma I`).
    pub fn shift_diag(&mut self, sigma: f64) {
        for v in self.diag[0].iter_mut() {
            *v += sigma;
        }
    }

    /// `A * A`, a banded symmetric matrix of twice the bandwidth. Positive
    /// semidefinite by construction, which is what damped least-squares
    /// solves need.
    pub fn square(&self) -> BandedSym {
        let n = self.dim;
        let bw = (2 * self.bandwidth).min(n.saturating_sub(1));
        let mut out = BandedSym::zeros(n, bw);
        for i in 0..n {
            for j in i..(i + bw + 1).min(n) {
                let lo = j.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth + 1).min(n);
                let mut sum = 0.0;
                for k in lo..hi {
                    sum += self.get(i, k) * self.get(k, j);
                }
                out.diag[j - i][i] = sum;
            }
        }
        out
    }

    /// Factor `A = L D L^T` without pivoting. Returns an error when a pivot
    /// underflows to zero (exactly singular to working precision); indefinite
    /// matrices factor fine and report their inertia through the pivot signs.
    pub fn ldlt(&self) -> Result<BandedLdlt> {
        let n = self.dim;
        let b = self.bandwidth;
        // Work on a dense copy of the band: col[j] holds column j entries
        // for rows j..min(j+b, n-1).
        let mut col = vec![vec![0.0; b + 1]; n];
        for d in 0..=b {
            for i in 0..n.saturating_sub(d) {
                col[i][d] = self.diag[d][i];
            }
        }
        let mut pivots = vec![0.0; n];
        for j in 0..n {
            let d_j = col[j][0];
            if d_j == 0.0 || !d_j.is_finite() {
                return Err(RodError::numerical(
                    "banded ldlt",
                    format!("zero or non-finite pivot at index {j}"),
                ));
            }
            pivots[j] = d_j;
            let reach = (j + b).min(n - 1);
            // l_ij = a_ij / d_j for i in (j, reach]
            for i in j + 1..=reach {
                col[j][i - j] /= d_j;
            }
            // Rank-one update of the trailing band.
            for i in j + 1..=reach {
                let lij = col[j][i - j];
                if lij == 0.0 {
                    continue;
                }
                for k in i..=reach {
                    col[i][k - i] -= lij * d_j * col[j][k - j];
                }
            }
        }
        // Keep only the unit-lower-triangular multipliers.
        let lower = col
            .iter()
            .map(|c| c[1..].to_vec())
            .collect::<Vec<Vec<f64>>>();
        Ok(BandedLdlt {
            dim: n,
            bandwidth: b,
            lower,
            pivots,
        })
    }
}

/// LDL^T factors of a banded symmetric matrix.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    dim: usize,
    bandwidth: usize,
    /// `lower[j][k]` = multiplier at row `j + 1 + k`, column `j`.
    lower: Vec<Vec<f64>>,
    pivots: Vec<f64>,
}

impl BandedLdlt {
    /// Number of strictly negative pivots = number of negative eigenvalues
    /// (Sylvester's law of inertia).
    pub fn negative_pivots(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    /// Sign of the determinant: -1, 0, or +1.
    pub fn det_sign(&self) -> i32 {
        let negatives = self.negative_pivots();
        if self.pivots.iter().any(|&d| d == 0.0) {
            0
        } else if negatives % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Solve `A x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.dim);
        let n = self.dim;
        let b = self.bandwidth;
        // Forward: L y = rhs.
        for j in 0..n {
            let y_j = rhs[j];
            if y_j != 0.0 {
                let reach = (j + b).min(n - 1);
                for i in j + 1..=reach {
                    rhs[i] -= self.lower[j][i - j - 1] * y_j;
                }
            }
        }
        // Diagonal: D z = y.
        for j in 0..n {
            rhs[j] /= self.pivots[j];
        }
        // Backward: L^T x = z.
        for j in (0..n).rev() {
            let reach = (j + b).min(n - 1);
            let mut acc = rhs[j];
            for i in j + 1..=reach {
                acc -= self.lower[j][i - j - 1] * rhs[i];
            }
            rhs[j] = acc;
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Dense symmetric tridiagonal solve (Thomas algorithm) for mass-matrix
/// applications where the system is per-angle and always positive definite.
pub fn solve_tridiag_sym(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    assert_eq!(rhs.len(), n);
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off.first().copied().unwrap_or(0.0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
