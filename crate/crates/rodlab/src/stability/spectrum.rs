//! Eigenanalysis of discrete Hessians: dense generalized solves for moderate
//! dimensions, inertia bisection on the banded form for large unconstrained
//! problems, and inertia counts on their own.

use super::hessian::Hessian;
use super::Normalization;
use crate::error::{Result, RodError};
use crate::field::Perturbation;
use crate::linalg::BandedSym;
use crate::mass::{mass_banded, mass_dense, MassKind};
use nalgebra::DMatrix;

/// Cut-over from dense eigensolves to banded inertia bisection.
const DENSE_LIMIT: usize = 3000;

/// Lowest part of a Hessian spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// The `k` smallest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Number of negative eigenvalues of the whole operator.
    pub index: usize,
    /// Eigenvector of the smallest eigenvalue, scattered to nodal arrays.
    pub smallest_eigenvector: Perturbation,
    /// Inner product the eigenvalues are measured against.
    pub normalization: Normalization,
}

/// `k` smallest eigenvalues of `h` against the consistent-mass inner product.
pub fn spectrum(h: &Hessian, k: usize) -> Result<SpectrumReport> {
    spectrum_with_normalization(h, k, Normalization::ConsistentMass)
}

/// `k` smallest eigenvalues of `h` against a chosen inner product. Linearized
/// constraint rows carried by `h` are eliminated exactly beforehand, so the
/// spectrum is that of the form restricted to the constraint null space.
pub fn spectrum_with_normalization(
    h: &Hessian,
    k: usize,
    normalization: Normalization,
) -> Result<SpectrumReport> {
    let dim = h.dim();
    if k == 0 || k > dim.saturating_sub(h.constraints.len()) {
        return Err(RodError::validation(
            "k",
            format!(
                "must lie in 1..={} (dimension minus constraints)",
                dim.saturating_sub(h.constraints.len())
            ),
        ));
    }
    if h.constraints.is_empty() && dim > DENSE_LIMIT {
        if let Some(banded) = to_banded(h) {
            return spectrum_banded(h, &banded, k, normalization);
        }
    }
    spectrum_dense(h, k, normalization)
}

/// Number of negative eigenvalues of `h` restricted to its constraint null
/// space (the Morse index of the quadratic form). Uses banded elimination
/// when the matrix has the node-major neighbour structure, a dense solve
/// otherwise.
pub fn morse_index(h: &Hessian) -> Result<usize> {
    if h.constraints.is_empty() {
        if let Some(banded) = to_banded(h) {
            return banded_inertia(&banded);
        }
    }
    let (reduced, _z) = reduce_constraints(h)?;
    let eigen = symmetric_eigen(reduced);
    Ok(eigen.0.iter().filter(|&&l| l < 0.0).count())
}

fn banded_inertia(banded: &BandedSym) -> Result<usize> {
    match banded.ldlt() {
        Ok(f) => Ok(f.negative_pivots()),
        Err(_) => {
            // Exactly singular to working precision: nudge off the kernel.
            let mut shifted = banded.clone();
            let scale = banded_norm(banded).max(1.0);
            shifted.shift_diag(1e-13 * scale);
            Ok(shifted.ldlt()?.negative_pivots())
        }
    }
}

/// Reinterpret the dense matrix in the node-major banded layout, provided
/// every entry outside the band is exactly zero (true for assembled rod
/// Hessians, generally false for hand-built matrices).
fn to_banded(h: &Hessian) -> Option<BandedSym> {
    let dim = h.dim();
    if dim == 0 {
        return None;
    }
    let order = h.dof_map.node_major_order();
    if order.len() != dim {
        return None;
    }
    let mut pos_of = vec![0usize; dim];
    for (pos, &g) in order.iter().enumerate() {
        pos_of[g] = pos;
    }
    let bw = 5.min(dim - 1);
    let mut banded = BandedSym::zeros(dim, bw);
    for i in 0..dim {
        for j in i..dim {
            let v = h.matrix[(i, j)];
            let (pi, pj) = (pos_of[i], pos_of[j]);
            let d = pi.abs_diff(pj);
            if d > bw {
                if v != 0.0 {
                    return None;
                }
            } else if v != 0.0 {
                banded.add(pi, pj, v);
            }
        }
    }
    Some(banded)
}

fn banded_norm(banded: &BandedSym) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..banded.dim() {
        let mut row = 0.0;
        for j in i.saturating_sub(banded.bandwidth())..=(i + banded.bandwidth()).min(banded.dim() - 1)
        {
            row += banded.get(i, j).abs();
        }
        worst = worst.max(row);
    }
    worst
}

/// Null-space elimination of the constraint rows: returns the reduced
/// matrix `Z^T H Z` and the basis `Z` itself.
fn reduce_constraints(h: &Hessian) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dim = h.dim();
    let r = h.constraints.len();
    if r == 0 {
        return Ok((h.matrix.clone(), DMatrix::identity(dim, dim)));
    }
    // Row-reduce the r x dim constraint matrix with greedy column pivoting.
    let mut rows: Vec<Vec<f64>> = h.constraints.clone();
    let mut pivots: Vec<usize> = Vec::with_capacity(r);
    for i in 0..r {
        let (p, max) = rows[i]
            .iter()
            .enumerate()
            .filter(|(j, _)| !pivots.contains(j))
            .map(|(j, v)| (j, v.abs()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if p == usize::MAX || max <= 1e-14 {
            return Err(RodError::numerical(
                "constraint elimination",
                "linearized constraints are rank deficient",
            ));
        }
        pivots.push(p);
        let scale = rows[i][p];
        for v in rows[i].iter_mut() {
            *v /= scale;
        }
        for other in 0..r {
            if other != i {
                let factor = rows[other][p];
                if factor != 0.0 {
                    for j in 0..dim {
                        let upd = rows[i][j];
                        rows[other][j] -= factor * upd;
                    }
                }
            }
        }
    }
    // Null-space basis: one column per non-pivot dof j, with the pivot dofs
    // carrying -rows[i][j].
    let free: Vec<usize> = (0..dim).filter(|j| !pivots.contains(j)).collect();
    let mut z = DMatrix::zeros(dim, free.len());
    for (col, &j) in free.iter().enumerate() {
        z[(j, col)] = 1.0;
        for (i, &p) in pivots.iter().enumerate() {
            z[(p, col)] = -rows[i][j];
        }
    }
    let reduced = z.transpose() * &h.matrix * &z;
    Ok((reduced, z))
}

/// Eigendecomposition of a symmetric matrix, ascending.
fn symmetric_eigen(mut m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    // Symmetrize away accumulated rounding before factorizing.
    let mt = m.transpose();
    m = (m + mt) * 0.5;
    let eigen = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eigen.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

fn mass_for(h: &Hessian, normalization: Normalization) -> DMatrix<f64> {
    match normalization {
        Normalization::ConsistentMass => mass_dense(&h.dof_map, MassKind::Consistent),
        Normalization::LumpedMass => mass_dense(&h.dof_map, MassKind::Lumped),
        Normalization::Identity => DMatrix::identity(h.dim(), h.dim()),
    }
}

fn spectrum_dense(
    h: &Hessian,
    k: usize,
    normalization: Normalization,
) -> Result<SpectrumReport> {
    let (reduced_h, z) = reduce_constraints(h)?;
    let mass = mass_for(h, normalization);
    let reduced_m = if h.constraints.is_empty() {
        mass
    } else {
        z.transpose() * mass * &z
    };
    // Cholesky-reduce the generalized problem to a standard symmetric one.
    let chol = reduced_m.clone().cholesky().ok_or_else(|| {
        RodError::numerical("spectrum", "mass matrix is not positive definite")
    })?;
    let l = chol.l();
    let tmp = l
        .solve_lower_triangular(&reduced_h)
        .ok_or_else(|| RodError::numerical("spectrum", "singular mass factor"))?;
    let ht = l
        .solve_lower_triangular(&tmp.transpose())
        .ok_or_else(|| RodError::numerical("spectrum", "singular mass factor"))?;
    let (values, vectors) = symmetric_eigen(ht);
    let index = values.iter().filter(|&&l| l < 0.0).count();
    // Back-transform the minimizer: v = Z L^-T y.
    let y = vectors.column(0).into_owned();
    let w = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| RodError::numerical("spectrum", "singular mass factor"))?;
    let full = &z * w;
    let smallest_eigenvector = scatter_normalized(h, full.as_slice());
    Ok(SpectrumReport {
        eigenvalues: values[..k].to_vec(),
        index,
        smallest_eigenvector,
        normalization,
    })
}

/// Scatter a flat free-dof vector to nodal arrays, scaled to unit max-norm
/// with a deterministic sign (largest-magnitude entry positive).
fn scatter_normalized(h: &Hessian, flat: &[f64]) -> Perturbation {
    let mut best = 0.0f64;
    for &v in flat {
        if v.abs() > best.abs() {
            best = v;
        }
    }
    let scale = if best != 0.0 { 1.0 / best } else { 1.0 };
    let scaled: Vec<f64> = flat.iter().map(|v| v * scale).collect();
    let nodal = h.dof_map.scatter(&scaled);
    let [alpha, beta, gamma] = nodal;
    Perturbation::new(alpha, beta, gamma).expect("scatter produces equal lengths")
}

fn spectrum_banded(
    h: &Hessian,
    banded: &BandedSym,
    k: usize,
    normalization: Normalization,
) -> Result<SpectrumReport> {
    let dim = h.dim();
    let order = h.dof_map.node_major_order();
    let mass: BandedSym = match normalization {
        Normalization::ConsistentMass => mass_banded(&h.dof_map, MassKind::Consistent, &order),
        Normalization::LumpedMass => mass_banded(&h.dof_map, MassKind::Lumped, &order),
        Normalization::Identity => {
            let mut m = BandedSym::zeros(dim, 0);
            for i in 0..dim {
                m.add(i, i, 1.0);
            }
            m
        }
    };
    // Inertia count at a shift: negative pivots of H - sigma M.
    let count_below = |sigma: f64| -> Result<usize> {
        let shifted = banded.add_scaled(&mass, -sigma);
        banded_inertia(&shifted)
    };
    // Gershgorin-style bracket: |lambda| <= ||H|| / min_eig(M), and the
    // mass spectrum is bounded below by h/6 (consistent) or h/2 (lumped).
    let h_norm = banded_norm(banded);
    let m_floor = match normalization {
        Normalization::ConsistentMass => h.dof_map.grid().h() / 6.0,
        Normalization::LumpedMass => h.dof_map.grid().h() / 2.0,
        Normalization::Identity => 1.0,
    };
    let bound = (h_norm / m_floor).max(1.0) * 2.0;
    let index = count_below(0.0)?;

    let mut eigenvalues = Vec::with_capacity(k);
    let tol = 1e-12 * bound;
    for i in 1..=k {
        let (mut lo, mut hi) = (-bound, bound);
        if count_below(hi)? < i {
            return Err(RodError::numerical(
                "spectrum",
                format!("eigenvalue {i} escapes the bracket [{lo}, {hi}]"),
            ));
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if count_below(mid)? >= i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        eigenvalues.push(0.5 * (lo + hi));
    }

    // Eigenvector of the smallest eigenvalue by shifted inverse iteration.
    let lambda1 = eigenvalues[0];
    let spread = (eigenvalues.last().unwrap() - lambda1).max(1e-8 * bound);
    let shift = lambda1 - 1e-6 * spread;
    let factor = banded.add_scaled(&mass, -shift).ldlt()?;
    let mut v: Vec<f64> = (0..dim)
        .map(|i| ((i * 2654435761 + 1013904223) % 1000) as f64 / 1000.0 - 0.5)
        .collect();
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let mut rhs = mass.mul(&v);
        factor.solve_in_place(&mut rhs);
        let norm = rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            break;
        }
        for x in rhs.iter_mut() {
            *x /= norm;
        }
        v = rhs;
        // Residual of the eigenpair claim (H - lambda1 M) v = 0.
        let mut res = banded.mul(&v);
        mass.mul_add(&v, -lambda1, &mut res);
        residual = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if residual <= 1e-8 * h_norm.max(1.0) {
            break;
        }
    }
    if residual > 1e-6 * h_norm.max(1.0) {
        return Err(RodError::numerical(
            "spectrum",
            format!("inverse iteration stalled with residual {residual:.3e}"),
        ));
    }
    // Undo the node-major permutation before scattering.
    let mut flat = vec![0.0; dim];
    for (pos, &g) in order.iter().enumerate() {
        flat[g] = v[pos];
    }
    let smallest_eigenvector = scatter_normalized(h, &flat);
    Ok(SpectrumReport {
        eigenvalues,
        index,
        smallest_eigenvector,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundarySpec;
    use crate::equilibria::trivial_state;
    use crate::grid::Grid;
    use crate::params::RodParams;
    use crate::stability::assemble_hessian;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn clamped_straight_state_spectrum_matches_the_analytic_eigenvalue() {
        let grid = Grid::unit(200).unwrap();
        let state = trivial_state(&grid, 1.0).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        let bcs = BoundarySpec::clamped_to(&state);
        let hess = assemble_hessian(&state, &params, &bcs);
        let report = spectrum(&hess, 2).unwrap();
        assert_eq!(report.index, 0);
        assert_relative_eq!(
            report.eigenvalues[0],
            7.0 / 16.0 * PI * PI,
            max_relative = 1e-3
        );
        assert!(report.eigenvalues[0] <= report.eigenvalues[1]);
    }

    #[test]
    fn diagonal_matrix_spectrum_is_exact_under_identity_normalization() {
        let grid = Grid::unit(3).unwrap();
        let state = trivial_state(&grid, 0.0).unwrap();
        let bcs = BoundarySpec::clamped_to(&state);
        let dof_map = bcs.dof_map(&grid);
        let dim = dof_map.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        let diag = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0];
        for i in 0..dim {
            matrix[(i, i)] = diag[i];
        }
        let hess = Hessian {
            matrix,
            dof_map,
            constraints: Vec::new(),
        };
        let report = spectrum_with_normalization(&hess, 3, Normalization::Identity).unwrap();
        assert_eq!(report.eigenvalues, vec![-5.0, -1.0, 1.0]);
        assert_eq!(report.index, 2);
    }

    #[test]
    fn constraint_rows_remove_the_constrained_directions() {
        // A free-mean direction is removed: constraining both mean modes on a
        // pure Laplacian block shifts the smallest eigenvalue up.
        let grid = Grid::unit(40).unwrap();
        let state = trivial_state(&grid, 0.0).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 0.0).unwrap();
        let bcs = BoundarySpec::clamped_to(&state);
        let hess_plain = assemble_hessian(&state, &params, &bcs);
        let report_plain = spectrum(&hess_plain, 1).unwrap();

        let bcs_iso = bcs.with_iso(&[crate::boundary::IsoAxis::Y, crate::boundary::IsoAxis::Z]);
        let hess_iso = assemble_hessian(&state, &params, &bcs_iso);
        assert_eq!(hess_iso.constraints.len(), 2);
        let report_iso = spectrum(&hess_iso, 1).unwrap();
        assert!(report_iso.eigenvalues[0] >= report_plain.eigenvalues[0] - 1e-12);
    }

    #[test]
    fn morse_index_counts_downhill_directions() {
        let grid = Grid::unit(80).unwrap();
        let state = trivial_state(&grid, 1.0).unwrap();
        let bcs = BoundarySpec::clamped_to(&state);
        // Between the first two critical loads exactly one mode pair is soft.
        let params = RodParams::unloaded(1.0, 0.75, 1.0)
            .unwrap()
            .with_force([10.0, 0.0, 0.0]);
        let hess = assemble_hessian(&state, &params, &bcs);
        assert_eq!(morse_index(&hess).unwrap(), 2);
        let report = spectrum(&hess, 3).unwrap();
        assert_eq!(report.index, 2);
    }
}
