//! Discrete negative Laplacian with the mixed boundary operator folded in.
//!
//! Five-point stencil on masked cells. Boundary faces are eliminated with a
//! ghost value chosen so the boundary condition holds at the face midpoint:
//! one-sided differencing of `sigma du/dn + (1 - sigma) u = 0` gives
//!
//! ```text
//! ghost = u_in * (sigma - (1 - sigma) h / 2) / (sigma + (1 - sigma) h / 2)
//! ```
//!
//! so `sigma = 0` mirrors (`ghost = -u_in`, absorbing at the face midpoint)
//! and `sigma = 1` copies (`ghost = u_in`, reflecting). The resulting matrix
//! is symmetric positive semidefinite, and strictly definite as soon as any
//! face has `sigma < 1`.

use std::sync::Arc;

use crate::error::OperatorError;
use crate::field::Field;
use crate::geometry::{DomainModel, FACES};

/// Faces with `sigma` at or below this are exact absorbing constraints.
pub const SIGMA_MIN: f64 = 1e-6;

/// Ghost elimination factor for a boundary face.
#[inline]
pub fn ghost_factor(sigma: f64, h: f64) -> f64 {
    (sigma - (1.0 - sigma) * h / 2.0) / (sigma + (1.0 - sigma) * h / 2.0)
}

/// Row-compressed symmetric sparse operator tied to its domain.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    domain: Arc<DomainModel>,
    n: usize,
    row_offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    symmetric: bool,
    max_diag: f64,
}

impl SparseOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Arc<DomainModel> {
        &self.domain
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Magnitude scale of the operator: the largest diagonal entry.
    pub fn scale(&self) -> f64 {
        self.max_diag
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (lo..hi).map(move |k| (self.cols[k] as usize, self.vals[k]))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x` with a fixed summation order.
    pub fn apply_slice(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            let mut s = 0.0;
            for k in lo..hi {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = s;
        }
    }

    /// Quadratic form `x' A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.apply_slice(x, &mut y);
        crate::linalg::dot(x, &y)
    }

    /// Explicit CSR copy of `beta I + alpha A`, for factoring and solving.
    pub fn shifted_csr(&self, alpha: f64, beta: f64) -> crate::linalg::Csr {
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let mut v = alpha * self.vals[k];
                if self.cols[k] as usize == i {
                    v += beta;
                }
                vals.push(v);
            }
        }
        crate::linalg::Csr {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            cols: self.cols.clone(),
            vals,
        }
    }
}

/// Assembles the operator for a nonempty domain.
pub fn assemble(domain: &Arc<DomainModel>) -> Result<SparseOperator, OperatorError> {
    if domain.is_empty() {
        return Err(OperatorError::EmptyDomain);
    }
    let grid = *domain.grid();
    let h = grid.h;
    let inv_h2 = 1.0 / (h * h);
    let n = domain.interior_count();

    // Per-unknown boundary contribution (1 - g) / h^2 accumulated per face.
    let mut boundary_diag = vec![0.0; n];
    for bf in domain.boundary_faces() {
        let k = domain
            .unknown_index(bf.i, bf.j)
            .expect("boundary face belongs to a masked cell");
        boundary_diag[k] += (1.0 - ghost_factor(bf.sigma, h)) * inv_h2;
    }

    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    row_offsets.push(0);
    let mut max_diag = 0.0f64;
    for k in 0..n {
        let (i, j) = domain.cell_of_unknown(k);
        let mut neighbors: [Option<usize>; 4] = [None; 4];
        let mut count = 0usize;
        for (slot, face) in FACES.iter().enumerate() {
            let (di, dj) = face.step();
            let ni = i as i64 + di;
            let nj = j as i64 + dj;
            if ni < 0 || nj < 0 || ni as usize >= grid.nx || nj as usize >= grid.ny {
                continue;
            }
            if let Some(u) = domain.unknown_index(ni as usize, nj as usize) {
                neighbors[slot] = Some(u);
                count += 1;
            }
        }
        let diag = count as f64 * inv_h2 + boundary_diag[k];
        max_diag = max_diag.max(diag);
        // Entries in ascending column order: S, W, diag, E, N.
        let mut push = |col: usize, v: f64| {
            cols.push(col as u32);
            vals.push(v);
        };
        if let Some(u) = neighbors[2] {
            push(u, -inv_h2);
        }
        if let Some(u) = neighbors[0] {
            push(u, -inv_h2);
        }
        push(k, diag);
        if let Some(u) = neighbors[1] {
            push(u, -inv_h2);
        }
        if let Some(u) = neighbors[3] {
            push(u, -inv_h2);
        }
        row_offsets.push(cols.len());
    }
    Ok(SparseOperator {
        domain: Arc::clone(domain),
        n,
        row_offsets,
        cols,
        vals,
        symmetric: true,
        max_diag,
    })
}

/// Matrix-vector product as a field operation.
pub fn apply(op: &SparseOperator, phi: &Field) -> Result<Field, OperatorError> {
    if phi.len() != op.n() {
        return Err(OperatorError::SizeMismatch {
            expected: op.n(),
            got: phi.len(),
        });
    }
    let mut out = vec![0.0; op.n()];
    op.apply_slice(phi.values(), &mut out);
    Field::new(Arc::clone(op.domain()), out)
}

/// Variational quotient of a field: face-difference Dirichlet energy plus
/// the boundary absorption term, over the discrete L2 mass. Summed directly
/// over faces, independent of the assembled matrix; for faces at or below
/// [`SIGMA_MIN`] the ghost value enforces the absorbing constraint, and the
/// reflecting limit contributes nothing.
pub fn rayleigh_quotient(domain: &Arc<DomainModel>, phi: &Field) -> Result<f64, OperatorError> {
    if domain.is_empty() {
        return Err(OperatorError::EmptyDomain);
    }
    if phi.len() != domain.interior_count() {
        return Err(OperatorError::SizeMismatch {
            expected: domain.interior_count(),
            got: phi.len(),
        });
    }
    let (numerator, mass) = energy_form(domain, phi.values());
    if mass == 0.0 {
        return Err(OperatorError::ZeroField);
    }
    Ok(numerator / mass)
}

/// Shared quadratic form: `(sum of face-difference quotients + boundary
/// term, both times h^2; sum of phi^2 times h^2)`.
pub(crate) fn energy_form(domain: &DomainModel, phi: &[f64]) -> (f64, f64) {
    let grid = domain.grid();
    let h = grid.h;
    let mut numerator = 0.0;
    // Interior faces once each: east and north neighbors.
    for (k, (i, j)) in domain.masked_cells().enumerate() {
        if i + 1 < grid.nx {
            if let Some(u) = domain.unknown_index(i + 1, j) {
                let d = phi[k] - phi[u];
                numerator += d * d;
            }
        }
        if j + 1 < grid.ny {
            if let Some(u) = domain.unknown_index(i, j + 1) {
                let d = phi[k] - phi[u];
                numerator += d * d;
            }
        }
    }
    for bf in domain.boundary_faces() {
        let k = domain.unknown_index(bf.i, bf.j).expect("masked cell");
        numerator += (1.0 - ghost_factor(bf.sigma, h)) * phi[k] * phi[k];
    }
    let mass: f64 = phi.iter().map(|&v| v * v).sum::<f64>() * h * h;
    (numerator, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rectangle, build_rectangle_sides};
    use std::f64::consts::PI;

    fn dense(op: &SparseOperator) -> Vec<Vec<f64>> {
        let n = op.n();
        let mut a = vec![vec![0.0; n]; n];
        for (i, j, v) in op.entries() {
            a[i][j] += v;
        }
        a
    }

    #[test]
    fn one_dimensional_reduction() {
        // Three cells in a row, absorbing at both ends, reflecting on the
        // long sides, h = 1: tridiagonal [3, -1; -1, 2, -1; -1, 3].
        let grid = crate::geometry::GridSpec::new(1.0, (0.0, 0.0), 3, 3).unwrap();
        let mut mask = vec![false; 9];
        for i in 0..3 {
            mask[grid.index(i, 1)] = true;
        }
        let d = Arc::new(
            crate::geometry::DomainModel::from_mask(grid, mask, |_, _, face| {
                match face {
                    crate::geometry::Face::West | crate::geometry::Face::East => 0.0,
                    crate::geometry::Face::South | crate::geometry::Face::North => 1.0,
                }
            })
            .unwrap(),
        );
        let op = assemble(&d).unwrap();
        let a = dense(&op);
        let expected = [
            [3.0, -1.0, 0.0],
            [-1.0, 2.0, -1.0],
            [0.0, -1.0, 3.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (a[i][j] - expected[i][j]).abs() < 1e-14,
                    "A[{i}][{j}] = {}",
                    a[i][j]
                );
            }
        }
    }

    #[test]
    fn neumann_rows_sum_to_zero_exactly() {
        let d = Arc::new(build_rectangle(8.0, 8.0, 1.0, 1.0).unwrap());
        let op = assemble(&d).unwrap();
        for i in 0..op.n() {
            let sum: f64 = op.row(i).map(|(_, v)| v).sum();
            assert_eq!(sum, 0.0, "row {i}");
        }
        // Constant vector is in the kernel, exactly.
        let ones = Field::constant(&d, 1.0);
        let out = apply(&op, &ones).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
    }

    #[test]
    fn symmetry_is_exact() {
        let d = Arc::new(
            build_rectangle_sides(1.0, 1.0, 0.125, [0.0, 0.5, 1.0, 0.25]).unwrap(),
        );
        let op = assemble(&d).unwrap();
        let a = dense(&op);
        let n = op.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a[i][j], a[j][i]);
            }
        }
    }

    #[test]
    fn apply_basics() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.25, 0.0).unwrap());
        let op = assemble(&d).unwrap();
        let zero = Field::zeros(&d);
        assert_eq!(apply(&op, &zero).unwrap().sup_norm(), 0.0);
        // Unit vector picks out a column.
        let mut e = Field::zeros(&d);
        e.values_mut()[5] = 1.0;
        let col = apply(&op, &e).unwrap();
        for (i, j, v) in op.entries() {
            if j == 5 {
                assert_eq!(col.values()[i], v);
            }
        }
        // Size mismatch is rejected.
        let other = Arc::new(build_rectangle(1.0, 1.0, 0.125, 0.0).unwrap());
        let wrong = Field::constant(&other, 1.0);
        assert!(apply(&op, &wrong).is_err());
    }

    #[test]
    fn rayleigh_on_product_sine() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 1.0 / 64.0, 0.0).unwrap());
        let phi = Field::from_fn(&d, |x, y| (PI * x).sin() * (PI * y).sin());
        let q = rayleigh_quotient(&d, &phi).unwrap();
        let exact = 2.0 * PI * PI;
        assert!(
            (q - exact).abs() / exact < 0.01,
            "quotient {q} vs {exact}"
        );
    }

    #[test]
    fn rayleigh_constant_on_reflecting_square_is_zero() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.125, 1.0).unwrap());
        let one = Field::constant(&d, 1.0);
        assert_eq!(rayleigh_quotient(&d, &one).unwrap(), 0.0);
        let zero = Field::zeros(&d);
        assert!(matches!(
            rayleigh_quotient(&d, &zero),
            Err(OperatorError::ZeroField)
        ));
    }

    #[test]
    fn quotient_matches_quadratic_form() {
        // The face-sum route and the assembled matrix agree to rounding.
        let d = Arc::new(
            build_rectangle_sides(1.0, 0.5, 1.0 / 16.0, [0.3, 0.0, 1.0, 0.7]).unwrap(),
        );
        let op = assemble(&d).unwrap();
        let phi = Field::from_fn(&d, |x, y| 1.0 + x + (2.0 * y).cos());
        let h2 = d.grid().h * d.grid().h;
        let via_matrix = op.quadratic_form(phi.values()) * h2;
        let (via_faces, _) = energy_form(&d, phi.values());
        assert!(
            (via_matrix - via_faces).abs() <= 1e-12 * via_matrix.abs().max(1.0),
            "{via_matrix} vs {via_faces}"
        );
    }

    #[test]
    fn positive_semidefinite_on_random_fields() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.125, 1.0).unwrap());
        let op = assemble(&d).unwrap();
        let h2 = d.grid().h * d.grid().h;
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let x: Vec<f64> = (0..op.n()).map(|_| next()).collect();
            let q = op.quadratic_form(&x);
            let xx = crate::linalg::dot(&x, &x);
            assert!(q >= -1e-12 * xx / h2, "q = {q}");
        }
    }
}
