//! Sparse-matrix kernels: conjugate gradients and symmetric tridiagonal
//! eigenvalue helpers. All loops are serial with a fixed order, so repeated
//! runs are bit-identical.

/// Result of a conjugate gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgResult {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite map given as a
/// matrix-vector closure. `x` holds the initial guess on entry and the
/// solution on exit. Convergence is `||r||_2 <= rel_tol * ||b||_2`.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgResult {
    let n = b.len();
    assert_eq!(x.len(), n);
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        x.fill(0.0);
        return CgResult {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let tol = rel_tol * norm_b;
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for k in 0..n {
        r[k] = b[k] - ap[k];
    }
    let mut p = r.clone();
    let mut rho = dot(&r, &r);
    if rho.sqrt() <= tol {
        return CgResult {
            iterations: 0,
            relative_residual: rho.sqrt() / norm_b,
            converged: true,
        };
    }
    for iter in 1..=max_iter {
        apply(&p, &mut ap);
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            // Not positive definite along p; bail out with what we have.
            return CgResult {
                iterations: iter,
                relative_residual: rho.sqrt() / norm_b,
                converged: false,
            };
        }
        let alpha = rho / denom;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rho_new = dot(&r, &r);
        if rho_new.sqrt() <= tol {
            return CgResult {
                iterations: iter,
                relative_residual: rho_new.sqrt() / norm_b,
                converged: true,
            };
        }
        let beta = rho_new / rho;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rho = rho_new;
    }
    CgResult {
        iterations: max_iter,
        relative_residual: rho.sqrt() / norm_b,
        converged: false,
    }
}

/// Plain CSR matrix for shifted copies of assembled operators.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_offsets: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
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
}

/// Zero-fill incomplete Cholesky factor of a symmetric positive definite
/// CSR matrix. Exists whenever the matrix is an M-matrix, which the
/// shifted discrete operators here always are. Stored twice (lower CSR and
/// its transpose) for the two triangular sweeps.
#[derive(Debug, Clone)]
pub struct Ic0 {
    n: usize,
    // Lower triangle including diagonal, CSR, columns ascending.
    low_offsets: Vec<usize>,
    low_cols: Vec<u32>,
    low_vals: Vec<f64>,
    // Strict upper triangle (the transpose of the strict lower part), CSR.
    up_offsets: Vec<usize>,
    up_cols: Vec<u32>,
    up_vals: Vec<f64>,
    inv_diag: Vec<f64>,
}

impl Ic0 {
    /// Factors `a`; returns `None` when a pivot loses positivity.
    pub fn new(a: &Csr) -> Option<Ic0> {
        let n = a.n;
        // Extract the lower-triangular pattern (columns ascending).
        let mut low_offsets = Vec::with_capacity(n + 1);
        let mut low_cols: Vec<u32> = Vec::new();
        let mut low_vals: Vec<f64> = Vec::new();
        low_offsets.push(0);
        for i in 0..n {
            for k in a.row_offsets[i]..a.row_offsets[i + 1] {
                let j = a.cols[k] as usize;
                if j <= i {
                    low_cols.push(j as u32);
                    low_vals.push(a.vals[k]);
                }
            }
            low_offsets.push(low_cols.len());
        }
        // Row-based factorization; row starts of already-factored rows are
        // tracked to intersect sparsity patterns.
        for i in 0..n {
            let (row_lo, row_hi) = (low_offsets[i], low_offsets[i + 1]);
            for idx in row_lo..row_hi {
                let j = low_cols[idx] as usize;
                // Dot of rows i and j over columns < j.
                let mut s = low_vals[idx];
                let (jr_lo, jr_hi) = (low_offsets[j], low_offsets[j + 1]);
                let mut p = row_lo;
                let mut q = jr_lo;
                while p < idx && q < jr_hi {
                    let cp = low_cols[p] as usize;
                    let cq = low_cols[q] as usize;
                    if cq >= j {
                        break;
                    }
                    match cp.cmp(&cq) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            s -= low_vals[p] * low_vals[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                if j == i {
                    if s <= 0.0 {
                        return None;
                    }
                    low_vals[idx] = s.sqrt();
                } else {
                    let djj = low_vals[low_offsets[j + 1] - 1];
                    low_vals[idx] = s / djj;
                }
            }
        }
        // Transpose of the strict lower part for the backward sweep.
        let mut counts = vec![0usize; n];
        for i in 0..n {
            for idx in low_offsets[i]..low_offsets[i + 1] {
                let j = low_cols[idx] as usize;
                if j < i {
                    counts[j] += 1;
                }
            }
        }
        let mut up_offsets = vec![0usize; n + 1];
        for i in 0..n {
            up_offsets[i + 1] = up_offsets[i] + counts[i];
        }
        let mut up_cols = vec![0u32; up_offsets[n]];
        let mut up_vals = vec![0.0; up_offsets[n]];
        let mut cursor = up_offsets.clone();
        for i in 0..n {
            for idx in low_offsets[i]..low_offsets[i + 1] {
                let j = low_cols[idx] as usize;
                if j < i {
                    let slot = cursor[j];
                    up_cols[slot] = i as u32;
                    up_vals[slot] = low_vals[idx];
                    cursor[j] += 1;
                }
            }
        }
        let inv_diag = (0..n)
            .map(|i| 1.0 / low_vals[low_offsets[i + 1] - 1])
            .collect();
        Some(Ic0 {
            n,
            low_offsets,
            low_cols,
            low_vals,
            up_offsets,
            up_cols,
            up_vals,
            inv_diag,
        })
    }

    /// Applies `(L L')^{-1}` to `r`, writing into `z`.
    pub fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = self.n;
        // Forward: L y = r.
        for i in 0..n {
            let mut s = r[i];
            let lo = self.low_offsets[i];
            let hi = self.low_offsets[i + 1] - 1; // last entry is diagonal
            for k in lo..hi {
                s -= self.low_vals[k] * z[self.cols_low(k)];
            }
            z[i] = s * self.inv_diag[i];
        }
        // Backward: L' x = y.
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.up_offsets[i]..self.up_offsets[i + 1] {
                s -= self.up_vals[k] * z[self.up_cols[k] as usize];
            }
            z[i] = s * self.inv_diag[i];
        }
    }

    #[inline]
    fn cols_low(&self, k: usize) -> usize {
        self.low_cols[k] as usize
    }
}

/// Preconditioned conjugate gradients on an explicit CSR matrix. Without a
/// preconditioner this reduces to plain CG with the same iterates.
pub fn pcg(
    a: &Csr,
    pre: Option<&Ic0>,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgResult {
    let n = b.len();
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        x.fill(0.0);
        return CgResult {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let tol = rel_tol * norm_b;
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    a.apply(x, &mut ap);
    for k in 0..n {
        r[k] = b[k] - ap[k];
    }
    let mut z = vec![0.0; n];
    let precondition = |r: &[f64], z: &mut Vec<f64>| match pre {
        Some(m) => m.solve(r, z),
        None => z.copy_from_slice(r),
    };
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    if norm2(&r) <= tol {
        return CgResult {
            iterations: 0,
            relative_residual: norm2(&r) / norm_b,
            converged: true,
        };
    }
    for iter in 1..=max_iter {
        a.apply(&p, &mut ap);
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            return CgResult {
                iterations: iter,
                relative_residual: norm2(&r) / norm_b,
                converged: false,
            };
        }
        let alpha = rz / denom;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rnorm = norm2(&r);
        if rnorm <= tol {
            return CgResult {
                iterations: iter,
                relative_residual: rnorm / norm_b,
                converged: true,
            };
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        rz = rz_new;
    }
    CgResult {
        iterations: max_iter,
        relative_residual: norm2(&r) / norm_b,
        converged: false,
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly less
/// than `x`, by Sturm sequence count.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for k in 1..n {
        let e2 = off[k - 1] * off[k - 1];
        // Guard against exact zero pivots.
        let denom = if d == 0.0 { 1e-300 } else { d };
        d = (diag[k] - x) - e2 / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Extreme eigenvalue (smallest or largest) of a symmetric tridiagonal
/// matrix by Sturm bisection.
pub fn tridiag_extreme(diag: &[f64], off: &[f64], largest: bool) -> f64 {
    let n = diag.len();
    assert!(n >= 1);
    assert_eq!(off.len(), n.saturating_sub(1));
    if n == 1 {
        return diag[0];
    }
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let mut r = 0.0;
        if k > 0 {
            r += off[k - 1].abs();
        }
        if k + 1 < n {
            r += off[k].abs();
        }
        lo = lo.min(diag[k] - r);
        hi = hi.max(diag[k] + r);
    }
    let target = if largest { n - 1 } else { 0 };
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Extreme eigenpair of a symmetric tridiagonal matrix: Sturm bisection for
/// the value, then inverse iteration with a partially pivoted tridiagonal
/// solve for the vector.
pub fn tridiag_extreme_pair(diag: &[f64], off: &[f64], largest: bool) -> (f64, Vec<f64>) {
    let n = diag.len();
    let theta = tridiag_extreme(diag, off, largest);
    if n == 1 {
        return (theta, vec![1.0]);
    }
    // Shift slightly into the spectral gap side so the solve stays stable.
    let scale = diag
        .iter()
        .map(|d| d.abs())
        .fold(0.0f64, f64::max)
        .max(off.iter().map(|e| e.abs()).fold(0.0f64, f64::max))
        .max(1e-300);
    let shift = if largest {
        theta + 1e-12 * scale
    } else {
        theta - 1e-12 * scale
    };
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        let w = solve_shifted_tridiag(diag, off, shift, &v);
        let norm = norm2(&w);
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        for k in 0..n {
            v[k] = w[k] / norm;
        }
    }
    // Fix the overall sign so the dominant entry is positive.
    let mut idx = 0;
    for k in 1..n {
        if v[k].abs() > v[idx].abs() {
            idx = k;
        }
    }
    if v[idx] < 0.0 {
        for value in v.iter_mut() {
            *value = -*value;
        }
    }
    (theta, v)
}

/// Solves `(T - shift I) x = b` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting; the factor gains one extra
/// superdiagonal. Row `k` of the working matrix spans columns `k..k+2` as
/// `(d[k], e[k], f[k])`.
fn solve_shifted_tridiag(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&v| v - shift).collect();
    let mut e = vec![0.0; n];
    let mut f = vec![0.0; n];
    for k in 0..n - 1 {
        e[k] = off[k];
    }
    let mut x = b.to_vec();
    for k in 0..n - 1 {
        // Row k+1 still holds its original subdiagonal entry at column k,
        // except after a swap below where it holds the old row k.
        let sub = off[k];
        if sub.abs() > d[k].abs() {
            let (dk_old, ek_old, fk_old) = (d[k], e[k], f[k]);
            d[k] = sub;
            e[k] = d[k + 1];
            f[k] = if k + 1 < n - 1 { e[k + 1] } else { 0.0 };
            x.swap(k, k + 1);
            let m = dk_old / d[k];
            d[k + 1] = ek_old - m * e[k];
            e[k + 1] = fk_old - m * f[k];
            x[k + 1] -= m * x[k];
        } else {
            let pivot = if d[k] == 0.0 { 1e-300 } else { d[k] };
            let m = sub / pivot;
            d[k + 1] -= m * e[k];
            if k + 1 < n - 1 {
                e[k + 1] -= m * f[k];
            }
            x[k + 1] -= m * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        if k + 1 < n {
            s -= e[k] * x[k + 1];
        }
        if k + 2 < n {
            s -= f[k] * x[k + 2];
        }
        let pivot = if d[k] == 0.0 { 1e-300 } else { d[k] };
        x[k] = s / pivot;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(a: &[Vec<f64>]) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for (i, row) in a.iter().enumerate() {
                y[i] = dot(row, x);
            }
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = vec![
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let b = [1.0, 2.0, 3.0];
        let mut x = vec![0.0; 3];
        let res = conjugate_gradient(dense_apply(&a), &b, &mut x, 1e-12, 100);
        assert!(res.converged);
        let mut ax = vec![0.0; 3];
        dense_apply(&a)(&x, &mut ax);
        for k in 0..3 {
            assert!((ax[k] - b[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_tridiag_solve_reproduces_rhs() {
        // Deterministic pseudo-random tridiagonal systems.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [1usize, 2, 3, 7, 40] {
            let diag: Vec<f64> = (0..n).map(|_| 2.0 + next()).collect();
            let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| next()).collect();
            let b: Vec<f64> = (0..n).map(|_| next()).collect();
            let shift = -3.5; // well away from the spectrum
            let x = solve_shifted_tridiag(&diag, &off, shift, &b);
            for k in 0..n {
                let mut t = (diag[k] - shift) * x[k];
                if k > 0 {
                    t += off[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    t += off[k] * x[k + 1];
                }
                assert!((t - b[k]).abs() < 1e-10, "n={n} k={k} err={}", t - b[k]);
            }
        }
    }

    #[test]
    fn tridiag_extremes_match_known_spectrum() {
        // Second difference matrix: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let lo = tridiag_extreme(&diag, &off, false);
        let hi = tridiag_extreme(&diag, &off, true);
        let exact_lo = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let exact_hi = 2.0 - 2.0 * (n as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((lo - exact_lo).abs() < 1e-12);
        assert!((hi - exact_hi).abs() < 1e-12);
        let (val, vec_) = tridiag_extreme_pair(&diag, &off, false);
        assert!((val - exact_lo).abs() < 1e-12);
        // Residual of the eigenpair.
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let mut t = diag[k] * vec_[k];
            if k > 0 {
                t += off[k - 1] * vec_[k - 1];
            }
            if k + 1 < n {
                t += off[k] * vec_[k + 1];
            }
            worst = worst.max((t - val * vec_[k]).abs());
        }
        assert!(worst < 1e-9, "residual {worst}");
    }
}
