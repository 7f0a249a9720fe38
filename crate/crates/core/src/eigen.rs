//! Principal eigenpairs and the spectral constructions built on them:
//! exhaustion limits, localized scans, windowed spectrum probes, and the
//! ample/narrow decomposition.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::EigenError;
use crate::field::Field;
use crate::geometry::{connected_component, intersect_ball, translate_window, DomainModel};
use crate::linalg::{self, pcg, tridiag_extreme_pair, Csr, Ic0};
use crate::operator::{assemble, SparseOperator};
use crate::radial;

/// Relative tolerance for the inner conjugate gradient solves.
const CG_TOL: f64 = 1e-10;
/// Relative tolerance on successive eigenvalue estimates.
const LAMBDA_TOL: f64 = 1e-10;
/// Eigen-residual tolerance, relative to the operator scale.
const RESIDUAL_TOL: f64 = 1e-8;
/// Cap on inverse solves across restarts.
const MAX_OUTER: usize = 500;
/// Krylov basis cap per restart block.
const BLOCK_CAP: usize = 110;

/// Principal eigenvalue with its positive, sup-normalized eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: Field,
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenpair of the assembled operator.
///
/// Inverse iteration on `A + eps I` with `eps = 1e-8 * scale`, accelerated
/// by a Lanczos recurrence over the inverse: the start vector is all ones,
/// which overlaps the positive principal eigenvector, and each step is one
/// definite conjugate-gradient solve. A final inverse-power polish through
/// the nonnegative part restores strict positivity, which the inverse of an
/// irreducible M-matrix guarantees on a connected domain.
pub fn principal_eigenpair(op: &SparseOperator) -> Result<EigenPair, EigenError> {
    let n = op.n();
    if n == 0 {
        return Err(EigenError::EmptyDomain);
    }
    let scale = op.scale();
    let eps = RESIDUAL_TOL * scale;
    let res_tol = RESIDUAL_TOL * scale;
    let cg_max = 40 * n + 200;
    let shifted = op.shifted_csr(1.0, eps);
    let pre = Ic0::new(&shifted);
    let solve_shifted = |rhs: &[f64], x0: &mut Vec<f64>| -> Result<(), EigenError> {
        let res = pcg(&shifted, pre.as_ref(), rhs, x0, CG_TOL, cg_max);
        if !res.converged {
            return Err(EigenError::LinearSolve {
                iterations: res.iterations,
                relative_residual: res.relative_residual,
            });
        }
        Ok(())
    };

    let mut start = vec![1.0 / (n as f64).sqrt(); n];
    let mut total_solves = 0usize;
    let mut lambda_prev = f64::INFINITY;
    let mut best: Option<Vec<f64>> = None;

    'restart: while total_solves < MAX_OUTER {
        // Lanczos over (A + eps I)^{-1} with full reorthogonalization.
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut work = vec![0.0; n];
        loop {
            if total_solves >= MAX_OUTER || basis.len() > BLOCK_CAP {
                // Restart from the current best Ritz vector. At this point
                // the recurrence holds one more beta and basis vector than
                // the tridiagonal section uses.
                let m = alphas.len();
                let (_, y) = tridiag_extreme_pair(&alphas, &betas[..m - 1], true);
                start = ritz_vector(&basis[..m], &y);
                normalize2(&mut start);
                best = Some(start.clone());
                if total_solves >= MAX_OUTER {
                    break 'restart;
                }
                continue 'restart;
            }
            let v = basis.last().unwrap().clone();
            work.fill(0.0);
            solve_shifted(&v, &mut work)?;
            total_solves += 1;
            let mut w = work.clone();
            if let Some(b) = betas.last() {
                let prev = &basis[basis.len() - 2];
                for k in 0..n {
                    w[k] -= b * prev[k];
                }
            }
            let alpha = linalg::dot(&w, &v);
            for k in 0..n {
                w[k] -= alpha * v[k];
            }
            // Two-pass reorthogonalization keeps the basis clean.
            for _ in 0..2 {
                for q in &basis {
                    let c = linalg::dot(&w, q);
                    for k in 0..n {
                        w[k] -= c * q[k];
                    }
                }
            }
            alphas.push(alpha);
            let beta = linalg::norm2(&w);
            let (theta, y) = tridiag_extreme_pair(&alphas, &betas, true);
            let lambda = 1.0 / theta - eps;
            let lambda_floor = 1e-13 * scale;
            let converged_lambda = (lambda - lambda_prev).abs()
                <= LAMBDA_TOL * lambda.abs().max(lambda_floor)
                || beta <= 1e-13 * theta.abs().max(1e-300);
            lambda_prev = lambda;
            if converged_lambda {
                let mut x = ritz_vector(&basis, &y);
                normalize2(&mut x);
                // Residual in the original operator.
                let mut ax = vec![0.0; n];
                op.apply_slice(&x, &mut ax);
                let lam = linalg::dot(&x, &ax);
                let mut res: f64 = 0.0;
                for k in 0..n {
                    res = res.max((ax[k] - lam * x[k]).abs());
                }
                let sup = linalg::sup_norm(&x);
                if res / sup.max(1e-300) <= res_tol {
                    return finish(op, &shifted, pre.as_ref(), x, lam, total_solves, res_tol);
                }
            }
            if beta <= 1e-13 * theta.abs().max(1e-300) {
                // Invariant subspace reached; accept the Ritz pair.
                let mut x = ritz_vector(&basis, &y);
                normalize2(&mut x);
                let mut ax = vec![0.0; n];
                op.apply_slice(&x, &mut ax);
                let lam = linalg::dot(&x, &ax);
                return finish(op, &shifted, pre.as_ref(), x, lam, total_solves, res_tol);
            }
            for k in 0..n {
                w[k] /= beta;
            }
            betas.push(beta);
            basis.push(w);
        }
    }

    // Iteration cap reached: report the residual honestly.
    let x = best.unwrap_or(start);
    let mut ax = vec![0.0; n];
    op.apply_slice(&x, &mut ax);
    let lam = linalg::dot(&x, &ax) / linalg::dot(&x, &x);
    let mut res: f64 = 0.0;
    for k in 0..n {
        res = res.max((ax[k] - lam * x[k]).abs());
    }
    let sup = linalg::sup_norm(&x);
    Err(EigenError::NoConvergence {
        iterations: total_solves,
        residual: res / sup.max(1e-300),
        tolerance: res_tol,
    })
}

fn ritz_vector(basis: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut x = vec![0.0; n];
    for (q, &w) in basis.iter().zip(weights) {
        for k in 0..n {
            x[k] += w * q[k];
        }
    }
    x
}

fn normalize2(x: &mut [f64]) {
    let nrm = linalg::norm2(x);
    if nrm > 0.0 {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
}

/// Final polish: one inverse-power step through the nonnegative part, then
/// sup-normalization and the invariant checks.
fn finish(
    op: &SparseOperator,
    shifted: &Csr,
    pre: Option<&Ic0>,
    x: Vec<f64>,
    lambda_hint: f64,
    iterations: usize,
    res_tol: f64,
) -> Result<EigenPair, EigenError> {
    let n = op.n();
    let eps = RESIDUAL_TOL * op.scale();
    let mut rhs: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    if rhs.iter().all(|&v| v == 0.0) {
        rhs = x.iter().map(|&v| (-v).max(0.0)).collect();
    }
    let mut polished = x.clone();
    let scale_guess = 1.0 / (lambda_hint + eps).max(eps);
    for v in polished.iter_mut() {
        *v *= scale_guess;
    }
    let res = pcg(shifted, pre, &rhs, &mut polished, CG_TOL, 40 * n + 200);
    let mut phi = if res.converged { polished } else { x };
    let sup = linalg::sup_norm(&phi);
    for v in phi.iter_mut() {
        *v /= sup;
    }
    let mut ax = vec![0.0; n];
    op.apply_slice(&phi, &mut ax);
    let lambda = op.quadratic_form(&phi) / linalg::dot(&phi, &phi);
    let mut residual: f64 = 0.0;
    for k in 0..n {
        residual = residual.max((ax[k] - lambda * phi[k]).abs());
    }
    if residual > res_tol {
        return Err(EigenError::NoConvergence {
            iterations,
            residual,
            tolerance: res_tol,
        });
    }
    let min = phi.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(min > 0.0) {
        return Err(EigenError::NotPositive { min });
    }
    let field = Field::new(Arc::clone(op.domain()), phi).expect("sizes match");
    Ok(EigenPair {
        lambda,
        phi: field,
        residual,
        iterations,
    })
}

/// Principal eigenvalue of a possibly disconnected or empty domain: the
/// empty domain maps to positive infinity, and a disconnected one to the
/// smallest eigenvalue over its components.
pub fn domain_lambda(domain: &Arc<DomainModel>) -> Result<f64, EigenError> {
    Ok(domain_eigenpair(domain)?.map_or(f64::INFINITY, |(lam, _)| lam))
}

/// Like [`domain_lambda`], also returning the eigenpair of the minimizing
/// component (ties broken by lowest cell index, the component order).
pub fn domain_eigenpair(
    domain: &Arc<DomainModel>,
) -> Result<Option<(f64, EigenPair)>, EigenError> {
    if domain.is_empty() {
        return Ok(None);
    }
    if domain.is_connected() {
        let op = assemble(domain)?;
        let pair = principal_eigenpair(&op)?;
        return Ok(Some((pair.lambda, pair)));
    }
    let mut best: Option<(f64, EigenPair)> = None;
    for comp in domain.components() {
        let comp = Arc::new(comp);
        let op = assemble(&comp)?;
        let pair = principal_eigenpair(&op)?;
        if best.as_ref().map_or(true, |(lam, _)| pair.lambda < *lam) {
            best = Some((pair.lambda, pair));
        }
    }
    Ok(best)
}

/// One point of an exhaustion curve.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustionPoint {
    pub radius: f64,
    pub lambda: f64,
}

/// Eigenvalues of ball truncations of growing radius about a fixed center.
/// The sequence is nonincreasing and approaches the whole-domain value.
pub fn exhaustion_curve(
    domain: &Arc<DomainModel>,
    center: (f64, f64),
    radii: &[f64],
) -> Result<Vec<ExhaustionPoint>, EigenError> {
    let min_radius = 5.0 * domain.grid().h;
    let increasing = radii.windows(2).all(|w| w[0] < w[1]);
    if radii.is_empty() || !increasing || radii[0] < min_radius {
        return Err(EigenError::BadRadii { min_radius });
    }
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let cut = Arc::new(intersect_ball(domain, center, r)?);
        let lambda = domain_lambda(&cut)?;
        out.push(ExhaustionPoint { radius: r, lambda });
    }
    Ok(out)
}

/// Result of a localization scan over ball placements.
#[derive(Debug, Clone)]
pub struct LiebScan {
    pub min_center: (f64, f64),
    pub min_lambda: f64,
    /// Whole-domain eigenvalue plus the unit-disk eigenvalue over R^2.
    pub bound: f64,
    pub satisfied: bool,
    pub lambda_domain: f64,
    pub centers_scanned: usize,
}

/// Scans ball centers over a stride lattice covering the bounding box
/// inflated by `r`; the minimal truncated eigenvalue must not exceed the
/// localization bound by more than the discretization slack (5 percent).
pub fn lieb_scan(
    domain: &Arc<DomainModel>,
    r: f64,
    stride: f64,
) -> Result<LiebScan, EigenError> {
    if !(stride > 0.0) || stride > r / 2.0 {
        return Err(EigenError::BadStride { stride, r });
    }
    let lambda_domain = domain_lambda(domain)?;
    let bound = lambda_domain + radial::unit_disk_lambda() / (r * r);
    let ((x0, y0), (x1, y1)) = domain.bounding_box();
    let mut min_lambda = f64::INFINITY;
    let mut min_center = (x0, y0);
    let mut scanned = 0usize;
    let nx = (((x1 - x0) + 2.0 * r) / stride).ceil() as usize + 1;
    let ny = (((y1 - y0) + 2.0 * r) / stride).ceil() as usize + 1;
    for jy in 0..ny {
        for jx in 0..nx {
            let c = (
                x0 - r + jx as f64 * stride,
                y0 - r + jy as f64 * stride,
            );
            let cut = Arc::new(intersect_ball(domain, c, r)?);
            if cut.is_empty() {
                continue;
            }
            scanned += 1;
            let lam = domain_lambda(&cut)?;
            if lam < min_lambda {
                min_lambda = lam;
                min_center = c;
            }
        }
    }
    let satisfied = min_lambda <= 1.05 * bound;
    Ok(LiebScan {
        min_center,
        min_lambda,
        bound,
        satisfied,
        lambda_domain,
        centers_scanned: scanned,
    })
}

/// Localized eigenvalue map: per-sample eigenvalues of the connected
/// component through the sample of the ball `B_{2r}` truncation, spread to
/// the remaining cells by nearest sample.
#[derive(Debug, Clone)]
pub struct LocalEigenvalueMap {
    /// Sample cells `(i, j)` with their local eigenvalues.
    pub samples: Vec<((usize, usize), f64)>,
    /// Per-masked-cell values, nearest-sample filled.
    pub filled: Field,
}

pub fn local_eigenvalue_map(
    domain: &Arc<DomainModel>,
    r: f64,
    stride: f64,
) -> Result<LocalEigenvalueMap, EigenError> {
    let grid = *domain.grid();
    if !(stride >= grid.h) {
        return Err(EigenError::BadStride { stride, r });
    }
    let step = (stride / grid.h).round().max(1.0) as usize;
    let offset = step / 2;
    let mut samples = Vec::new();
    for (i, j) in domain.masked_cells() {
        if i % step == offset && j % step == offset {
            samples.push((i, j));
        }
    }
    if samples.is_empty() {
        // Domain thinner than the stride: fall back to the first cell.
        let (i, j) = domain.masked_cells().next().expect("nonempty");
        samples.push((i, j));
    }
    let mut sample_values = Vec::with_capacity(samples.len());
    for &(i, j) in &samples {
        let center = grid.cell_center(i, j);
        let lam = local_lambda(domain, center, 2.0 * r)?;
        sample_values.push(((i, j), lam));
    }
    let filled = fill_nearest(domain, &sample_values);
    Ok(LocalEigenvalueMap {
        samples: sample_values,
        filled,
    })
}

/// Eigenvalue of the connected component through `center` of the ball
/// truncation of radius `radius`.
fn local_lambda(
    domain: &Arc<DomainModel>,
    center: (f64, f64),
    radius: f64,
) -> Result<f64, EigenError> {
    let cut = intersect_ball(domain, center, radius)?;
    let comp = Arc::new(connected_component(&cut, center)?);
    domain_lambda(&comp)
}

/// Multi-source BFS fill over the mask graph; earlier samples win ties.
fn fill_nearest(domain: &Arc<DomainModel>, samples: &[((usize, usize), f64)]) -> Field {
    let grid = *domain.grid();
    let n = domain.interior_count();
    let mut value = vec![f64::NAN; n];
    let mut queue = VecDeque::new();
    for &((i, j), lam) in samples {
        let k = domain.unknown_index(i, j).expect("sample is masked");
        if value[k].is_nan() {
            value[k] = lam;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let (i, j) = domain.cell_of_unknown(k);
        for face in crate::geometry::FACES {
            let (di, dj) = face.step();
            let ni = i as i64 + di;
            let nj = j as i64 + dj;
            if ni < 0 || nj < 0 || ni as usize >= grid.nx || nj as usize >= grid.ny {
                continue;
            }
            if let Some(u) = domain.unknown_index(ni as usize, nj as usize) {
                if value[u].is_nan() {
                    value[u] = value[k];
                    queue.push_back(u);
                }
            }
        }
    }
    // Unreachable cells (isolated components without samples) get +inf;
    // they cannot certify as wide.
    for v in value.iter_mut() {
        if v.is_nan() {
            *v = f64::INFINITY;
        }
    }
    Field::new(Arc::clone(domain), value).expect("sizes match")
}

/// Cover of the domain into a wide part (all local limits below `mu`) and a
/// thin part (eigenvalue above `mu`), with the thin part verified.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Grid-sized mask of the wide ("ample") part.
    pub ample_mask: Vec<bool>,
    /// Grid-sized mask of the thin ("narrow") part.
    pub narrow_mask: Vec<bool>,
    pub mu: f64,
    pub delta: f64,
    pub probe_radius: f64,
    /// Verified eigenvalue of the narrow submodel (+inf when empty).
    pub narrow_lambda: f64,
}

/// Splits the domain by thresholding the local eigenvalue map at
/// `mu + delta`: cells above it form the narrow seed, dilated one cell;
/// the wide part is the union of `2r`-ball components through the
/// remaining sample points, dilated one cell. The parts overlap. The
/// narrow submodel, cut with absorbing faces, is verified to satisfy
/// `lambda > mu`.
pub fn ample_narrow_decompose(
    domain: &Arc<DomainModel>,
    mu: f64,
    delta: f64,
    r: f64,
) -> Result<DecompositionResult, EigenError> {
    if !(mu > 0.0) || !(delta > 0.0) {
        return Err(EigenError::BadDecomposition { mu, delta });
    }
    let disk_bound = radial::unit_disk_lambda() / (r * r);
    if !(disk_bound < delta) {
        return Err(EigenError::ProbeRadiusTooSmall {
            r,
            bound: disk_bound,
            delta,
        });
    }
    let grid = *domain.grid();
    let stride = (r / 4.0).max(grid.h);
    let map = local_eigenvalue_map(domain, r, stride)?;
    let threshold = mu + delta;

    let mut narrow0 = vec![false; grid.cell_count()];
    for (k, (i, j)) in domain.masked_cells().enumerate() {
        if map.filled.values()[k] > threshold {
            narrow0[grid.index(i, j)] = true;
        }
    }

    // Wide part: union of 2r-ball components through below-threshold
    // samples, then through any still-uncovered below-threshold cell.
    let k_radius = 2.0 * r;
    let mut ample0 = vec![false; grid.cell_count()];
    let add_component = |seed: (usize, usize), ample0: &mut Vec<bool>| -> Result<(), EigenError> {
        let center = grid.cell_center(seed.0, seed.1);
        let cut = intersect_ball(domain, center, k_radius)?;
        let comp = connected_component(&cut, center)?;
        for (i, j) in comp.masked_cells() {
            ample0[grid.index(i, j)] = true;
        }
        Ok(())
    };
    for &((i, j), lam) in &map.samples {
        if lam <= threshold {
            add_component((i, j), &mut ample0)?;
        }
    }
    for (k, (i, j)) in domain.masked_cells().enumerate() {
        let c = grid.index(i, j);
        if map.filled.values()[k] <= threshold && !ample0[c] && !narrow0[c] {
            add_component((i, j), &mut ample0)?;
        }
    }

    let narrow_mask = domain.dilate_within(&narrow0);
    let ample_mask = domain.dilate_within(&ample0);

    // Verify the narrow part: faces cut from the rest of the domain are
    // absorbing, original boundary faces keep their sigma.
    let narrow_lambda = if narrow_mask.iter().any(|&b| b) {
        let lookup = domain.sigma_lookup();
        let sub = DomainModel::from_mask(grid, narrow_mask.clone(), |i, j, f| {
            *lookup.get(&(i as u32, j as u32, f)).unwrap_or(&0.0)
        })?;
        let lam = domain_lambda(&Arc::new(sub))?;
        if !(lam > mu) {
            return Err(EigenError::NarrowNotNarrow { lambda: lam, mu });
        }
        lam
    } else {
        f64::INFINITY
    };

    Ok(DecompositionResult {
        ample_mask,
        narrow_mask,
        mu,
        delta,
        probe_radius: r,
        narrow_lambda,
    })
}

/// Eigenvalues of windowed recentered components at each probe center, a
/// finite stand-in for the spectrum of translation limits.
pub fn spectrum_probe(
    domain: &Arc<DomainModel>,
    centers: &[(f64, f64)],
    window_radius: f64,
) -> Result<Vec<((f64, f64), f64)>, EigenError> {
    let mut out = Vec::with_capacity(centers.len());
    for &c in centers {
        let window = Arc::new(translate_window(domain, c, window_radius)?);
        let lam = domain_lambda(&window)?;
        out.push((c, lam));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk, build_rectangle, build_rectangle_sides, build_strip};
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_square_ground_state() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 1.0 / 32.0, 0.0).unwrap());
        let op = assemble(&d).unwrap();
        let pair = principal_eigenpair(&op).unwrap();
        let exact = 2.0 * PI * PI;
        assert!((pair.lambda - exact).abs() / exact < 0.01, "{}", pair.lambda);
        assert!(pair.phi.min() > 0.0);
        assert!((pair.phi.sup_norm() - 1.0).abs() < 1e-12);
        assert!(pair.residual <= 1e-8 * op.scale());
        // Consistency with the variational quotient.
        let q = crate::operator::rayleigh_quotient(&d, &pair.phi).unwrap();
        assert!((q - pair.lambda).abs() <= 1e-6 * pair.lambda);
    }

    #[test]
    fn reflecting_square_is_kernel() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.125, 1.0).unwrap());
        let op = assemble(&d).unwrap();
        let pair = principal_eigenpair(&op).unwrap();
        assert!(pair.lambda.abs() <= 1e-10, "lambda = {}", pair.lambda);
        assert!(pair.phi.max() - pair.phi.min() < 1e-6);
    }

    #[test]
    fn robin_interval_matches_transcendental_root() {
        // Thin rectangle with reflecting long sides acts as the unit
        // interval with absorption parameter 1/2 at both ends. The exact
        // eigenvalue is mu^2 where mu tan(mu / 2) = 1.
        let d = Arc::new(
            build_rectangle_sides(1.0, 3.0 / 32.0, 1.0 / 32.0, [0.5, 0.5, 1.0, 1.0]).unwrap(),
        );
        let op = assemble(&d).unwrap();
        let pair = principal_eigenpair(&op).unwrap();
        let mu = bisect_mu();
        let exact = mu * mu;
        assert!(
            (pair.lambda - exact).abs() / exact < 0.01,
            "lambda {} vs {}",
            pair.lambda,
            exact
        );
    }

    fn bisect_mu() -> f64 {
        // Root of mu tan(mu/2) = 1 bracketed in (1.2, 1.4).
        let f = |mu: f64| mu * (mu / 2.0).tan() - 1.0;
        let (mut lo, mut hi) = (1.2, 1.4);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn strip_eigenvalue_near_formula() {
        let d = Arc::new(build_strip(20.0, 1.0, 1.0 / 16.0, 0.0).unwrap());
        let op = assemble(&d).unwrap();
        let pair = principal_eigenpair(&op).unwrap();
        let exact = PI * PI;
        assert!(
            (pair.lambda - exact).abs() / exact < 0.01,
            "{}",
            pair.lambda
        );
    }

    #[test]
    fn small_disk_matches_radial_solver() {
        let d = Arc::new(build_disk(1.0, 1.0 / 16.0, 0.0).unwrap());
        let op = assemble(&d).unwrap();
        let pair = principal_eigenpair(&op).unwrap();
        let reference = radial::unit_disk_lambda();
        assert!(
            (pair.lambda - reference).abs() / reference < 0.05,
            "{} vs {}",
            pair.lambda,
            reference
        );
    }

    #[test]
    fn empty_domain_convention() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.125, 0.0).unwrap());
        let empty = Arc::new(intersect_ball(&d, (50.0, 50.0), 1.0).unwrap());
        assert!(empty.is_empty());
        assert_eq!(domain_lambda(&empty).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exhaustion_is_monotone() {
        let d = Arc::new(build_strip(20.0, 1.0, 1.0 / 8.0, 0.0).unwrap());
        let curve = exhaustion_curve(&d, (10.0, 0.5), &[2.0, 4.0, 8.0]).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].lambda <= w[0].lambda + 1e-9);
        }
        assert!(exhaustion_curve(&d, (10.0, 0.5), &[4.0, 2.0]).is_err());
    }

    #[test]
    fn spectrum_probe_strip_segment() {
        let d = Arc::new(build_strip(20.0, 1.0, 1.0 / 8.0, 0.0).unwrap());
        let probes = spectrum_probe(&d, &[(10.0, 0.5)], 4.0).unwrap();
        let lam = probes[0].1;
        // Window of half-length 4: cap inflation of about pi^2/64.
        let expected = PI * PI * (1.0 + 1.0 / 64.0);
        assert!((lam - expected).abs() / expected < 0.05, "{lam}");
    }
}
