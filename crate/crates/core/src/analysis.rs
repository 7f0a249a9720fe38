//! Transverse Fourier analysis of tail solutions on strip-like regions:
//! mode amplitudes, algebraic decay fits, and the reduced second-order
//! balance they satisfy.

use crate::error::AnalysisError;
use crate::field::Field;

/// Fourier profile of a field over a rectangular tail: per-column mode
/// amplitudes against the discrete sine basis of the cross-section.
#[derive(Debug, Clone)]
pub struct TailProfile {
    /// Column abscissae (cell centers).
    pub x_samples: Vec<f64>,
    /// `alpha[k - 1][ix]` is the amplitude of mode `k` at column `ix`.
    pub alpha: Vec<Vec<f64>>,
    /// Effective cross-section width (whole cells).
    pub width: f64,
    /// Quadratic interaction coefficient `B <phi_1^2, phi_1>`
    /// `= B (8 sqrt 2) / (3 pi sqrt L)`.
    pub zeta: f64,
    /// Worst relative Parseval defect over the analyzed columns.
    pub parseval_worst: f64,
}

/// Interval on the tail axis.
#[derive(Debug, Clone, Copy)]
pub struct XWindow {
    pub x0: f64,
    pub x1: f64,
}

impl XWindow {
    pub fn new(x0: f64, x1: f64) -> Self {
        XWindow { x0, x1 }
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.x1
    }
}

/// Analytic value of `<phi_1^2, phi_1>` for the unit-sup sine basis:
/// `(2/L)^{3/2} * 4 L / (3 pi) = 8 sqrt 2 / (3 pi sqrt L)`.
pub fn sine_cubed_integral(width: f64) -> f64 {
    8.0 * std::f64::consts::SQRT_2 / (3.0 * std::f64::consts::PI * width.sqrt())
}

/// Decomposes the columns of `u` with centers in `tail` against the
/// discrete sine basis `sqrt(2/L) sin(pi k y / L)` of the cross-section.
/// The tail region must be a clean rectangle: every column must hold the
/// same contiguous span of masked cells.
pub fn transverse_fourier(
    u: &Field,
    tail: XWindow,
    quad_coeff: f64,
    k_max: usize,
) -> Result<TailProfile, AnalysisError> {
    let domain = u.domain();
    let grid = *domain.grid();
    let h = grid.h;
    // Columns whose centers fall inside the window.
    let mut columns: Vec<usize> = Vec::new();
    for i in 0..grid.nx {
        let x = grid.origin.0 + (i as f64 + 0.5) * h;
        if tail.contains(x) {
            columns.push(i);
        }
    }
    if columns.is_empty() {
        return Err(AnalysisError::EmptyWindow {
            x0: tail.x0,
            x1: tail.x1,
        });
    }
    // Shared contiguous row span.
    let mut span: Option<(usize, usize)> = None;
    for &i in &columns {
        let mut lo = None;
        let mut hi = None;
        for j in 0..grid.ny {
            if domain.is_masked(i, j) {
                if lo.is_none() {
                    lo = Some(j);
                }
                hi = Some(j);
            }
        }
        let (lo, hi) = match (lo, hi) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(AnalysisError::NotRectangular(format!(
                    "column {i} has no masked cells"
                )))
            }
        };
        for j in lo..=hi {
            if !domain.is_masked(i, j) {
                return Err(AnalysisError::NotRectangular(format!(
                    "column {i} has a gap at row {j}"
                )));
            }
        }
        match span {
            None => span = Some((lo, hi)),
            Some(s) if s == (lo, hi) => {}
            Some(s) => {
                return Err(AnalysisError::NotRectangular(format!(
                    "column {i} spans rows {lo}..={hi}, expected {}..={}",
                    s.0, s.1
                )))
            }
        }
    }
    let (j_lo, j_hi) = span.expect("columns checked nonempty");
    let n_rows = j_hi - j_lo + 1;
    let width = n_rows as f64 * h;
    let k_max = k_max.min(n_rows);
    // Basis sampled at local midpoints y_j = (j + 1/2) h; midpoint sums of
    // sine products are exactly orthogonal on this grid.
    let mut basis = vec![vec![0.0; n_rows]; k_max];
    for (k, row) in basis.iter_mut().enumerate() {
        for (jj, value) in row.iter_mut().enumerate() {
            let y = (jj as f64 + 0.5) * h;
            *value = (2.0 / width).sqrt()
                * (std::f64::consts::PI * (k + 1) as f64 * y / width).sin();
        }
    }
    let mut x_samples = Vec::with_capacity(columns.len());
    let mut alpha = vec![Vec::with_capacity(columns.len()); k_max];
    let mut parseval_worst = 0.0f64;
    for &i in &columns {
        let x = grid.origin.0 + (i as f64 + 0.5) * h;
        x_samples.push(x);
        let mut col = Vec::with_capacity(n_rows);
        for j in j_lo..=j_hi {
            col.push(u.at_cell(i, j).expect("masked in span"));
        }
        let mass: f64 = col.iter().map(|&v| v * v).sum::<f64>() * h;
        let mut sum_sq = 0.0;
        for (k, row) in basis.iter().enumerate() {
            let a: f64 = col
                .iter()
                .zip(row)
                .map(|(&v, &b)| v * b)
                .sum::<f64>()
                * h;
            alpha[k].push(a);
            sum_sq += a * a;
        }
        if mass > 0.0 {
            parseval_worst = parseval_worst.max((sum_sq - mass).abs() / mass);
        }
    }
    Ok(TailProfile {
        x_samples,
        alpha,
        width,
        zeta: quad_coeff * sine_cubed_integral(width),
        parseval_worst,
    })
}

/// Decay fit of the leading amplitude.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Coefficient of the fixed-slope fit `alpha_1 = c / x^2`.
    pub c_fit: f64,
    /// Predicted coefficient `6 / zeta`.
    pub c_theory: f64,
    pub rel_err: f64,
    /// Slope of the free log-log fit (should be near -2).
    pub free_slope: f64,
    pub free_c: f64,
}

/// Fits `alpha_1(x) = c / x^2` over the window in log-log coordinates with
/// the slope pinned at -2, plus a free-slope fit for diagnostics.
pub fn decay_fit(profile: &TailProfile, window: XWindow) -> Result<DecayFit, AnalysisError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ix, &x) in profile.x_samples.iter().enumerate() {
        if window.contains(x) {
            let a = profile.alpha[0][ix];
            if !(a > 0.0) {
                return Err(AnalysisError::NonpositiveAlpha { min: a });
            }
            xs.push(x.ln());
            ys.push(a.ln());
        }
    }
    if xs.len() < 3 {
        return Err(AnalysisError::EmptyWindow {
            x0: window.x0,
            x1: window.x1,
        });
    }
    let n = xs.len() as f64;
    // Fixed slope -2: ln c = mean(ln a + 2 ln x).
    let lnc: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&lx, &ly)| ly + 2.0 * lx)
        .sum::<f64>()
        / n;
    let c_fit = lnc.exp();
    // Free slope least squares.
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let free_slope = sxy / sxx;
    let free_c = (my - free_slope * mx).exp();
    let c_theory = 6.0 / profile.zeta;
    Ok(DecayFit {
        c_fit,
        c_theory,
        rel_err: (c_fit - c_theory).abs() / c_theory,
        free_slope,
        free_c,
    })
}

/// Maximum relative defect of the reduced balance
/// `alpha_1'' = zeta alpha_1^2` over the window, with second differences
/// taken on a widened stencil to suppress rounding noise.
pub fn ode_shadow(profile: &TailProfile, window: XWindow) -> Result<f64, AnalysisError> {
    let xs = &profile.x_samples;
    if xs.len() < 3 {
        return Err(AnalysisError::TooFewSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    let dx = xs[1] - xs[0];
    // Stencil spacing of about half a unit.
    let m = ((0.5 / dx).round() as usize).max(1);
    let s = m as f64 * dx;
    let a = &profile.alpha[0];
    let mut worst: f64 = 0.0;
    let mut seen = 0usize;
    for ix in m..xs.len() - m {
        if !window.contains(xs[ix]) {
            continue;
        }
        let dd = (a[ix + m] - 2.0 * a[ix] + a[ix - m]) / (s * s);
        let rhs = profile.zeta * a[ix] * a[ix];
        if rhs <= 0.0 {
            return Err(AnalysisError::NonpositiveAlpha { min: a[ix] });
        }
        worst = worst.max((dd - rhs).abs() / rhs);
        seen += 1;
    }
    if seen == 0 {
        return Err(AnalysisError::EmptyWindow {
            x0: window.x0,
            x1: window.x1,
        });
    }
    Ok(worst)
}

/// Maximum variation of normalized column shapes over the central half of
/// the window: each column is scaled to sup 1, then compared to the mean
/// shape. Small values certify that the profile factorizes.
pub fn cylinder_symmetry_check(
    u: &Field,
    tail: XWindow,
    k_max_hint: usize,
) -> Result<f64, AnalysisError> {
    let quarter = (tail.x1 - tail.x0) / 4.0;
    let central = XWindow::new(tail.x0 + quarter, tail.x1 - quarter);
    let shapes = normalized_columns(u, central)?;
    let n_rows = shapes[0].len();
    let mut mean = vec![0.0; n_rows];
    for col in &shapes {
        for (m, &v) in mean.iter_mut().zip(col) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= shapes.len() as f64;
    }
    let mut worst: f64 = 0.0;
    for col in &shapes {
        for (j, &v) in col.iter().enumerate() {
            worst = worst.max((v - mean[j]).abs());
        }
    }
    let _ = k_max_hint;
    Ok(worst)
}

/// Sup distance of each normalized column in the window to the normalized
/// sine profile of the cross-section; returns the worst column.
pub fn column_sine_distance(u: &Field, window: XWindow) -> Result<f64, AnalysisError> {
    let shapes = normalized_columns(u, window)?;
    let n_rows = shapes[0].len();
    let mut sine = vec![0.0; n_rows];
    for (j, value) in sine.iter_mut().enumerate() {
        *value = (std::f64::consts::PI * (j as f64 + 0.5) / n_rows as f64).sin();
    }
    let sup = sine.iter().cloned().fold(0.0f64, f64::max);
    for v in sine.iter_mut() {
        *v /= sup;
    }
    let mut worst: f64 = 0.0;
    for col in &shapes {
        for (j, &v) in col.iter().enumerate() {
            worst = worst.max((v - sine[j]).abs());
        }
    }
    Ok(worst)
}

/// Columns of `u` inside the window, each normalized to sup 1. Reuses the
/// rectangularity validation of [`transverse_fourier`].
fn normalized_columns(u: &Field, window: XWindow) -> Result<Vec<Vec<f64>>, AnalysisError> {
    let domain = u.domain();
    let grid = *domain.grid();
    let h = grid.h;
    let mut span: Option<(usize, usize)> = None;
    let mut cols = Vec::new();
    for i in 0..grid.nx {
        let x = grid.origin.0 + (i as f64 + 0.5) * h;
        if !window.contains(x) {
            continue;
        }
        let mut lo = None;
        let mut hi = None;
        for j in 0..grid.ny {
            if domain.is_masked(i, j) {
                if lo.is_none() {
                    lo = Some(j);
                }
                hi = Some(j);
            }
        }
        let (lo, hi) = match (lo, hi) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        match span {
            None => span = Some((lo, hi)),
            Some(s) if s == (lo, hi) => {}
            Some(_) => {
                return Err(AnalysisError::NotRectangular(format!(
                    "column {i} spans different rows"
                )))
            }
        }
        let mut col = Vec::with_capacity(hi - lo + 1);
        for j in lo..=hi {
            match u.at_cell(i, j) {
                Some(v) => col.push(v),
                None => {
                    return Err(AnalysisError::NotRectangular(format!(
                        "column {i} has a gap at row {j}"
                    )))
                }
            }
        }
        let sup = col.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if sup > 0.0 {
            for v in col.iter_mut() {
                *v /= sup;
            }
        }
        cols.push(col);
    }
    if cols.is_empty() {
        return Err(AnalysisError::EmptyWindow {
            x0: window.x0,
            x1: window.x1,
        });
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::geometry::build_rectangle;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn sine_cubed_matches_quadrature() {
        for &width in &[1.0, PI, 2.5] {
            let analytic = sine_cubed_integral(width);
            // Simpson quadrature of (2/L)^{3/2} sin^3(pi y / L).
            let n = 4000;
            let h = width / n as f64;
            let f = |y: f64| (2.0 / width).powf(1.5) * (PI * y / width).sin().powi(3);
            let mut s = f(0.0) + f(width);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(k as f64 * h);
            }
            let quad = s * h / 3.0;
            assert!(
                (quad - analytic).abs() < 1e-8,
                "width {width}: {quad} vs {analytic}"
            );
        }
    }

    #[test]
    fn orthonormal_modes_are_recovered() {
        let width = 1.0;
        let d = Arc::new(build_rectangle(4.0, width, 1.0 / 32.0, 0.0).unwrap());
        let u1 = Field::from_fn(&d, |_, y| (PI * y / width).sin());
        let p = transverse_fourier(&u1, XWindow::new(0.5, 3.5), 1.0, 5).unwrap();
        let expected = (width / 2.0f64).sqrt();
        for (ix, _) in p.x_samples.iter().enumerate() {
            assert!((p.alpha[0][ix] - expected).abs() < 1e-3);
            for k in 1..5 {
                assert!(p.alpha[k][ix].abs() < 1e-10, "mode {k} leak");
            }
        }
        // Second mode input lands in the second coefficient.
        let u2 = Field::from_fn(&d, |_, y| (2.0 * PI * y / width).sin());
        let p2 = transverse_fourier(&u2, XWindow::new(0.5, 3.5), 1.0, 5).unwrap();
        for (ix, _) in p2.x_samples.iter().enumerate() {
            assert!(p2.alpha[0][ix].abs() < 1e-10);
            assert!((p2.alpha[1][ix] - expected).abs() < 1e-3);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        // Midpoint sums of the discrete sine basis are exactly orthonormal.
        let n_rows = 31;
        let h = 0.1;
        let width = n_rows as f64 * h;
        let phi = |k: usize, j: usize| {
            (2.0 / width).sqrt() * (PI * k as f64 * (j as f64 + 0.5) * h / width).sin()
        };
        for k in 1..=5 {
            for m in 1..=5 {
                let mut s = 0.0;
                for j in 0..n_rows {
                    s += phi(k, j) * phi(m, j) * h;
                }
                let expected = if k == m { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-6, "gram[{k}][{m}] = {s}");
            }
        }
    }

    #[test]
    fn synthetic_decay_fits_exactly() {
        // Width chosen so cells tile it exactly.
        let width = 2.0;
        let d = Arc::new(build_rectangle(40.0, width, 0.1, 0.0).unwrap());
        let zeta = sine_cubed_integral(width); // B = 1
        let u = Field::from_fn(&d, |x, y| {
            let xx = x.max(1.0);
            6.0 / (zeta * xx * xx) * (2.0 / width).sqrt() * (PI * y / width).sin()
        });
        let p = transverse_fourier(&u, XWindow::new(5.0, 39.0), 1.0, 3).unwrap();
        let fit = decay_fit(&p, XWindow::new(6.0, 35.0)).unwrap();
        assert!(fit.rel_err < 2e-3, "rel err {}", fit.rel_err);
        assert!((fit.free_slope + 2.0).abs() < 0.02, "slope {}", fit.free_slope);
        // The algebraic identity (6 / (zeta x^2))'' = zeta (6 / (zeta x^2))^2
        // makes the balance defect vanish up to discretization.
        let defect = ode_shadow(&p, XWindow::new(8.0, 30.0)).unwrap();
        assert!(defect < 2e-2, "defect {defect}");
    }

    #[test]
    fn symmetry_check_ignores_amplitude() {
        let width = 1.0;
        let d = Arc::new(build_rectangle(10.0, width, 1.0 / 16.0, 0.0).unwrap());
        // Linear-in-x amplitude times a fixed shape: zero shape variation.
        let u = Field::from_fn(&d, |x, y| (1.0 + x) * (PI * y).sin());
        let v = cylinder_symmetry_check(&u, XWindow::new(1.0, 9.0), 5).unwrap();
        assert!(v < 1e-12, "variation {v}");
        let dist = column_sine_distance(&u, XWindow::new(4.0, 6.0)).unwrap();
        assert!(dist < 1e-3, "sine distance {dist}");
    }

    #[test]
    fn parseval_holds_for_smooth_columns() {
        let width = 1.0;
        let d = Arc::new(build_rectangle(4.0, width, 1.0 / 64.0, 0.0).unwrap());
        let u = Field::from_fn(&d, |x, y| {
            (PI * y).sin() * (1.0 + 0.2 * x) + 0.1 * (2.0 * PI * y).sin()
        });
        let p = transverse_fourier(&u, XWindow::new(0.5, 3.5), 1.0, 8).unwrap();
        assert!(p.parseval_worst < 0.01, "parseval {}", p.parseval_worst);
    }
}
