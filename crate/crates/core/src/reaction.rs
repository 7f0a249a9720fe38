//! Reaction nonlinearities: presets, classification, and the energy
//! functional whose critical points are steady states.
//!
//! Three nested classes are distinguished by sampling:
//! positive (`f > 0` on `(0,1)` with `f'(0) > 0`), weak-KPP
//! (`f(s) <= f'(0) s` on `[0,1]`), and strong-KPP (`f(s)/s` strictly
//! decreasing on `(0,1]`).

use std::fmt;
use std::sync::Arc;

use crate::error::ReactionError;
use crate::field::Field;
use crate::geometry::DomainModel;
use crate::operator::energy_form;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Classification outcome; a sampling verdict, not a proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionClass {
    Positive,
    WeakKpp,
    StrongKpp,
    Unclassified,
}

impl fmt::Display for ReactionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReactionClass::Positive => "positive",
            ReactionClass::WeakKpp => "weak-KPP",
            ReactionClass::StrongKpp => "strong-KPP",
            ReactionClass::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// A reaction with its recorded linearization slope, quadratic coefficient
/// (when the expansion `f(s) = f'(0) s - B s^2 + O(s^3)` applies), class
/// tag, and antiderivative for energy computations.
#[derive(Clone)]
pub struct ReactionSpec {
    name: String,
    f: RealFn,
    antiderivative: RealFn,
    fprime0: f64,
    quad_coeff: Option<f64>,
    class_tag: ReactionClass,
}

impl fmt::Debug for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionSpec")
            .field("name", &self.name)
            .field("fprime0", &self.fprime0)
            .field("quad_coeff", &self.quad_coeff)
            .field("class_tag", &self.class_tag)
            .finish()
    }
}

impl ReactionSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// Antiderivative `H(s)` with `H(0) = 0`, `H' = f`.
    #[inline]
    pub fn antiderivative(&self, s: f64) -> f64 {
        (self.antiderivative)(s)
    }

    pub fn fprime0(&self) -> f64 {
        self.fprime0
    }

    pub fn quad_coeff(&self) -> Option<f64> {
        self.quad_coeff
    }

    pub fn class_tag(&self) -> ReactionClass {
        self.class_tag
    }
}

/// The logistic reaction `f(s) = s (1 - s)`.
pub fn logistic() -> ReactionSpec {
    ReactionSpec {
        name: "logistic".into(),
        f: Arc::new(|s| s * (1.0 - s)),
        antiderivative: Arc::new(|s| s * s / 2.0 - s * s * s / 3.0),
        fprime0: 1.0,
        quad_coeff: Some(1.0),
        class_tag: ReactionClass::StrongKpp,
    }
}

/// The zero reaction; flows under it are pure heat flows.
pub fn zero() -> ReactionSpec {
    ReactionSpec {
        name: "zero".into(),
        f: Arc::new(|_| 0.0),
        antiderivative: Arc::new(|_| 0.0),
        fprime0: 0.0,
        quad_coeff: None,
        class_tag: ReactionClass::Unclassified,
    }
}

/// Cubic test reaction `f(s) = s (1 - s) (1 + s / 2)`.
pub fn cubic() -> ReactionSpec {
    ReactionSpec {
        name: "cubic".into(),
        f: Arc::new(|s| s * (1.0 - s) * (1.0 + s / 2.0)),
        // f(s) = s - s^2/2 - s^3/2, H = s^2/2 - s^3/6 - s^4/8.
        antiderivative: Arc::new(|s| s * s / 2.0 - s * s * s / 6.0 - s * s * s * s / 8.0),
        fprime0: 1.0,
        quad_coeff: Some(0.5),
        class_tag: ReactionClass::StrongKpp,
    }
}

/// C1 ramp blend: equals `max(t, 0)` outside `(-eps, eps)` and the quadratic
/// `(t + eps)^2 / (4 eps)` inside, which dominates the ramp.
#[inline]
fn smooth_ramp(t: f64, eps: f64) -> f64 {
    if t <= -eps {
        0.0
    } else if t >= eps {
        t
    } else {
        (t + eps) * (t + eps) / (4.0 * eps)
    }
}

/// Antiderivative of [`smooth_ramp`] in `t`, zero at `-eps`.
#[inline]
fn smooth_ramp_int(t: f64, eps: f64) -> f64 {
    if t <= -eps {
        0.0
    } else if t >= eps {
        // Integral over the blend window plus the ramp part.
        let window = (2.0 * eps).powi(3) / (12.0 * eps);
        window + (t * t - eps * eps) / 2.0
    } else {
        (t + eps).powi(3) / (12.0 * eps)
    }
}

/// Growth piece supported on `[0, 1/2]` after smoothing: slope `2 a` at the
/// origin. sup of the hump quotient `h(s)/s`, used for the slope condition.
fn ignition_sup_quotient(amplitude_h: f64) -> f64 {
    // 54 a (s - 1/2)^2 (1 - s) / s on (1/2, 1]; dense scan.
    let mut sup: f64 = 0.0;
    let n = 20_000;
    for k in 1..=n {
        let s = 0.5 + 0.5 * k as f64 / n as f64;
        let q = 54.0 * amplitude_h * (s - 0.5) * (s - 0.5) * (1.0 - s) / s;
        sup = sup.max(q);
    }
    sup
}

/// Composite reaction with two competing scales: a restricted growth piece
/// `g(s) = 4 a_g s (1/2 - s)` on `[0, 1/2]` and an ignition hump
/// `h(s) = 54 a_h (s - 1/2)^2 (1 - s)` past `1/2` (negative beyond 1), with
/// the corner of `g` at `s = 1/2` replaced by a C1 quadratic blend of width
/// `epsilon_smooth`. The blend only increases the reaction and keeps it
/// under the tangent line `f'(0) s`, so the result is weak-KPP but not
/// strong-KPP.
///
/// The returned spec records `f'(0) = 2 a_g`. Construction fails when the
/// slope condition `f'(0) > sup h(s)/s` cannot hold.
pub fn weak_kpp_composite(
    amplitude_g: f64,
    amplitude_h: f64,
    epsilon_smooth: f64,
) -> Result<ReactionSpec, ReactionError> {
    if !(amplitude_g > 0.0) || !(amplitude_h > 0.0) {
        return Err(ReactionError::BadAmplitudes {
            g: amplitude_g,
            h: amplitude_h,
        });
    }
    if !(epsilon_smooth > 0.0) || epsilon_smooth > 0.1 {
        return Err(ReactionError::BadSmoothing(epsilon_smooth));
    }
    let slope = 2.0 * amplitude_g;
    let ignition_quotient = ignition_sup_quotient(amplitude_h);
    if !(slope > ignition_quotient) {
        return Err(ReactionError::SlopeCondition {
            slope,
            ignition_quotient,
        });
    }
    // Halve the smoothing width until the dense weak-KPP check passes;
    // the blend satisfies it by construction, so this is a safety loop.
    let mut eps = epsilon_smooth;
    for _ in 0..20 {
        let spec = composite_with(amplitude_g, amplitude_h, eps);
        if verify_weak(&spec) {
            return Ok(spec);
        }
        eps /= 2.0;
    }
    Err(ReactionError::BadSmoothing(epsilon_smooth))
}

fn composite_with(a_g: f64, a_h: f64, eps: f64) -> ReactionSpec {
    let g = move |s: f64| 4.0 * a_g * s * smooth_ramp(0.5 - s, eps);
    let hump = move |s: f64| {
        if s <= 0.5 {
            0.0
        } else {
            54.0 * a_h * (s - 0.5) * (s - 0.5) * (1.0 - s)
        }
    };
    let f = move |s: f64| g(s) + hump(s);
    // Antiderivative of the growth piece by the substitution t = 1/2 - u:
    //   int_0^s 4 a u r(1/2 - u) du
    //     = 4 a int_{1/2 - s}^{1/2} (1/2 - t) r(t) dt
    //     = 2 a [Rint(1/2) - Rint(1/2 - s)] - 4 a [Tint(1/2) - Tint(1/2 - s)]
    // with Rint, Tint the antiderivatives of r and t r(t).
    let rint = move |t: f64| smooth_ramp_int(t, eps);
    let tint = move |t: f64| {
        if t <= -eps {
            0.0
        } else if t >= eps {
            window_tint(eps) + (t * t * t - eps * eps * eps) / 3.0
        } else {
            partial_window_tint(t, eps)
        }
    };
    let h_g = move |s: f64| {
        let lo = 0.5 - s;
        2.0 * a_g * (rint(0.5) - rint(lo)) - 4.0 * a_g * (tint(0.5) - tint(lo))
    };
    let h_hump = move |s: f64| {
        if s <= 0.5 {
            0.0
        } else {
            // int_{1/2}^{s} 54 a_h (u - 1/2)^2 (1 - u) du, t = u - 1/2.
            let t = s - 0.5;
            54.0 * a_h * (t * t * t / 6.0 - t * t * t * t / 4.0)
        }
    };
    let antiderivative = move |s: f64| h_g(s) + h_hump(s);
    ReactionSpec {
        name: format!("weak-kpp-composite(g={a_g}, h={a_h}, eps={eps})"),
        f: Arc::new(f),
        antiderivative: Arc::new(antiderivative),
        fprime0: 2.0 * a_g,
        quad_coeff: Some(4.0 * a_g),
        class_tag: ReactionClass::WeakKpp,
    }
}

/// Integral of `t * smooth_ramp(t, eps)` over the full blend window.
fn window_tint(eps: f64) -> f64 {
    // Substituting u = t + eps over [0, 2 eps]:
    // int (u - eps) u^2 / (4 eps) du = [u^4/4 - eps u^3/3] / (4 eps).
    let u = 2.0 * eps;
    (u.powi(4) / 4.0 - eps * u.powi(3) / 3.0) / (4.0 * eps)
}

/// Same integral truncated at `t` inside the window.
fn partial_window_tint(t: f64, eps: f64) -> f64 {
    let u = t + eps;
    (u.powi(4) / 4.0 - eps * u.powi(3) / 3.0) / (4.0 * eps)
}

fn verify_weak(spec: &ReactionSpec) -> bool {
    let grid = sample_grid(10_000);
    let fp = spec.fprime0();
    grid.iter().all(|&s| spec.f(s) <= fp * s + 1e-10)
}

/// Geometric plus uniform sampling grid in `(0, 1]`.
fn sample_grid(count: usize) -> Vec<f64> {
    let n_geo = count / 3;
    let n_uni = count - n_geo;
    let mut out: Vec<f64> = Vec::with_capacity(count);
    let (lo, hi) = (1e-6f64, 0.1f64);
    let ratio = (hi / lo).powf(1.0 / (n_geo.max(2) as f64 - 1.0));
    let mut s = lo;
    for _ in 0..n_geo {
        let v = s.min(hi);
        if out.last() != Some(&v) {
            out.push(v);
        }
        s *= ratio;
    }
    for k in 1..=n_uni {
        out.push(0.1 + 0.9 * k as f64 / n_uni as f64);
    }
    out
}

/// Reports the strongest hypothesis that passes on a geometric plus uniform
/// sample grid with tolerance 1e-10. A numerical verdict, not a proof.
pub fn classify(spec: &ReactionSpec, samples: usize) -> Result<ReactionClass, ReactionError> {
    if samples < 1000 {
        return Err(ReactionError::TooFewSamples {
            needed: 1000,
            got: samples,
        });
    }
    let grid = sample_grid(samples);
    let fp = spec.fprime0();
    // Positive: f > 0 on (0, 1), f'(0) > 0.
    let positive = fp > 0.0
        && grid
            .iter()
            .filter(|&&s| s < 1.0)
            .all(|&s| spec.f(s) > 0.0);
    if !positive {
        return Ok(ReactionClass::Unclassified);
    }
    let weak = grid.iter().all(|&s| spec.f(s) <= fp * s + 1e-10);
    if !weak {
        return Ok(ReactionClass::Positive);
    }
    // Strong: the quotient f(s)/s strictly decreases along consecutive
    // samples with a rounding margin.
    let mut strong = true;
    let mut prev = f64::INFINITY;
    for &s in &grid {
        let q = spec.f(s) / s;
        if !(q < prev - 1e-12) {
            strong = false;
            break;
        }
        prev = q;
    }
    Ok(if strong {
        ReactionClass::StrongKpp
    } else {
        ReactionClass::WeakKpp
    })
}

/// Discrete energy of a field: half the variational quadratic form minus
/// the integrated antiderivative. Critical points of this functional are
/// steady states of the flow.
pub fn energy(domain: &DomainModel, spec: &ReactionSpec, v: &Field) -> f64 {
    let (quad, _) = energy_form(domain, v.values());
    let h2 = domain.grid().h * domain.grid().h;
    let potential: f64 = v
        .values()
        .iter()
        .map(|&u| spec.antiderivative(u))
        .sum::<f64>()
        * h2;
    0.5 * quad - potential
}
