//! Semi-implicit parabolic flow to steady states.
//!
//! The flow `du/dt = -A u + f(u)` is stepped with implicit diffusion and
//! explicit reaction:
//!
//! ```text
//! (I + dt A) u_next = u + dt f(u)
//! ```
//!
//! unconditionally stable in the diffusion part. Steady states of the
//! scheme solve `A u = f(u)` exactly, independent of `dt`. Detection uses
//! both the time residual and an independently recomputed elliptic
//! residual, which guards against slow transients being misread as steady.

use std::sync::Arc;

use crate::error::FlowError;
use crate::field::Field;
use crate::geometry::DomainModel;
use crate::linalg::{pcg, sup_norm, Csr, Ic0};
use crate::operator::{assemble, SparseOperator};
use crate::reaction::ReactionSpec;

/// Time-residual threshold `||u_next - u||_inf / dt` for steadiness.
pub const TOL_DT: f64 = 1e-9;
/// Sup-norm threshold under which a state counts as extinct.
pub const TOL_EXT: f64 = 1e-6;
/// Elliptic residual threshold, relative to the operator scale.
pub const TOL_ELL: f64 = 1e-6;
/// Default step cap; near-critical runs report honestly when they hit it.
pub const DEFAULT_MAX_STEPS: usize = 200_000;

/// Outcome classification of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyClass {
    Extinct,
    PositiveSteady,
    NotConverged,
}

impl SteadyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SteadyClass::Extinct => "extinct",
            SteadyClass::PositiveSteady => "positive_steady",
            SteadyClass::NotConverged => "not_converged",
        }
    }
}

/// Final state of a flow with its residuals and classification.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub u: Field,
    pub steps: usize,
    pub final_dt_residual: f64,
    pub elliptic_residual: f64,
    pub classification: SteadyClass,
}

/// One flow with owned state; step-level access for comparison tests and
/// monotonicity tracking.
pub struct FlowStepper {
    op: SparseOperator,
    stepping_matrix: Csr,
    pre: Option<Ic0>,
    reaction: ReactionSpec,
    dt: f64,
    u: Vec<f64>,
    rhs: Vec<f64>,
    guard: f64,
    steps: usize,
    last_dt_residual: f64,
    /// Worst cellwise increment seen (for monotone flows).
    pub min_increment: f64,
    /// Worst cellwise decrement seen.
    pub max_increment: f64,
}

impl FlowStepper {
    pub fn new(
        domain: &Arc<DomainModel>,
        reaction: &ReactionSpec,
        initial: &Field,
        dt: f64,
    ) -> Result<Self, FlowError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FlowError::BadTimeStep(dt));
        }
        if initial.len() != domain.interior_count() {
            return Err(FlowError::Operator(
                crate::error::OperatorError::SizeMismatch {
                    expected: domain.interior_count(),
                    got: initial.len(),
                },
            ));
        }
        let sup0 = initial.sup_norm();
        if !sup0.is_finite() || initial.min() < 0.0 {
            return Err(FlowError::BadInitial);
        }
        let op = assemble(domain).map_err(FlowError::Operator)?;
        Ok(FlowStepper {
            op,
            reaction: reaction.clone(),
            dt,
            u: initial.values().to_vec(),
            rhs: vec![0.0; initial.len()],
            guard: 10.0 * sup0.max(1.0),
            steps: 0,
            last_dt_residual: f64::INFINITY,
            min_increment: f64::INFINITY,
            max_increment: f64::NEG_INFINITY,
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt_residual(&self) -> f64 {
        self.last_dt_residual
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    /// Advances one step; returns the time residual
    /// `||u_next - u||_inf / dt`.
    pub fn step(&mut self) -> Result<f64, FlowError> {
        let n = self.u.len();
        let dt = self.dt;
        for k in 0..n {
            self.rhs[k] = self.u[k] + dt * self.reaction.f(self.u[k]);
        }
        let op = &self.op;
        let apply = |x: &[f64], y: &mut [f64]| {
            op.apply_slice(x, y);
            for k in 0..x.len() {
                y[k] = x[k] + dt * y[k];
            }
        };
        // Warm start from the current state.
        let mut next = self.u.clone();
        let res = conjugate_gradient(apply, &self.rhs, &mut next, 1e-10, 20 * n + 200);
        if !res.converged {
            return Err(FlowError::Eigen(crate::error::EigenError::LinearSolve {
                iterations: res.iterations,
                relative_residual: res.relative_residual,
            }));
        }
        let mut delta_sup = 0.0f64;
        for k in 0..n {
            let d = next[k] - self.u[k];
            delta_sup = delta_sup.max(d.abs());
            self.min_increment = self.min_increment.min(d);
            self.max_increment = self.max_increment.max(d);
        }
        self.u = next;
        self.steps += 1;
        self.last_dt_residual = delta_sup / dt;
        let sup = sup_norm(&self.u);
        if sup > self.guard {
            return Err(FlowError::BlowUp {
                step: self.steps,
                sup,
                guard: self.guard,
            });
        }
        Ok(self.last_dt_residual)
    }

    /// Elliptic residual `||A u - f(u)||_inf`, recomputed from the operator.
    pub fn elliptic_residual(&self) -> f64 {
        let n = self.u.len();
        let mut au = vec![0.0; n];
        self.op.apply_slice(&self.u, &mut au);
        let mut worst = 0.0f64;
        for k in 0..n {
            worst = worst.max((au[k] - self.reaction.f(self.u[k])).abs());
        }
        worst
    }

    /// Runs until the time residual drops below [`TOL_DT`], the state is
    /// extinct, or `max_steps` is reached; classifies the outcome.
    pub fn run_to_steady(mut self, max_steps: usize) -> Result<FlowResult, FlowError> {
        let mut dt_res = self.last_dt_residual;
        while self.steps < max_steps {
            dt_res = self.step()?;
            if dt_res < TOL_DT {
                break;
            }
            if sup_norm(&self.u) <= TOL_EXT {
                break;
            }
        }
        Ok(self.finish(dt_res))
    }

    pub fn finish(self, dt_res: f64) -> FlowResult {
        let ell = self.elliptic_residual();
        let sup = sup_norm(&self.u);
        let min = self.u.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let classification = if sup <= TOL_EXT {
            SteadyClass::Extinct
        } else if dt_res < TOL_DT && min > 0.0 && ell <= TOL_ELL * self.op.scale() {
            SteadyClass::PositiveSteady
        } else {
            SteadyClass::NotConverged
        };
        let u = Field::new(Arc::clone(self.op.domain()), self.u).expect("sizes match");
        FlowResult {
            u,
            steps: self.steps,
            final_dt_residual: dt_res,
            elliptic_residual: ell,
            classification,
        }
    }
}

/// Flows `initial` to a steady state.
pub fn flow_to_steady(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    initial: &Field,
    dt: f64,
    max_steps: usize,
) -> Result<FlowResult, FlowError> {
    FlowStepper::new(domain, reaction, initial, dt)?.run_to_steady(max_steps)
}

/// Default time step: stable for the explicit reaction part whenever
/// `|f'| <= 2` on the invariant range.
pub const DEFAULT_DT: f64 = 0.1;

/// Minimal positive steady state: the monotone limit of the flow started
/// from a small verified discrete subsolution `eps * phi`, with `phi` the
/// principal eigenfunction. Requires the domain eigenvalue to sit below the
/// growth slope. `epsilon` is halved (up to 40 times) until `eps * phi`
/// verifies as a cellwise subsolution.
pub fn minimal_solution(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    epsilon: f64,
) -> Result<FlowResult, FlowError> {
    minimal_solution_with(domain, reaction, epsilon, DEFAULT_DT, DEFAULT_MAX_STEPS)
}

pub fn minimal_solution_with(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    epsilon: f64,
    dt: f64,
    max_steps: usize,
) -> Result<FlowResult, FlowError> {
    let op = assemble(domain).map_err(FlowError::Operator)?;
    let pair = crate::eigen::principal_eigenpair(&op)?;
    if !(pair.lambda < reaction.fprime0()) {
        return Err(FlowError::NotSupercritical {
            lambda: pair.lambda,
            fprime0: reaction.fprime0(),
        });
    }
    // Verify the subsolution cellwise: A (eps phi) <= f(eps phi).
    let n = op.n();
    let mut a_phi = vec![0.0; n];
    op.apply_slice(pair.phi.values(), &mut a_phi);
    let slack = 1e-14 * op.scale();
    let mut eps = epsilon;
    let mut ok = false;
    for _ in 0..=40 {
        ok = (0..n).all(|k| eps * a_phi[k] <= reaction.f(eps * pair.phi.values()[k]) + slack);
        if ok {
            break;
        }
        eps /= 2.0;
    }
    if !ok {
        return Err(FlowError::SubsolutionFailed { halvings: 40 });
    }
    let initial = Field::new(
        Arc::clone(domain),
        pair.phi.values().iter().map(|&v| eps * v).collect(),
    )
    .expect("sizes match");
    let mut stepper = FlowStepper::new(domain, reaction, &initial, dt)?;
    let mut dt_res = f64::INFINITY;
    while stepper.steps() < max_steps {
        dt_res = stepper.step()?;
        // Monotone nondecreasing flow; a material violation is diagnostic.
        if stepper.min_increment < -1e-9 {
            return Err(FlowError::MonotonicityViolated {
                step: stepper.steps(),
                worst: stepper.min_increment,
            });
        }
        if dt_res < TOL_DT {
            break;
        }
    }
    let result = stepper.finish(dt_res);
    if result.classification != SteadyClass::PositiveSteady {
        return Err(FlowError::NotSteady {
            needed: "positive_steady from the subsolution flow",
        });
    }
    Ok(result)
}

/// Maximal steady state: the monotone nonincreasing limit of the flow from
/// the constant supersolution 1. May legitimately end extinct.
pub fn maximal_solution(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
) -> Result<FlowResult, FlowError> {
    maximal_solution_with(domain, reaction, DEFAULT_DT, DEFAULT_MAX_STEPS)
}

pub fn maximal_solution_with(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    dt: f64,
    max_steps: usize,
) -> Result<FlowResult, FlowError> {
    let initial = Field::constant(domain, 1.0);
    let mut stepper = FlowStepper::new(domain, reaction, &initial, dt)?;
    let mut dt_res = f64::INFINITY;
    while stepper.steps() < max_steps {
        dt_res = stepper.step()?;
        if stepper.max_increment > 1e-9 {
            return Err(FlowError::MonotonicityViolated {
                step: stepper.steps(),
                worst: stepper.max_increment,
            });
        }
        if dt_res < TOL_DT || sup_norm(stepper.u()) <= TOL_EXT {
            break;
        }
    }
    Ok(stepper.finish(dt_res))
}

/// Sup-norm gap between the maximal and minimal steady states. Both flows
/// must classify as positive steady states.
pub fn uniqueness_gap(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    epsilon: f64,
) -> Result<f64, FlowError> {
    let lo = minimal_solution(domain, reaction, epsilon)?;
    let hi = maximal_solution(domain, reaction)?;
    if hi.classification != SteadyClass::PositiveSteady {
        return Err(FlowError::NotSteady {
            needed: "positive_steady from the supersolution flow",
        });
    }
    let mut gap = 0.0f64;
    for (a, b) in hi.u.values().iter().zip(lo.u.values()) {
        gap = gap.max((a - b).abs());
    }
    Ok(gap)
}

/// Outcome of a trigger test.
#[derive(Debug, Clone)]
pub struct HairTrigger {
    pub passed: bool,
    /// Max cellwise shortfall of the final state below the minimal one.
    pub deficit: f64,
    pub final_state: FlowResult,
}

/// Flows a small compactly supported bump and checks that the final state
/// dominates the minimal steady state up to a 1e-4 cellwise allowance.
/// Passing is independent of the bump amplitude.
pub fn hair_trigger_test(
    domain: &Arc<DomainModel>,
    reaction: &ReactionSpec,
    bump_center: (f64, f64),
    bump_radius: f64,
    bump_height: f64,
) -> Result<HairTrigger, FlowError> {
    let minimal = minimal_solution(domain, reaction, 1e-3)?;
    let bump = Field::from_fn(domain, |x, y| {
        let dx = x - bump_center.0;
        let dy = y - bump_center.1;
        let d2 = (dx * dx + dy * dy) / (bump_radius * bump_radius);
        if d2 < 1.0 {
            bump_height * (1.0 - d2) * (1.0 - d2)
        } else {
            0.0
        }
    });
    let run = flow_to_steady(domain, reaction, &bump, DEFAULT_DT, DEFAULT_MAX_STEPS)?;
    let mut deficit = 0.0f64;
    for (a, b) in run.u.values().iter().zip(minimal.u.values()) {
        deficit = deficit.max(b - a);
    }
    Ok(HairTrigger {
        passed: deficit <= 1e-4,
        deficit: deficit.max(0.0),
        final_state: run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rectangle, build_strip};
    use crate::reaction::{logistic, zero};

    #[test]
    fn heat_flow_conserves_and_flattens_to_mean() {
        let d = Arc::new(build_rectangle(1.0, 1.0, 0.125, 1.0).unwrap());
        let initial = Field::from_fn(&d, |x, y| x + 2.0 * y);
        let mean = initial.values().iter().sum::<f64>() / initial.len() as f64;
        let run = flow_to_steady(&d, &zero(), &initial, 0.1, 10_000).unwrap();
        for &v in run.u.values() {
            assert!((v - mean).abs() < 1e-7, "{v} vs mean {mean}");
        }
    }

    #[test]
    fn supercritical_strip_persists() {
        let d = Arc::new(build_strip(20.0, 2.0, 0.125, 0.0).unwrap());
        // lambda about pi^2/4 + pi^2/400 < 1? No: pi^2/4 = 2.47 > 1, so this
        // strip is subcritical for the logistic reaction and goes extinct.
        let ones = Field::constant(&d, 1.0);
        let run = flow_to_steady(&d, &logistic(), &ones, 0.1, 50_000).unwrap();
        assert_eq!(run.classification, SteadyClass::Extinct);
        // Width 4 exceeds pi: persistent.
        let wide = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let ones = Field::constant(&wide, 1.0);
        let run = flow_to_steady(&wide, &logistic(), &ones, 0.1, 50_000).unwrap();
        assert_eq!(run.classification, SteadyClass::PositiveSteady);
        assert!(run.u.sup_norm() > 0.1);
    }

    #[test]
    fn range_preservation() {
        let d = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let initial = Field::from_fn(&d, |x, _| (x / 40.0).clamp(0.0, 1.0));
        let mut stepper = FlowStepper::new(&d, &logistic(), &initial, 0.1).unwrap();
        for _ in 0..200 {
            stepper.step().unwrap();
            let min = stepper.u().iter().cloned().fold(f64::INFINITY, f64::min);
            let max = stepper.u().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(min >= -1e-9 && max <= 1.0 + 1e-9, "range [{min}, {max}]");
        }
    }

    #[test]
    fn comparison_preservation() {
        let d = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let a0 = Field::from_fn(&d, |x, y| 0.3 * ((x + y) * 0.2).sin().abs());
        let b0 = Field::new(
            Arc::clone(&d),
            a0.values().iter().map(|&v| v + 0.1).collect(),
        )
        .unwrap();
        let mut fa = FlowStepper::new(&d, &logistic(), &a0, 0.1).unwrap();
        let mut fb = FlowStepper::new(&d, &logistic(), &b0, 0.1).unwrap();
        for _ in 0..150 {
            fa.step().unwrap();
            fb.step().unwrap();
            for (x, y) in fa.u().iter().zip(fb.u()) {
                assert!(x <= &(y + 1e-9));
            }
        }
    }

    #[test]
    fn minimal_and_maximal_agree_on_supercritical_strip() {
        let d = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let gap = uniqueness_gap(&d, &logistic(), 1e-2).unwrap();
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn subcritical_maximal_goes_extinct() {
        let d = Arc::new(build_strip(30.0, 3.0, 0.25, 0.0).unwrap());
        let run = maximal_solution(&d, &logistic()).unwrap();
        assert_eq!(run.classification, SteadyClass::Extinct);
        // The minimal-solution construction requires supercriticality.
        assert!(matches!(
            minimal_solution(&d, &logistic(), 1e-2),
            Err(FlowError::NotSupercritical { .. })
        ));
    }

    #[test]
    fn zero_initial_stays_extinct() {
        let d = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let run = flow_to_steady(&d, &logistic(), &Field::zeros(&d), 0.1, 1000).unwrap();
        assert_eq!(run.classification, SteadyClass::Extinct);
        assert_eq!(run.u.sup_norm(), 0.0);
    }

    #[test]
    fn minimal_flow_is_monotone() {
        let d = Arc::new(build_strip(40.0, 4.0, 0.25, 0.0).unwrap());
        let run = minimal_solution(&d, &logistic(), 1e-2).unwrap();
        assert_eq!(run.classification, SteadyClass::PositiveSteady);
        assert!(run.u.min() > 0.0 && run.u.max() < 1.0);
    }
}
