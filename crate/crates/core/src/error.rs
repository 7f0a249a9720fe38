//! Error types for the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("cell size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("grid must be at least 3x3, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("dimensions must be positive, got {width} x {height}")]
    BadDimension { width: f64, height: f64 },
    #[error("mask length {got} does not match grid cell count {expected}")]
    MaskSize { expected: usize, got: usize },
    #[error("sigma must lie in [0, 1], got {0}")]
    SigmaRange(f64),
    #[error("{what} needs at least {needed} cells across")]
    TooFewCells { what: &'static str, needed: usize },
    #[error("strip length {length} must be at least 10 x width {width}")]
    StripTooShort { length: f64, width: f64 },
    #[error("disk radius {radius} must be at least 5 x cell size {h}")]
    DiskTooSmall { radius: f64, h: f64 },
    #[error("comb teeth overlap or extend past the base")]
    TeethOverlap,
    #[error("tail width {tail_width} must be less than the disk diameter 2 x {disk_radius}")]
    BulbMouthTooWide { tail_width: f64, disk_radius: f64 },
    #[error("tail length {tail_length} must be at least 10 x tail width {tail_width}")]
    TailTooShort { tail_length: f64, tail_width: f64 },
    #[error(
        "bulb disk radius {disk_radius} too small: its eigenvalue exceeds the tail limit \
         (pi / {tail_width})^2"
    )]
    BulbDiskTooSmall { disk_radius: f64, tail_width: f64 },
    #[error("ball radius {r} must exceed 2 x cell size {h}")]
    BallTooSmall { r: f64, h: f64 },
    #[error("seed point ({x}, {y}) is not in a masked cell")]
    SeedOutsideMask { x: f64, y: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("size mismatch: operator has {expected} unknowns, field has {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("field is identically zero")]
    ZeroField,
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error(
        "eigensolver did not converge: {iterations} iterations, residual {residual:.3e} \
         above tolerance {tolerance:.3e}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("inner linear solve failed: relative residual {relative_residual:.3e} after {iterations} iterations")]
    LinearSolve {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("computed eigenfunction is not strictly positive (min {min:.3e})")]
    NotPositive { min: f64 },
    #[error("radii must be strictly increasing and at least {min_radius}")]
    BadRadii { min_radius: f64 },
    #[error("scan stride {stride} must be positive and at most half the ball radius {r}")]
    BadStride { stride: f64, r: f64 },
    #[error("probe radius {r} too small: disk eigenvalue bound {bound:.3e} is not below delta {delta:.3e}")]
    ProbeRadiusTooSmall { r: f64, bound: f64, delta: f64 },
    #[error("decomposition parameters must be positive: mu {mu}, delta {delta}")]
    BadDecomposition { mu: f64, delta: f64 },
    #[error(
        "narrow set verification failed: lambda {lambda:.6} is not above mu {mu:.6}; \
         mu is too close to the limiting spectrum at this resolution"
    )]
    NarrowNotNarrow { lambda: f64, mu: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Error)]
pub enum ReactionError {
    #[error(
        "slope condition unsatisfiable: growth slope {slope:.4} must exceed the ignition \
         quotient sup h(s)/s = {ignition_quotient:.4}"
    )]
    SlopeCondition { slope: f64, ignition_quotient: f64 },
    #[error("smoothing width must lie in (0, 0.1], got {0}")]
    BadSmoothing(f64),
    #[error("amplitudes must be positive, got g: {g}, h: {h}")]
    BadAmplitudes { g: f64, h: f64 },
    #[error("classification needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("initial data must be nonnegative and bounded")]
    BadInitial,
    #[error("flow blew up at step {step}: sup {sup:.3e} exceeded the guard {guard:.3e}")]
    BlowUp { step: usize, sup: f64, guard: f64 },
    #[error("eigenvalue {lambda:.6} is not below the growth rate {fprime0:.6}")]
    NotSupercritical { lambda: f64, fprime0: f64 },
    #[error("could not verify a subsolution after {halvings} halvings of epsilon")]
    SubsolutionFailed { halvings: usize },
    #[error("monotone flow violated at step {step}: worst increment {worst:.3e}")]
    MonotonicityViolated { step: usize, worst: f64 },
    #[error("flow did not reach a classified steady state (needed {needed})")]
    NotSteady { needed: &'static str },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("tail region is not a clean rectangle: {0}")]
    NotRectangular(String),
    #[error("window [{x0}, {x1}] contains no profile samples")]
    EmptyWindow { x0: f64, x1: f64 },
    #[error("leading coefficient is not positive inside the window (min {min:.3e})")]
    NonpositiveAlpha { min: f64 },
    #[error("need at least {needed} samples for second differences, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}
