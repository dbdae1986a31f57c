use thiserror::Error;

/// Errors raised by constructors and solvers. Check failures are never
/// errors; they are report content.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve is not regular: speed {speed:.3e} at t = {t}")]
    NonRegular { t: f64, speed: f64 },
    #[error("curve self-intersects near parameters {t1} and {t2}")]
    SelfIntersection { t1: f64, t2: f64 },
    #[error("halfwidth {requested} exceeds validated continuation radius {radius}")]
    HalfwidthTooLarge { requested: f64, radius: f64 },
    #[error("chart is not injective: ({xi}, {eta}) maps back to ({xi_back}, {eta_back})")]
    ChartOverlap { xi: f64, eta: f64, xi_back: f64, eta_back: f64 },
    #[error("continuation radius too small: coefficient tail {tail:.3e}")]
    RadiusTooSmall { tail: f64 },
    #[error("characteristic leaves the strip at eta = {eta}")]
    LeftStrip { eta: f64 },
    #[error("line eta = 0 is characteristic at xi = {xi}")]
    Characteristic { xi: f64 },
    #[error("flow map p lost monotonicity at eta = {eta}")]
    NonMonotoneFlow { eta: f64 },
    #[error("ode integration failed: {0}")]
    Ode(String),
    #[error("epsilon too large: Riccati solution {reason}")]
    EpsilonTooLarge { reason: String },
    #[error("domain too large for graph calibration: window ({lower}, {upper}) is empty")]
    EmptyWindow { lower: f64, upper: f64 },
    #[error("parameter invariant violated: {0}")]
    Parameter(String),
    #[error("assembly failed at epsilon floor; worst condition {condition} (margin {margin:.3e})")]
    AssemblyFailed { condition: String, margin: f64 },
    #[error("extension impossible: coercivity {lhs} >= capacity {capacity}")]
    Coercivity { lhs: f64, capacity: f64 },
    #[error("degenerate Steklov marking: {0}")]
    DegenerateMarking(String),
    #[error("linear solver: {0}")]
    Solver(String),
    #[error("eigen-iteration did not converge after {iterations} steps (change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("split is not admissible: {0}")]
    NotAdmissible(String),
    #[error("geometry degenerates: {0}")]
    Geometry(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
