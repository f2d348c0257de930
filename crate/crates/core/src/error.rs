use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    ParameterDomain(String),

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    StepLimit { t: f64, max_steps: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid integrator configuration: {0}")]
    Config(String),

    #[error("gamma function pole at z = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    #[error("hypergeometric series did not converge after {terms} terms (last term {last_term:e}, tau = {tau_re} + {tau_im}i)")]
    HypergeometricNonConvergence {
        terms: usize,
        last_term: f64,
        tau_re: f64,
        tau_im: f64,
    },

    #[error("hypergeometric parameter pole: {0}")]
    HypergeometricPole(String),

    #[error("limit did not stabilise: samples differ by {difference:e} (at t = {t_first} and t = {t_second})")]
    LimitNonConvergence {
        t_first: f64,
        t_second: f64,
        difference: f64,
    },

    #[error("degenerate connection data: l0 = {0:e}")]
    DegenerateConnection(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e}, last iterate ({x1}, {x2}))")]
    NewtonDivergence {
        iterations: usize,
        residual: f64,
        x1: f64,
        x2: f64,
    },

    #[error("energy {energy} outside the admissible window ({low}, {high}]")]
    EnergyOutOfRange { energy: f64, low: f64, high: f64 },

    #[error("Floquet spectrum has no hyperbolic pair (largest real multiplier {largest})")]
    NoHyperbolicPair { largest: f64 },

    #[error("section return not found within t = {0}")]
    NoReturn(f64),

    #[error("manifold curve could not be resolved: {0}")]
    Unresolved(String),

    #[error("no sign change of G on the search interval for beta2 = {beta2}")]
    NoSignChange { beta2: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
