use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    /// The equilibrium Newton iteration failed to reach the force tolerance.
    #[error("equilibrium solver did not converge after {iterations} iterations (relative force residual {residual:.3e})")]
    EquilibriumNotConverged { iterations: usize, residual: f64 },

    /// Two ions ended up at the same axial position.
    #[error("coincident ion positions at indices {i} and {j}")]
    CoincidentIons { i: usize, j: usize },

    /// The scale function dropped to the collapse floor during integration.
    #[error("ion chain collapse: b(t) reached {floor:.1e} near t = {t:.6e} s")]
    ChainCollapse { t: f64, floor: f64 },

    /// The adaptive integrator could not make progress.
    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// The adaptive integrator ran out of its step budget.
    #[error("integration exceeded {max_steps} steps at t = {t:.6e} s")]
    MaxStepsExceeded { t: f64, max_steps: usize },

    /// The mode frequency squared crosses zero inside the integration window.
    #[error("mode frequency squared crosses zero near t = {t:.6e} s: radial motion unstable")]
    ModeUnstable { t: f64 },

    /// A frequency profile is not stationary where a stationary in/out state is required.
    #[error("frequency profile not stationary at t = {t:.6e} s (|dW/dt|/W^2 = {slowness:.3e}, limit {limit:.1e})")]
    NotStationary { t: f64, slowness: f64, limit: f64 },

    /// The Bogoliubov normalization |alpha|^2 - |beta|^2 = 1 is violated beyond tolerance.
    #[error("Bogoliubov normalization violated: ||alpha|^2 - |beta|^2 - 1| = {violation:.3e}")]
    NormalizationViolation { violation: f64 },

    /// A closed-form approximation was evaluated outside its validity regime.
    #[error("parameter regime violation: {0}")]
    RegimeViolation(String),

    /// Newton iteration for the complex turning point failed.
    #[error("turning-point search did not converge after {iterations} iterations (|W^2| = {residual:.3e})")]
    TurningPointNotConverged { iterations: usize, residual: f64 },

    /// Dense-output trajectory failed its residual self-check.
    #[error("trajectory residual {max_residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { max_residual: f64, tolerance: f64 },

    /// An error annotated with the pipeline stage it occurred in.
    #[error("{stage}: {source}")]
    Pipeline {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap with the name of the pipeline stage that raised the error.
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Pipeline { stage: stage.to_string(), source: Box::new(self) }
    }

    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidInput { .. } | Error::RegimeViolation(_) | Error::CoincidentIons { .. } => {
                true
            }
            Error::Pipeline { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
