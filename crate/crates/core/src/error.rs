use thiserror::Error;

/// Errors raised by the analysis engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint {index} has a zero normal")]
    ZeroNormal { index: usize },

    #[error("{what} = {value} exceeds budget {budget}; {hint}")]
    BudgetExceeded {
        what: &'static str,
        value: u128,
        budget: u128,
        hint: &'static str,
    },

    #[error("numerically ill-conditioned LP: pivot failure at constraint {constraint}")]
    IllConditioned { constraint: usize },

    #[error("sampling domain is empty: no interior point found after {attempts} attempts")]
    EmptyDomain { attempts: usize },

    #[error("property failure: {0}")]
    PropertyFailure(String),

    #[error("invalid manifold frame: {0}")]
    InvalidFrame(String),

    #[error("manifold meets the origin; radial projection undefined")]
    OriginCrossing,
}

impl CoreError {
    pub fn is_budget(&self) -> bool {
        matches!(self, CoreError::BudgetExceeded { .. })
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, CoreError::IllConditioned { .. })
    }

    pub fn is_property_failure(&self) -> bool {
        matches!(self, CoreError::PropertyFailure(_))
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
