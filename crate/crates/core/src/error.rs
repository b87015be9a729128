use thiserror::Error;

/// Failures raised by the planners and belief operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    /// Every particle weight is zero, usually from observation-density underflow.
    #[error("degenerate belief: all particle weights are zero")]
    DegenerateBelief,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid weight {0}: weights must be finite and non-negative")]
    InvalidWeight(f64),
    /// The planning horizon admits no decision (depth 0).
    #[error("empty plan: the search horizon admits no action")]
    EmptyPlan,
    /// The search budget allowed zero simulations.
    #[error("empty tree: no simulation completed within the budget")]
    EmptyTree,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = PlanError> = std::result::Result<T, E>;
