use netdeg::estimators::EstimateError;
use netdeg::eval::EvalError;
use netdeg::graph::GraphError;
use netdeg::linkpred::LinkPredError;
use netdeg::meanfield::MeanFieldError;
use netdeg::solver::SolverError;
use netdeg::subgraph::SubgraphError;

/// Process exit status by failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Io = 2,
    Numerical = 3,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Usage, message: message.into() }
    }
    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Io, message: message.into() }
    }
    pub fn numerical(message: impl Into<String>) -> Self {
        Self { kind: ExitKind::Numerical, message: message.into() }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Infeasible(_) => Self::usage(e.to_string()),
            GraphError::ZeroDegrees => Self::numerical(e.to_string()),
            _ => Self::io(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Io { .. } | SolverError::Parse { .. } => Self::io(e.to_string()),
            SolverError::InvalidOptions(_) => Self::usage(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<SubgraphError> for CliError {
    fn from(e: SubgraphError) -> Self {
        Self::io(e.to_string())
    }
}

impl From<MeanFieldError> for CliError {
    fn from(e: MeanFieldError) -> Self {
        match e {
            MeanFieldError::Solver(s) => s.into(),
            other => Self::numerical(other.to_string()),
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidOptions(_) | EstimateError::LengthMismatch(..) => Self::usage(e.to_string()),
            EstimateError::InvalidState { .. } => Self::io(e.to_string()),
            EstimateError::MeanField(m) => m.into(),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Graph(g) => g.into(),
            EvalError::Solver(s) => s.into(),
            EvalError::Io { .. } => Self::io(e.to_string()),
            EvalError::Config(_) | EvalError::Dynamics(_) => Self::usage(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<LinkPredError> for CliError {
    fn from(e: LinkPredError) -> Self {
        match e {
            LinkPredError::Estimate(x) => x.into(),
            LinkPredError::Invalid(_) | LinkPredError::NothingHeldOut(_) => Self::usage(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

impl From<netdeg::dynamics::DynamicsError> for CliError {
    fn from(e: netdeg::dynamics::DynamicsError) -> Self {
        Self::usage(e.to_string())
    }
}
