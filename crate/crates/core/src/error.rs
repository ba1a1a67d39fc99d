use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on inputs was violated (empty set, foreign point, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric axiom violated: {0}")]
    Metric(String),

    /// Conditioning on an event with no feasible realization.
    #[error("conditioning infeasible: {0}")]
    ConditioningInfeasible(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("strategy undefined on memory {0}")]
    StrategyIncomplete(String),

    #[error("system is not perfectly observed: {0}")]
    NotPerfectlyObserved(String),

    /// Interim costs depend on the state, so conditional ranges are not sufficient.
    #[error("cost shape: {0}")]
    CostShape(String),

    #[error("not an information state: {0}")]
    InvalidInfoState(String),

    #[error("node space has no metric: {0}")]
    NoNodeMetric(String),

    #[error("quantizer: {0}")]
    Quantizer(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(
        "enumeration budget exceeded: at least {at_least} feasible memories (budget {budget})"
    )]
    BudgetExceeded { at_least: usize, budget: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
