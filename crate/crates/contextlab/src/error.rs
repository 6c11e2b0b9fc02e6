use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("invalid behavior: {0}")]
    Behavior(String),
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("behavior is disturbing: contexts `{context_a}` and `{context_b}` disagree on [{shared}]")]
    Disturbing {
        context_a: String,
        context_b: String,
        shared: String,
    },
    #[error("behavior outside criterion domain: {0}")]
    DomainClass(String),
    #[error("coupling failed: {0}")]
    Coupling(String),
    #[error("invalid transform spec: {0}")]
    TransformSpec(String),
    #[error("invalid provenance: {0}")]
    Provenance(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("internal check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
