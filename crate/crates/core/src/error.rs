use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Variant names follow the contract vocabulary so that callers (CLI, HTTP
/// service, C bindings) can map them to stable codes with [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed relation: {0}")]
    MalformedRelation(String),
    #[error("size cap exceeded: {what} has {size} elements, cap is {cap}")]
    CapExceeded { what: String, size: usize, cap: usize },
    #[error("strict part of the relation contains a cycle through `{0}`")]
    CyclicStrictPart(String),

    #[error("no decision problem: no separable attribute describes the alternatives")]
    NoDecisionProblem,
    #[error("problem statement `{0}` requires a norm set")]
    MissingNorms(String),
    #[error("alternative set is not enumerable: {0}")]
    NotEnumerable(String),
    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error("attribute `{0}` has no decomposition")]
    NoDecomposition(String),
    #[error("attribute `{0}` is nominal and cannot be aggregated by an order-dependent function")]
    NotAggregable(String),
    #[error("invalid formulation: {0}")]
    InvalidFormulation(String),
    #[error("expression error: {0}")]
    Expression(String),

    #[error("unknown reference: {0}")]
    UnknownReference(String),
    #[error("inconsistent statements: {0}")]
    InconsistentStatements(String),
    #[error("dimensions are not preferentially independent: {0}")]
    DependentDimensions(String),
    #[error("conflicting importance witnesses: {0}")]
    ConflictingImportance(String),
    #[error("intransitive swap answers: {0}")]
    IntransitiveSwaps(String),
    #[error("incomplete elicitation: {0}")]
    IncompleteElicitation(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("no admissible aggregation archetype: {0}")]
    NoAdmissibleArchetype(String),
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),
    #[error("dimensions are not commensurable")]
    NotCommensurable,
    #[error("importance order is not total: {0}")]
    NotTotalImportance(String),
    #[error("relation is not representable by a function: {0}")]
    NotRepresentable(String),
    #[error("hierarchy node `{0}` has no aggregator")]
    UnconfiguredNode(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("norms are not totally ordered: {0}")]
    MalformedNorms(String),
    #[error("ambiguous assignment of `{element}`: rules {rules:?} match with equal priority")]
    AmbiguousAssignment { element: String, rules: Vec<String> },
    #[error("number of clusters {k} out of range for {n} alternatives")]
    BadK { k: usize, n: usize },
    #[error("covering problem is infeasible: {0}")]
    Infeasible(String),
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("unsupported statement for this operation: {0}")]
    UnsupportedStatement(String),

    #[error("unsupported model version `{found}` (supported: {supported})")]
    UnsupportedVersion { found: String, supported: String },
    #[error("parse error at {path}: {message}")]
    ParseError { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("service startup failed: {0}")]
    StartupError(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedRelation(_) => "MalformedRelation",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::CyclicStrictPart(_) => "CyclicStrictPart",
            Error::NoDecisionProblem => "NoDecisionProblem",
            Error::MissingNorms(_) => "MissingNorms",
            Error::NotEnumerable(_) => "NotEnumerable",
            Error::EvaluationFailure(_) => "EvaluationFailure",
            Error::NoDecomposition(_) => "NoDecomposition",
            Error::NotAggregable(_) => "NotAggregable",
            Error::InvalidFormulation(_) => "InvalidFormulation",
            Error::Expression(_) => "Expression",
            Error::UnknownReference(_) => "UnknownReference",
            Error::InconsistentStatements(_) => "InconsistentStatements",
            Error::DependentDimensions(_) => "DependentDimensions",
            Error::ConflictingImportance(_) => "ConflictingImportance",
            Error::IntransitiveSwaps(_) => "IntransitiveSwaps",
            Error::IncompleteElicitation(_) => "IncompleteElicitation",
            Error::Inconclusive(_) => "Inconclusive",
            Error::NoAdmissibleArchetype(_) => "NoAdmissibleArchetype",
            Error::CarrierMismatch(_) => "CarrierMismatch",
            Error::NotCommensurable => "NotCommensurable",
            Error::NotTotalImportance(_) => "NotTotalImportance",
            Error::NotRepresentable(_) => "NotRepresentable",
            Error::UnconfiguredNode(_) => "UnconfiguredNode",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::MalformedNorms(_) => "MalformedNorms",
            Error::AmbiguousAssignment { .. } => "AmbiguousAssignment",
            Error::BadK { .. } => "BadK",
            Error::Infeasible(_) => "Infeasible",
            Error::InvalidFixture(_) => "InvalidFixture",
            Error::ProtocolViolation(_) => "ProtocolViolation",
            Error::UnsupportedStatement(_) => "UnsupportedStatement",
            Error::UnsupportedVersion { .. } => "UnsupportedVersion",
            Error::ParseError { .. } => "ParseError",
            Error::Io(_) => "Io",
            Error::StartupError(_) => "StartupError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
