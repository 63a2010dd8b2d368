use thiserror::Error;

/// Errors raised by the algebra, solvers, and file layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeilError {
    #[error("no weakly Hodge maps of negative weight")]
    NegativeWeight,
    #[error("map is not weakly Hodge: entry shifts bidegree by ({0}, {1})")]
    NotWeaklyHodge(i32, i32),
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: i32, found: i32 },
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: i64, max: i64 },
    #[error("σ_tot undefined on degree 0")]
    SigmaTotDegreeZero,
    #[error("homotopy degenerate on this graded piece")]
    HomotopyDegenerate,
    #[error("missing generator image for {0}")]
    MissingImage(String),
    #[error("derivation shifts Hodge type by ({0}, {1}), outside the weakly Hodge range")]
    NotTotalizable(i32, i32),
    #[error("degenerate metric")]
    DegenerateMetric,
    #[error("connection is not Kählerian: {0}")]
    NotKahlerian(String),
    #[error("flatness obstruction at order {order}: {detail}")]
    FlatnessObstruction { order: usize, detail: String },
    #[error("form not parallel")]
    FormNotParallel,
    #[error("form is not of Hodge type (1,1): {0}")]
    FormNotType11(String),
    #[error("insufficient order: {0}")]
    InsufficientOrder(String),
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("linear system: {0}")]
    LinearSystem(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, WeilError>;
