use thiserror::Error;

/// Errors produced by tree construction, parsing and the statistical routines.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid leaf set: {0}")]
    InvalidLeafSet(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("splits {0} and {1} are incompatible")]
    IncompatibleSplits(String, String),
    #[error("split {split} has non-positive length {length}")]
    NonPositiveLength { split: String, length: f64 },
    #[error("split {0} appears more than once")]
    DuplicateSplit(String),
    #[error("too many internal splits: {got} (at most {max})")]
    TooManySplits { got: usize, max: usize },

    #[error("newick syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("root label {0:?} is not a leaf of the tree")]
    UnknownRootLabel(String),
    #[error("taxon {0:?} appears more than once")]
    DuplicateTaxon(String),
    #[error("missing branch length at byte {position}")]
    MissingLength { position: usize },
    #[error("taxa do not match the leaf set: {0}")]
    TaxaMismatch(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trees are defined over different leaf sets")]
    LeafSetMismatch,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("operation requires fully resolved trees")]
    NotFullyResolved,
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid simplex point: {0}")]
    InvalidSimplexPoint(String),
    #[error("unsupported order k = {0}")]
    UnsupportedOrder(usize),
    #[error("need at least {needed} data trees, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("data set is empty")]
    EmptyData,
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("invalid graft: {0}")]
    InvalidGraft(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Error {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }
}
