use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline.
///
/// Variants are grouped roughly by stage: data ingestion and preparation,
/// cover construction, coloring, synthesis, rendering.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("invalid axis name: {0:?} (axis names must be unique and nonempty)")]
    BadAxisName(String),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("column {0} is not numeric")]
    NonNumericColumn(String),
    #[error("invalid range: lo {lo} > hi {hi}")]
    BadRange { lo: f64, hi: f64 },
    #[error("axis {0} is constant; cannot normalize")]
    ConstantAxis(String),
    #[error("rolling window must be at least 2 (got {0})")]
    BadWindow(usize),
    #[error("series of length {len} is shorter than window {window}")]
    ShortSeries { len: usize, window: usize },

    #[error("epsilon must be positive (got {0})")]
    BadEpsilon(f64),
    #[error("unknown metric {0:?} (expected \"euclidean\" or \"manhattan\")")]
    BadMetric(String),

    #[error("reference selects no rows")]
    EmptyReference,
    #[error("coloring has {0} values but the graph has {1} vertices")]
    MismatchedColoring(usize, usize),
    #[error("graph was not built from this cloud (content hash mismatch)")]
    GraphCloudMismatch,
    #[error("malformed graph file: {0}")]
    BadGraphFile(String),

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("target correlation {0} outside [-1, 1]")]
    BadCorrelation(f64),
    #[error("series is constant; cannot standardize")]
    ConstantSeries,
    #[error("regression residuals are constant")]
    ConstantResiduals,
    #[error("need at least {min} observations (got {n})")]
    TooFewRows { n: usize, min: usize },

    #[error("layout requires at least one iteration")]
    ZeroIterations,
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, csv::Position::line);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Csv {
                line,
                msg: format!("{kind:?}"),
            },
        }
    }
}
