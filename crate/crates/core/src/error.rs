use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register size out of range: {0} nuclei (supported 1..=10)")]
    RegisterSize(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid site index {site} for register with {n_sites} sites")]
    InvalidSite { site: usize, n_sites: usize },
    #[error("malformed basis label `{0}`: {1}")]
    BadLabel(String, String),
    #[error("operator is not hermitian (max |A - A^H| = {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("invalid density matrix: {0}")]
    BadDensityMatrix(String),
    #[error("invalid pair geometry: {0}")]
    BadGeometry(String),
    #[error("carbon site {index}: {reason}")]
    BadSite { index: usize, reason: String },
    #[error("hyperfine data required for ms = {ms} but missing on site {index}")]
    MissingHyperfine { ms: i8, index: usize },
    #[error("invalid electron manifold ms = {0}")]
    InvalidMs(i8),
    #[error("register must include the electron for this operation")]
    ElectronRequired,
    #[error("at least two nuclei required, register has {0}")]
    TooFewNuclei(usize),
    #[error("invalid field schedule: {0}")]
    BadSchedule(String),
    #[error("invalid time grid: {0}")]
    BadGrid(String),
    #[error("quench spec mismatch: {0}")]
    QuenchKind(String),
    #[error("state norm drifted to {norm} (|norm - 1| > {tol:.1e})")]
    NormDrift { norm: f64, tol: f64 },
    #[error("density-matrix trace drifted by {drift:.3e} during integration; reduce dt_internal")]
    TraceDrift { drift: f64 },
    #[error("initial state is not an eigenstate of the pre-quench hamiltonian (residual {residual:.3e})")]
    NotAnEigenstate { residual: f64 },
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("hyperfine table line {line}: {reason}")]
    DatasetParse { line: usize, reason: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown scenario or missing config file `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
