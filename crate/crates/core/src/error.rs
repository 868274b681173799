use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined mixing angle: detuning and coupling both vanish at n = {n}")]
    UndefinedMixingAngle { n: f64 },

    #[error("bare basis (gamma = 0) corresponds to n -> infinity")]
    BareBasisDiverges,

    #[error("n(gamma) diverges at gamma = 0; use the diagonal variant for the bare basis")]
    LiteralAtBare,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("no sign change of d_bare - d_dressed over [{lo}, {hi}]: endpoint differences {f_lo:.6e}, {f_hi:.6e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("outcome asymmetry in {reference}: d(+) = {plus:.12e}, d(-) = {minus:.12e}")]
    OutcomeAsymmetry {
        reference: &'static str,
        plus: f64,
        minus: f64,
    },

    #[error("configuration error at `{path}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
