use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown surface model `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` violates `{check}`: {detail}")]
    InvalidModel {
        model: String,
        check: &'static str,
        detail: String,
    },

    #[error("model `{0}` carries no height model")]
    NoHeightModel(String),

    #[error("operation `{op}` is not supported on model `{model}`: {reason}")]
    Unsupported {
        op: &'static str,
        model: String,
        reason: &'static str,
    },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("lattice size {size} exceeds the cap of {cap}")]
    SizeCapExceeded { size: u128, cap: u128 },

    #[error("divergent stratum: exponent {name} = {value} does not decay")]
    DivergentStratum { name: &'static str, value: f64 },

    #[error(
        "truncation depth {depth} is insufficient: the valuation strata need at least {required}"
    )]
    TruncationInsufficient { depth: usize, required: usize },

    #[error("quadrature failed to reach tolerance {tol:e} (best error {best:e})")]
    QuadratureTolerance { tol: f64, best: f64 },

    #[error("singular design matrix in least-squares fit: {0}")]
    SingularFit(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),
}
