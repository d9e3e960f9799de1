use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point {0} lies outside the closed unit disc")]
    OutsideDisc(Complex64),
    #[error("derivative is unbounded at {0}")]
    Singularity(Complex64),
    #[error("map is not orientation preserving at {0}")]
    Orientation(Complex64),
    #[error("integrand is not finite at node r={r}, theta={theta}")]
    Evaluation { r: f64, theta: f64 },
    #[error("kappa lies beyond the root of nu(kappa) = 1 (ln nu = {ln_nu})")]
    BeyondBetaTilde { ln_nu: f64 },
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("cannot parse map descriptor: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
