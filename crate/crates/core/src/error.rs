use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("inadmissible point: {0}")]
    InadmissiblePoint(String),

    #[error("negative order {0} for a Bowen ball")]
    NegativeOrder(f64),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("depth cap {depth_cap} cannot reach cutoff {cutoff} (needs at least {needed})")]
    DepthCapTooSmall {
        depth_cap: usize,
        cutoff: f64,
        needed: usize,
    },

    #[error("cover value is not monotone in alpha: {0}")]
    NonMonotone(String),

    #[error("not in same rectangle: {0}")]
    NotInRectangle(String),

    #[error("points are not {relation}-related: {detail}")]
    NotRelated {
        relation: &'static str,
        detail: String,
    },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("unsupported target: {0}")]
    Unsupported(String),

    #[error("not an attractor model: pressure of the geometric potential is {0}")]
    NotAttractor(f64),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
