//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid {n_x}x{n_y}: sides must be even and at least 4")]
    InvalidGrid { n_x: usize, n_y: usize },

    #[error("array shape {got:?} does not match grid shape {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported derivative order {0}; only orders 1 and 2 are defined")]
    UnsupportedOrder(u32),

    #[error("field is not divergence-free: relative divergence {relative_divergence:.3e} exceeds {tolerance:.1e}")]
    NotSolenoidal {
        relative_divergence: f64,
        tolerance: f64,
    },

    #[error("invalid GRF spec: require alpha > 1 and tau > 0, got alpha={alpha}, tau={tau}")]
    InvalidGrfSpec { alpha: f64, tau: f64 },

    #[error("sigma_min must lie in (0, 1), got {0}")]
    InvalidSigmaMin(f64),

    #[error("path time {0} outside [0, 1]")]
    TauOutOfRange(f64),

    #[error("conditional velocity undefined: sigma_tau = {sigma_tau:.3e} at tau = {tau}")]
    DegenerateSchedule { tau: f64, sigma_tau: f64 },

    #[error("empty batch")]
    EmptyBatch,

    #[error("grid {n_x}x{n_y} too large for dense marginal computation (limit {limit}x{limit})")]
    GridTooLarge {
        n_x: usize,
        n_y: usize,
        limit: usize,
    },

    #[error("field carries mass on a zero-variance covariance coordinate at mode ({kx}, {ky}); density is ill-posed")]
    SingularCovariance { kx: i64, ky: i64 },

    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(String),

    #[error("time step unstable at solver step {step}: max |u| = {max_abs_velocity:.3e}, dt = {dt:.3e}, h = {h:.3e}")]
    UnstableStep {
        step: usize,
        max_abs_velocity: f64,
        dt: f64,
        h: f64,
    },

    #[error("adaptive step size underflow at tau = {tau:.6} (h = {h:.3e})")]
    StepUnderflow { tau: f64, h: f64 },

    #[error("non-finite state encountered at tau = {tau:.6}")]
    NonFiniteState { tau: f64 },

    #[error("bad magic bytes at offset {offset}: expected {expected:?}, got {got:?}")]
    BadMagic {
        offset: usize,
        expected: [u8; 4],
        got: [u8; 4],
    },

    #[error("bad trajectory file header: {0}")]
    BadHeader(String),

    #[error("trajectory file footer mismatch: header implies {expected} payload bytes, footer records {got}")]
    FooterMismatch { expected: u64, got: u64 },

    #[error("payload checksum mismatch: manifest records {expected}, file hashes to {got}")]
    ChecksumMismatch { expected: String, got: String },

    #[error("frame index {frame} out of range (file has {frames} frames)")]
    FrameOutOfRange { frame: usize, frames: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad
    /// inputs or malformed files). The CLI maps these to exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnstableStep { .. } | Error::StepUnderflow { .. } | Error::NonFiniteState { .. }
        )
    }
}
