//! View-level synthesis backends.
//!
//! A backend receives one view (prompt, depth, current rendering and
//! generation mask) and returns the synthesized image. The same JSON
//! request/response types are used in-process and over HTTP, so the
//! embedded toy backend and a remote service share one code path.

mod local;
mod protocol;
mod remote;
mod server;

pub use local::{local_generate, LocalBackend, LOCAL_BACKEND_ID};
pub use protocol::{
    check_keep_contract, DecodedRequest, GenerateRequest, GenerateResponse, KEEP_TOLERANCE,
    PROTOCOL_VERSION,
};
pub use remote::{remote_generate, RemoteBackend, DEFAULT_TIMEOUT};
pub use server::ToyServer;

use thiserror::Error;

use crate::diffusion::DiffusionError;
use crate::imageio::ImageError;
use crate::texstate::TexStateError;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unsupported protocol version {found}, this build speaks {expected}")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend failed: {0}")]
    Backend(String),
    #[error("{pixels} keep pixels deviate from the init image, worst by {max_deviation:.4}")]
    ContractViolation { pixels: usize, max_deviation: f64 },
}

impl From<ImageError> for BackendError {
    fn from(e: ImageError) -> Self {
        BackendError::Protocol(e.to_string())
    }
}

impl From<TexStateError> for BackendError {
    fn from(e: TexStateError) -> Self {
        BackendError::Protocol(e.to_string())
    }
}

impl From<DiffusionError> for BackendError {
    fn from(e: DiffusionError) -> Self {
        BackendError::Backend(e.to_string())
    }
}

/// Something that turns a view request into a synthesized view.
pub trait Backend: Send + Sync {
    /// Short identifier recorded in run reports.
    fn id(&self) -> String;

    fn generate(&self, request: &GenerateRequest) -> Result<GenerateResponse, BackendError>;
}
