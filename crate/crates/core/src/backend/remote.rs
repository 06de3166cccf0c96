use std::error::Error as _;
use std::io;
use std::time::Duration;

use log::warn;

use super::{check_keep_contract, Backend, BackendError, GenerateRequest, GenerateResponse, KEEP_TOLERANCE};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

fn is_timeout(err: &ureq::Transport) -> bool {
    err.source()
        .and_then(|s| s.downcast_ref::<io::Error>())
        .is_some_and(|e| matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock))
}

fn map_error(err: ureq::Error, timeout: Duration) -> BackendError {
    match err {
        ureq::Error::Status(code, resp) => {
            let body = resp.into_string().unwrap_or_default();
            let message = serde_json::from_str::<serde_json::Value>(&body)
                .ok()
                .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
                .unwrap_or(body);
            BackendError::Backend(format!("HTTP {code}: {message}"))
        }
        ureq::Error::Transport(t) if is_timeout(&t) => BackendError::Timeout(timeout),
        ureq::Error::Transport(t) => match t.kind() {
            ureq::ErrorKind::ConnectionFailed | ureq::ErrorKind::Dns => {
                BackendError::Unreachable(t.to_string())
            }
            ureq::ErrorKind::InvalidUrl | ureq::ErrorKind::UnknownScheme => {
                BackendError::InvalidRequest(t.to_string())
            }
            _ => BackendError::Protocol(t.to_string()),
        },
    }
}

/// Posts `request` to `<endpoint>/v1/generate`.
///
/// Keep pixels of the answer are checked against the request's init image;
/// a deviation beyond [`KEEP_TOLERANCE`] is logged and the response is
/// still returned.
pub fn remote_generate(
    endpoint: &str,
    request: &GenerateRequest,
    timeout: Duration,
) -> Result<GenerateResponse, BackendError> {
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let url = format!("{}/v1/generate", endpoint.trim_end_matches('/'));
    let resp = agent
        .post(&url)
        .send_json(request)
        .map_err(|e| map_error(e, timeout))?;
    let body = resp.into_string().map_err(|e| {
        if matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock) {
            BackendError::Timeout(timeout)
        } else {
            BackendError::Protocol(e.to_string())
        }
    })?;
    let response: GenerateResponse =
        serde_json::from_str(&body).map_err(|e| BackendError::Protocol(format!("bad response body: {e}")))?;

    let decoded = request.decode()?;
    let image = response.decode_image(decoded.resolution())?;
    if let Err(violation) = check_keep_contract(&decoded.init_image, &decoded.mask, &image, KEEP_TOLERANCE) {
        warn!("backend {}: {violation}", response.backend_id);
    }
    Ok(response)
}

/// A backend reached over HTTP.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    pub endpoint: String,
    pub timeout: Duration,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout,
        }
    }
}

impl Backend for RemoteBackend {
    fn id(&self) -> String {
        format!("remote:{}", self.endpoint)
    }

    fn generate(&self, request: &GenerateRequest) -> Result<GenerateResponse, BackendError> {
        remote_generate(&self.endpoint, request, self.timeout)
    }
}
