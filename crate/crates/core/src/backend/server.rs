use std::sync::Arc;
use std::thread::JoinHandle;

use log::{debug, warn};
use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};

use super::{local_generate, BackendError, GenerateRequest, LOCAL_BACKEND_ID, PROTOCOL_VERSION};

/// HTTP front for the toy backend, answering `/v1/generate` and
/// `/v1/health` one request at a time on a background thread.
pub struct ToyServer {
    server: Arc<Server>,
    url: String,
    worker: Option<JoinHandle<()>>,
}

fn json_response(status: u16, body: serde_json::Value) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_data(body.to_string().into_bytes())
        .with_status_code(status)
        .with_header(header)
}

fn handle(mut req: Request) {
    let route = (req.method().clone(), req.url().to_string());
    let response = match (&route.0, route.1.as_str()) {
        (Method::Get, "/v1/health") => json_response(
            200,
            json!({
                "status": "ok",
                "backend_id": LOCAL_BACKEND_ID,
                "version": PROTOCOL_VERSION,
                "build": env!("CARGO_PKG_VERSION"),
            }),
        ),
        (Method::Post, "/v1/generate") => {
            let mut body = String::new();
            match req.as_reader().read_to_string(&mut body) {
                Err(e) => json_response(400, json!({ "error": e.to_string() })),
                Ok(_) => match serde_json::from_str::<GenerateRequest>(&body) {
                    Err(e) => json_response(400, json!({ "error": format!("malformed request: {e}") })),
                    Ok(gen) => match local_generate(&gen) {
                        Ok(resp) => json_response(200, serde_json::to_value(resp).expect("serializable")),
                        Err(e @ BackendError::Backend(_)) => json_response(500, json!({ "error": e.to_string() })),
                        Err(e) => json_response(400, json!({ "error": e.to_string() })),
                    },
                },
            }
        }
        _ => json_response(404, json!({ "error": format!("no route {} {}", route.0, route.1) })),
    };
    debug!("{} {} -> {}", route.0, route.1, response.status_code().0);
    if let Err(e) = req.respond(response) {
        warn!("failed to send response: {e}");
    }
}

impl ToyServer {
    /// Binds `addr` (e.g. `127.0.0.1:0` for an ephemeral port) and starts
    /// serving.
    pub fn start(addr: &str) -> std::io::Result<Self> {
        let server = Server::http(addr).map_err(std::io::Error::other)?;
        let server = Arc::new(server);
        let port = server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .ok_or_else(|| std::io::Error::other("server is not bound to an IP address"))?;
        let url = format!("http://127.0.0.1:{port}");
        let srv = Arc::clone(&server);
        let worker = std::thread::spawn(move || {
            for req in srv.incoming_requests() {
                handle(req);
            }
        });
        Ok(Self {
            server,
            url,
            worker: Some(worker),
        })
    }

    /// Base URL to pass as a backend endpoint.
    pub fn url(&self) -> &str {
        &self.url
    }

    /// Blocks serving requests until the process exits.
    pub fn wait(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for ToyServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
