use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Instant;

use tiny_http::{Header, Method, Response, Server};

use super::route;
use crate::store::Store;

pub const DEFAULT_THREADS: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {detail}")]
    BindFailure { addr: String, detail: String },
}

/// A running service. Dropping the handle does not stop it; call
/// [`ServiceHandle::shutdown`] or [`ServiceHandle::join`].
pub struct ServiceHandle {
    addr: SocketAddr,
    server: Arc<Server>,
    stopping: Arc<AtomicBool>,
    workers: Vec<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL of the endpoint, e.g. `http://127.0.0.1:8080/provsap`.
    pub fn endpoint_url(&self) -> String {
        format!("http://{}{}", self.addr, super::ENDPOINT)
    }

    /// Blocks until every worker exits, which only happens after shutdown.
    pub fn join(self) {
        for w in self.workers {
            let _ = w.join();
        }
    }

    pub fn shutdown(self) {
        self.stopping.store(true, Ordering::SeqCst);
        for _ in &self.workers {
            self.server.unblock();
        }
        self.join();
    }
}

pub fn serve(store: Arc<Store>, host: &str, port: u16) -> Result<ServiceHandle, ServiceError> {
    serve_with_threads(store, host, port, DEFAULT_THREADS)
}

/// Binds `host:port` (port 0 picks a free one) and answers requests on
/// `threads` workers.
pub fn serve_with_threads(
    store: Arc<Store>,
    host: &str,
    port: u16,
    threads: usize,
) -> Result<ServiceHandle, ServiceError> {
    let want = format!("{host}:{port}");
    let server = Server::http(want.as_str()).map_err(|e| ServiceError::BindFailure {
        addr: want.clone(),
        detail: e.to_string(),
    })?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| ServiceError::BindFailure {
            addr: want.clone(),
            detail: "not an IP listener".into(),
        })?;
    let server = Arc::new(server);
    let stopping = Arc::new(AtomicBool::new(false));
    let workers = (0..threads.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let store = Arc::clone(&store);
            let stopping = Arc::clone(&stopping);
            std::thread::spawn(move || worker(&server, &store, &stopping))
        })
        .collect();
    log::info!("ProvSAP listening on http://{addr}{}", super::ENDPOINT);
    Ok(ServiceHandle {
        addr,
        server,
        stopping,
        workers,
    })
}

fn worker(server: &Server, store: &Store, stopping: &AtomicBool) {
    loop {
        let request = match server.recv() {
            Ok(r) => r,
            Err(_) if stopping.load(Ordering::SeqCst) => return,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let started = Instant::now();
        let method = request.method().clone();
        let url = request.url().to_owned();
        let answer = match method {
            Method::Get | Method::Head => route(store, "GET", &url),
            ref other => route(store, other.as_str(), &url),
        };
        let status = answer.status;
        let header = Header::from_bytes("Content-Type", answer.content_type.as_bytes())
            .expect("content type is a valid header value");
        let response = Response::from_data(answer.body)
            .with_status_code(status)
            .with_header(header);
        if let Err(e) = request.respond(response) {
            log::warn!("{method} {url}: failed to send response: {e}");
        }
        log::info!("{method} {url} {status} {}ms", started.elapsed().as_millis());
    }
}
