//! Local HTTP API over the ftklipse engine.
//!
//! The service owns one store for the life of the process, scans the tools
//! directory once at startup and serves JSON endpoints for cases, evidence,
//! tools, runs and reports. Every engine call runs on the blocking pool, so
//! slow hashing or long tool runs never stall other requests.
//!
//! ```no_run
//! # async fn demo() -> Result<(), ftklipse_server::ServiceError> {
//! use ftklipse_server::{start_service, ServiceConfig};
//!
//! let config = ServiceConfig::new("data", "tools.d", "examiner");
//! let service = start_service(config).await?;
//! println!("listening on {}", service.local_addr());
//! service.shutdown().await
//! # }
//! ```

#![forbid(unsafe_code)]

mod api;
mod error;
mod runs;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ftklipse_core::audit_log::LogSink;
use ftklipse_core::reporting::DEFAULT_LATEX_BIN;
use ftklipse_core::toolkit::{ScanDiagnostic, ToolRegistry};
use ftklipse_core::{AdapterKind, Casework};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use error::{status_for, ApiError, ErrorBody, ServiceError};
pub use runs::{RunRecord, RunStatus};

pub const DEFAULT_BIND: &str = "127.0.0.1:7806";
pub const PRINCIPAL_HEADER: &str = "x-principal";
const STAGING_DIR: &str = ".staging";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind_address: String,
    pub data_root: PathBuf,
    pub tools_dir: PathBuf,
    /// Principal used when a request carries no `X-Principal` header.
    pub principal: String,
    /// Static web UI served under `/ui/`, when built.
    pub ui_dir: Option<PathBuf>,
    pub latex_bin: String,
    pub adapter: AdapterKind,
    pub log: Option<Arc<LogSink>>,
}

impl ServiceConfig {
    pub fn new(data_root: impl Into<PathBuf>, tools_dir: impl Into<PathBuf>, principal: &str) -> Self {
        ServiceConfig {
            bind_address: DEFAULT_BIND.to_string(),
            data_root: data_root.into(),
            tools_dir: tools_dir.into(),
            principal: principal.to_string(),
            ui_dir: None,
            latex_bin: DEFAULT_LATEX_BIN.to_string(),
            adapter: AdapterKind::File,
            log: None,
        }
    }
}

pub(crate) struct AppState {
    pub(crate) work: Casework,
    pub(crate) tools: ToolRegistry,
    pub(crate) principal: String,
    pub(crate) latex_bin: String,
    pub(crate) ui_dir: Option<PathBuf>,
    pub(crate) runs: runs::RunTable,
    log: Option<Arc<LogSink>>,
    staging: PathBuf,
    staged: AtomicU64,
}

impl AppState {
    pub(crate) fn log(&self, message: &str) {
        if let Some(sink) = &self.log {
            let _ = sink.log(message);
        }
    }

    pub(crate) fn staging_path(&self) -> PathBuf {
        let n = self.staged.fetch_add(1, Ordering::Relaxed);
        self.staging.join(format!("upload-{}-{n}", std::process::id()))
    }
}

/// A service accepting connections.
pub struct RunningService {
    addr: SocketAddr,
    diagnostics: Vec<ScanDiagnostic>,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Manifests skipped during the startup scan.
    pub fn tool_diagnostics(&self) -> &[ScanDiagnostic] {
        &self.diagnostics
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> Result<(), ServiceError> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.join().await
    }

    async fn join(self) -> Result<(), ServiceError> {
        let addr = self.addr;
        match self.task.await {
            Ok(Ok(())) => Ok(()),
            Ok(Err(e)) => Err(ServiceError::Stopped { addr, message: e.to_string() }),
            Err(e) => Err(ServiceError::Stopped { addr, message: e.to_string() }),
        }
    }
}

/// Opens the store, scans the tools directory and binds the listener.
///
/// Fails when the data root cannot be opened, the store is corrupt or the
/// address is taken.
pub async fn start_service(config: ServiceConfig) -> Result<RunningService, ServiceError> {
    let addr: SocketAddr = tokio::net::lookup_host(&config.bind_address)
        .await
        .ok()
        .and_then(|mut it| it.next())
        .ok_or_else(|| ServiceError::Address(config.bind_address.clone()))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr: config.bind_address.clone(), source })?;
    let local = listener
        .local_addr()
        .map_err(|source| ServiceError::Bind { addr: config.bind_address.clone(), source })?;

    let data_root = config.data_root.clone();
    let adapter = config.adapter;
    let work = tokio::task::spawn_blocking(move || Casework::open(data_root, adapter))
        .await
        .map_err(|e| ServiceError::Stopped { addr: local, message: e.to_string() })??;
    let staging = config.data_root.join(STAGING_DIR);
    let _ = std::fs::remove_dir_all(&staging);
    std::fs::create_dir_all(&staging).map_err(|e| {
        ftklipse_core::Error::Io { context: format!("cannot create {}", staging.display()), source: e }
    })?;
    let (tools, diagnostics) = ToolRegistry::load_dir(&config.tools_dir);

    let state = Arc::new(AppState {
        work,
        tools,
        principal: config.principal,
        latex_bin: config.latex_bin,
        ui_dir: config.ui_dir,
        runs: runs::RunTable::default(),
        log: config.log,
        staging,
        staged: AtomicU64::new(0),
    });
    for d in &diagnostics {
        state.log(&format!("tool manifest {} skipped: {}", d.path.display(), d.message));
    }
    state.log(&format!(
        "service listening on http://{local} with {} tool(s)",
        state.tools.len()
    ));

    let app = api::router(state);
    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    Ok(RunningService { addr: local, diagnostics, stop: Some(stop), task })
}

/// A service on its own runtime, for callers without one. Stops on drop.
pub struct BackgroundService {
    runtime: Option<tokio::runtime::Runtime>,
    service: Option<RunningService>,
}

impl BackgroundService {
    pub fn start(config: ServiceConfig) -> Result<Self, ServiceError> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(|source| ServiceError::Bind { addr: config.bind_address.clone(), source })?;
        let service = runtime.block_on(start_service(config))?;
        Ok(BackgroundService { runtime: Some(runtime), service: Some(service) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.service.as_ref().expect("running").local_addr()
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.local_addr())
    }

    pub fn stop(mut self) -> Result<(), ServiceError> {
        self.stop_inner()
    }

    fn stop_inner(&mut self) -> Result<(), ServiceError> {
        match (self.runtime.take(), self.service.take()) {
            (Some(rt), Some(svc)) => rt.block_on(svc.shutdown()),
            _ => Ok(()),
        }
    }
}

impl Drop for BackgroundService {
    fn drop(&mut self) {
        let _ = self.stop_inner();
    }
}

/// Serves until Ctrl-C, then shuts down gracefully.
pub fn serve_until_interrupted(config: ServiceConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), ServiceError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| ServiceError::Bind { addr: config.bind_address.clone(), source })?;
    runtime.block_on(async move {
        let service = start_service(config).await?;
        on_ready(service.local_addr());
        let _ = tokio::signal::ctrl_c().await;
        service.shutdown().await
    })
}
