//! Service configuration and lifecycle.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use kwsp_core::Platform;
use thiserror::Error;
use tokio::net::TcpListener;

use crate::api::{router, AppState};

pub const DEFAULT_ADDR: &str = "127.0.0.1:7878";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub data_dir: PathBuf,
    pub addr: String,
    pub token: Option<String>,
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("address {0} is already in use")]
    PortInUse(SocketAddr),
    #[error(transparent)]
    Platform(#[from] kwsp_core::Error),
    #[error("network failure: {0}")]
    Io(#[from] io::Error),
}

impl ServeError {
    pub fn code(&self) -> &'static str {
        match self {
            ServeError::BadConfig(_) => "BadConfig",
            ServeError::PortInUse(_) => "PortInUse",
            ServeError::Platform(e) => e.code().as_str(),
            ServeError::Io(_) => "StorageFailure",
        }
    }
}

impl Config {
    /// Checks the configuration and returns the listen address.
    pub fn validate(&self) -> Result<SocketAddr, ServeError> {
        let addr: SocketAddr = self
            .addr
            .parse()
            .map_err(|_| ServeError::BadConfig(format!("`{}` is not a socket address", self.addr)))?;
        if self.data_dir.as_os_str().is_empty() {
            return Err(ServeError::BadConfig("data directory is empty".into()));
        }
        if self.data_dir.exists() && !self.data_dir.is_dir() {
            return Err(ServeError::BadConfig(format!("{} is not a directory", self.data_dir.display())));
        }
        if matches!(&self.token, Some(t) if t.trim().is_empty()) {
            return Err(ServeError::BadConfig("token must not be empty".into()));
        }
        Ok(addr)
    }
}

/// A bound, not yet running service.
pub struct Server {
    listener: TcpListener,
    state: AppState,
}

impl Server {
    /// Binds the listen address and opens the archive, creating the data
    /// directory when it is missing.
    pub async fn bind(config: &Config) -> Result<Server, ServeError> {
        let addr = config.validate()?;
        let listener = TcpListener::bind(addr).await.map_err(|e| match e.kind() {
            io::ErrorKind::AddrInUse => ServeError::PortInUse(addr),
            _ => ServeError::Io(e),
        })?;
        let platform = Platform::open(&config.data_dir)?;
        Ok(Server {
            listener,
            state: AppState::new(platform, config.token.clone()),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    pub fn state(&self) -> AppState {
        self.state.clone()
    }

    /// Serves until `shutdown` resolves, then writes the index snapshot.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
        let state = self.state.clone();
        axum::serve(self.listener, router(self.state))
            .with_graceful_shutdown(shutdown)
            .await?;
        let platform = state.platform();
        let guard = platform.read().unwrap_or_else(|p| p.into_inner());
        guard.flush()?;
        Ok(())
    }
}

pub async fn serve(config: &Config, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    Server::bind(config).await?.run(shutdown).await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
