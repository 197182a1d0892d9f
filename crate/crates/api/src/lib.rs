//! Loopback HTTP/JSON service over one organigram. Every request works on an
//! immutable snapshot; model replacements swap the snapshot atomically and
//! bump its revision.

mod routes;

use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use polorg_core::OrgModel;
use tokio::net::TcpListener;

pub use routes::router;

pub const DEFAULT_PORT: u16 = 7341;

pub fn default_addr() -> SocketAddr {
    SocketAddr::from((Ipv4Addr::LOCALHOST, DEFAULT_PORT))
}

#[derive(Debug)]
pub struct Snapshot {
    pub model: OrgModel,
    pub revision: u64,
}

/// The single-model session: one writer at a time, readers never blocked
/// for longer than an `Arc` clone.
#[derive(Debug, Clone)]
pub struct Session {
    current: Arc<RwLock<Arc<Snapshot>>>,
    origin: Option<Arc<PathBuf>>,
}

impl Session {
    /// Starts at revision 1. `origin` is where an explicit save writes.
    pub fn new(model: OrgModel, origin: Option<PathBuf>) -> Self {
        Session { current: Arc::new(RwLock::new(Arc::new(Snapshot { model, revision: 1 }))), origin: origin.map(Arc::new) }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Installs `model` as the next revision. With `expected` set, fails
    /// with the current revision when it does not match.
    pub fn replace(&self, model: OrgModel, expected: Option<u64>) -> Result<Arc<Snapshot>, u64> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        if let Some(rev) = expected {
            if rev != guard.revision {
                return Err(guard.revision);
            }
        }
        let next = Arc::new(Snapshot { model, revision: guard.revision + 1 });
        *guard = Arc::clone(&next);
        Ok(next)
    }

    pub fn origin(&self) -> Option<&Path> {
        self.origin.as_deref().map(PathBuf::as_path)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BindError {
    #[error("refusing to listen on non-loopback address {0}; pass --acknowledge-exposure to allow it")]
    Exposure(SocketAddr),
    #[error("cannot listen on {0}: {1}")]
    Io(SocketAddr, std::io::Error),
}

/// Non-loopback addresses are refused unless exposure was acknowledged.
pub fn check_exposure(addr: &SocketAddr, acknowledged: bool) -> Result<(), BindError> {
    if addr.ip().is_loopback() || acknowledged {
        Ok(())
    } else {
        Err(BindError::Exposure(*addr))
    }
}

pub async fn bind(addr: SocketAddr, acknowledged: bool) -> Result<TcpListener, BindError> {
    check_exposure(&addr, acknowledged)?;
    TcpListener::bind(addr).await.map_err(|e| BindError::Io(addr, e))
}

pub async fn serve(listener: TcpListener, session: Session, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    axum::serve(listener, router(session, static_dir)).await
}
