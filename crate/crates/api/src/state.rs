use std::sync::Arc;
use std::time::Duration;

use dao_portal_core::catalog::{Catalog, CatalogView};
use tokio::task::JoinHandle;

/// Where the API reads from.
#[derive(Debug, Clone)]
pub enum Source {
    /// The on-disk run catalog; imports by other processes become visible
    /// after a refresh.
    Catalog(Arc<Catalog>),
    /// A static bundle loaded at startup.
    Demo(Arc<CatalogView>),
}

#[derive(Debug, Clone)]
pub struct AppState {
    source: Source,
}

impl AppState {
    pub fn catalog(catalog: Arc<Catalog>) -> Self {
        Self { source: Source::Catalog(catalog) }
    }

    pub fn demo(view: CatalogView) -> Self {
        Self { source: Source::Demo(Arc::new(view)) }
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// The state a single request works against.
    pub fn view(&self) -> Arc<CatalogView> {
        match &self.source {
            Source::Catalog(c) => c.view(),
            Source::Demo(v) => Arc::clone(v),
        }
    }
}

/// Periodically replays catalog records appended by other processes so that
/// a running server picks up new imports.
pub fn spawn_refresh(catalog: Arc<Catalog>, every: Duration) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(every);
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            ticker.tick().await;
            let c = Arc::clone(&catalog);
            match tokio::task::spawn_blocking(move || c.refresh()).await {
                Ok(Ok(true)) => tracing::info!(runs = catalog.view().run_count(), "catalog refreshed"),
                Ok(Ok(false)) => {}
                Ok(Err(e)) => tracing::warn!(error = %e, "catalog refresh failed"),
                Err(e) => tracing::warn!(error = %e, "catalog refresh task panicked"),
            }
        }
    })
}
