//! Read-only v1 HTTP API over the DAO run catalog.
//!
//! ```text
//! GET /api/v1/daos?page&page_size
//! GET /api/v1/daos/{id}/enhanced_metrics?run_id
//! GET /api/v1/daos/metrics/multi?dao_ids=1,2,3
//! GET /api/v1/daos/{id}/runs
//! ```

pub mod error;
pub mod routes;
pub mod state;

use std::future::Future;
use std::io;

use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

pub use error::{ApiError, ErrorBody};
pub use routes::{DaoSummary, MultiItem, PageEnvelope, RunSummary};
pub use state::{spawn_refresh, AppState, Source};

pub fn router(state: AppState) -> Router {
    routes::routes()
        .fallback(routes::not_found)
        .method_not_allowed_fallback(routes::method_not_allowed)
        .layer(TraceLayer::new_for_http())
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "serving API");
    }
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
