use dao_portal_api::{DaoSummary, MultiItem, PageEnvelope};
use dao_portal_core::payload::{ApiPayload, DaoId};
use serde::de::DeserializeOwned;

use crate::error::CliError;

const PAGE_SIZE: usize = 200;

/// Thin client for the v1 API.
#[derive(Debug, Clone)]
pub struct ApiClient {
    base: String,
    http: reqwest::Client,
}

impl ApiClient {
    pub fn new(base: &str) -> Self {
        Self { base: base.trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, CliError> {
        let url = format!("{}{path}", self.base);
        let http_err = |e: reqwest::Error| CliError::Http { url: url.clone(), message: e.to_string() };
        let resp = self.http.get(&url).send().await.map_err(http_err)?;
        let status = resp.status();
        let body = resp.bytes().await.map_err(http_err)?;
        if !status.is_success() {
            return Err(CliError::Http { url, message: format!("{status}: {}", String::from_utf8_lossy(&body)) });
        }
        serde_json::from_slice(&body).map_err(|e| CliError::Http { url, message: format!("unexpected body: {e}") })
    }

    /// Every DAO the API lists, following pagination.
    pub async fn list_daos(&self) -> Result<Vec<DaoSummary>, CliError> {
        let mut out = Vec::new();
        for page in 1.. {
            let env: PageEnvelope = self.get(&format!("/api/v1/daos?page={page}&page_size={PAGE_SIZE}")).await?;
            let last = env.items.len() < PAGE_SIZE;
            out.extend(env.items);
            if last || out.len() >= env.total {
                break;
            }
        }
        Ok(out)
    }

    pub async fn payload(&self, id: DaoId) -> Result<ApiPayload, CliError> {
        self.get(&format!("/api/v1/daos/{id}/enhanced_metrics")).await
    }

    /// Payloads for `ids` in batches; unknown ids are skipped.
    pub async fn payloads(&self, ids: &[DaoId]) -> Result<Vec<ApiPayload>, CliError> {
        let mut out = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(PAGE_SIZE) {
            let list: Vec<String> = chunk.iter().map(ToString::to_string).collect();
            let items: Vec<MultiItem> =
                self.get(&format!("/api/v1/daos/metrics/multi?dao_ids={}", list.join(","))).await?;
            out.extend(items.into_iter().filter_map(|i| match i {
                MultiItem::Found(p) => Some(*p),
                MultiItem::Missing { .. } => None,
            }));
        }
        Ok(out)
    }
}
