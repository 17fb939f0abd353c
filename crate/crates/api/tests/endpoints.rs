use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use dao_portal_api::{router, spawn_refresh, AppState, PageEnvelope};
use dao_portal_core::catalog::{Catalog, CatalogView};
use dao_portal_core::fixtures;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const UNISWAP: &[u8] = include_bytes!("../../core/testdata/uniswap.json");

async fn call(app: &Router, method: &str, uri: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = call(app, "GET", uri).await;
    (status, serde_json::from_slice(&body).unwrap())
}

fn corpus_view(n: usize) -> CatalogView {
    CatalogView::from_documents(fixtures::generate(n, 7).into_iter().map(|f| (f.file_name.clone(), f.to_bytes())))
        .unwrap()
}

struct Imported {
    _dir: tempfile::TempDir,
    catalog: Arc<Catalog>,
}

fn imported_catalog(files: &[(&str, Vec<u8>)]) -> Imported {
    let data = tempfile::tempdir().unwrap();
    for (name, bytes) in files {
        std::fs::write(data.path().join(name), bytes).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let catalog = Arc::new(Catalog::open(dir.path().join("catalog")).unwrap());
    let summary = catalog.import_directory(data.path()).unwrap();
    assert_eq!(summary.rejected(), 0);
    Imported { _dir: dir, catalog }
}

fn assert_error(status: StatusCode, body: &Value, expected_status: StatusCode, code: &str) {
    assert_eq!(status, expected_status, "{body}");
    assert_eq!(body["error"], code, "{body}");
    assert!(body["detail"].as_str().is_some_and(|d| !d.is_empty()), "{body}");
    assert_eq!(body.as_object().unwrap().len(), 2);
}

#[tokio::test]
async fn pagination_totals_and_bounds() {
    let app = router(AppState::demo(corpus_view(50)));

    let (status, body) = get(&app, "/api/v1/daos?page=1&page_size=50").await;
    assert_eq!(status, StatusCode::OK);
    let page: PageEnvelope = serde_json::from_value(body).unwrap();
    assert_eq!((page.items.len(), page.total, page.page, page.page_size), (50, 50, 1, 50));
    let ids: Vec<u64> = page.items.iter().map(|d| d.dao_id.0).collect();
    assert_eq!(ids, (1..=50).collect::<Vec<_>>());

    let (_, body) = get(&app, "/api/v1/daos?page=2&page_size=50").await;
    assert_eq!(body["items"], json!([]));
    assert_eq!(body["total"], 50);

    let (_, body) = get(&app, "/api/v1/daos?page=8&page_size=7").await;
    assert_eq!(body["items"].as_array().unwrap().len(), 1);
    assert_eq!(body["items"][0]["dao_id"], 50);

    let (_, body) = get(&app, "/api/v1/daos").await;
    assert_eq!((body["page"].clone(), body["page_size"].clone()), (json!(1), json!(50)));

    let (_, body) = get(&app, "/api/v1/daos?page_size=200").await;
    assert_eq!(body["items"].as_array().unwrap().len(), 50);

    for bad in ["page_size=0", "page_size=201", "page=0", "page=abc", "page_size=-1", "page_size=2.5"] {
        let (status, body) = get(&app, &format!("/api/v1/daos?{bad}")).await;
        assert_error(status, &body, StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter");
    }
}

#[tokio::test]
async fn listing_items_carry_metadata_only() {
    let app = router(AppState::demo(CatalogView::from_documents([("u.json".to_string(), UNISWAP.to_vec())]).unwrap()));
    let (_, body) = get(&app, "/api/v1/daos").await;
    assert_eq!(
        body["items"][0],
        json!({"dao_id": 1, "dao_name": "Uniswap", "chain_id": 1, "timestamp": "2025-04-06T17:38:34.119947"})
    );
}

#[tokio::test]
async fn enhanced_metrics_returns_all_five_blocks() {
    let imported = imported_catalog(&[("uniswap.json", UNISWAP.to_vec())]);
    let app = router(AppState::catalog(imported.catalog.clone()));

    let (status, body) = get(&app, "/api/v1/daos/1/enhanced_metrics").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["network_participation"]["num_distinct_voters"], 21527);
    assert_eq!(body["health_metrics"], json!({}));
    let keys: Vec<&str> = body.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "dao_id",
            "dao_name",
            "chain_id",
            "timestamp",
            "network_participation",
            "accumulated_funds",
            "voting_efficiency",
            "decentralisation",
            "health_metrics"
        ]
    );

    let source: Value = serde_json::from_slice(UNISWAP).unwrap();
    for block in ["network_participation", "accumulated_funds", "voting_efficiency", "decentralisation"] {
        assert_eq!(body[block], source[block], "{block} is served as stored");
    }

    let (status, body) = get(&app, "/api/v1/daos/999999/enhanced_metrics").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_dao");
    let (status, body) = get(&app, "/api/v1/daos/abc/enhanced_metrics").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_dao");
}

#[tokio::test]
async fn absent_blocks_are_empty_objects() {
    let doc = json!({"dao_name": "Bare", "chain_id": 5, "timestamp": "2025-01-01T00:00:00Z"});
    let app = router(AppState::demo(
        CatalogView::from_documents([("bare.json".to_string(), serde_json::to_vec(&doc).unwrap())]).unwrap(),
    ));
    let (_, body) = get(&app, "/api/v1/daos/1/enhanced_metrics").await;
    for block in
        ["network_participation", "accumulated_funds", "voting_efficiency", "decentralisation", "health_metrics"]
    {
        assert_eq!(body[block], json!({}), "{block}");
    }
}

#[tokio::test]
async fn run_scoped_retrieval_and_history() {
    let imported = imported_catalog(&[("uniswap.json", UNISWAP.to_vec())]);
    let catalog = imported.catalog.clone();
    let mut v2: Value = serde_json::from_slice(UNISWAP).unwrap();
    v2["accumulated_funds"]["treasury_value_usd"] = json!(1.5e9);
    let second =
        catalog.replace_snapshot_bytes("Uniswap", "uniswap-v2.json", &serde_json::to_vec(&v2).unwrap()).unwrap();
    let other = json!({"dao_name": "Other", "chain_id": 1, "timestamp": "2025-01-01T00:00:00Z"});
    let other_run =
        catalog.replace_snapshot_bytes("Other", "other.json", &serde_json::to_vec(&other).unwrap()).unwrap();
    let app = router(AppState::catalog(catalog));

    let (_, runs) = get(&app, "/api/v1/daos/1/runs").await;
    let runs = runs.as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["run_id"], second.0);
    assert_eq!(runs[0]["source_path"], "uniswap-v2.json");
    assert!(runs[0]["created_at"].as_str() >= runs[1]["created_at"].as_str());
    assert_eq!(
        runs[0].as_object().unwrap().keys().collect::<Vec<_>>(),
        ["run_id", "created_at", "source_path", "content_digest"]
    );

    let (_, latest) = get(&app, "/api/v1/daos/1/enhanced_metrics").await;
    assert_eq!(latest["accumulated_funds"]["treasury_value_usd"], 1.5e9);
    let first = runs[1]["run_id"].as_u64().unwrap();
    let (_, old) = get(&app, &format!("/api/v1/daos/1/enhanced_metrics?run_id={first}")).await;
    assert_eq!(old["accumulated_funds"]["treasury_value_usd"], 2.087864e9);

    let (status, body) = get(&app, "/api/v1/daos/1/enhanced_metrics?run_id=999").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_run");
    let (status, body) = get(&app, &format!("/api/v1/daos/1/enhanced_metrics?run_id={}", other_run.0)).await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_run");
    let (status, body) = get(&app, "/api/v1/daos/1/enhanced_metrics?run_id=x").await;
    assert_error(status, &body, StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter");

    let (_, runs) = get(&app, "/api/v1/daos/2/runs").await;
    assert_eq!(runs.as_array().unwrap().len(), 1);
    let (status, body) = get(&app, "/api/v1/daos/77/runs").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "unknown_dao");
}

#[tokio::test]
async fn multi_preserves_order_and_tolerates_unknown_ids() {
    let app = router(AppState::demo(corpus_view(50)));

    let (status, body) = get(&app, "/api/v1/daos/metrics/multi?dao_ids=3,1,999999,2").await;
    assert_eq!(status, StatusCode::OK);
    let items = body.as_array().unwrap();
    assert_eq!(items.iter().map(|i| i["dao_id"].as_u64().unwrap()).collect::<Vec<_>>(), [3, 1, 999999, 2]);
    assert_eq!(items[2], json!({"dao_id": 999999, "error": "unknown"}));

    for (i, item) in items.iter().enumerate().filter(|(i, _)| *i != 2) {
        let (_, single) = get(&app, &format!("/api/v1/daos/{}/enhanced_metrics", item["dao_id"])).await;
        assert_eq!(&single, item, "multi item {i} equals the single response");
    }

    let all: Vec<String> = (1..=50).map(|i| i.to_string()).collect();
    let (_, body) = get(&app, &format!("/api/v1/daos/metrics/multi?dao_ids={}", all.join(","))).await;
    assert_eq!(body.as_array().unwrap().len(), 50);
    assert!(body.as_array().unwrap().iter().all(|i| i.get("error").is_none()));

    let too_many: Vec<String> = (1..=201).map(|i| i.to_string()).collect();
    let too_many = format!("dao_ids={}", too_many.join(","));
    for bad in ["", "dao_ids=", "dao_ids=1,,2", "dao_ids=a", "dao_ids=1;2", "dao_ids=-3", too_many.as_str()] {
        let (status, body) = get(&app, &format!("/api/v1/daos/metrics/multi?{bad}")).await;
        assert_error(status, &body, StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter");
    }
}

#[tokio::test]
async fn demo_and_catalog_serve_identical_payloads() {
    let files: Vec<_> = fixtures::generate(12, 3).into_iter().map(|f| (f.file_name.clone(), f.to_bytes())).collect();
    let demo = router(AppState::demo(CatalogView::from_documents(files.clone()).unwrap()));
    let refs: Vec<(&str, Vec<u8>)> = files.iter().map(|(n, b)| (n.as_str(), b.clone())).collect();
    let imported = imported_catalog(&refs);
    let live = router(AppState::catalog(imported.catalog.clone()));

    let (_, d) = get(&demo, "/api/v1/daos?page_size=200").await;
    let (_, l) = get(&live, "/api/v1/daos?page_size=200").await;
    assert_eq!(d, l);
    for id in 1..=12 {
        let uri = format!("/api/v1/daos/{id}/enhanced_metrics");
        assert_eq!(get(&demo, &uri).await, get(&live, &uri).await, "dao {id}");
    }
    let (_, runs) = get(&demo, "/api/v1/daos/4/runs").await;
    assert_eq!(runs.as_array().unwrap().len(), 1, "a demo DAO has one synthetic run");
}

#[tokio::test]
async fn responses_are_deterministic() {
    let app = router(AppState::demo(corpus_view(20)));
    for uri in [
        "/api/v1/daos?page_size=13&page=2",
        "/api/v1/daos/5/enhanced_metrics",
        "/api/v1/daos/metrics/multi?dao_ids=9,4",
    ] {
        assert_eq!(call(&app, "GET", uri).await, call(&app, "GET", uri).await);
    }
}

#[tokio::test]
async fn writes_and_unknown_routes_use_the_error_shape() {
    let app = router(AppState::demo(corpus_view(3)));
    for (method, uri) in
        [("POST", "/api/v1/daos"), ("PUT", "/api/v1/daos/1/enhanced_metrics"), ("DELETE", "/api/v1/daos/1/runs")]
    {
        let (status, body) = call(&app, method, uri).await;
        assert_error(
            status,
            &serde_json::from_slice(&body).unwrap(),
            StatusCode::METHOD_NOT_ALLOWED,
            "method_not_allowed",
        );
    }
    let (status, body) = get(&app, "/api/v1/nope").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "not_found");
    let (status, body) = get(&app, "/api/v1/imports").await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "not_found");
}

#[tokio::test]
async fn cors_is_permissive() {
    let app = router(AppState::demo(corpus_view(3)));
    let req = Request::builder()
        .uri("/api/v1/daos")
        .header("origin", "http://dashboard.example")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
    assert_eq!(resp.headers()["content-type"], "application/json");
}

#[tokio::test]
async fn refresh_picks_up_imports_from_another_handle() {
    let imported = imported_catalog(&[("uniswap.json", UNISWAP.to_vec())]);
    let app = router(AppState::catalog(imported.catalog.clone()));
    let task = spawn_refresh(imported.catalog.clone(), Duration::from_millis(20));

    let writer = Catalog::open_existing(imported.catalog.dir()).unwrap();
    let doc = json!({"dao_name": "Late", "chain_id": 2, "timestamp": "2025-02-01T00:00:00Z"});
    writer.replace_snapshot_bytes("Late", "late.json", &serde_json::to_vec(&doc).unwrap()).unwrap();

    let mut total = 0;
    for _ in 0..100 {
        total = get(&app, "/api/v1/daos").await.1["total"].as_u64().unwrap();
        if total == 2 {
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    task.abort();
    assert_eq!(total, 2);
}
