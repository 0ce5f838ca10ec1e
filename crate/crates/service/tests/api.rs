use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use evsim::mlp::{save_model, MlpModel, ModelConfig};
use evsim::predict::PredictResponse;
use evsim_service::{router, spawn_model_load, AppState};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn model(id: u8) -> MlpModel {
    MlpModel::init(&ModelConfig {
        seed: 3,
        ..ModelConfig::preset(id, 5).unwrap()
    })
    .unwrap()
}

async fn call(state: &AppState, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

fn post(body: &str) -> Request<Body> {
    Request::post("/api/predict")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn health() -> Request<Body> {
    Request::get("/api/health").body(Body::empty()).unwrap()
}

#[tokio::test]
async fn health_before_and_after_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(&model(4), &path).unwrap();

    let state = AppState::new();
    assert_eq!(
        call(&state, health()).await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );
    assert_eq!(
        call(&state, post(r#"{"grid":["DE"]}"#)).await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );

    spawn_model_load(path, state.clone())
        .await
        .unwrap()
        .unwrap();
    let (status, body) = call(&state, health()).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["model_id"], 4);
    assert_eq!(v["m"], 5);
}

#[tokio::test]
async fn predicts_every_evse_and_flags_unreachable() {
    let state = AppState::with_model(model(2));
    let (status, body) = call(&state, post(r#"{"grid":["DRRE","PPPP","EPPP"]}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let resp: PredictResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!((resp.model_id, resp.m), (2, 5));
    let flags: Vec<_> = resp
        .evses
        .iter()
        .map(|e| ((e.row, e.col), e.reachable))
        .collect();
    assert_eq!(flags, vec![((0, 3), true), ((2, 0), false)]);
    assert!(resp
        .evses
        .iter()
        .all(|e| e.tau_kw > 0.0 && e.p_tot_kwh > 0.0));

    let again = call(&state, post(r#"{"grid":["DRRE","PPPP","EPPP"]}"#))
        .await
        .1;
    assert_eq!(body, again);
}

#[tokio::test]
async fn no_evses_is_an_empty_list() {
    let state = AppState::with_model(model(1));
    let (status, body) = call(&state, post(r#"{"grid":["DRP"]}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["evses"], Value::Array(vec![]));
}

#[tokio::test]
async fn malformed_grids_are_rejected() {
    let state = AppState::with_model(model(1));
    for body in [
        r#"{"grid":["DR","P"]}"#,
        r#"{"grid":["DX"]}"#,
        r#"{"grid":["PPP","PDP","PPP"]}"#,
        r#"{"grid":[]}"#,
        r#"{"rows":["DR"]}"#,
        "not json",
    ] {
        let (status, resp) = call(&state, post(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        let v: Value = serde_json::from_slice(&resp).unwrap();
        assert!(v["error"].is_string());
    }
}

#[tokio::test]
async fn inconsistent_model_is_a_server_error() {
    let mut broken = model(1);
    broken.layers[0].weights.truncate(10);
    broken.layers[0].inputs = 2;
    let state = AppState::with_model(broken);
    let (status, _) = call(&state, post(r#"{"grid":["DRE"]}"#)).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
}

#[tokio::test]
async fn concurrent_requests_agree() {
    let state = AppState::with_model(model(5));
    let body = r#"{"grid":["DRRRRR","PEPPEP","PPRRRP","EPPPPE"]}"#;
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let s = state.clone();
            tokio::spawn(async move { call(&s, post(body)).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let (status, b) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        bodies.push(b);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn cors_preflight_allowed() {
    let state = AppState::with_model(model(1));
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/api/predict")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = router(state).oneshot(req).await.unwrap();
    assert!(resp
        .headers()
        .contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}
