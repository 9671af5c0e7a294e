#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use kwsp::{router, AppState};
use kwsp_core::fixtures::{self, LoanScenario, PatientCareScenario};
use kwsp_core::Platform;
use serde_json::Value;
use tower::ServiceExt;

pub struct Seeded {
    pub state: AppState,
    pub app: Router,
    /// An identical copy of the served platform, for in-process calls.
    pub reference: Platform,
    pub patient: PatientCareScenario,
    pub loan: LoanScenario,
}

pub fn seeded() -> Seeded {
    let mut p = Platform::in_memory();
    let patient = fixtures::seed_patient_care_scenario(&mut p).unwrap();
    let loan = fixtures::seed_loan_scenario(&mut p).unwrap();
    let mut reference = Platform::in_memory();
    reference.import_from(p.export_string().as_bytes()).unwrap();
    let state = AppState::new(p, None);
    Seeded {
        app: router(state.clone()),
        state,
        reference,
        patient,
        loan,
    }
}

pub async fn raw(app: &Router, method: Method, uri: &str, body: Option<String>, token: Option<&str>) -> (StatusCode, String) {
    let mut builder = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        builder = builder.header(kwsp::TOKEN_HEADER, t);
    }
    let request = match body {
        Some(b) => builder.header("content-type", "application/json").body(Body::from(b)),
        None => builder.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = raw(app, method, uri, body.map(|b| b.to_string()), None).await;
    let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

pub fn json<T: serde::Serialize>(value: T) -> Value {
    serde_json::to_value(value).unwrap()
}
