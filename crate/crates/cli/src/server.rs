//! HTTP API over a loaded session.
//!
//! Bodies are rendered with the same function as the command line, so a
//! query answered by both front ends yields the same bytes.

use std::io::Write;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use cx_core::api::{render, ExplainFormulaRequest, ExplainRequest, QueryError, Session};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value as Json};
use tower_http::cors::CorsLayer;

type Shared = Arc<Session>;

/// A rendered JSON document with its status.
pub struct Payload(pub StatusCode, pub Json);

impl IntoResponse for Payload {
    fn into_response(self) -> Response {
        (
            self.0,
            [(header::CONTENT_TYPE, "application/json")],
            render(&self.1),
        )
            .into_response()
    }
}

impl From<QueryError> for Payload {
    fn from(e: QueryError) -> Self {
        let status = if e.is_not_found() {
            StatusCode::NOT_FOUND
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Payload(status, e.to_json())
    }
}

fn bad_request(message: impl std::fmt::Display) -> Payload {
    Payload(
        StatusCode::BAD_REQUEST,
        json!({ "error": message.to_string(), "kind": "badRequest" }),
    )
}

fn ok(doc: Json) -> Payload {
    Payload(StatusCode::OK, doc)
}

fn answer(r: Result<Json, QueryError>) -> Payload {
    r.map_or_else(Payload::from, ok)
}

/// Parses a JSON body; an empty body means the type's default.
fn body<T: DeserializeOwned + Default>(bytes: &Bytes) -> Result<T, Payload> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(bad_request)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepQuery {
    #[serde(default)]
    step: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ExtendedQuery {
    up_to: Option<usize>,
}

async fn health(State(s): State<Shared>) -> Payload {
    ok(s.health_json())
}

async fn diagram(State(s): State<Shared>) -> Payload {
    ok(s.diagram_json())
}

async fn trace(State(s): State<Shared>) -> Payload {
    ok(s.trace_json())
}

async fn extended(State(s): State<Shared>, q: Result<Query<ExtendedQuery>, QueryRejection>) -> Payload {
    match q {
        Ok(Query(q)) => answer(s.extended_json(q.up_to)),
        Err(e) => bad_request(e.body_text()),
    }
}

async fn formula_tree(State(s): State<Shared>, q: Result<Query<StepQuery>, QueryRejection>) -> Payload {
    match q {
        Ok(Query(q)) => answer(s.formula_tree_json(q.step)),
        Err(e) => bad_request(e.body_text()),
    }
}

async fn explain(State(s): State<Shared>, bytes: Bytes) -> Payload {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return bad_request("request body must be a JSON object with `var` and `step`");
    }
    match serde_json::from_slice::<ExplainRequest>(&bytes) {
        Ok(req) => answer(s.explain_request(&req)),
        Err(e) => bad_request(e),
    }
}

async fn explain_formula(State(s): State<Shared>, bytes: Bytes) -> Payload {
    match body::<ExplainFormulaRequest>(&bytes) {
        Ok(req) => answer(s.explain_formula_request(&req)),
        Err(p) => p,
    }
}

async fn not_found() -> Payload {
    Payload(
        StatusCode::NOT_FOUND,
        json!({ "error": "no such endpoint", "kind": "notFound" }),
    )
}

pub fn router(session: Session) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/diagram", get(diagram))
        .route("/api/trace", get(trace))
        .route("/api/trace/extended", get(extended))
        .route("/api/formula/tree", get(formula_tree))
        .route("/api/explain", post(explain))
        .route("/api/explain-formula", post(explain_formula))
        .fallback(not_found)
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(session))
}

/// Binds `addr` and serves until the process is stopped.
pub fn serve_blocking(session: Session, addr: &str, err: &mut dyn Write) -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let _ = writeln!(err, "listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(session)).await
    })
}
