use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, FromRequestParts, Multipart, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ftklipse_core::casework::{default_duplicate_name, default_extract_name, Operation, Region};
use ftklipse_core::reporting::{export_report, ReportSelection};
use ftklipse_core::rendering::{render_evidence, RenderFormat, RenderRequest, TextEncoding};
use ftklipse_core::toolkit::{plan_invocation, run_tool, ToolFilter};
use ftklipse_core::{FrontMatter, Result as CoreResult};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::io::AsyncWriteExt;
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::{AppState, PRINCIPAL_HEADER};

type ApiResult<T> = Result<T, ApiError>;
type Shared = Arc<AppState>;

pub(crate) fn router(state: Shared) -> Router {
    let router = match &state.ui_dir {
        Some(dir) if dir.is_dir() => Router::new().nest_service("/ui", ServeDir::new(dir)),
        _ => Router::new().nest_service("/ui", get(ui_missing).with_state(())),
    };
    router
        .route("/health", get(health))
        .route("/cases", get(list_cases).post(create_case))
        .route("/cases/{id}", get(get_case))
        .route(
            "/cases/{id}/evidence",
            post(upload_evidence).layer(DefaultBodyLimit::disable()),
        )
        .route("/cases/{id}/custody", get(case_custody))
        .route("/cases/{id}/report", post(report))
        .route("/evidence/{id}", get(get_evidence))
        .route("/evidence/{id}/render", get(render))
        .route("/evidence/{id}/verify", post(verify))
        .route("/evidence/{id}/extract", post(extract))
        .route("/evidence/{id}/duplicate", post(duplicate))
        .route("/evidence/{id}/notes", get(list_notes).post(add_note))
        .route("/tools", get(list_tools))
        .route("/tools/{tool_id}/run", post(start_run))
        .route("/runs/{run_id}", get(get_run))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(middleware::from_fn_with_state(state.clone(), log_request))
        .with_state(state)
}

/// Operator identity for custody events: the `X-Principal` header, or the
/// configured default.
pub(crate) struct Principal(String);

impl FromRequestParts<Shared> for Principal {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        principal_of(parts.headers.get(PRINCIPAL_HEADER), &state.principal).map(Principal)
    }
}

fn principal_of(header: Option<&HeaderValue>, default: &str) -> ApiResult<String> {
    let Some(value) = header else { return Ok(default.to_string()) };
    let text = value
        .to_str()
        .map_err(|_| ApiError::validation("X-Principal must be visible ASCII"))?
        .trim();
    if text.is_empty() {
        return Err(ApiError::validation("X-Principal must not be empty"));
    }
    Ok(text.to_string())
}

async fn log_request(State(state): State<Shared>, req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().path().to_string();
    let who = principal_of(req.headers().get(PRINCIPAL_HEADER), &state.principal)
        .unwrap_or_else(|_| "?".to_string());
    let response = next.run(req).await;
    state.log(&format!("{who} {method} {uri} -> {}", response.status().as_u16()));
    response
}

/// Runs engine work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> CoreResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

fn parse_id(text: &str) -> ApiResult<u64> {
    text.parse()
        .ok()
        .filter(|id| *id > 0)
        .ok_or_else(|| ApiError::validation(format!("`{text}` is not a valid id")))
}

/// Parses a JSON body. An empty body or `null` reads as `{}`.
fn parse_json<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let trimmed = body.trim_ascii();
    let bytes: &[u8] = if trimmed.is_empty() || trimmed == b"null" { b"{}" } else { body };
    serde_json::from_slice(bytes).map_err(|e| ApiError::validation(format!("invalid JSON body: {e}")))
}

fn parse_query<T: std::str::FromStr<Err = ftklipse_core::Error>>(
    q: &HashMap<String, String>,
    key: &str,
) -> ApiResult<Option<T>> {
    q.get(key).map(|v| v.parse::<T>().map_err(ApiError::from)).transpose()
}

fn parse_number(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<u64>> {
    q.get(key)
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| ApiError::validation(format!("`{key}` must be a non-negative integer")))
        })
        .transpose()
}

fn parse_flag(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<bool>> {
    q.get(key)
        .map(|v| match v.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(ApiError::validation(format!("`{key}` must be true or false"))),
        })
        .transpose()
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn ui_missing() -> ApiError {
    ApiError::not_found("the web UI is not built; the HTTP API is still available")
}

async fn list_cases(State(st): State<Shared>) -> ApiResult<Response> {
    let cases = blocking(move || st.work.cases()).await?;
    Ok(Json(cases).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewCase {
    title: String,
    investigator: Option<String>,
}

async fn create_case(State(st): State<Shared>, Principal(who): Principal, body: Bytes) -> ApiResult<Response> {
    let req: NewCase = parse_json(&body)?;
    let investigator = req.investigator.unwrap_or(who);
    let case = blocking(move || st.work.create_case(&req.title, &investigator)).await?;
    Ok((StatusCode::CREATED, Json(case)).into_response())
}

async fn get_case(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(move || st.work.case(id)).await?).into_response())
}

#[derive(Serialize)]
struct EvidenceCustody {
    evidence_id: u64,
    original_name: String,
    custody: Vec<ftklipse_core::CustodyEvent>,
}

async fn case_custody(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let case = blocking(move || st.work.case(id)).await?;
    let out: Vec<EvidenceCustody> = case
        .evidences
        .into_iter()
        .map(|e| EvidenceCustody {
            evidence_id: e.id,
            original_name: e.original_name,
            custody: e.custody,
        })
        .collect();
    Ok(Json(out).into_response())
}

/// Streams the `file` part to a staging file, hashing as it goes, then
/// imports it. An optional `name` part overrides the uploaded file name.
async fn upload_evidence(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    mut multipart: Multipart,
) -> ApiResult<Response> {
    let case_id = parse_id(&id)?;
    {
        let st = st.clone();
        blocking(move || st.work.case(case_id)).await?;
    }
    let mut name_override = None;
    let mut staged: Option<(PathBuf, String, String)> = None;
    let bad = |e: axum::extract::multipart::MultipartError| ApiError::validation(format!("bad upload: {e}"));
    while let Some(mut field) = multipart.next_field().await.map_err(bad)? {
        match field.name() {
            Some("name") => name_override = Some(field.text().await.map_err(bad)?),
            Some("file") => {
                if staged.is_some() {
                    return Err(ApiError::validation("only one `file` part is accepted"));
                }
                let file_name = field.file_name().unwrap_or("upload.bin").to_string();
                let path = st.staging_path();
                let mut out = tokio::fs::File::create(&path)
                    .await
                    .map_err(|e| ApiError::internal(format!("cannot stage upload: {e}")))?;
                let mut hasher = Sha256::new();
                let result = async {
                    while let Some(chunk) = field.chunk().await.map_err(bad)? {
                        hasher.update(&chunk);
                        out.write_all(&chunk)
                            .await
                            .map_err(|e| ApiError::internal(format!("cannot stage upload: {e}")))?;
                    }
                    out.sync_all()
                        .await
                        .map_err(|e| ApiError::internal(format!("cannot stage upload: {e}")))
                }
                .await;
                if let Err(e) = result {
                    let _ = tokio::fs::remove_file(&path).await;
                    return Err(e);
                }
                staged = Some((path, file_name, hex::encode(hasher.finalize())));
            }
            _ => {}
        }
    }
    let Some((path, file_name, streamed_hash)) = staged else {
        return Err(ApiError::validation("multipart body has no `file` part"));
    };
    let name = name_override.filter(|n| !n.trim().is_empty()).unwrap_or(file_name.clone());
    let staged_path = path.clone();
    let result = blocking(move || {
        let label = format!("upload:{file_name}");
        st.work.import_evidence_labeled(case_id, &staged_path, &name, &label, &who)
    })
    .await;
    let _ = tokio::fs::remove_file(&path).await;
    let evidence = result?;
    if evidence.reference_hash != streamed_hash {
        return Err(ApiError::from(ftklipse_core::Error::Integrity(format!(
            "stored evidence {} hashes to {} but {} was received",
            evidence.id, evidence.reference_hash, streamed_hash
        ))));
    }
    Ok((StatusCode::CREATED, Json(evidence)).into_response())
}

async fn get_evidence(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(move || st.work.evidence(id)).await?).into_response())
}

async fn render(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let format: RenderFormat = parse_query(&q, "format")?.unwrap_or(RenderFormat::Hex);
    let encoding: Option<TextEncoding> = parse_query(&q, "encoding")?;
    let offset = parse_number(&q, "offset")?.unwrap_or(0);
    let length = parse_number(&q, "length")?;
    let text = blocking(move || {
        let evidence = st.work.evidence(id)?;
        let mut request = RenderRequest::new(
            format,
            offset,
            length.unwrap_or_else(|| RenderRequest::default_length(evidence.size_bytes, offset)),
        );
        request.encoding = encoding;
        let text = render_evidence(&st.work, &evidence, &request)?;
        st.work.record_event(id, &who, Operation::Viewed, request.describe())?;
        Ok(text)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

async fn verify(State(st): State<Shared>, Principal(who): Principal, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(move || st.work.verify_evidence(id, &who)).await?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractBody {
    offset: u64,
    length: u64,
    name: Option<String>,
}

async fn extract(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let req: ExtractBody = parse_json(&body)?;
    let child = blocking(move || {
        let name = match req.name {
            Some(n) => n,
            None => default_extract_name(&st.work.evidence(id)?.original_name, req.offset, req.length),
        };
        st.work.extract_region(id, req.offset, req.length, &name, &who)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(child)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DuplicateBody {
    name: Option<String>,
}

async fn duplicate(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let req: DuplicateBody = parse_json(&body)?;
    let child = blocking(move || {
        let name = match req.name {
            Some(n) => n,
            None => default_duplicate_name(&st.work.evidence(id)?.original_name),
        };
        st.work.duplicate_evidence(id, &name, &who)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(child)).into_response())
}

async fn list_notes(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(move || Ok(st.work.evidence(id)?.notes)).await?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteBody {
    text: String,
    region: Option<Region>,
}

async fn add_note(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let id = parse_id(&id)?;
    let req: NoteBody = parse_json(&body)?;
    let note = blocking(move || st.work.add_note(id, &who, &req.text, req.region)).await?;
    Ok((StatusCode::CREATED, Json(note)).into_response())
}

async fn list_tools(State(st): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let filter = ToolFilter {
        tool_type: parse_query(&q, "type")?,
        platform: parse_query(&q, "platform")?,
        in_batch_menu: parse_flag(&q, "in_batch_menu")?,
        in_right_click_menu: parse_flag(&q, "in_right_click_menu")?,
    };
    Ok(Json(st.tools.list(&filter)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunBody {
    evidence_id: u64,
    #[serde(default)]
    params: BTreeMap<String, String>,
    timeout_s: Option<u64>,
}

/// Plans the run synchronously so bad requests fail fast, then executes it
/// in the background. Poll `GET /runs/{run_id}` for the result.
async fn start_run(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(tool_id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: RunBody = parse_json(&body)?;
    let manifest = st
        .tools
        .get(&tool_id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("tool `{tool_id}` is not registered")))?;
    let plan = {
        let st = st.clone();
        blocking(move || {
            let evidence = st.work.evidence(req.evidence_id)?;
            let mut plan = plan_invocation(&manifest, &evidence, &req.params, st.work.data_root())?;
            if let Some(t) = req.timeout_s {
                plan.timeout_s = t;
            }
            Ok(plan)
        })
        .await?
    };
    let record = st.runs.start(&plan.tool_id, plan.evidence_id);
    let run_id = record.run_id;
    tokio::task::spawn_blocking(move || {
        let outcome = run_tool(&st.work, &plan, &who);
        st.runs.finish(run_id, outcome);
    });
    Ok((StatusCode::ACCEPTED, Json(record)).into_response())
}

async fn get_run(State(st): State<Shared>, Path(run_id): Path<String>) -> ApiResult<Response> {
    let run_id = parse_id(&run_id)?;
    let record = st
        .runs
        .get(run_id)
        .ok_or_else(|| ApiError::not_found(format!("no run {run_id}")))?;
    Ok(Json(record).into_response())
}

#[derive(Deserialize)]
struct ReportBody {
    #[serde(default = "default_format")]
    format: String,
    front_matter: Option<FrontMatter>,
    #[serde(flatten)]
    selection: ReportSelection,
}

fn default_format() -> String {
    "latex".to_string()
}

/// Builds and writes a report, answering with the document itself.
async fn report(
    State(st): State<Shared>,
    Principal(who): Principal,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let case_id = parse_id(&id)?;
    let req: ReportBody = parse_json(&body)?;
    let exported = {
        let st = st.clone();
        blocking(move || {
            export_report(
                &st.work,
                case_id,
                &req.format,
                &req.selection,
                req.front_matter,
                &who,
                &st.latex_bin,
            )
        })
        .await?
    };
    let bytes = tokio::fs::read(&exported.path)
        .await
        .map_err(|e| ApiError::internal(format!("cannot read {}: {e}", exported.path.display())))?;
    let file_name = exported
        .path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut response = Response::new(Body::from(bytes));
    let headers = response.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(exported.media_type));
    if let Ok(v) = HeaderValue::from_str(&format!("attachment; filename=\"{file_name}\"")) {
        headers.insert(header::CONTENT_DISPOSITION, v);
    }
    if let Ok(v) = HeaderValue::from_str(&exported.path.to_string_lossy()) {
        headers.insert("x-report-path", v);
    }
    Ok(response)
}
