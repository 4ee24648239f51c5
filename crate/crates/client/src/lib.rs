//! Thin async client for the session service.

use brickmake_core::api::{ActionRequest, ColorInfo, CreateSession, ErrorBody, SessionInfo, ShapeInfo, StepResponse};
use brickmake_core::brickfile::Polarity;
use brickmake_core::env::Workspace;
use brickmake_core::metrics::ScoreReport;
use brickmake_core::raster::SnapGrid;
use reqwest::{Response, StatusCode};
use serde::de::DeserializeOwned;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error("{status}: {message}")]
    Status { status: StatusCode, message: String },
    #[error("unreadable snap records")]
    Snaps,
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Status { status, .. } => Some(*status),
            ClientError::Http(e) => e.status(),
            ClientError::Snaps => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

fn workspace_name(ws: Workspace) -> &'static str {
    match ws {
        Workspace::Table => "table",
        Workspace::Hand => "hand",
    }
}

async fn checked(r: Response) -> Result<Response> {
    let status = r.status();
    if status.is_success() {
        return Ok(r);
    }
    let text = r.text().await.unwrap_or_default();
    let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
    Err(ClientError::Status { status, message })
}

async fn json<T: DeserializeOwned>(r: reqwest::Result<Response>) -> Result<T> {
    Ok(checked(r?).await?.json().await?)
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Self {
        Client { base: base.trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn create_session(&self, req: &CreateSession) -> Result<SessionInfo> {
        json(self.http.post(self.url("/sessions")).json(req).send().await).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionInfo> {
        json(self.http.get(self.url(&format!("/sessions/{id}"))).send().await).await
    }

    pub async fn act(&self, id: &str, action: impl Into<ActionRequest>) -> Result<StepResponse> {
        let body = action.into();
        json(self.http.post(self.url(&format!("/sessions/{id}/action"))).json(&body).send().await).await
    }

    pub async fn act_code(&self, id: &str, code: u64) -> Result<StepResponse> {
        self.act(id, ActionRequest::Code { code }).await
    }

    pub async fn score(&self, id: &str) -> Result<ScoreReport> {
        json(self.http.get(self.url(&format!("/sessions/{id}/score"))).send().await).await
    }

    /// PNG bytes of the current frame.
    pub async fn frame(&self, id: &str, ws: Workspace) -> Result<Vec<u8>> {
        let r = self.http.get(self.url(&format!("/sessions/{id}/frames/{}.png", workspace_name(ws)))).send().await?;
        Ok(checked(r).await?.bytes().await?.to_vec())
    }

    pub async fn snaps(&self, id: &str, ws: Workspace, polarity: Polarity) -> Result<SnapGrid> {
        let p = match polarity {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        };
        let url = self.url(&format!("/sessions/{id}/snaps?workspace={}&polarity={p}", workspace_name(ws)));
        let text = checked(self.http.get(url).send().await?).await?.text().await?;
        SnapGrid::parse_records(&text).ok_or(ClientError::Snaps)
    }

    pub async fn delete(&self, id: &str) -> Result<()> {
        checked(self.http.delete(self.url(&format!("/sessions/{id}"))).send().await?).await?;
        Ok(())
    }

    pub async fn shapes(&self) -> Result<Vec<ShapeInfo>> {
        json(self.http.get(self.url("/shapes")).send().await).await
    }

    pub async fn colors(&self) -> Result<Vec<ColorInfo>> {
        json(self.http.get(self.url("/colors")).send().await).await
    }
}
