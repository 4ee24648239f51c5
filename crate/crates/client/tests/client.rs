use std::sync::Arc;

use brickmake_client::{Client, ClientError};
use brickmake_core::api::CreateSession;
use brickmake_core::brickfile::{load_shape_library, Polarity};
use brickmake_core::env::{Action, CameraMove, Env, EnvConfig, Workspace};
use brickmake_core::planner::{run_oracle, PlannerConfig};
use brickmake_server::{serve, AppState, ServerConfig};
use reqwest::StatusCode;

async fn start() -> Client {
    let lib = Arc::new(load_shape_library(&Default::default()).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve(listener, Arc::new(AppState::new(ServerConfig::new(lib)).unwrap())));
    Client::new(&base)
}

#[tokio::test]
async fn oracle_actions_replayed_over_http_score_perfectly() {
    let client = start().await;
    let info = client.create_session(&CreateSession { seed: Some(8), size: Some(3), ..Default::default() }).await.unwrap();
    // Plan locally against an identical env, then send the actions remotely.
    let lib = Arc::new(load_shape_library(&Default::default()).unwrap());
    let target = brickmake_core::datagen::random_assembly(
        &brickmake_core::datagen::GeneratorConfig::for_library(&lib, 3, 8),
        &lib,
    )
    .unwrap();
    let mut env = Env::reset(lib, target, EnvConfig { seed: 8, ..EnvConfig::default() }).unwrap();
    let steps = run_oracle(&mut env, &PlannerConfig::default()).unwrap();
    let mut last = None;
    for s in &steps {
        let r = client.act(&info.session_id, s.action).await.unwrap();
        assert!(r.success, "{:?}", s.action);
        assert_eq!(r.observation.table_digest, s.table_digest);
        last = Some(r);
    }
    assert!(last.unwrap().terminal);
    let score = client.score(&info.session_id).await.unwrap();
    assert_eq!((score.aed, score.f1_a), (0.0, 1.0));
}

#[tokio::test]
async fn errors_carry_status_and_message() {
    let client = start().await;
    let err = client.score("missing").await.unwrap_err();
    assert_eq!(err.status(), Some(StatusCode::NOT_FOUND));
    assert!(err.to_string().contains("unknown session"));
    let info = client.create_session(&CreateSession { seed: Some(1), size: Some(2), ..Default::default() }).await.unwrap();
    let err = client.act_code(&info.session_id, u64::MAX).await.unwrap_err();
    assert_eq!(err.status(), Some(StatusCode::BAD_REQUEST));
    assert!(matches!(client.score(&info.session_id).await, Err(ClientError::Status { status: StatusCode::CONFLICT, .. })));
}

#[tokio::test]
async fn frames_snaps_and_listings() {
    let client = start().await;
    let info = client.create_session(&CreateSession { seed: Some(2), size: Some(2), ..Default::default() }).await.unwrap();
    let id = &info.session_id;
    let png = client.frame(id, Workspace::Table).await.unwrap();
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    let grid = client.snaps(id, Workspace::Table, Polarity::Positive).await.unwrap();
    assert_eq!((grid.width, grid.height), (64, 64));
    assert!(grid.occupied() > 0);
    let hand = client.snaps(id, Workspace::Hand, Polarity::Negative).await.unwrap();
    assert_eq!(hand.occupied(), 0);
    let r = client.act(id, Action::RotateCamera { workspace: Workspace::Table, direction: CameraMove::Up }).await.unwrap();
    assert_eq!(r.observation.step_count, 1);
    assert_eq!(client.session(id).await.unwrap().observation, r.observation);
    assert_eq!(client.shapes().await.unwrap().len(), 6);
    assert!(!client.colors().await.unwrap().is_empty());
    client.delete(id).await.unwrap();
    assert_eq!(client.session(id).await.unwrap_err().status(), Some(StatusCode::NOT_FOUND));
}
