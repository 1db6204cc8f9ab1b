use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use mammalvox::voice::PresetRegistry;
use mammalvox::{VoiceParams, BLOCK_SIZE};
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, Notify};
use tokio::time::{Instant, MissedTickBehavior};
use tower_http::services::ServeDir;

use crate::protocol::{ErrorCode, ServerMessage};
use crate::queue::{FrameQueue, Outgoing};
use crate::session::{error, Session};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Directory holding the studio bundle; served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Engine seed for sessions that do not pass `?seed=`.
    pub seed: u64,
    /// Voice a new session starts with.
    pub params: VoiceParams,
    pub presets: PresetRegistry,
    /// Seconds of audio held for a slow client before frames are dropped.
    pub backlog_seconds: f64,
    /// A telemetry message precedes every this many frames.
    pub telemetry_every: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            static_dir: None,
            seed: 0,
            params: VoiceParams::default(),
            presets: PresetRegistry::builtin(),
            backlog_seconds: 2.0,
            telemetry_every: 8,
        }
    }
}

struct AppState {
    config: ServiceConfig,
    next_id: AtomicU64,
}

#[derive(Debug, Deserialize)]
struct Connect {
    seed: Option<u64>,
}

/// `/ws` for sessions; everything else is static files.
pub fn router(config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState { config, next_id: AtomicU64::new(1) });
    let app = Router::new().route("/ws", get(upgrade)).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(placeholder_index)),
    }
}

/// Binds `config.addr` and serves until the process ends.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = TcpListener::bind(config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_on(listener, config).await
}

pub async fn serve_on(listener: TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

async fn placeholder_index() -> Html<&'static str> {
    Html("<!doctype html><title>mammalvox</title><p>Studio bundle not installed. Start the service with a static directory, or connect a client to <code>/ws</code>.</p>")
}

async fn upgrade(ws: WebSocketUpgrade, Query(q): Query<Connect>, State(app): State<Arc<AppState>>) -> Response {
    let id = app.next_id.fetch_add(1, Ordering::Relaxed);
    let config = &app.config;
    match Session::new(id, config.params, q.seed.unwrap_or(config.seed), config.presets.clone()) {
        Ok(session) => {
            let (backlog, every) = (config.backlog_seconds, config.telemetry_every.max(1));
            ws.on_upgrade(move |socket| run(socket, session, backlog, every))
        }
        Err(e) => (axum::http::StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn run(socket: WebSocket, mut session: Session, backlog_seconds: f64, telemetry_every: u64) {
    let id = session.id();
    tracing::debug!(session = id, "connected");
    let (sink, mut incoming) = socket.split();
    let (control, control_rx) = mpsc::unbounded_channel();
    let queue = Arc::new(Mutex::new(FrameQueue::for_duration(backlog_seconds, session.sample_rate(), BLOCK_SIZE)));
    let ready = Arc::new(Notify::new());
    let mut writer = tokio::spawn(write_loop(sink, control_rx, queue.clone(), ready.clone()));
    let _ = control.send(session.hello());

    let start = Instant::now();
    let mut produced = 0.0;
    let mut ticker = tokio::time::interval(Duration::from_millis(5));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            msg = incoming.next() => {
                let reply = match msg {
                    Some(Ok(Message::Text(text))) => session.handle_text(&text),
                    Some(Ok(Message::Binary(_))) => error(None, ErrorCode::UnexpectedBinary, "binary frames are server-to-client audio only"),
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
                    Some(Ok(Message::Close(_)) | Err(_)) | None => break,
                };
                if control.send(reply).is_err() {
                    break;
                }
            }
            _ = ticker.tick() => {
                let elapsed = start.elapsed().as_secs_f64();
                let mut q = queue.lock().expect("queue lock");
                while produced < elapsed {
                    if session.next_sequence() % telemetry_every == 0 {
                        q.push(Outgoing::Message(session.telemetry()));
                    }
                    produced += BLOCK_SIZE as f64 / session.sample_rate() as f64;
                    q.push(Outgoing::Frame(session.next_frame()));
                }
                drop(q);
                ready.notify_one();
            }
            _ = &mut writer => break,
        }
    }
    writer.abort();
    tracing::debug!(session = id, "disconnected");
}

async fn write_loop<S>(
    mut sink: S,
    mut control: mpsc::UnboundedReceiver<ServerMessage>,
    queue: Arc<Mutex<FrameQueue>>,
    ready: Arc<Notify>,
) where
    S: futures::Sink<Message> + Unpin,
{
    loop {
        tokio::select! {
            biased;
            msg = control.recv() => {
                let Some(msg) = msg else { return };
                if sink.send(text(&msg)).await.is_err() {
                    return;
                }
            }
            _ = ready.notified() => {
                loop {
                    // Replies overtake queued audio.
                    if let Ok(msg) = control.try_recv() {
                        if sink.send(text(&msg)).await.is_err() {
                            return;
                        }
                        continue;
                    }
                    let item = queue.lock().expect("queue lock").pop();
                    let out = match item {
                        Some(Outgoing::Frame(f)) => Message::Binary(f.encode()),
                        Some(Outgoing::Message(m)) => text(&m),
                        None => break,
                    };
                    if sink.send(out).await.is_err() {
                        return;
                    }
                }
            }
        }
    }
}

fn text(msg: &ServerMessage) -> Message {
    Message::Text(serde_json::to_string(msg).expect("server messages serialise"))
}
