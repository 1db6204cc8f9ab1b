//! Live back end for the voice-design studio.
//!
//! Each WebSocket connection to `/ws` owns one [`Session`]: a streaming
//! engine rendered in real time and sent as binary PCM frames, steered by
//! JSON control messages that take effect at the next block boundary.

pub mod protocol;
mod queue;
mod server;
mod session;

pub use protocol::{AudioFrame, ClientMessage, Envelope, ErrorCode, ServerMessage, SessionState, PROTOCOL_VERSION};
pub use queue::{FrameQueue, Outgoing};
pub use server::{router, serve, serve_on, ServiceConfig};
pub use session::Session;
