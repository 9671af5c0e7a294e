//! HTTP/JSON service and administrative command line for the knowledge
//! work support platform.
//!
//! [`api::router`] exposes every platform operation as an endpoint over a
//! shared [`kwsp_core::Platform`]; [`server`] binds and runs it; [`cli`]
//! maps the same operations onto subcommands.

pub mod api;
pub mod cli;
pub mod error;
pub mod server;

pub use api::{router, AppState, TOKEN_HEADER};
pub use error::{status_of, ApiError};
pub use server::{serve, Config, ServeError, Server};
