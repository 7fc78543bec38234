//! Command-line driver and HTTP service for `cx-core`.

pub mod app;
pub mod server;

pub use app::{exit, run};
