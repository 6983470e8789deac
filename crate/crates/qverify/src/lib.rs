//! Host-side tooling around `qverify-core`: config files, JSONL datasets,
//! run manifests, report formatting and the HTTP reward server.

pub mod config;
pub mod io;
pub mod report;
pub mod server;

pub use config::{config_digest, Config};
