#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use qverify::server::{serve, AppState};
use qverify::Config;
use qverify_core::ansatz::Method;
use qverify_core::dataset::{generate_record, DatasetConfig, TaskRecord};
use qverify_core::problems::ProblemKind;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

/// A handful of small accepted records.
pub fn records() -> Vec<TaskRecord> {
    let cfg = DatasetConfig::default();
    let mut out = Vec::new();
    for kind in [ProblemKind::VertexCover, ProblemKind::MinCut, ProblemKind::KClique] {
        for seed in 0..2 {
            if let Some(r) = generate_record(kind, 3, seed, Method::Vqe, &cfg).unwrap().accepted() {
                out.push(r);
            }
        }
    }
    assert!(out.len() >= 4);
    out
}

pub struct Running {
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    handle: JoinHandle<std::io::Result<()>>,
}

impl Running {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn stop(mut self) {
        let _ = self.stop.take().unwrap().send(());
        self.handle.await.unwrap().unwrap();
    }
}

pub async fn start(records: &[TaskRecord], config: &Config) -> Running {
    let state = Arc::new(AppState::new(records, config).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel();
    let handle = tokio::spawn(serve(listener, state, async {
        let _ = rx.await;
    }));
    Running {
        addr,
        stop: Some(tx),
        handle,
    }
}
