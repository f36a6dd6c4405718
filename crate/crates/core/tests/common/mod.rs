//! Shared helpers for the integration tests: a local fake of the remote
//! services and a wrapper around the `clts` binary.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};

/// Serves chat completions, sentence embeddings, token embeddings and
/// translation on a random local port and counts requests per path.
pub struct FakeServices {
    server: Arc<tiny_http::Server>,
    hits: Arc<Mutex<BTreeMap<String, usize>>>,
    worker: Option<JoinHandle<()>>,
    pub base: String,
}

fn respond(path: &str, body: &Value) -> Option<Value> {
    let texts = || -> Vec<String> {
        body["texts"]
            .as_array()
            .map(|a| a.iter().map(|t| t.as_str().unwrap_or_default().to_string()).collect())
            .unwrap_or_default()
    };
    match path {
        "/v1/chat/completions" => {
            let user = body["messages"][1]["content"].as_str().unwrap_or_default();
            // echo the payload after the instruction
            let payload = user.split_once(": ").map_or(user, |(_, p)| p);
            Some(json!({"choices": [{"message": {"role": "assistant", "content": payload}}]}))
        }
        "/embed" => Some(json!({"vectors": texts().iter().map(|_| vec![1.0, 0.5]).collect::<Vec<_>>()})),
        "/translate" => Some(json!({"translations": texts()})),
        "/tokens" => {
            let toks: Vec<Vec<String>> = texts()
                .iter()
                .map(|t| t.split_whitespace().map(|w| w.to_lowercase()).collect())
                .collect();
            let vecs: Vec<Vec<Vec<f64>>> = toks
                .iter()
                .map(|ts| ts.iter().map(|w| vec![w.len() as f64, 1.0]).collect())
                .collect();
            Some(json!({"tokens": toks, "vectors": vecs}))
        }
        _ => None,
    }
}

impl FakeServices {
    pub fn start() -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let hits = Arc::new(Mutex::new(BTreeMap::new()));
        let worker = {
            let (server, hits) = (server.clone(), hits.clone());
            std::thread::spawn(move || {
                for mut req in server.incoming_requests() {
                    let path = req.url().to_string();
                    *hits.lock().unwrap().entry(path.clone()).or_insert(0) += 1;
                    let mut raw = String::new();
                    let _ = req.as_reader().read_to_string(&mut raw);
                    let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
                    let resp = match respond(&path, &body) {
                        Some(v) => tiny_http::Response::from_string(v.to_string())
                            .with_header("Content-Type: application/json".parse::<tiny_http::Header>().unwrap()),
                        None => tiny_http::Response::from_string("no such route").with_status_code(404),
                    };
                    let _ = req.respond(resp);
                }
            })
        };
        Self {
            server,
            hits,
            worker: Some(worker),
            base: format!("http://127.0.0.1:{port}"),
        }
    }

    pub fn hits(&self, path: &str) -> usize {
        self.hits.lock().unwrap().get(path).copied().unwrap_or(0)
    }
}

impl Drop for FakeServices {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

pub struct Outcome {
    pub code: i32,
    pub stderr: String,
}

/// Runs `clts <stage> --config <config> --out <out> [extra..]`.
pub fn clts(stage: &str, config: &Path, out: &Path, extra: &[&str]) -> Outcome {
    let output = Command::new(env!("CARGO_BIN_EXE_clts"))
        .arg(stage)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("clts binary runs");
    Outcome {
        code: output.status.code().unwrap_or(-1),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

pub const STAGES: [&str; 7] = ["preprocess", "generate", "features", "metrics", "stats", "iaa", "report"];
