#![allow(dead_code)]

use drugshap_cli::Context;
use drugshap_core::config::AppConfig;
use drugshap_core::dataset::{CellValue, RawValue};
use drugshap_core::{EncodingSchema, GdscRecord};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini_gdsc.csv")
}

/// Small, fast settings pointing at the bundled fixture.
pub fn context(artifacts: &Path) -> Context {
    let mut c = AppConfig {
        data_path: fixture(),
        artifacts_dir: artifacts.to_path_buf(),
        model_path: artifacts.join("model.json"),
        ..Default::default()
    };
    c.params.n_estimators = 40;
    c.params.learning_rate = 0.2;
    c.params.max_depth = 4;
    c.forest.n_trees = 10;
    c.curve.counts = vec![5, 10, 20];
    c.search.n_iter = 2;
    c.search.k = 3;
    Context::new(c).unwrap()
}

/// Raw request features for `record` covering the schema's columns.
pub fn features_of(schema: &EncodingSchema, record: &GdscRecord) -> BTreeMap<String, RawValue> {
    schema
        .feature_columns()
        .into_iter()
        .filter_map(|c| {
            let v = match record.get(c)? {
                CellValue::Text(t) => RawValue::Text(t.to_string()),
                CellValue::Real(v) => RawValue::Number(v),
            };
            Some((c.key().to_string(), v))
        })
        .collect()
}

/// Answer `replies` requests on a local port with status 200 and a chat
/// completion whose content is `content`; returns the endpoint URL.
pub fn one_shot_llm(content: &str, replies: usize) -> String {
    use std::io::{BufRead, BufReader, Read, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/chat/completions", listener.local_addr().unwrap());
    let body = serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string();
    std::thread::spawn(move || {
        for _ in 0..replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line.trim().is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        len = v.trim().parse().unwrap_or(0);
                    }
                }
            }
            let mut buf = vec![0u8; len];
            let _ = reader.read_exact(&mut buf);
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    url
}
