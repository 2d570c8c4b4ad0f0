//! Verbatim record of every summary request.

use super::llm::AttemptRecord;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

/// One request/response exchange. Never holds credentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp: String,
    pub endpoint: String,
    pub model: String,
    pub prompt: String,
    pub response: Option<String>,
    pub error: Option<String>,
    pub attempts: Vec<AttemptRecord>,
}

pub trait AuditSink: Send + Sync {
    fn record(&self, entry: &AuditEntry) -> io::Result<()>;
}

/// Discards entries.
pub struct NullAuditSink;

impl AuditSink for NullAuditSink {
    fn record(&self, _: &AuditEntry) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Default)]
pub struct MemoryAuditSink {
    entries: Mutex<Vec<AuditEntry>>,
}

impl MemoryAuditSink {
    pub fn entries(&self) -> Vec<AuditEntry> {
        self.entries.lock().expect("audit lock").clone()
    }
}

impl AuditSink for MemoryAuditSink {
    fn record(&self, entry: &AuditEntry) -> io::Result<()> {
        self.entries.lock().expect("audit lock").push(entry.clone());
        Ok(())
    }
}

/// Appends one JSON line per entry. Each line is written with a single
/// `write_all` under a lock on a file opened in append mode, so concurrent
/// callers never interleave.
pub struct JsonlAuditSink {
    file: Mutex<File>,
}

impl JsonlAuditSink {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { file: Mutex::new(file) })
    }
}

impl AuditSink for JsonlAuditSink {
    fn record(&self, entry: &AuditEntry) -> io::Result<()> {
        let mut line = serde_json::to_vec(entry).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut f = self.file.lock().map_err(|_| io::Error::other("audit lock poisoned"))?;
        f.write_all(&line)?;
        f.flush()
    }
}
