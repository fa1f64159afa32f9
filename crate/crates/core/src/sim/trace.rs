// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One processed simulator event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    /// Virtual time in microseconds.
    pub time: u64,
    pub peer: u32,
    pub kind: String,
    /// First 8 bytes of the SHA-256 of the event payload, hex encoded.
    pub digest: String,
}

pub fn digest(payload: &[u8]) -> String {
    Sha256::digest(payload)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_jsonl<W: Write>(records: &[TraceRecord], mut w: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
