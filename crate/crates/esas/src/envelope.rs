//! Versioned text envelope wrapping every on-disk artifact.
//!
//! An envelope is a header line `ESASv1 <kind>` followed by the binary
//! payload encoded with standard (padded) base64, wrapped at 76 columns.
//! The kind tag is checked on open so files cannot be fed to the wrong
//! decoder.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use crate::error::{Error, Result};

const MAGIC: &str = "ESASv1";
const WRAP: usize = 76;

/// Wraps a binary payload in a tagged text envelope.
pub fn seal(kind: &str, payload: &[u8]) -> String {
    let encoded = BASE64.encode(payload);
    let mut out = String::with_capacity(encoded.len() + encoded.len() / WRAP + kind.len() + 16);
    out.push_str(MAGIC);
    out.push(' ');
    out.push_str(kind);
    out.push('\n');
    for chunk in encoded.as_bytes().chunks(WRAP) {
        out.push_str(std::str::from_utf8(chunk).unwrap());
        out.push('\n');
    }
    out
}

/// Opens an envelope, checking the magic and the expected kind tag.
pub fn open(kind: &str, text: &str) -> Result<Vec<u8>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Envelope("empty envelope".into()))?;
    let mut parts = header.split_whitespace();
    match parts.next() {
        Some(m) if m == MAGIC => {}
        Some(m) => {
            return Err(Error::Envelope(format!(
                "bad magic {m:?}, expected {MAGIC:?}"
            )))
        }
        None => return Err(Error::Envelope("missing header".into())),
    }
    match parts.next() {
        Some(k) if k == kind => {}
        Some(k) => {
            return Err(Error::Envelope(format!(
                "envelope holds {k:?}, expected {kind:?}"
            )))
        }
        None => return Err(Error::Envelope("missing kind tag".into())),
    }
    let body: String = lines.collect();
    BASE64
        .decode(body.trim())
        .map_err(|e| Error::Envelope(format!("base64 decode failed: {e}")))
}
