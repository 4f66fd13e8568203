//! Structured run reports.
//!
//! Floats are written with 17 significant digits so a replay reproduces the
//! exact bits; everything else is plain pretty-printed JSON.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The operation succeeded and its claim is certified.
    Certified,
    /// A valid theorem-branch outcome that answers "no", with its certificate.
    Negative,
    /// The computation ran but could not certify either answer at the
    /// configured resolution.
    Inconclusive,
    /// The tool failed.
    Error,
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const NEGATIVE: i32 = 2;
    pub const MALFORMED: i32 = 64;
    pub const DIMENSION: i32 = 65;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, bytes: &[u8]) -> Self {
        InputDigest {
            role: role.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
    pub config: RunConfig,
    pub status: Status,
    pub exit_code: i32,
    pub outcome: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock seconds; only present when requested, since it breaks
    /// byte-for-byte replay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl Report {
    pub fn to_bytes(&self) -> Vec<u8> {
        to_json_bytes(self)
    }
}

/// Serializes any value with the report number format.
pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats::default());
    value.serialize(&mut ser).expect("reports serialize to memory");
    out.push(b'\n');
    out
}

#[derive(Default)]
struct ExactFloats {
    inner: PrettyFormatter<'static>,
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let xs = vec![0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0];
        let text = to_json_bytes(&xs);
        let back: Vec<f64> = serde_json::from_slice(&text).unwrap();
        assert_eq!(back, xs);
        assert!(std::str::from_utf8(&text).unwrap().contains("3.3333333333333331e-1"));
    }

    #[test]
    fn digests_are_hex_sha256() {
        let d = InputDigest::of("point", b"");
        assert_eq!(
            d.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
