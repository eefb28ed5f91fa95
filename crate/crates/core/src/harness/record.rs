use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

/// A measured value. When `censored`, `value` is a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observed {
    pub value: f64,
    pub censored: bool,
}

impl Observed {
    pub fn exact(value: f64) -> Self {
        Self { value, censored: false }
    }

    pub fn lower_bound(value: f64) -> Self {
        Self { value, censored: true }
    }
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicateResult {
    pub replicate_index: u64,
    pub seed_used: u64,
    pub observables: BTreeMap<String, Observed>,
    pub truncated: bool,
    /// Only filled when timing is requested, so that default output is
    /// reproducible byte for byte.
    pub wall_time_ms: Option<f64>,
    pub config_digest: String,
}

/// Compact JSON with every real written as `d.dddddddddddddddde±x`
/// (17 significant digits).
struct SigDigits17;

impl Formatter for SigDigits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialize with the 17-significant-digit real format, no trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Observable key for a quantity measured at a given scale, e.g. `T@0.5`.
pub fn key(name: &str, scale: f64) -> String {
    format!("{name}@{scale}")
}

/// Split `T@0.5` into `("T", Some(0.5))`.
pub fn split_key(key: &str) -> (&str, Option<f64>) {
    match key.split_once('@') {
        Some((name, scale)) => (name, scale.parse().ok()),
        None => (key, None),
    }
}
