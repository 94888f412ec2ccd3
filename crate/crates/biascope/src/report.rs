//! Report plumbing shared by the CLI commands: decimal formatting pinned to
//! nine significant digits, minimal RFC-4180 CSV assembly, atomic file
//! writes, and the run manifest that records what produced each output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Format a float with nine significant digits, `printf %.9g` style: plain
/// decimal while the exponent is moderate, scientific otherwise, trailing
/// zeros trimmed. Nine digits round-trip: re-parsing and re-formatting the
/// output reproduces it byte for byte.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 9);
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    let mut out = String::new();
    if x < 0.0 {
        out.push('-');
    }
    if (-4..9).contains(&exp) {
        if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                out.push_str(digits);
                for _ in digits.len()..int_len {
                    out.push('0');
                }
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        } else {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits);
        }
    } else {
        out.push_str(&digits[..1]);
        if digits.len() > 1 {
            out.push('.');
            out.push_str(&digits[1..]);
        }
        let _ = write!(out, "e{exp}");
    }
    out
}

/// Quote a CSV field only when it needs it (commas, quotes, newlines).
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Assemble a CSV document: header plus rows, LF line endings, trailing
/// newline. Row width is checked against the header.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "csv row width mismatch");
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Write `bytes` to `path` atomically: the content lands in a temporary file
/// in the same directory and is renamed into place, so a crash mid-write
/// never leaves a truncated output behind. Parent directories are created.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let tmp = dir.join(format!(".{file_name}.tmp.{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Sidecar written next to every command's primary output (as
/// `<output>.manifest.json`): the tool version, the full flag snapshot,
/// content digests of every input consumed, and the paths produced. Reruns
/// with identical inputs and flags produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "biascope".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(InputDigest { path: path.into(), sha256: sha256_hex(bytes) });
    }

    pub fn record_output(&mut self, path: impl AsRef<Path>) {
        self.outputs.push(path.as_ref().display().to_string());
    }

    /// Serialize and write the manifest sidecar for `primary_output`.
    pub fn write_for(&self, primary_output: impl AsRef<Path>) -> Result<()> {
        let mut path = primary_output.as_ref().as_os_str().to_owned();
        path.push(".manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        atomic_write(Path::new(&path), format!("{json}\n").as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_plain_decimals() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(-0.0), "0");
        assert_eq!(fmt_g9(2.0), "2");
        assert_eq!(fmt_g9(-2.0), "-2");
        assert_eq!(fmt_g9(150.0), "150");
        assert_eq!(fmt_g9(0.5), "0.5");
        assert_eq!(fmt_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_g9(2.0_f64.ln()), "0.693147181");
        assert_eq!(fmt_g9(4.0_f64.ln()), "1.38629436");
        assert_eq!(fmt_g9(123456789.0), "123456789");
    }

    #[test]
    fn g9_scientific_for_extremes() {
        assert_eq!(fmt_g9(1234567890.0), "1.23456789e9");
        assert_eq!(fmt_g9(1e-5), "1e-5");
        assert_eq!(fmt_g9(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_g9(0.0001), "0.0001");
        assert_eq!(fmt_g9(6.02214076e23), "6.02214076e23");
    }

    #[test]
    fn g9_round_trips_to_fixpoint() {
        let mut vals = vec![
            0.4700036292457356,
            1.3862943611198906,
            std::f64::consts::PI,
            -0.000123456789,
            9.999999995e8, // rounds up across the fixed/scientific boundary
            1.0000000001,
        ];
        let mut state: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mantissa = (state >> 11) as f64 / (1u64 << 53) as f64;
            let exp = ((state % 61) as i32) - 30;
            vals.push((mantissa - 0.5) * 10f64.powi(exp));
        }
        for v in vals {
            let s = fmt_g9(v);
            let parsed: f64 = s.parse().unwrap_or_else(|_| panic!("unparsable: {s}"));
            assert_eq!(fmt_g9(parsed), s, "not a formatting fixpoint: {v} -> {s}");
            if v != 0.0 {
                assert!(((parsed - v) / v).abs() < 1e-8, "9 digits off: {v} vs {parsed}");
            }
        }
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        let doc = csv_document(&["w", "v"], &[vec!["a,b".into(), "1".into()]]);
        assert_eq!(doc, "w,v\n\"a,b\",1\n");
    }

    #[test]
    fn atomic_write_creates_dirs_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        atomic_write(&path, b"one").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "one");
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        // no temp droppings
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn sha256_known_answer() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
