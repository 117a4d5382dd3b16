use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance embedded in every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<&'static str, f64>,
    /// Hypotheses established during the run, in the order they were checked.
    pub hypotheses: Vec<String>,
    pub threads: Option<usize>,
    /// Only recorded with `--record-time`, so default reports are reproducible byte for byte.
    pub wall_clock_seconds: Option<f64>,
    /// SHA-256 of the serialized `result` object.
    pub output_digest: String,
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    manifest: &'a RunManifest,
    result: &'a R,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunContext {
    pub manifest: RunManifest,
    started: Instant,
    record_time: bool,
}

impl RunContext {
    pub fn new(command: &str, argv: Vec<String>, threads: Option<usize>, record_time: bool) -> Self {
        Self {
            manifest: RunManifest {
                tool: "curvlab",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                argv,
                inputs: Vec::new(),
                seed: None,
                tolerances: BTreeMap::new(),
                hypotheses: Vec::new(),
                threads,
                wall_clock_seconds: None,
                output_digest: String::new(),
            },
            started: Instant::now(),
            record_time,
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> anyhow::Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn tolerance(&mut self, name: &'static str, value: f64) {
        self.manifest.tolerances.insert(name, value);
    }

    pub fn hypothesis(&mut self, text: impl Into<String>) {
        self.manifest.hypotheses.push(text.into());
    }

    /// Serializes `{manifest, result}` with 17 significant digits.
    pub fn render<R: Serialize>(mut self, result: &R) -> anyhow::Result<String> {
        let body = curvlab::report::to_json(result)?;
        self.manifest.output_digest = sha256_hex(body.as_bytes());
        if self.record_time {
            self.manifest.wall_clock_seconds = Some(self.started.elapsed().as_secs_f64());
        }
        let mut out = curvlab::report::to_json(&Report {
            manifest: &self.manifest,
            result,
        })?;
        out.push('\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn render_is_deterministic() {
        let a = RunContext::new("x", vec!["x".into()], None, false).render(&[1.0, 0.1]).unwrap();
        let b = RunContext::new("x", vec!["x".into()], None, false).render(&[1.0, 0.1]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("1.0000000000000001e-1"));
    }
}
