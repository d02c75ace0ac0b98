use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fairrecov::rng::PRNG_ALGORITHM;
use serde::Serialize;
use serde_json::Value;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sidecar written next to every output file, enough to regenerate it.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub artifact_version: &'static str,
    pub prng: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        let parameters = match serde_json::to_value(parameters) {
            Ok(Value::Object(map)) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Self {
            command: command.to_string(),
            parameters,
            seed,
            artifact_version: ARTIFACT_VERSION,
            prng: PRNG_ALGORITHM,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write_beside(&self, out: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(Self::path_for(out), json + "\n")
    }
}

pub fn version_line() -> String {
    format!("{ARTIFACT_VERSION} (prng: {PRNG_ALGORITHM})")
}
