use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ship_core::workflow::StageTiming;
use ship_core::{io, Config, Result};

/// Record of one command invocation, written when it finishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Config,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timings: Vec<StageTiming>,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config: config.clone(),
            config_hash: config.fingerprint(),
            seed: config.seed,
            threads: rayon::current_num_threads(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timings: Vec::new(),
            versions: [("ship".to_string(), env!("CARGO_PKG_VERSION").to_string())].into(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn output(&mut self, name: &str, path: &Path) {
        self.outputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn time(&mut self, stage: &str, seconds: f64) {
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds,
        });
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_json(path, self)
    }
}

/// `<out>.manifest.json` next to a single-file output.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("a/pool.json")), Path::new("a/pool.json.manifest.json"));
    }
}
