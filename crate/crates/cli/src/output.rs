use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use boussinesq_core::config::Config;
use boussinesq_core::export::to_json_document;

use crate::CliError;

/// Collects the files written by one run and emits `manifest.json` last.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    config_sha256: String,
    parameters: &'a Config,
    outputs: &'a [String],
    /// The only field allowed to differ between identical runs.
    wall_time_s: f64,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<(), CliError> {
        let text = to_json_document(payload).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(name, &text)
    }

    pub fn finish(self, subcommand: &str, config_text: &str, config: &Config) -> Result<(), CliError> {
        let manifest = RunManifest {
            subcommand,
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            parameters: config,
            outputs: &self.written,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = to_json_document(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.root.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
