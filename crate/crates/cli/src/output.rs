use std::io::Write;
use std::path::{Path, PathBuf};

use critcircle::{LabError, Result};
use serde::Serialize;

use crate::config::CampaignConfig;

/// Seventeen significant digits, locale-free.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files of one command and writes them with a sidecar.
pub struct Sink<'a> {
    cfg: &'a CampaignConfig,
    dir: Option<PathBuf>,
    command: &'static str,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a, S: Serialize> {
    command: &'a str,
    config: serde_json::Value,
    config_sha256: String,
    files: &'a [String],
    summary: S,
}

fn io_err(path: &Path, e: std::io::Error) -> LabError {
    LabError::Domain(format!("cannot write {}: {e}", path.display()))
}

impl<'a> Sink<'a> {
    pub fn new(cfg: &'a CampaignConfig, command: &'static str) -> Result<Self> {
        if let Some(d) = &cfg.out {
            std::fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
        }
        Ok(Sink {
            cfg,
            dir: cfg.out.clone(),
            command,
            files: Vec::new(),
        })
    }

    /// Writes into the output directory, or to stdout when there is none.
    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                std::fs::write(&path, data).map_err(|e| io_err(&path, e))?;
                self.files.push(name.to_string());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(data).map_err(|e| io_err(Path::new("stdout"), e))?;
            }
        }
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| LabError::Domain(format!("csv: {e}"));
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        let data = w.into_inner().map_err(|e| LabError::Domain(format!("csv: {e}")))?;
        self.bytes(name, &data)
    }

    /// Finishes with `<command>.json`; skipped on stdout runs.
    pub fn finish<S: Serialize>(self, summary: S) -> Result<()> {
        let Some(d) = &self.dir else {
            return Ok(());
        };
        let config: serde_json::Value = serde_json::from_str(&self.cfg.canonical_json()).expect("canonical json");
        let side = Sidecar {
            command: self.command,
            config,
            config_sha256: self.cfg.hash(),
            files: &self.files,
            summary,
        };
        let path = d.join(format!("{}.json", self.command));
        let mut text = serde_json::to_string_pretty(&side).map_err(|e| LabError::Domain(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))
    }
}
