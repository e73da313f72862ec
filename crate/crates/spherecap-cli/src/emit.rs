//! Output emission. Every run echoes its fully resolved configuration
//! (parameters, defaults, and the RNG identity) so results can be
//! replayed exactly: JSON output carries it as a `config` object, CSV
//! output as a leading `# config: {...}` comment line.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A result ready for emission in either format.
pub struct Emission {
    pub config: serde_json::Value,
    /// Structured results for JSON output.
    pub results: serde_json::Value,
    /// Tabular rendering (header + rows) for CSV output.
    pub csv: String,
}

impl Emission {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = serde_json::json!({
                    "config": self.config,
                    "results": self.results,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                format!("# config: {}\n{}", self.config, self.csv)
            }
        }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Assemble the resolved-config object every command must echo.
pub fn config(command: &str, params: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "params": params,
        "rng": spherecap::mc::RNG_ALGORITHM,
        "version": env!("CARGO_PKG_VERSION"),
    })
}
