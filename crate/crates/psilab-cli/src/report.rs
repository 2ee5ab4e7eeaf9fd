//! Report assembly. Both formats carry the resolved config; the payload
//! bytes depend only on the inputs, never on scheduling.

use std::fs;
use std::io::Write;
use std::path::Path;

use psilab::Error;
use serde_json::{Map, Value};

use crate::config::Echo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One command's payload, pre-rendered for both formats.
pub struct Body {
    pub csv: String,
    pub json: Map<String, Value>,
}

/// Renders the full report and writes it to `out` or stdout.
pub fn emit(echo: &Echo, body: &Body, format: Format, out: Option<&Path>) -> psilab::Result<()> {
    let text = match format {
        Format::Csv => {
            let mut s = String::new();
            for (k, v) in echo.entries() {
                s.push_str(&format!("# {k} = {v}\n"));
            }
            s.push_str(body.csv.trim_end_matches('\n'));
            s.push('\n');
            s
        }
        Format::Json => {
            let cfg: Map<String, Value> = echo
                .entries()
                .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                .collect();
            let mut doc = Map::new();
            doc.insert("config".to_string(), Value::Object(cfg));
            for (k, v) in &body.json {
                doc.insert(k.clone(), v.clone());
            }
            let mut s =
                serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "stdout".into(),
                source: e,
            }),
    }
}
