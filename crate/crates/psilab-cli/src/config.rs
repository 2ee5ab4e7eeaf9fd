//! Layered run configuration. Flags override a plain `key = value` file,
//! the file overrides built-in defaults, and PSILAB_CACHE_DIR overrides
//! the cache directory no matter where it was set.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use psilab::Error;

/// Keys a config file may set. Mirrors the long flag names.
const KNOWN_KEYS: &[&str] = &[
    "X",
    "h",
    "xi",
    "T",
    "eta",
    "a",
    "b",
    "c",
    "mode",
    "method",
    "op",
    "axis",
    "from",
    "to",
    "points",
    "h-exp",
    "xi-exp",
    "zeros-file",
    "cache-dir",
    "out",
    "format",
    "threads",
    "tail-eps",
    "quadrature-check",
];

pub struct FileCfg {
    map: BTreeMap<String, String>,
}

/// Reads the optional config file. Blank lines and `#` comments are
/// skipped; every other line must be `key = value` with a known key.
pub fn load(path: Option<&Path>) -> psilab::Result<FileCfg> {
    let mut map = BTreeMap::new();
    if let Some(p) = path {
        let text = fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parameter(format!(
                    "config line {}: expected `key = value`, got {raw:?}",
                    i + 1
                )));
            };
            let key = k.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parameter(format!(
                    "config line {}: unknown key {key:?}",
                    i + 1
                )));
            }
            map.insert(key.to_string(), v.trim().to_string());
        }
    }
    Ok(FileCfg { map })
}

impl FileCfg {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> psilab::Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| {
                Error::Parameter(format!("config key {key}: {s:?} is not {what}"))
            }),
        }
    }

    pub fn f64(&self, key: &str) -> psilab::Result<Option<f64>> {
        self.parsed(key, "a real number")
    }

    pub fn u64(&self, key: &str) -> psilab::Result<Option<u64>> {
        self.parsed(key, "an unsigned integer")
    }

    pub fn usize(&self, key: &str) -> psilab::Result<Option<usize>> {
        self.parsed(key, "an unsigned integer")
    }

    pub fn flag(&self, key: &str) -> psilab::Result<Option<bool>> {
        self.parsed(key, "true or false")
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    /// Enum-valued key, accepting the same spellings as the flag.
    pub fn choice<E: clap::ValueEnum>(&self, key: &str) -> psilab::Result<Option<E>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => E::from_str(s, false).map(Some).map_err(|_| {
                Error::Parameter(format!("config key {key}: unrecognized value {s:?}"))
            }),
        }
    }
}

/// Sorted `key = value` echo embedded in every report, so a report always
/// names the inputs that produced it. The worker-thread count stays out on
/// purpose: reports must come back byte-identical no matter how the work
/// was split.
pub struct Echo {
    map: BTreeMap<String, String>,
}

impl Echo {
    pub fn new(command: &'static str) -> Self {
        let mut map = BTreeMap::new();
        map.insert("command".to_string(), command.to_string());
        Echo { map }
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn set_if(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
