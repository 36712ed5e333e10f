//! Run configuration.
//!
//! Read from the file named by `--config`, else by `QPREDICT_CONFIG`, else
//! built-in defaults. Relative paths inside a file are taken relative to that
//! file. Every key is optional:
//!
//! ```toml
//! device_dir = "devices"        # omit for the built-in fleet
//! output_dir = "data"
//! model_path = "data/model.json"
//! seed = 1
//! timeout_seconds = 10.0
//! options = ["dev8", "dev27/A"] # keep options whose id equals or starts with `<filter>/`
//! jobs = 0                      # 0 = all cores
//!
//! [corpus]
//! families = ["ghz", "dj", "qft"]
//! min_qubits = 2
//! max_qubits = 130
//! random_per_size = 10
//! qaoa_per_size = 2
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use qpredict_core::compiler::{enumerate_options, CompilationOption, CompileError};
use qpredict_core::corpus::{CircuitFamily, CorpusError, CorpusSpec, MAX_QUBITS, MIN_QUBITS};
use qpredict_core::devices::{builtin_devices, DeviceModel};
use serde::Deserialize;
use thiserror::Error;

use crate::device_file::{load_device_dir, DeviceFileError};
use crate::pipeline::DEFAULT_TIMEOUT;

pub const CONFIG_ENV: &str = "QPREDICT_CONFIG";
pub const MODEL_FILE: &str = "model.json";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Devices(#[from] DeviceFileError),
    #[error("device directory {0} does not exist")]
    NoDeviceDir(PathBuf),
    #[error("timeout must be a non-negative number of seconds, got {0}")]
    Timeout(f64),
    #[error(transparent)]
    Options(#[from] CompileError),
    #[error("option filter `{0}` matches no compilation option")]
    NoMatch(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileCorpus {
    families: Option<Vec<String>>,
    min_qubits: Option<usize>,
    max_qubits: Option<usize>,
    random_per_size: Option<usize>,
    qaoa_per_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    device_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    model_path: Option<PathBuf>,
    seed: Option<u64>,
    timeout_seconds: Option<f64>,
    options: Option<Vec<String>>,
    jobs: Option<usize>,
    corpus: FileCorpus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// `None` selects the built-in fleet.
    pub device_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/model.json`.
    pub model_path: Option<PathBuf>,
    pub seed: u64,
    pub timeout: Duration,
    pub option_filters: Vec<String>,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub corpus: CorpusSpec,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            device_dir: None,
            output_dir: PathBuf::from("data"),
            model_path: None,
            seed: 1,
            timeout: DEFAULT_TIMEOUT,
            option_filters: Vec::new(),
            jobs: 0,
            corpus: CorpusSpec::default(),
        }
    }
}

pub fn parse_families(names: &[String]) -> Result<Vec<CircuitFamily>, CorpusError> {
    names.iter().map(|n| n.trim().parse()).collect()
}

/// `seconds` as a duration, rejecting negative and non-finite values.
pub fn timeout_from_secs(seconds: f64) -> Result<Duration, ConfigError> {
    Duration::try_from_secs_f64(seconds).map_err(|_| ConfigError::Timeout(seconds))
}

impl Config {
    /// `explicit`, else the file in `QPREDICT_CONFIG`, else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Config, ConfigError> {
        let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(env) {
            Some(path) => Config::from_file(&path),
            None => Ok(Config::default()),
        }
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Config::from_toml(&text, base).map_err(|e| match e {
            ConfigError::Syntax { source, .. } => ConfigError::Syntax {
                path: path.to_path_buf(),
                source,
            },
            e => e,
        })
    }

    /// Parses a config document whose relative paths are relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Config, ConfigError> {
        let f: FileConfig = toml::from_str(text).map_err(|source| ConfigError::Syntax {
            path: PathBuf::new(),
            source,
        })?;
        let d = Config::default();
        let rel = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        let mut corpus = d.corpus.clone();
        if let Some(names) = &f.corpus.families {
            corpus.families = parse_families(names)?;
        }
        corpus.min_qubits = f.corpus.min_qubits.unwrap_or(corpus.min_qubits);
        corpus.max_qubits = f.corpus.max_qubits.unwrap_or(corpus.max_qubits);
        corpus.random_per_size = f.corpus.random_per_size.unwrap_or(corpus.random_per_size);
        corpus.qaoa_per_size = f.corpus.qaoa_per_size.unwrap_or(corpus.qaoa_per_size);
        let seed = f.seed.unwrap_or(d.seed);
        corpus.seed = seed;
        Ok(Config {
            device_dir: f.device_dir.map(rel),
            output_dir: f.output_dir.map(rel).unwrap_or(d.output_dir),
            model_path: f.model_path.map(rel),
            seed,
            timeout: match f.timeout_seconds {
                Some(s) => timeout_from_secs(s)?,
                None => d.timeout,
            },
            option_filters: f.options.unwrap_or_default(),
            jobs: f.jobs.unwrap_or(d.jobs),
            corpus,
        })
    }

    pub fn model_path(&self) -> PathBuf {
        self.model_path.clone().unwrap_or_else(|| self.output_dir.join(MODEL_FILE))
    }

    /// Checks everything that can be checked before a stage starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (min, max) = (self.corpus.min_qubits, self.corpus.max_qubits);
        if min < MIN_QUBITS || max > MAX_QUBITS || min > max {
            return Err(CorpusError::QubitRange { min, max }.into());
        }
        if let Some(dir) = &self.device_dir {
            if !dir.is_dir() {
                return Err(ConfigError::NoDeviceDir(dir.clone()));
            }
        }
        Ok(())
    }

    pub fn devices(&self) -> Result<Vec<DeviceModel>, ConfigError> {
        match &self.device_dir {
            Some(dir) => Ok(load_device_dir(dir)?),
            None => Ok(builtin_devices()),
        }
    }

    /// Options of `devices` kept by the filters, in enumeration order.
    pub fn options(&self, devices: &[DeviceModel]) -> Result<Vec<CompilationOption>, ConfigError> {
        filter_options(enumerate_options(devices)?, &self.option_filters)
    }
}

/// Keeps options whose id equals a filter or starts with `<filter>/`. No
/// filters keeps everything; a filter that matches nothing is an error.
pub fn filter_options(
    options: Vec<CompilationOption>,
    filters: &[String],
) -> Result<Vec<CompilationOption>, ConfigError> {
    if filters.is_empty() {
        return Ok(options);
    }
    let hit = |f: &str, id: &str| id == f || id.strip_prefix(f).is_some_and(|r| r.starts_with('/'));
    let ids: Vec<String> = options.iter().map(|o| o.id()).collect();
    if let Some(f) = filters.iter().find(|f| !ids.iter().any(|id| hit(f, id))) {
        return Err(ConfigError::NoMatch(f.clone()));
    }
    Ok(options
        .into_iter()
        .zip(&ids)
        .filter(|(_, id)| filters.iter().any(|f| hit(f, id)))
        .map(|(o, _)| o)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let c = Config::from_toml("", Path::new("")).unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.timeout, Duration::from_secs(10));
        assert_eq!(c.model_path(), PathBuf::from("data/model.json"));
        c.validate().unwrap();
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let c = Config::from_toml(
            "output_dir = \"out\"\nmodel_path = \"/abs/m.json\"\nseed = 7\ntimeout_seconds = 0.5\n\
             [corpus]\nfamilies = [\"ghz\", \"dj\"]\nmax_qubits = 10\n",
            Path::new("/etc/qp"),
        )
        .unwrap();
        assert_eq!(c.output_dir, PathBuf::from("/etc/qp/out"));
        assert_eq!(c.model_path(), PathBuf::from("/abs/m.json"));
        assert_eq!(c.corpus.families, [CircuitFamily::Ghz, CircuitFamily::Dj]);
        assert_eq!((c.corpus.seed, c.corpus.max_qubits), (7, 10));
        assert_eq!(c.timeout, Duration::from_millis(500));
    }

    #[test]
    fn rejects_bad_values() {
        let base = Path::new("");
        assert!(matches!(
            Config::from_toml("[corpus]\nfamilies = [\"bogus\"]", base),
            Err(ConfigError::Corpus(CorpusError::UnknownFamily(_)))
        ));
        assert!(matches!(
            Config::from_toml("timeout_seconds = -1.0", base),
            Err(ConfigError::Timeout(_))
        ));
        assert!(matches!(Config::from_toml("sed = 1", base), Err(ConfigError::Syntax { .. })));
        let c = Config::from_toml("[corpus]\nmin_qubits = 1", base).unwrap();
        assert!(c.validate().is_err());
        let c = Config::from_toml("device_dir = \"/definitely/not/here\"", base).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::NoDeviceDir(_))));
    }

    #[test]
    fn option_filters() {
        let all = enumerate_options(&builtin_devices()).unwrap();
        let f = |fs: &[&str]| filter_options(all.clone(), &fs.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        assert_eq!(f(&[]).unwrap().len(), 30);
        assert_eq!(f(&["dev8"]).unwrap().len(), 6);
        assert_eq!(f(&["dev8/A"]).unwrap().len(), 4);
        assert_eq!(f(&["dev8/A/O3", "dev127/B"]).unwrap().len(), 3);
        // `dev1` is not a prefix match for `dev127`.
        assert!(matches!(f(&["dev1"]), Err(ConfigError::NoMatch(_))));
    }
}
