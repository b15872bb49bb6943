//! Library behind the `edss` binary: configuration, the `run`, `figure` and
//! `check` commands, and their file outputs.

use std::fs;
use std::io;
use std::path::Path;

pub mod check;
pub mod config;
pub mod figures;
pub mod output;
pub mod run;

pub use config::{ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] edss::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for a corrupted state, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use edss::Error::*;
        match self {
            CliError::Config(_) => 2,
            CliError::Sim(StateCorrupted { .. }) => 3,
            CliError::Sim(InvalidParams(_) | InvalidWeight(_) | InvalidState(_)) => 2,
            _ => 1,
        }
    }
}

/// Defaults, then the file (if any), then each `key=value` override in order.
pub fn load_config(file: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            key: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        cfg.apply_text(&text)?;
    }
    for pair in overrides {
        cfg.set_pair(pair)?;
    }
    Ok(cfg)
}

/// Runs `f` on a pool with `cfg.workers` threads (all cores when 0).
pub fn with_workers<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Writes the effective configuration into the output directory.
pub fn echo_config(cfg: &RunConfig) -> io::Result<()> {
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join(config::ECHO_FILE), cfg.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cfg_err = CliError::Config(ConfigError { key: "x".into(), message: "bad".into() });
        assert_eq!(cfg_err.exit_code(), 2);
        let corrupted =
            CliError::Sim(edss::Error::StateCorrupted { time: 0.1, trace_deviation: 1.0, min_eigenvalue: -1.0 });
        assert_eq!(corrupted.exit_code(), 3);
        assert_eq!(CliError::Sim(edss::Error::InvalidParams("x".into())).exit_code(), 2);
        assert_eq!(CliError::Sim(edss::Error::NoUpperBound(1.0)).exit_code(), 1);
    }

    #[test]
    fn overrides_apply_after_file() {
        let dir = std::env::temp_dir().join(format!("edss-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let file = dir.join("c.txt");
        fs::write(&file, "p=0.5\ngamma_ac=0.01\n").unwrap();
        let cfg = load_config(Some(&file), &["p=0.7".into()]).unwrap();
        assert_eq!((cfg.p, cfg.gamma_ac), (0.7, 0.01));
        assert_eq!(load_config(Some(&dir.join("missing")), &[]).unwrap_err().key, "config");
        fs::remove_dir_all(dir).unwrap();
    }
}
