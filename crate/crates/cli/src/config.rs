//! Flat `key=value` configuration with `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;

use edss::dynamics::{JumpDirection, Stage, StageParams};
use edss::entanglement::DEFAULT_EPS_SEP;
use edss::protocol::ProtocolParams;
use edss::states::MixtureWeight;
use edss::sweeps::{GridAxis, SweepParam, DEFAULT_BISECT_TOL};

/// Every key the parser accepts, in the order they are echoed.
pub const KEYS: [&str; 16] = [
    "p",
    "t",
    "t_ac",
    "t_bc",
    "gamma_ac",
    "gamma_bc",
    "beta_ac",
    "beta_bc",
    "dt",
    "eps_sep",
    "bisect_tol",
    "jump_dir",
    "workers",
    "out_dir",
    "axis1",
    "axis2",
];

/// Name of the effective configuration written next to every output.
pub const ECHO_FILE: &str = "config.txt";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: f64,
    /// Gate time of both stages.
    pub t: f64,
    pub t_ac: f64,
    pub t_bc: f64,
    pub gamma_ac: f64,
    pub gamma_bc: f64,
    pub beta_ac: f64,
    pub beta_bc: f64,
    pub dt: f64,
    pub eps_sep: f64,
    pub bisect_tol: f64,
    pub jump_dir: JumpDirection,
    /// Worker threads; `0` uses every core.
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Overrides the first axis of a figure's main panel.
    pub axis1: Option<GridAxis>,
    /// Overrides the second axis of a figure's main panel.
    pub axis2: Option<GridAxis>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 0.9,
            t: 1.0,
            t_ac: 1.0,
            t_bc: 1.0,
            gamma_ac: 0.0,
            gamma_bc: 0.0,
            beta_ac: 1.0,
            beta_bc: 1.0,
            dt: 1e-3,
            eps_sep: DEFAULT_EPS_SEP,
            bisect_tol: DEFAULT_BISECT_TOL,
            jump_dir: JumpDirection::default(),
            workers: 0,
            out_dir: PathBuf::from("out"),
            axis1: None,
            axis2: None,
        }
    }
}

pub fn jump_dir_name(dir: JumpDirection) -> &'static str {
    match dir {
        JumpDirection::RaiseFirstLowerCarrier => "raise_lower",
        JumpDirection::LowerFirstRaiseCarrier => "lower_raise",
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| ConfigError::new(key, format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::new(key, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x = parse_f64(key, value)?;
    if x <= 0.0 {
        return Err(ConfigError::new(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x = parse_f64(key, value)?;
    if x < 0.0 {
        return Err(ConfigError::new(key, format!("must be non-negative, got {x}")));
    }
    Ok(x)
}

/// `name:min:max:count`
fn parse_axis(key: &str, value: &str) -> Result<GridAxis, ConfigError> {
    let parts: Vec<&str> = value.split(':').collect();
    let [name, min, max, count] = parts.as_slice() else {
        return Err(ConfigError::new(key, format!("expected name:min:max:count, got `{value}`")));
    };
    let param: SweepParam = name.parse().map_err(|e: edss::Error| ConfigError::new(key, e.to_string()))?;
    let min = parse_f64(key, min)?;
    let max = parse_f64(key, max)?;
    let count: usize = count.parse().map_err(|_| ConfigError::new(key, format!("`{count}` is not a point count")))?;
    GridAxis::new(param, min, max, count).map_err(|e| ConfigError::new(key, e.to_string()))
}

fn axis_text(a: &GridAxis) -> String {
    format!("{}:{}:{}:{}", a.param, a.min, a.max, a.count)
}

impl RunConfig {
    /// Applies one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "p" => {
                let p = parse_f64(key, value)?;
                MixtureWeight::new(p).map_err(|e| ConfigError::new(key, e.to_string()))?;
                self.p = p;
            }
            "t" => self.t = positive(key, value)?,
            "t_ac" => self.t_ac = non_negative(key, value)?,
            "t_bc" => self.t_bc = non_negative(key, value)?,
            "gamma_ac" => self.gamma_ac = non_negative(key, value)?,
            "gamma_bc" => self.gamma_bc = non_negative(key, value)?,
            "beta_ac" => self.beta_ac = non_negative(key, value)?,
            "beta_bc" => self.beta_bc = non_negative(key, value)?,
            "dt" => self.dt = positive(key, value)?,
            "eps_sep" => self.eps_sep = positive(key, value)?,
            "bisect_tol" => self.bisect_tol = positive(key, value)?,
            "jump_dir" => {
                self.jump_dir = match value {
                    "raise_lower" => JumpDirection::RaiseFirstLowerCarrier,
                    "lower_raise" => JumpDirection::LowerFirstRaiseCarrier,
                    other => {
                        return Err(ConfigError::new(
                            key,
                            format!("expected raise_lower or lower_raise, got `{other}`"),
                        ))
                    }
                }
            }
            "workers" => {
                self.workers = value.parse().map_err(|_| ConfigError::new(key, format!("`{value}` is not a count")))?
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err(ConfigError::new(key, "must not be empty"));
                }
                self.out_dir = PathBuf::from(value);
            }
            "axis1" => self.axis1 = Some(parse_axis(key, value)?),
            "axis2" => self.axis2 = Some(parse_axis(key, value)?),
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key=value` string as given to `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) = pair.split_once('=').ok_or_else(|| ConfigError::new(pair.trim(), "expected key=value"))?;
        self.set(key.trim(), value)
    }

    /// Applies every assignment in a config file's text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                self.set_pair(line)?;
            }
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every effective setting, one per line, in a form [`RunConfig::from_text`] reads back exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let nums = [
            ("p", self.p),
            ("t", self.t),
            ("t_ac", self.t_ac),
            ("t_bc", self.t_bc),
            ("gamma_ac", self.gamma_ac),
            ("gamma_bc", self.gamma_bc),
            ("beta_ac", self.beta_ac),
            ("beta_bc", self.beta_bc),
            ("dt", self.dt),
            ("eps_sep", self.eps_sep),
            ("bisect_tol", self.bisect_tol),
        ];
        for (k, v) in nums {
            writeln!(s, "{k}={v}").unwrap();
        }
        writeln!(s, "jump_dir={}", jump_dir_name(self.jump_dir)).unwrap();
        writeln!(s, "workers={}", self.workers).unwrap();
        writeln!(s, "out_dir={}", self.out_dir.display()).unwrap();
        for (k, a) in [("axis1", &self.axis1), ("axis2", &self.axis2)] {
            if let Some(a) = a {
                writeln!(s, "{k}={}", axis_text(a)).unwrap();
            }
        }
        s
    }

    pub fn params(&self) -> ProtocolParams {
        ProtocolParams {
            p: MixtureWeight::new(self.p).expect("validated on set"),
            encoding: StageParams {
                stage: Stage::Encoding,
                gate_time: self.t,
                beta: self.beta_ac,
                gamma: self.gamma_ac,
                duration: self.t_ac,
            },
            decoding: StageParams {
                stage: Stage::Decoding,
                gate_time: self.t,
                beta: self.beta_bc,
                gamma: self.gamma_bc,
                duration: self.t_bc,
            },
            jump_dir: self.jump_dir,
            dt: self.dt,
            eps_sep: self.eps_sep,
        }
    }

    /// `axis1`/`axis2` if set, else the given defaults.
    pub fn axes_or(&self, first: GridAxis, second: GridAxis) -> (GridAxis, GridAxis) {
        (self.axis1.unwrap_or(first), self.axis2.unwrap_or(second))
    }
}
