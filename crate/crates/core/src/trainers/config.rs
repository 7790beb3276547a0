use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::DEFAULT_STATIONARITY_TOL;

/// Training method tag; parses from `moo`, `stl`, `uni`, `gs:<alpha>`, `rnd`,
/// `linear`, `jsep`, `jdist`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Moo,
    Stl,
    Uni,
    Gs(f64),
    Rnd,
    Linear,
    Jsep,
    Jdist,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Moo => f.write_str("moo"),
            Method::Stl => f.write_str("stl"),
            Method::Uni => f.write_str("uni"),
            Method::Gs(a) => write!(f, "gs:{a}"),
            Method::Rnd => f.write_str("rnd"),
            Method::Linear => f.write_str("linear"),
            Method::Jsep => f.write_str("jsep"),
            Method::Jdist => f.write_str("jdist"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "moo" | "ours" => Method::Moo,
            "stl" => Method::Stl,
            "uni" => Method::Uni,
            "rnd" => Method::Rnd,
            "linear" => Method::Linear,
            "jsep" | "j-sep" => Method::Jsep,
            "jdist" | "j-dist" => Method::Jdist,
            other => {
                let alpha = other
                    .strip_prefix("gs:")
                    .or_else(|| other.strip_prefix("gs="))
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))?;
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Config(format!(
                        "GS alpha must lie in (0, 1), got {alpha}"
                    )));
                }
                Method::Gs(alpha)
            }
        })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub method: Method,
    pub lr_theta: f64,
    pub lr_phi: f64,
    pub max_epochs: usize,
    /// Mini-batch size; values ≥ the training-set size mean full-batch updates.
    pub batch_size: usize,
    pub seed: u64,
    pub stationarity_tol: f64,
    /// Hidden layer widths of the black-box MLP.
    pub hidden: Vec<usize>,
    /// Surrogate steps per black-box step.
    pub surrogate_steps: usize,
    /// Full-batch step budget for fitting the surrogate after STL training.
    pub surrogate_fit_budget: usize,
    /// STL surrogate fit stops once the loss improves by less than this over a
    /// check window.
    pub surrogate_fit_tol: f64,
    /// Weight of the distillation term for J-DIST (1 reproduces the ½/½/½ mix).
    pub distill_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Moo,
            lr_theta: 1e-3,
            lr_phi: 1e-3,
            max_epochs: 100,
            batch_size: 128,
            seed: 0,
            stationarity_tol: DEFAULT_STATIONARITY_TOL,
            hidden: vec![64, 64],
            surrogate_steps: 1,
            surrogate_fit_budget: 20_000,
            surrogate_fit_tol: 1e-8,
            distill_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parses a TOML table of config fields; absent fields take their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lr_theta > 0.0 && self.lr_phi > 0.0) {
            return bad(format!(
                "learning rates must be > 0 ({}, {})",
                self.lr_theta, self.lr_phi
            ));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be ≥ 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be ≥ 1".into());
        }
        if self.surrogate_steps == 0 {
            return bad("surrogate_steps must be ≥ 1".into());
        }
        if self.stationarity_tol.is_nan() || self.stationarity_tol <= 0.0 {
            return bad("stationarity_tol must be > 0".into());
        }
        if let Method::Gs(a) = self.method {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("GS alpha must lie in (0, 1), got {a}"));
            }
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must have ≥ 1 unit".into());
        }
        Ok(())
    }
}
