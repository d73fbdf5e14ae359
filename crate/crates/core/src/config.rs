//! Flat `key = value` run configurations.
//!
//! ```text
//! # circular polarization at the reference point
//! model = dirac
//! lambda_nm = 0.159
//! E_hat_Vpm = 2.057e14
//! eta_rad = 1.5707963267948966
//! delta_T_cycles = 5
//! T_cycles = 27000
//! ```
//!
//! `model`, `lambda_nm`, `E_hat_Vpm`, `eta_rad` and `T_cycles` are required.
//! `delta_T_cycles` defaults to 5, `n_max` to 8, `scheme` to `interaction`,
//! `sample_every_cycles` to 1 and `steps_per_cycle` to the model's default.

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

use crate::fields::{ConfigError, LaserConfig};
use crate::integrator::{IntegratorSettings, Model, Scheme};

pub const KEYS: [&str; 10] = [
    "model",
    "lambda_nm",
    "E_hat_Vpm",
    "eta_rad",
    "delta_T_cycles",
    "T_cycles",
    "n_max",
    "scheme",
    "steps_per_cycle",
    "sample_every_cycles",
];

pub const DEFAULT_RAMP_CYCLES: f64 = 5.0;

/// Everything needed for one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub laser: LaserConfig,
    pub settings: IntegratorSettings,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("line {}", no + 1), "expected `key = value`")
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::new(key, "unknown key"));
            }
            if map.insert(key, value.trim()).is_some() {
                return Err(ConfigError::new(key, "given more than once"));
            }
        }
        let required = |k: &str| map.get(k).copied().ok_or_else(|| ConfigError::new(k, "missing"));
        let num = |k: &str, v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| ConfigError::new(k, format!("{v:?} is not a number")))
        };
        let count = |k: &str, v: &str| -> Result<usize, ConfigError> {
            v.parse::<usize>()
                .map_err(|_| ConfigError::new(k, format!("{v:?} is not a positive integer")))
        };

        let model: Model = required("model")?.parse()?;
        let lambda = num("lambda_nm", required("lambda_nm")?)? * 1e-9;
        let e_hat = num("E_hat_Vpm", required("E_hat_Vpm")?)?;
        let eta = num("eta_rad", required("eta_rad")?)?;
        let t_cycles = num("T_cycles", required("T_cycles")?)?;
        let ramp = match map.get("delta_T_cycles") {
            Some(v) => num("delta_T_cycles", v)?,
            None => DEFAULT_RAMP_CYCLES,
        };
        let laser = LaserConfig::from_cycles(lambda, e_hat, eta, ramp, t_cycles).map_err(rename)?;

        let scheme: Scheme = match map.get("scheme") {
            Some(v) => v.parse()?,
            None => Scheme::InteractionPicture,
        };
        let mut settings = IntegratorSettings::with_scheme(model, scheme);
        if let Some(v) = map.get("steps_per_cycle") {
            settings.steps_per_cycle = count("steps_per_cycle", v)?;
        }
        if let Some(v) = map.get("n_max") {
            settings.n_max = count("n_max", v)?;
        }
        if let Some(v) = map.get("sample_every_cycles") {
            settings.sample_every = count("sample_every_cycles", v)?;
        }
        settings.validate()?;
        Ok(Self {
            model,
            laser,
            settings,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Inverse of [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let l = &self.laser;
        let s = &self.settings;
        format!(
            "model = {}\nlambda_nm = {:e}\nE_hat_Vpm = {:e}\neta_rad = {:e}\ndelta_T_cycles = {:e}\n\
             T_cycles = {:e}\nn_max = {}\nscheme = {}\nsteps_per_cycle = {}\nsample_every_cycles = {}\n",
            self.model,
            l.lambda * 1e9,
            l.e_hat,
            l.eta,
            l.delta_t_cycles(),
            l.t_cycles(),
            s.n_max,
            s.scheme.name(),
            s.steps_per_cycle,
            s.sample_every,
        )
    }
}

/// Maps field names of [`LaserConfig`] onto configuration keys.
fn rename(e: ConfigError) -> ConfigError {
    let key = match e.field.as_str() {
        "lambda" => "lambda_nm",
        "E_hat" => "E_hat_Vpm",
        "eta" => "eta_rad",
        "delta_T" => "delta_T_cycles",
        "T_total" => "T_cycles",
        other => other,
    };
    ConfigError::new(key, e.reason)
}
