//! Run settings: defaults, `key = value` files and validation.

use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}: expected key = value")]
    Syntax { path: String, line: usize },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for {key}")]
    BadValue { key: String, value: String },
    #[error("{key} = {value} is outside {range}")]
    OutOfRange {
        key: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("cannot read {0}: {1}")]
    Io(String, String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub epsilon1: f64,
    pub quad_tol: f64,
    pub certify_min_width: f64,
    pub certify_margin: f64,
    pub falsify_count: u64,
    pub seeds: Vec<u64>,
    pub omega_step: f64,
    pub omega_u_max: f64,
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            epsilon1: 0.0,
            quad_tol: 1e-4,
            certify_min_width: 1e-5,
            certify_margin: 1e-4,
            falsify_count: 100_000,
            seeds: vec![1, 42, 2024],
            omega_step: 1e-4,
            omega_u_max: 64.0,
            jobs: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Parses a comma-separated seed list such as `1,42,2024`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, ConfigError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse("seeds", s))
        .collect()
}

impl Config {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "epsilon1" | "eps1" => self.epsilon1 = parse(key, value)?,
            "quad_tol" => self.quad_tol = parse(key, value)?,
            "certify_min_width" => self.certify_min_width = parse(key, value)?,
            "certify_margin" => self.certify_margin = parse(key, value)?,
            "falsify_count" => self.falsify_count = parse(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "omega_step" => self.omega_step = parse(key, value)?,
            "omega_u_max" => self.omega_u_max = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, value: String, range: &'static str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key, value, range })
            }
        }
        check((0.0..=1e-5).contains(&self.epsilon1), "epsilon1", self.epsilon1.to_string(), "[0, 1e-5]")?;
        check(
            (sievecert::quadrature::TOL_MIN..=sievecert::quadrature::TOL_MAX).contains(&self.quad_tol),
            "quad_tol",
            self.quad_tol.to_string(),
            "[1e-8, 1e-2]",
        )?;
        check(
            self.certify_min_width > 0.0 && self.certify_min_width < 1.0,
            "certify_min_width",
            self.certify_min_width.to_string(),
            "(0, 1)",
        )?;
        check(
            self.certify_margin >= 0.0 && self.certify_margin.is_finite(),
            "certify_margin",
            self.certify_margin.to_string(),
            "[0, inf)",
        )?;
        check(
            (1..=sievecert::combinatorics::MAX_COUNT).contains(&self.falsify_count),
            "falsify_count",
            self.falsify_count.to_string(),
            "[1, 1e7]",
        )?;
        check(!self.seeds.is_empty(), "seeds", String::new(), "a non-empty list")?;
        check(
            self.omega_step > 0.0 && self.omega_step <= sievecert::buchstab::MAX_STEP,
            "omega_step",
            self.omega_step.to_string(),
            "(0, 0.01]",
        )?;
        check(
            self.omega_u_max >= 10.0 && self.omega_u_max <= sievecert::buchstab::MAX_U,
            "omega_u_max",
            self.omega_u_max.to_string(),
            "[10, 64]",
        )?;
        check(self.jobs >= 1, "jobs", self.jobs.to_string(), "[1, inf)")?;
        Ok(())
    }
}
