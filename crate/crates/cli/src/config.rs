//! Run configuration: defaults, then a flat `key=value` file, then flags.

use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn field(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub framework: String,
    /// Unset means the per-command default.
    pub theta: Option<f64>,
    pub lame0: f64,
    pub shear0: f64,
    pub lame1: f64,
    pub shear1: f64,
    /// Cell mesh subdivisions per side.
    pub n: usize,
    /// Micro modes kept.
    pub modes: usize,
    pub macro_k: usize,
    pub macro_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_spectrum: Option<String>,
    /// Cells per side `1/ε` along the ladder.
    pub ladder: Vec<usize>,
    /// `1/ε` for a single direct run.
    pub eps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nfine: Option<usize>,
    pub boundary: String,
    pub direct_modes: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            framework: "grid-diag".into(),
            theta: None,
            lame0: 0.0,
            shear0: 0.1,
            lame1: 1.0,
            shear1: 1.0,
            n: 32,
            modes: 20,
            macro_k: 20,
            macro_n: 32,
            macro_spectrum: None,
            ladder: vec![2, 4, 8],
            eps: 4,
            nfine: None,
            boundary: "stiff".into(),
            direct_modes: 6,
            out: PathBuf::from("."),
        }
    }
}

/// Parses `1/k`.
pub fn parse_eps(s: &str) -> Result<usize, String> {
    let k = s
        .trim()
        .strip_prefix("1/")
        .ok_or_else(|| format!("`{s}` is not of the form 1/k"))?;
    match k.trim().parse::<usize>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(format!("`{s}` is not of the form 1/k with k a positive integer")),
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| field(key, format!("cannot parse `{v}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "framework" => self.framework = v.to_string(),
            "theta" => self.theta = Some(parse(key, v)?),
            "lame0" => self.lame0 = parse(key, v)?,
            "shear0" => self.shear0 = parse(key, v)?,
            "lame1" => self.lame1 = parse(key, v)?,
            "shear1" => self.shear1 = parse(key, v)?,
            "n" => self.n = parse(key, v)?,
            "modes" => self.modes = parse(key, v)?,
            "macro_k" => self.macro_k = parse(key, v)?,
            "macro_n" => self.macro_n = parse(key, v)?,
            "macro_spectrum" => self.macro_spectrum = Some(v.to_string()),
            "ladder" => {
                self.ladder = v
                    .split(',')
                    .map(parse_eps)
                    .collect::<Result<_, _>>()
                    .map_err(|m| field(key, m))?
            }
            "eps" => self.eps = parse_eps(v).map_err(|m| field(key, m))?,
            "nfine" => self.nfine = Some(parse(key, v)?),
            "boundary" => self.boundary = v.to_string(),
            "direct_modes" => self.direct_modes = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err(field(key, "unknown key")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(t) = self.theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(field("theta", "must be positive"));
            }
        }
        for (name, v) in [("shear0", self.shear0), ("shear1", self.shear1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field(name, "must be positive"));
            }
        }
        for (name, lame, shear) in [("lame0", self.lame0, self.shear0), ("lame1", self.lame1, self.shear1)] {
            if !(lame + shear > 0.0 && lame.is_finite()) {
                return Err(field(name, "lame + shear must be positive"));
            }
        }
        if self.n < 2 || self.n % 2 != 0 {
            return Err(field("n", "must be even and at least 2"));
        }
        if self.modes == 0 {
            return Err(field("modes", "must be positive"));
        }
        if self.macro_n < 2 {
            return Err(field("macro_n", "must be at least 2"));
        }
        if self.direct_modes == 0 {
            return Err(field("direct_modes", "must be positive"));
        }
        if self.ladder.is_empty() {
            return Err(field("ladder", "must not be empty"));
        }
        if let Some(nf) = self.nfine {
            if nf < 2 || nf % 2 != 0 {
                return Err(field("nfine", "must be even and at least 2"));
            }
        }
        if self.boundary != "plain" && self.boundary != "stiff" {
            return Err(field("boundary", "must be `plain` or `stiff`"));
        }
        Ok(())
    }

    /// The key=value text that reproduces this configuration.
    pub fn to_text(&self, theta: f64) -> String {
        let ladder: Vec<String> = self.ladder.iter().map(|k| format!("1/{k}")).collect();
        let mut s = format!(
            "framework={}\ntheta={}\nlame0={}\nshear0={}\nlame1={}\nshear1={}\nn={}\nmodes={}\nmacro_k={}\nmacro_n={}\nladder={}\neps=1/{}\nboundary={}\ndirect_modes={}\n",
            self.framework,
            theta,
            self.lame0,
            self.shear0,
            self.lame1,
            self.shear1,
            self.n,
            self.modes,
            self.macro_k,
            self.macro_n,
            ladder.join(","),
            self.eps,
            self.boundary,
            self.direct_modes,
        );
        if let Some(nf) = self.nfine {
            s.push_str(&format!("nfine={nf}\n"));
        }
        if let Some(m) = &self.macro_spectrum {
            s.push_str(&format!("macro_spectrum={m}\n"));
        }
        s
    }
}
