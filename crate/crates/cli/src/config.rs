//! Run configuration: built-in defaults, overridden by a `key = value` file,
//! overridden in turn by command-line flags.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// Grid size; `None` lets each command pick its own default.
    pub n: Option<usize>,
    pub seed: u64,
    pub gamma: f64,
    pub c0: f64,
    pub sphere_tol: f64,
    pub residual_target: f64,
    pub max_iters: usize,
    pub extension_tol: f64,
    pub reconstruction_tol: f64,
    pub deviation_bound: f64,
    pub radial_nodes: usize,
    pub samples: usize,
    pub peaks: Vec<usize>,
    pub schedule: Vec<f64>,
    /// Blaschke zeros as `[re, im]`.
    pub zeros: Vec<[f64; 2]>,
    pub constant: bool,
    pub perturb: f64,
    pub band: usize,
    pub format: Format,
    /// Output location is not part of the recorded configuration.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub map: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: None,
            seed: 7,
            gamma: FRAC_PI_4,
            c0: PI,
            sphere_tol: 1e-6,
            residual_target: 1e-6,
            max_iters: 20_000,
            extension_tol: 1e-8,
            reconstruction_tol: 1e-10,
            deviation_bound: 0.05,
            radial_nodes: 64,
            samples: 100,
            peaks: vec![8, 16, 32, 64, 128],
            schedule: canonical_schedule(2, 8),
            zeros: Vec::new(),
            constant: false,
            perturb: 0.0,
            band: 6,
            format: Format::Json,
            out: None,
            map: None,
        }
    }
}

/// `1 - 2^{-k}` for `k = lo..=hi`.
pub fn canonical_schedule(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 1.0 - f64::powi(2.0, -k)).collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse `{}`", s.trim()))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_num).collect()
}

/// Comma-separated complex numbers, each `re` or `re:im`.
pub fn parse_zeros(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.split_once(':') {
            Some((re, im)) => Ok([parse_num(re)?, parse_num(im)?]),
            None => Ok([parse_num(t)?, 0.0]),
        })
        .collect()
}

/// Either a comma-separated list of parameters or `dyadic:LO..HI`.
pub fn parse_schedule(s: &str) -> Result<Vec<f64>, String> {
    match s.trim().strip_prefix("dyadic:") {
        Some(range) => {
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| format!("expected `dyadic:LO..HI`, found `{s}`"))?;
            let (lo, hi): (i32, i32) = (parse_num(lo)?, parse_num(hi)?);
            if lo > hi {
                return Err(format!("empty range {lo}..{hi}"));
            }
            Ok(canonical_schedule(lo, hi))
        }
        None => parse_list(s),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, found `{other}`")),
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s.trim() {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(format!("unknown format `{other}`")),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "n" => self.n = Some(parse_num(value)?),
            "seed" => self.seed = parse_num(value)?,
            "gamma" => self.gamma = parse_num(value)?,
            "c0" => self.c0 = parse_num(value)?,
            "sphere_tol" => self.sphere_tol = parse_num(value)?,
            "residual_target" => self.residual_target = parse_num(value)?,
            "max_iters" => self.max_iters = parse_num(value)?,
            "extension_tol" => self.extension_tol = parse_num(value)?,
            "reconstruction_tol" => self.reconstruction_tol = parse_num(value)?,
            "deviation_bound" => self.deviation_bound = parse_num(value)?,
            "radial_nodes" => self.radial_nodes = parse_num(value)?,
            "samples" => self.samples = parse_num(value)?,
            "peaks" => self.peaks = parse_list(value)?,
            "schedule" => self.schedule = parse_schedule(value)?,
            "zeros" => self.zeros = parse_zeros(value)?,
            "constant" => self.constant = parse_bool(value)?,
            "perturb" => self.perturb = parse_num(value)?,
            "band" => self.band = parse_num(value)?,
            "format" => self.format = parse_format(value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "map" => self.map = Some(PathBuf::from(value.trim())),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies every setting in `text`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let syntax = |message: String| ConfigError::Syntax {
                path: path.to_string(),
                line: i + 1,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, found `{line}`")))?;
            self.set(key.trim(), value).map_err(syntax)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(n) = self.n {
            if n < 8 || !n.is_power_of_two() {
                return bad(format!("grid size {n} must be a power of two >= 8"));
            }
        }
        let positive = [
            ("gamma", self.gamma),
            ("c0", self.c0),
            ("sphere_tol", self.sphere_tol),
            ("residual_target", self.residual_target),
            ("extension_tol", self.extension_tol),
            ("reconstruction_tol", self.reconstruction_tol),
            ("deviation_bound", self.deviation_bound),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.samples == 0 {
            return bad("ensemble size (samples) must be at least 1".into());
        }
        if self.peaks.is_empty() || self.peaks.contains(&0) {
            return bad("peaks must be a non-empty list of positive frequencies".into());
        }
        if self.radial_nodes == 0 {
            return bad("radial_nodes must be positive".into());
        }
        if !self.perturb.is_finite() {
            return bad(format!("perturb must be finite, got {}", self.perturb));
        }
        Ok(())
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }
}
