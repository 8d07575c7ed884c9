//! Run configuration and parsers for command-line style inputs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{parse_rational, Rational, DEFAULT_PRECISION, MIN_PRECISION};
use crate::sampling::{Caps, FrequencyVector};

pub const PRECISION_ENV: &str = "NEUTRAL_SAMPLER_PRECISION";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Parse(format!(
                "output format must be json or csv, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub precision_bits: usize,
    pub caps: Caps,
    pub output_format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            precision_bits: DEFAULT_PRECISION,
            caps: Caps::default(),
            output_format: OutputFormat::Json,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Defaults with the precision taken from `NEUTRAL_SAMPLER_PRECISION`
    /// when it is set.
    pub fn from_env() -> Result<Self> {
        let mut config = Self::default();
        if let Ok(value) = std::env::var(PRECISION_ENV) {
            config.set("precision_bits", &value)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// ignored; values may be quoted.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            let value = value.trim().trim_matches('"');
            self.set(key.trim(), value)?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| {
            v.trim().parse::<u64>().map_err(|_| {
                Error::Parse(format!("{key} must be a nonnegative integer, got {v:?}"))
            })
        };
        match key {
            "precision_bits" | "precision" => self.precision_bits = int(value)? as usize,
            "max_n" => self.caps.max_n = int(value)? as usize,
            "max_atoms" => self.caps.max_atoms = int(value)? as usize,
            "output_format" => self.output_format = value.parse()?,
            "seed" => self.seed = int(value)?,
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < MIN_PRECISION {
            return Err(Error::Resource {
                what: "precision_bits",
                value: self.precision_bits,
                limit: MIN_PRECISION,
            });
        }
        if self.caps.max_n == 0 || self.caps.max_atoms == 0 {
            return Err(Error::Domain("caps must be positive".into()));
        }
        Ok(())
    }
}

/// Comma-separated rationals, e.g. `1/2,1/3,1/6`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rational).collect()
}

/// Atoms from a comma-separated list. `dust` is `auto` (the remainder) or
/// an explicit value that must equal `1 − Σ atoms`.
pub fn parse_frequency_vector(atoms: &str, dust: &str) -> Result<FrequencyVector> {
    let atoms = parse_rational_list(atoms)?;
    match dust.trim() {
        "auto" => FrequencyVector::new(atoms),
        value => FrequencyVector::with_dust(atoms, parse_rational(value)?),
    }
}

/// `1e2:1e8:log` for decade steps from `1e2` to `1e8`, or an explicit
/// comma-separated list.
pub fn parse_theta_grid(s: &str) -> Result<Vec<Rational>> {
    let s = s.trim();
    let grid = match s.split(':').collect::<Vec<_>>().as_slice() {
        [lo, hi, "log"] => {
            let lo = parse_rational(lo)?;
            let hi = parse_rational(hi)?;
            if lo <= Rational::ZERO || hi < lo {
                return Err(Error::Parse(format!("bad grid bounds in {s:?}")));
            }
            let ten = Rational::from(10u8);
            let mut grid = Vec::new();
            let mut v = lo;
            while v <= hi {
                grid.push(v.clone());
                v *= &ten;
            }
            grid
        }
        [_] => parse_rational_list(s)?,
        _ => {
            return Err(Error::Parse(format!(
                "θ grid must be lo:hi:log or a list, got {s:?}"
            )))
        }
    };
    if grid.is_empty() {
        return Err(Error::EmptyInput("θ grid is empty".into()));
    }
    if grid.iter().any(|t| *t <= Rational::ZERO) {
        return Err(Error::Domain("θ values must be positive".into()));
    }
    Ok(grid)
}
