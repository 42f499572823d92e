//! Job configuration: a TOML document mirroring the command-line flags,
//! merged with flags and validated into a [`JobConfig`].

use std::fmt;
use std::path::PathBuf;

use gelfand::format::{group_to_text, pair_to_text, parse_group, parse_pair};
use gelfand::tolerance::{psd_tolerance, ORDER_MARGIN};
use gelfand::{GroupDescriptor, PairDescriptor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Expand,
    Synthesize,
    Validate,
    Orthotest,
    Feqtest,
    Simulate,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Synthesize => "synthesize",
            Command::Validate => "validate",
            Command::Orthotest => "orthotest",
            Command::Feqtest => "feqtest",
            Command::Simulate => "simulate",
            Command::Catalog => "catalog",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "expand" => Command::Expand,
            "synthesize" => Command::Synthesize,
            "validate" => Command::Validate,
            "orthotest" => Command::Orthotest,
            "feqtest" => Command::Feqtest,
            "simulate" => Command::Simulate,
            "catalog" => Command::Catalog,
            _ => return None,
        })
    }

    /// Commands that consume random numbers and therefore need a seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Command::Validate | Command::Feqtest | Command::Simulate)
    }
}

/// A pair or group given either as text (`"real:3"`) or as a table
/// (`{ type = "real_sphere", d = 3 }`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Descriptor<T> {
    Text(String),
    Table(T),
}

/// Raw configuration: every key optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub pair: Option<Descriptor<PairDescriptor>>,
    pub group: Option<Descriptor<GroupDescriptor>>,
    pub order: Option<usize>,
    pub max_degree: Option<u32>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub u: Option<Vec<String>>,
    pub grid: Option<usize>,
    pub trials: Option<usize>,
    pub points: Option<usize>,
    pub samples: Option<usize>,
}

impl ConfigFile {
    /// Keys set in `over` replace those in `self`.
    pub fn overridden_by(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            command: over.command.or(self.command),
            pair: over.pair.or(self.pair),
            group: over.group.or(self.group),
            order: over.order.or(self.order),
            max_degree: over.max_degree.or(self.max_degree),
            seed: over.seed.or(self.seed),
            tolerance: over.tolerance.or(self.tolerance),
            input: over.input.or(self.input),
            out: over.out.or(self.out),
            u: over.u.or(self.u),
            grid: over.grid.or(self.grid),
            trials: over.trials.or(self.trials),
            points: over.points.or(self.points),
            samples: over.samples.or(self.samples),
        }
    }
}

/// A configuration error with the path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub const DEFAULT_MAX_DEGREE: u32 = 4;
pub const DEFAULT_GRID: usize = 5;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_VALIDATE_POINTS: usize = 30;
pub const DEFAULT_FEQ_POINTS: usize = 5;
pub const DEFAULT_SIMULATE_POINTS: usize = 10;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const ORTHO_TOLERANCE: f64 = 1e-11;
pub const FEQ_TOLERANCE: f64 = 5e-3;
pub const EXPAND_TOLERANCE: f64 = 1e-9;

/// Validated job description with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub pair: Option<PairDescriptor>,
    pub group: Option<GroupDescriptor>,
    /// Radial quadrature order.
    pub order: usize,
    pub max_degree: u32,
    /// `None` until [`JobConfig::ensure_seed`] runs for randomized commands.
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Group elements in text form; parsed against the group at run time.
    pub u: Vec<String>,
    pub grid: usize,
    pub trials: usize,
    pub points: usize,
    pub samples: usize,
}

fn positive(field: &str, value: Option<usize>, default: usize) -> Result<usize, ConfigError> {
    match value {
        Some(0) => Err(ConfigError::new(field, "must be >= 1")),
        Some(v) => Ok(v),
        None => Ok(default),
    }
}

fn resolve_pair(d: Descriptor<PairDescriptor>) -> Result<PairDescriptor, ConfigError> {
    let pair = match d {
        Descriptor::Text(t) => parse_pair(&t).map_err(|e| ConfigError::new("pair", e.to_string()))?,
        Descriptor::Table(p) => p,
    };
    pair.validate().map_err(|e| ConfigError::new("pair", e.to_string()))?;
    Ok(pair)
}

fn resolve_group(d: Descriptor<GroupDescriptor>) -> Result<GroupDescriptor, ConfigError> {
    let group = match d {
        Descriptor::Text(t) => parse_group(&t).map_err(|e| ConfigError::new("group", e.to_string()))?,
        Descriptor::Table(g) => g,
    };
    group.validate().map_err(|e| ConfigError::new("group", e.to_string()))?;
    Ok(group)
}

impl JobConfig {
    /// Validates a merged raw configuration and fills defaults.
    pub fn from_file(raw: ConfigFile) -> Result<Self, ConfigError> {
        let command_text = raw.command.ok_or_else(|| ConfigError::new("command", "missing"))?;
        let command = Command::parse(&command_text).ok_or_else(|| {
            ConfigError::new(
                "command",
                format!(
                    "unknown command {command_text:?}; expected one of expand, synthesize, validate, orthotest, feqtest, simulate, catalog"
                ),
            )
        })?;
        let pair = raw.pair.map(resolve_pair).transpose()?;
        let group = raw.group.map(resolve_group).transpose()?;

        let max_degree = raw.max_degree.unwrap_or(DEFAULT_MAX_DEGREE);
        let order = match raw.order {
            Some(order) => {
                // an order-k Gauss rule is exact to degree 2k-1; products of two
                // degree-D spherical functions have degree 2D
                if 2 * order < 2 * max_degree as usize + 1 {
                    return Err(ConfigError::new(
                        "order",
                        format!(
                            "quadrature order {order} is too low for max_degree {max_degree}: a rule of order k integrates \
                             polynomials up to degree 2k-1 exactly, and products of degree-{max_degree} spherical functions \
                             have degree {}, so order must be at least {}",
                            2 * max_degree,
                            max_degree + 1
                        ),
                    ));
                }
                order
            }
            None => max_degree as usize + ORDER_MARGIN as usize,
        };

        if let Some(seed) = raw.seed {
            if seed > i64::MAX as u64 {
                return Err(ConfigError::new("seed", format!("must be at most {}", i64::MAX)));
            }
        }

        let points_default = match command {
            Command::Feqtest => DEFAULT_FEQ_POINTS,
            Command::Simulate => DEFAULT_SIMULATE_POINTS,
            _ => DEFAULT_VALIDATE_POINTS,
        };
        let points = positive("points", raw.points, points_default)?;
        if command == Command::Validate && points < 2 {
            return Err(ConfigError::new("points", "validate needs at least 2 points per Gram matrix"));
        }

        let tolerance = match raw.tolerance {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                return Err(ConfigError::new("tolerance", "must be a positive finite number"))
            }
            Some(t) => t,
            None => match command {
                Command::Orthotest => ORTHO_TOLERANCE,
                Command::Feqtest => FEQ_TOLERANCE,
                Command::Validate => psd_tolerance(points),
                _ => EXPAND_TOLERANCE,
            },
        };

        let config = JobConfig {
            command,
            pair,
            group,
            order,
            max_degree,
            seed: raw.seed,
            tolerance,
            input: raw.input,
            out: raw.out,
            u: raw.u.unwrap_or_default(),
            grid: positive("grid", raw.grid, DEFAULT_GRID)?,
            trials: positive("trials", raw.trials, DEFAULT_TRIALS)?,
            points,
            samples: positive("samples", raw.samples, DEFAULT_SAMPLES)?,
        };
        config.check_requirements()?;
        Ok(config)
    }

    fn check_requirements(&self) -> Result<(), ConfigError> {
        if let (Some(i), Some(o)) = (&self.input, &self.out) {
            if i == o {
                return Err(ConfigError::new("out", "output path must differ from the input path"));
            }
        }
        let needs_input = matches!(
            self.command,
            Command::Expand | Command::Synthesize | Command::Validate | Command::Simulate
        );
        if needs_input && self.input.is_none() {
            return Err(ConfigError::new("in", format!("{} needs an input kernel spec", self.command.name())));
        }
        if matches!(self.command, Command::Orthotest | Command::Feqtest) && self.pair.is_none() {
            return Err(ConfigError::new("pair", format!("{} needs a pair", self.command.name())));
        }
        Ok(())
    }

    /// Fills a missing seed for randomized commands and returns it when it
    /// was generated.
    pub fn ensure_seed(&mut self) -> Option<u64> {
        if self.seed.is_none() && self.command.is_randomized() {
            let seed = fresh_seed();
            self.seed = Some(seed);
            return Some(seed);
        }
        None
    }

    /// The effective configuration as a raw document with every key set.
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            command: Some(self.command.name().into()),
            pair: self.pair.as_ref().map(|p| Descriptor::Text(pair_to_text(p))),
            group: self.group.map(|g| Descriptor::Text(group_to_text(g))),
            order: Some(self.order),
            max_degree: Some(self.max_degree),
            seed: self.seed,
            tolerance: Some(self.tolerance),
            input: self.input.clone(),
            out: self.out.clone(),
            u: Some(self.u.clone()),
            grid: Some(self.grid),
            trials: Some(self.trials),
            points: Some(self.points),
            samples: Some(self.samples),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("effective config serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("effective config serializes")
    }
}

/// Parses a TOML job description. Unknown keys, duplicate keys and type
/// mismatches are reported with their line and key.
pub fn parse_config_file(text: &str) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim_end().to_string()))
}

/// Parses and validates a complete TOML job description.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    JobConfig::from_file(parse_config_file(text)?)
}

/// A seed from the clock and process id, kept below 2^63 so it fits in a
/// TOML integer.
fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    gelfand::seed::splitmix64(nanos ^ u64::from(std::process::id()).rotate_left(32)) >> 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_expand_config_gets_defaults() {
        let c = parse_config("command = \"expand\"\nin = \"spec.json\"\n").unwrap();
        assert_eq!(c.command, Command::Expand);
        assert_eq!(c.max_degree, DEFAULT_MAX_DEGREE);
        assert_eq!(c.order, DEFAULT_MAX_DEGREE as usize + ORDER_MARGIN as usize);
        assert_eq!(c.tolerance, EXPAND_TOLERANCE);
        assert_eq!(c.grid, DEFAULT_GRID);
        assert!(c.u.is_empty() && c.seed.is_none());
    }

    #[test]
    fn zero_dimension_names_field_and_constraint() {
        for text in [
            "command = \"orthotest\"\npair = \"real:0\"\n",
            "command = \"orthotest\"\npair = { type = \"real_sphere\", d = 0 }\n",
        ] {
            let err = parse_config(text).unwrap_err();
            assert_eq!(err.field, "pair");
            assert!(err.to_string().contains("d must be >= 1"), "{err}");
        }
    }

    #[test]
    fn low_order_cites_exactness() {
        let err = parse_config("command = \"orthotest\"\npair = \"real:3\"\nmax_degree = 6\norder = 6\n").unwrap_err();
        assert_eq!(err.field, "order");
        assert!(err.message.contains("2k-1"), "{err}");
        assert!(parse_config("command = \"orthotest\"\npair = \"real:3\"\nmax_degree = 6\norder = 7\n").is_ok());
    }

    #[test]
    fn strict_parsing() {
        let err = parse_config("command = \"expand\"\nin = \"a\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus") && err.to_string().contains("line 3"), "{err}");
        let err = parse_config("command = \"expand\"\nin = \"a\"\nin = \"b\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_config("command = \"orthotest\"\npair = \"real:2\"\nmax_degree = \"ten\"\n").unwrap_err();
        assert!(err.to_string().contains("max_degree") || err.to_string().contains("line 3"), "{err}");
        let err = parse_config("command = \"expand\"\nin = \"a\"\nout = \"a\"\n").unwrap_err();
        assert_eq!(err.field, "out");
        let err = parse_config("command = \"expand\"\nin = \"a\"\ntrials = 0\n").unwrap_err();
        assert_eq!(err.field, "trials");
    }

    #[test]
    fn effective_config_round_trips() {
        let mut c = parse_config(
            "command = \"feqtest\"\npair = \"product:real:2,complex:3\"\ngroup = \"euclidean:2\"\ntolerance = 0.001\nu = [\"0.5;1\"]\n",
        )
        .unwrap();
        assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
        c.ensure_seed();
        assert!(c.seed.unwrap() <= i64::MAX as u64);
        assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_file("command = \"orthotest\"\npair = \"real:2\"\nmax_degree = 3\n").unwrap();
        let flags = ConfigFile { max_degree: Some(5), ..Default::default() };
        let c = JobConfig::from_file(file.overridden_by(flags)).unwrap();
        assert_eq!(c.max_degree, 5);
        assert_eq!(c.pair, Some(PairDescriptor::RealSphere { d: 2 }));
    }
}
