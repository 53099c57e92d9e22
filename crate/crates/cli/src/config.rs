//! Run configuration: weight-spec resolution, size ranges and the canonical
//! text form.
//!
//! Weight specs follow a small grammar:
//!
//! ```text
//! spec     := family | "@" path
//! family   := "power-law:" params | "example2" | "example3" | "forest"
//! params   := key "=" number ("," key "=" number)*
//! path     := file with one weight per line, or a JSON array of numbers
//! ```

use std::fmt;
use std::path::Path;

use dcs_core::weights::{StructureKind, WeightSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Table,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "table" => Ok(OutputFormat::Table),
            other => Err(format!("unknown format `{other}` (csv|json|table)")),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Table => "table",
        }
    }
}

/// Inclusive size range with a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl SizeRange {
    /// Parses `A:B` or `A:B:STEP`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(format!("malformed range `{s}` (expected A:B or A:B:STEP)"));
        }
        let parse = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| format!("cannot parse `{t}` as a size"))
        };
        let start = parse(parts[0])?;
        let end = parse(parts[1])?;
        let step = if parts.len() == 3 { parse(parts[2])? } else { 1 };
        if step == 0 {
            return Err("range step must be positive".to_string());
        }
        if end < start {
            return Err(format!("empty range `{s}`"));
        }
        Ok(SizeRange { start, end, step })
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (self.start..=self.end).step_by(self.step as usize)
    }
}

impl fmt::Display for SizeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// A fully resolved invocation, normalizable to a canonical text form that
/// re-parses to itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub weights_spec: String,
    pub kind: Option<StructureKind>,
    pub n: Option<u64>,
    pub n_range: Option<SizeRange>,
    pub format: OutputFormat,
    pub labelled: bool,
    pub log: bool,
}

impl RunConfig {
    /// Canonical `key=value` form with a fixed key order.
    pub fn canonical(&self) -> String {
        let mut out = format!(
            "command={};weights={};kind={}",
            self.command,
            self.weights_spec,
            self.kind.map_or("none", |k| k.label()),
        );
        match self.n {
            Some(n) => out.push_str(&format!(";n={n}")),
            None => out.push_str(";n=none"),
        }
        match self.n_range {
            Some(r) => out.push_str(&format!(";range={r}")),
            None => out.push_str(";range=none"),
        }
        out.push_str(&format!(
            ";format={};labelled={};log={}",
            self.format.label(),
            self.labelled,
            self.log
        ));
        out
    }

    /// Parses the canonical form produced by [`RunConfig::canonical`].
    pub fn parse_canonical(s: &str) -> Result<Self, String> {
        let mut command = None;
        let mut weights = None;
        let mut kind = None;
        let mut n = None;
        let mut range = None;
        let mut format = OutputFormat::Table;
        let mut labelled = false;
        let mut log = false;
        for part in s.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("malformed config entry `{part}`"))?;
            match key {
                "command" => command = Some(value.to_string()),
                "weights" => weights = Some(value.to_string()),
                "kind" => {
                    kind = match value {
                        "none" => None,
                        other => {
                            Some(StructureKind::parse(other).map_err(|e| e.to_string())?)
                        }
                    }
                }
                "n" => {
                    n = match value {
                        "none" => None,
                        other => Some(
                            other
                                .parse::<u64>()
                                .map_err(|_| format!("bad n `{other}`"))?,
                        ),
                    }
                }
                "range" => {
                    range = match value {
                        "none" => None,
                        other => Some(SizeRange::parse(other)?),
                    }
                }
                "format" => format = OutputFormat::parse(value)?,
                "labelled" => labelled = value == "true",
                "log" => log = value == "true",
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
        Ok(RunConfig {
            command: command.ok_or("missing command")?,
            weights_spec: weights.ok_or("missing weights")?,
            kind,
            n,
            n_range: range,
            format,
            labelled,
            log,
        })
    }
}

/// Resolves a weight spec, loading `@path` tables from disk.
pub fn resolve_weights(spec: &str) -> Result<WeightSequence, String> {
    if let Some(path) = spec.strip_prefix('@') {
        let content = std::fs::read_to_string(Path::new(path))
            .map_err(|e| format!("cannot read weights file `{path}`: {e}"))?;
        let values = parse_weight_table(&content)
            .map_err(|e| format!("cannot parse weights file `{path}`: {e}"))?;
        return WeightSequence::tabulated(values).map_err(|e| e.to_string());
    }
    WeightSequence::parse_family(spec).map_err(|e| e.to_string())
}

/// One value per line, or a JSON array of numbers.
fn parse_weight_table(content: &str) -> Result<Vec<f64>, String> {
    let trimmed = content.trim_start();
    if trimmed.starts_with('[') {
        let values: Vec<f64> =
            serde_json::from_str(trimmed).map_err(|e| format!("bad JSON array: {e}"))?;
        return Ok(values);
    }
    let mut values = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| format!("line {}: `{line}` is not a number", i + 1))?;
        values.push(v);
    }
    Ok(values)
}
