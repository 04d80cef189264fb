//! Run configuration: a flat `key = value` file with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{parse_algebra, SUPPORTED};


#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lie,
    Scalars,
    Moyal,
    Lambda,
    Star,
    Gram,
    Kernel,
}

impl Suite {
    /// Dependency order.
    pub const ALL: [Suite; 7] = [
        Suite::Lie,
        Suite::Scalars,
        Suite::Moyal,
        Suite::Lambda,
        Suite::Star,
        Suite::Gram,
        Suite::Kernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lie => "lie",
            Suite::Scalars => "scalars",
            Suite::Moyal => "moyal",
            Suite::Lambda => "lambda",
            Suite::Star => "star",
            Suite::Gram => "gram",
            Suite::Kernel => "kernel",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Parse a comma-separated suite list; `all` selects everything.
/// The result is sorted into dependency order without duplicates.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(item.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty suite list".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Degree cap used when none is configured.
pub fn default_cap(algebra: &str) -> usize {
    match algebra {
        "sp2" => 6,
        "sl3" | "sp4" => 4,
        "so8" => 2,
        _ => 3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub algebra: String,
    pub max_degree: usize,
    pub seed: u64,
    pub samples_margin: f64,
    pub float_tol: f64,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
    pub suites: Vec<Suite>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algebra: "sl3".into(),
            max_degree: default_cap("sl3"),
            seed: 1,
            samples_margin: 1.25,
            float_tol: 1e-12,
            cache_dir: None,
            report_path: None,
            suites: Suite::ALL.to_vec(),
        }
    }
}

/// Raw settings before validation; every field optional so that file values
/// and command-line values can be layered.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algebra: Option<String>,
    pub max_degree: Option<usize>,
    pub seed: Option<u64>,
    pub samples_margin: Option<f64>,
    pub float_tol: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub suites: Option<String>,
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value `{value}` for `{key}`"))
}

impl Overrides {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            match key.as_str() {
                "algebra" => o.algebra = Some(value.into()),
                "max_degree" => o.max_degree = Some(value.parse().map_err(|_| bad(&key, value))?),
                "seed" => o.seed = Some(value.parse().map_err(|_| bad(&key, value))?),
                "samples_margin" => o.samples_margin = Some(value.parse().map_err(|_| bad(&key, value))?),
                "float_tol" => o.float_tol = Some(value.parse().map_err(|_| bad(&key, value))?),
                "cache_dir" => o.cache_dir = Some(value.into()),
                "report_path" => o.report_path = Some(value.into()),
                "suites" => o.suites = Some(value.into()),
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", n + 1))),
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values set in `other` win.
    pub fn layer(self, other: Overrides) -> Overrides {
        Overrides {
            algebra: other.algebra.or(self.algebra),
            max_degree: other.max_degree.or(self.max_degree),
            seed: other.seed.or(self.seed),
            samples_margin: other.samples_margin.or(self.samples_margin),
            float_tol: other.float_tol.or(self.float_tol),
            cache_dir: other.cache_dir.or(self.cache_dir),
            report_path: other.report_path.or(self.report_path),
            suites: other.suites.or(self.suites),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let algebra = self.algebra.unwrap_or(d.algebra);
        if !SUPPORTED.contains(&algebra.as_str()) {
            return Err(Error::Config(format!(
                "unsupported algebra `{algebra}` (expected one of {})",
                SUPPORTED.join(", ")
            )));
        }
        parse_algebra(&algebra)?;
        let max_degree = self.max_degree.unwrap_or_else(|| default_cap(&algebra));
        if max_degree < 1 {
            return Err(Error::Config("max_degree must be at least 1".into()));
        }
        let samples_margin = self.samples_margin.unwrap_or(d.samples_margin);
        if !(samples_margin >= 1.0 && samples_margin.is_finite()) {
            return Err(Error::Config("samples_margin must be at least 1".into()));
        }
        let float_tol = self.float_tol.unwrap_or(d.float_tol);
        if !(float_tol > 0.0 && float_tol.is_finite()) {
            return Err(Error::Config("float_tol must be positive".into()));
        }
        let suites = match self.suites {
            Some(s) => parse_suites(&s)?,
            None => d.suites,
        };
        Ok(RunConfig {
            algebra,
            max_degree,
            seed: self.seed.unwrap_or(d.seed),
            samples_margin,
            float_tol,
            cache_dir: self.cache_dir,
            report_path: self.report_path,
            suites,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse_in_dependency_order() {
        assert_eq!(parse_suites("kernel,lie,lie").unwrap(), vec![Suite::Lie, Suite::Kernel]);
        assert_eq!(parse_suites("all").unwrap().len(), 7);
        assert!(matches!(parse_suites("lie,bogus"), Err(Error::Config(_))));
    }

    #[test]
    fn file_then_overrides() {
        let file = Overrides::parse("# run\nalgebra = sp2\nmax-degree = 5\nseed=9\nsuites = moyal\n").unwrap();
        let cli = Overrides { max_degree: Some(2), ..Default::default() };
        let c = file.layer(cli).resolve().unwrap();
        assert_eq!((c.algebra.as_str(), c.max_degree, c.seed), ("sp2", 2, 9));
        assert_eq!(c.suites, vec![Suite::Moyal]);
        assert_eq!(c.samples_margin, 1.25);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Overrides::parse("colour = red").is_err());
        assert!(Overrides::parse("seed = -1").is_err());
        let zero = Overrides { max_degree: Some(0), ..Default::default() };
        assert!(zero.resolve().is_err());
        let g2 = Overrides { algebra: Some("g2".into()), ..Default::default() };
        assert!(g2.resolve().is_err());
        let defaults = Overrides { algebra: Some("sp2".into()), ..Default::default() };
        assert_eq!(defaults.resolve().unwrap().max_degree, 6);
    }
}
