//! Sectioned `key = value` configuration files.
//!
//! ```text
//! [kernel]
//! dimension = 2
//! alpha = 1.0
//! ```
//!
//! `#` starts a comment anywhere, `;` only at the start of a line. Lists are
//! comma separated; a list of points separates points with `;` and
//! coordinates with whitespace or commas.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimate::TubeSpec;
use crate::kernel::{KernelParams, Modulation};
use crate::simulate::{Domain, SimConfig};

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ini = Ini::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_start();
            let content = if trimmed.starts_with(';') {
                ""
            } else {
                raw.split('#').next().unwrap_or("").trim()
            };
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(format!("line {line}: unterminated section header"));
                };
                let name = name.trim().to_string();
                if name.is_empty() {
                    return err(format!("line {line}: empty section name"));
                }
                ini.sections.entry(name.clone()).or_default();
                section = Some(name);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return err(format!("line {line}: expected `key = value`"));
            };
            let Some(sec) = &section else {
                return err(format!("line {line}: key outside of any section"));
            };
            let key = key.trim();
            if key.is_empty() {
                return err(format!("line {line}: empty key"));
            }
            let entries = ini.sections.get_mut(sec).expect("section exists");
            if let Some(prev) = entries.get(key) {
                return err(format!("line {line}: duplicate key '{key}' (first set on line {})", prev.line));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(ini)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.entry(section, key).is_some()
    }

    pub fn get_str(&self, section: &str, key: &str) -> Result<&str> {
        match self.entry(section, key) {
            Some(e) => Ok(&e.value),
            None => err(format!("missing key '{key}' in section [{section}]")),
        }
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        let Some(e) = self.entry(section, key) else {
            return err(format!("missing key '{key}' in section [{section}]"));
        };
        e.value
            .parse()
            .map_err(|_| Error::Config(format!("line {}: cannot parse '{key}' value '{}'", e.line, e.value)))
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        if self.has(section, key) {
            self.get(section, key)
        } else {
            Ok(default)
        }
    }

    pub fn get_list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let Some(e) = self.entry(section, key) else {
            return err(format!("missing key '{key}' in section [{section}]"));
        };
        parse_numbers(&e.value).map_err(|_| Error::Config(format!("line {}: bad number list for '{key}'", e.line)))
    }

    pub fn get_points(&self, section: &str, key: &str) -> Result<Vec<Vec<f64>>> {
        let Some(e) = self.entry(section, key) else {
            return err(format!("missing key '{key}' in section [{section}]"));
        };
        e.value
            .split(';')
            .map(parse_numbers)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("line {}: bad point list for '{key}'", e.line)))
    }

    /// Wraps a semantic error with the line of the offending key.
    pub fn at(&self, section: &str, key: &str, e: Error) -> Error {
        let msg = match e {
            Error::Config(m) | Error::Parameter(m) | Error::Precondition(m) => m,
            other => other.to_string(),
        };
        match self.entry(section, key) {
            Some(entry) => Error::Config(format!("line {}: {msg}", entry.line)),
            None => Error::Config(msg),
        }
    }
}

fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split([',', ' ', '\t'])
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// A parsed configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ini: Ini,
    pub kernel: KernelParams,
    pub eps_min: f64,
    pub t_max: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::parse(text)?;
        let dim: usize = ini.get("kernel", "dimension")?;
        let alpha: f64 = ini.get("kernel", "alpha")?;
        let kappa1: f64 = ini.get("kernel", "kappa1")?;
        let kappa2: f64 = ini.get("kernel", "kappa2")?;
        let modulation = Modulation::from_name(ini.get_str("kernel", "modulation")?)
            .map_err(|e| ini.at("kernel", "modulation", e))?;
        let kernel =
            KernelParams::new(dim, alpha, kappa1, kappa2, modulation).map_err(|e| ini.at("kernel", "alpha", e))?;
        let eps_min: f64 = ini.get("sim", "eps_min")?;
        let t_max: f64 = ini.get("sim", "t_max")?;
        SimConfig::new(eps_min, t_max).map_err(|e| ini.at("sim", "eps_min", e))?;
        let seed: u64 = ini.get_or("sim", "seed", 0)?;
        Ok(RunConfig {
            ini,
            kernel,
            eps_min,
            t_max,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn point(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let p = self.ini.get_list(section, key)?;
        if p.len() != self.dim() {
            return Err(self.ini.at(
                section,
                key,
                Error::Config(format!("'{key}' has {} coordinates, expected {}", p.len(), self.dim())),
            ));
        }
        Ok(p)
    }

    /// Point `key` or the origin when absent.
    pub fn point_or_origin(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        if self.ini.has(section, key) {
            self.point(section, key)
        } else {
            Ok(vec![0.0; self.dim()])
        }
    }

    /// Domain described by `{prefix}` (`ball`, `cube` or `none`),
    /// `{prefix}_center` and `{prefix}_size` (radius or side).
    pub fn domain(&self, section: &str, prefix: &str) -> Result<Option<Domain>> {
        if !self.ini.has(section, prefix) {
            return Ok(None);
        }
        let kind = self.ini.get_str(section, prefix)?;
        if kind == "none" {
            return Ok(None);
        }
        let center = self.point_or_origin(section, &format!("{prefix}_center"))?;
        let size_key = format!("{prefix}_size");
        let size: f64 = self.ini.get(section, &size_key)?;
        let dom = match kind {
            "ball" => Domain::ball(center, size),
            "cube" => Domain::cube(center, size),
            other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
        };
        dom.map(Some).map_err(|e| self.ini.at(section, &size_key, e))
    }

    pub fn required_domain(&self, section: &str, prefix: &str) -> Result<Domain> {
        self.domain(section, prefix)?
            .ok_or_else(|| Error::Config(format!("missing key '{prefix}' in section [{section}]")))
    }

    /// Tube from `tube_times`, `tube_points` and `tube_epsilon`.
    pub fn tube(&self, section: &str) -> Result<TubeSpec> {
        let times = self.ini.get_list(section, "tube_times")?;
        let points = self.ini.get_points(section, "tube_points")?;
        let eps: f64 = self.ini.get(section, "tube_epsilon")?;
        if times.len() != points.len() {
            return Err(self.ini.at(
                section,
                "tube_points",
                Error::Config("tube_times and tube_points differ in length".into()),
            ));
        }
        TubeSpec::new(times.into_iter().zip(points).collect(), eps).map_err(|e| self.ini.at(section, "tube_times", e))
    }
}
