//! The persisted form of an invocation.
//!
//! A `RunConfig` is written into every JSON output under `config` and can be
//! read back with `--from-json` (from a saved output or a bare config) or
//! `--config` (TOML). Explicit command-line flags override loaded values.

use std::fmt;
use std::path::Path;

use qcspectra::bounds::Beta;
use qcspectra::discquad::QuadratureSpec;
use qcspectra::eigsolver::EigenOptions;
use qcspectra::MapDescriptor;
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Catalog,
    Bound,
    Quasidisc,
    Norm,
    Eigen,
    Verify,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommandKind::Catalog => "catalog",
            CommandKind::Bound => "bound",
            CommandKind::Quasidisc => "quasidisc",
            CommandKind::Norm => "norm",
            CommandKind::Eigen => "eigen",
            CommandKind::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Base name of the emitted files; the subcommand name when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub csv: bool,
    pub svg: bool,
    /// Mesh and eigenfunction text exports (`eigen`, `verify`).
    pub mesh: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, deserialize_with = "domain_record", skip_serializing_if = "Option::is_none")]
    pub domain: Option<MapDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Beta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_rings")]
    pub rings: usize,
    #[serde(default)]
    pub eigen: EigenOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_rings() -> usize {
    64
}

/// Accepts a map either as a table/object or as a `kind:key=value,...` string.
fn domain_record<'de, D: Deserializer<'de>>(d: D) -> Result<Option<MapDescriptor>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Record(MapDescriptor),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Record(m)) => Ok(Some(m)),
        Some(Raw::Text(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            domain: None,
            p: None,
            beta: None,
            variant: None,
            k: None,
            area: None,
            quadrature: QuadratureSpec::default(),
            rings: default_rings(),
            eigen: EigenOptions::default(),
            output: OutputSpec::default(),
        }
    }

    /// Reads a saved JSON output (using its `config` member) or a bare
    /// JSON config.
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let config = match value.get("config") {
            Some(c) => c.clone(),
            None => value,
        };
        serde_json::from_value(config).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), one_line(&e.to_string()))))
    }

    pub fn base_name(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.command.to_string())
    }

    pub fn require_domain(&self) -> Result<&MapDescriptor, CliError> {
        self.domain
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("{} needs --domain", self.command)))
    }

    pub fn require_p(&self) -> Result<f64, CliError> {
        self.p.ok_or_else(|| CliError::usage(format!("{} needs --p", self.command)))
    }

    /// Range checks that do not depend on any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.quadrature.validate().map_err(CliError::from)?;
        let p_bound = |p: f64| {
            if p > 2.0 && p.is_finite() {
                Ok(())
            } else {
                Err(CliError::usage(format!("{} needs p > 2, got {p}", self.command)))
            }
        };
        match self.command {
            CommandKind::Catalog => {}
            CommandKind::Bound | CommandKind::Quasidisc => p_bound(self.require_p()?)?,
            CommandKind::Verify => p_bound(self.require_p()?)?,
            CommandKind::Eigen => {
                let p = self.require_p()?;
                if !(p >= 2.0 && p.is_finite()) {
                    return Err(CliError::usage(format!("eigen needs p >= 2, got {p}")));
                }
            }
            CommandKind::Norm => {
                if self.beta.is_none() {
                    return Err(CliError::usage("norm needs --beta"));
                }
            }
        }
        if matches!(self.command, CommandKind::Bound | CommandKind::Norm | CommandKind::Eigen | CommandKind::Verify) {
            self.require_domain()?;
        }
        if let Some(Beta::Finite(b)) = self.beta {
            if !(b >= 1.0 && b.is_finite()) {
                return Err(CliError::usage(format!("beta must be >= 1 or inf, got {b}")));
            }
        }
        if let Some(k) = self.k {
            if !(k >= 1.0 && k.is_finite()) {
                return Err(CliError::usage(format!("K must be finite and >= 1, got {k}")));
            }
        }
        if matches!(self.command, CommandKind::Eigen | CommandKind::Verify) {
            if self.rings == 0 {
                return Err(CliError::usage("rings must be >= 1"));
            }
            if !(self.eigen.tolerance > 0.0) || self.eigen.starts == 0 {
                return Err(CliError::usage("tol must be > 0 and starts >= 1"));
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_accepts_text_and_table_domains() {
        let a: RunConfig = toml::from_str(
            r#"
command = "verify"
domain = "ellipse-shear:a=0.5"
p = 3.0
rings = 16
"#,
        )
        .unwrap();
        let b: RunConfig = toml::from_str(
            r#"
command = "verify"
p = 3.0
rings = 16

[domain]
kind = "ellipse-shear"
a = 0.5
"#,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eigen, EigenOptions::default());
        assert!(a.validate().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::new(CommandKind::Bound);
        c.domain = Some(MapDescriptor::rose_petal());
        c.p = Some(3.0);
        c.beta = Some(Beta::Infinite);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        let toml_text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&toml_text).unwrap(), c);
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(CommandKind::Eigen);
        assert!(c.validate().is_err());
        c.p = Some(2.0);
        assert!(c.validate().is_err());
        c.domain = Some(MapDescriptor::identity());
        assert!(c.validate().is_ok());
        c.command = CommandKind::Verify;
        assert!(c.validate().is_err());
        assert!(toml::from_str::<RunConfig>("command = \"bound\"\nbogus = 1\n").is_err());
    }
}
