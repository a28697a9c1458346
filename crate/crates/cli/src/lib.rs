//! Front end for the `hamgen` binary: argument definitions, the five
//! commands and their CSV output.

pub mod args;
pub mod commands;
pub mod table;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hamgen::effham::OrderError;
use hamgen::integrator::{ConfigError, IntegrateError};
use hamgen::lowering::{CompileError, EmitError};
use hamgen::modelfile::ModelFileError;
use hamgen::operators::ModelError;
use hamgen::oracle::OracleError;
use hamgen::scalar::DomainError;
use hamgen::symkernel::{parse_rational, BigRational};

pub use args::{Cli, Command};
pub use commands::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    ModelFile(#[from] ModelFileError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid value for {what}: {value}")]
    Value { what: &'static str, value: String },
    #[error("{0}")]
    Usage(String),
    #[error("kernel: {0}")]
    Compile(#[from] CompileError),
    #[error("{0}")]
    Emit(#[from] EmitError),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Integrate(#[from] IntegrateError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("evaluation: {0}")]
    Domain(#[from] DomainError),
    #[error("{0}")]
    Order(#[from] OrderError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// Arithmetic backend chosen on the command line: `double`, `extended`
/// (35 digits) or `extended:<digits>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    Extended(u32),
}

pub const DEFAULT_DIGITS: u32 = 35;

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "double" => Ok(Precision::Double),
            None if s == "extended" => Ok(Precision::Extended(DEFAULT_DIGITS)),
            Some(("extended", d)) => match d.parse::<u32>() {
                Ok(n) if (1..=1000).contains(&n) => Ok(Precision::Extended(n)),
                _ => Err(format!("bad digit count `{d}`")),
            },
            _ => Err(format!("expected double, extended or extended:<digits>, got `{s}`")),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::Extended(d) => write!(f, "extended:{d}"),
        }
    }
}

/// An exact number from the command line, written as an integer, a
/// decimal or a fraction (`0.1`, `1/10`, `-5/4`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub BigRational);

impl FromStr for Exact {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_rational(s.trim()).map(Exact).map_err(|_| format!("`{s}` is not a rational number"))
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_flags() {
        assert_eq!("double".parse(), Ok(Precision::Double));
        assert_eq!("extended".parse(), Ok(Precision::Extended(35)));
        assert_eq!("extended:50".parse(), Ok(Precision::Extended(50)));
        assert!("extended:0".parse::<Precision>().is_err());
        assert!("quad".parse::<Precision>().is_err());
        assert_eq!(Precision::Extended(40).to_string(), "extended:40");
    }

    #[test]
    fn exact_numbers() {
        let tenth: Exact = "0.1".parse().unwrap();
        assert_eq!(tenth, "1/10".parse().unwrap());
        assert_eq!("-5/4".parse::<Exact>().unwrap().to_string(), "-5/4");
        assert!("q".parse::<Exact>().is_err());
    }
}
