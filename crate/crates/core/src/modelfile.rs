//! Line-oriented model definitions.
//!
//! ```text
//! # vibrating beam
//! name beam
//! coords q
//! momenta p
//! potential = -q^2/2 + q^4/4
//! ```
//!
//! `params` is optional. Everything after `#` on a line is ignored.

use std::path::Path;

use crate::operators::{ModelError, ModelSpec};

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` entry")]
    Missing(&'static str),
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Default)]
struct Fields {
    name: Option<String>,
    coords: Option<Vec<String>>,
    momenta: Option<Vec<String>>,
    params: Option<Vec<String>>,
    potential: Option<(usize, String)>,
}

fn set<T>(slot: &mut Option<T>, value: T, key: &str, line: usize) -> Result<(), ModelFileError> {
    if slot.is_some() {
        return Err(ModelFileError::Syntax {
            line,
            msg: format!("`{key}` given twice"),
        });
    }
    *slot = Some(value);
    Ok(())
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Parses model-file text into a validated model.
pub fn parse_model_file(text: &str) -> Result<ModelSpec, ModelFileError> {
    let mut f = Fields::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(|c: char| c.is_whitespace() || c == '=')
            .unwrap_or((content, ""));
        let words = || rest.split_whitespace().map(str::to_string).collect::<Vec<_>>();
        match key {
            "name" => {
                let w = words();
                if w.len() != 1 {
                    return Err(ModelFileError::Syntax {
                        line,
                        msg: "`name` takes exactly one identifier".into(),
                    });
                }
                set(&mut f.name, w[0].clone(), key, line)?;
            }
            "coords" => set(&mut f.coords, words(), key, line)?,
            "momenta" => set(&mut f.momenta, words(), key, line)?,
            "params" => set(&mut f.params, words(), key, line)?,
            "potential" => {
                let expr = rest.trim_start();
                let Some(expr) = expr.strip_prefix('=') else {
                    return Err(ModelFileError::Syntax {
                        line,
                        msg: "expected `potential = <expression>`".into(),
                    });
                };
                set(&mut f.potential, (line, expr.trim().to_string()), key, line)?;
            }
            other => {
                return Err(ModelFileError::Syntax {
                    line,
                    msg: format!("unknown entry `{other}`"),
                })
            }
        }
    }
    let name = f.name.ok_or(ModelFileError::Missing("name"))?;
    let coords = f.coords.ok_or(ModelFileError::Missing("coords"))?;
    let momenta = f.momenta.ok_or(ModelFileError::Missing("momenta"))?;
    let params = f.params.unwrap_or_default();
    let (line, potential) = f.potential.ok_or(ModelFileError::Missing("potential"))?;
    ModelSpec::parse(&name, &refs(&coords), &refs(&momenta), &refs(&params), &potential)
        .map_err(|source| ModelFileError::Model { line, source })
}

pub fn read_model_file(path: &Path) -> Result<ModelSpec, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model_file(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let m = parse_model_file(
            "# anharmonic family\nname anharmonic\ncoords q\nmomenta p\nparams alpha  # one\npotential = alpha*q^2/2 + q^4/4\n",
        )
        .unwrap();
        assert_eq!(m.name(), "anharmonic");
        assert_eq!(m.symbols().params().len(), 1);
        assert_eq!(m.potential().to_string(), "1/2*alpha*q^2 + 1/4*q^4");
    }

    #[test]
    fn reports_problems() {
        let missing = parse_model_file("name m\ncoords q\nmomenta p\n");
        assert!(matches!(missing, Err(ModelFileError::Missing("potential"))));
        let dup = parse_model_file("name m\nname n\n");
        assert!(matches!(dup, Err(ModelFileError::Syntax { line: 2, .. })));
        let unknown = parse_model_file("nome m\n");
        assert!(matches!(unknown, Err(ModelFileError::Syntax { line: 1, .. })));
        let bad = parse_model_file("name m\ncoords q\nmomenta p\n\npotential = q^\n");
        assert!(matches!(bad, Err(ModelFileError::Model { line: 5, .. })));
        let arity = parse_model_file("name m\ncoords q r\nmomenta p\npotential = q\n");
        assert!(matches!(arity, Err(ModelFileError::Model { .. })));
    }
}
