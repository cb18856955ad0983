//! Per-iteration outputs declared by a solver.

use crate::{Error, Result, Vector};

/// Shape and element type of one declared output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Int,
    Real,
    Vector(usize),
}

/// A single output value.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputValue {
    Int(i64),
    Real(f64),
    Vector(Vec<f64>),
}

impl OutputValue {
    pub fn kind(&self) -> OutputKind {
        match self {
            OutputValue::Int(_) => OutputKind::Int,
            OutputValue::Real(_) => OutputKind::Real,
            OutputValue::Vector(v) => OutputKind::Vector(v.len()),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            OutputValue::Real(v) => Some(v),
            OutputValue::Int(v) => Some(v as f64),
            OutputValue::Vector(_) => None,
        }
    }

    pub fn as_slice(&self) -> Option<&[f64]> {
        match self {
            OutputValue::Vector(v) => Some(v),
            _ => None,
        }
    }
}

impl From<i64> for OutputValue {
    fn from(v: i64) -> Self {
        OutputValue::Int(v)
    }
}

impl From<usize> for OutputValue {
    fn from(v: usize) -> Self {
        OutputValue::Int(v as i64)
    }
}

impl From<f64> for OutputValue {
    fn from(v: f64) -> Self {
        OutputValue::Real(v)
    }
}

impl From<&Vector> for OutputValue {
    fn from(v: &Vector) -> Self {
        OutputValue::Vector(v.as_slice().to_vec())
    }
}

/// Ordered declaration of the outputs a solver provides after each
/// iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputsDecl {
    entries: Vec<(String, OutputKind)>,
}

impl OutputsDecl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, kind: OutputKind) -> Self {
        self.entries.retain(|(n, _)| n != name);
        self.entries.push((name.to_string(), kind));
        self
    }

    pub fn get(&self, name: &str) -> Option<OutputKind> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks a set of named values against the declaration and returns them
    /// in declaration order. Every declared name must be supplied exactly once.
    pub fn validate(&self, values: &[(&str, OutputValue)]) -> Result<IterEvent> {
        for (name, value) in values {
            let declared = self
                .get(name)
                .ok_or_else(|| Error::UndeclaredOutput(name.to_string()))?;
            let ok = match (declared, value) {
                (OutputKind::Int, OutputValue::Int(_)) => true,
                (OutputKind::Real, OutputValue::Real(_)) => true,
                (OutputKind::Vector(len), OutputValue::Vector(v)) => v.len() == len,
                _ => false,
            };
            if !ok {
                return Err(Error::OutputShape {
                    name: name.to_string(),
                    detail: format!("declared {declared:?}, supplied {:?}", value.kind()),
                });
            }
        }
        let mut ordered = Vec::with_capacity(self.entries.len());
        for (name, _) in &self.entries {
            let mut matches = values.iter().filter(|(n, _)| n == name);
            let value = matches.next().ok_or_else(|| Error::OutputShape {
                name: name.clone(),
                detail: "declared output missing from update".into(),
            })?;
            if matches.next().is_some() {
                return Err(Error::OutputShape {
                    name: name.clone(),
                    detail: "supplied more than once".into(),
                });
            }
            ordered.push((name.clone(), value.1.clone()));
        }
        Ok(IterEvent { values: ordered })
    }
}

/// One iteration's worth of declared outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IterEvent {
    pub values: Vec<(String, OutputValue)>,
}

impl IterEvent {
    pub fn get(&self, name: &str) -> Option<&OutputValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl() -> OutputsDecl {
        OutputsDecl::new()
            .with("itr", OutputKind::Int)
            .with("obj", OutputKind::Real)
            .with("x", OutputKind::Vector(2))
    }

    #[test]
    fn happy_path_orders_values() {
        let event = decl()
            .validate(&[
                ("x", OutputValue::Vector(vec![1.0, 1.0])),
                ("itr", 0i64.into()),
                ("obj", 1.0.into()),
            ])
            .unwrap();
        let names: Vec<_> = event.values.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["itr", "obj", "x"]);
    }

    #[test]
    fn undeclared_name_rejected() {
        let err = decl().validate(&[
            ("itr", 0i64.into()),
            ("obj", 1.0.into()),
            ("x", OutputValue::Vector(vec![1.0, 1.0])),
            ("foo", 1.0.into()),
        ]);
        assert!(matches!(err, Err(Error::UndeclaredOutput(n)) if n == "foo"));
    }

    #[test]
    fn wrong_shape_rejected() {
        let err = decl().validate(&[
            ("itr", 0i64.into()),
            ("obj", 1.0.into()),
            ("x", OutputValue::Vector(vec![1.0, 1.0, 1.0])),
        ]);
        assert!(matches!(err, Err(Error::OutputShape { .. })));
    }

    #[test]
    fn missing_name_rejected() {
        let err = decl().validate(&[("itr", 0i64.into())]);
        assert!(matches!(err, Err(Error::OutputShape { .. })));
    }
}
