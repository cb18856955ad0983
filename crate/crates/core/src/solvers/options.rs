//! Declared, type-checked solver options.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum OptionValue {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl OptionValue {
    fn type_name(&self) -> &'static str {
        match self {
            OptionValue::Int(_) => "integer",
            OptionValue::Real(_) => "real",
            OptionValue::Bool(_) => "bool",
            OptionValue::Text(_) => "text",
        }
    }
}

impl fmt::Display for OptionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionValue::Int(v) => write!(f, "{v}"),
            OptionValue::Real(v) => write!(f, "{v:?}"),
            OptionValue::Bool(v) => write!(f, "{v}"),
            OptionValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<i64> for OptionValue {
    fn from(v: i64) -> Self {
        OptionValue::Int(v)
    }
}

impl From<i32> for OptionValue {
    fn from(v: i32) -> Self {
        OptionValue::Int(v.into())
    }
}

impl From<usize> for OptionValue {
    fn from(v: usize) -> Self {
        OptionValue::Int(v as i64)
    }
}

impl From<f64> for OptionValue {
    fn from(v: f64) -> Self {
        OptionValue::Real(v)
    }
}

impl From<bool> for OptionValue {
    fn from(v: bool) -> Self {
        OptionValue::Bool(v)
    }
}

impl From<&str> for OptionValue {
    fn from(v: &str) -> Self {
        OptionValue::Text(v.to_string())
    }
}

/// Constraint on the values an option accepts, beyond its type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    None,
    Positive,
    NonNegative,
    OneOf(&'static [&'static str]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionDecl {
    pub name: &'static str,
    pub default: OptionValue,
    pub help: &'static str,
    pub check: Check,
}

impl OptionDecl {
    pub fn new(name: &'static str, default: impl Into<OptionValue>, help: &'static str) -> Self {
        Self {
            name,
            default: default.into(),
            help,
            check: Check::None,
        }
    }

    pub fn positive(mut self) -> Self {
        self.check = Check::Positive;
        self
    }

    pub fn non_negative(mut self) -> Self {
        self.check = Check::NonNegative;
        self
    }

    pub fn one_of(mut self, choices: &'static [&'static str]) -> Self {
        self.check = Check::OneOf(choices);
        self
    }
}

/// Option values for one solver. Only declared names may be set, and every
/// value must match the declared type (integers are accepted for reals).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    solver: &'static str,
    decls: Vec<OptionDecl>,
    values: Vec<OptionValue>,
}

impl SolverOptions {
    pub fn new(solver: &'static str, decls: Vec<OptionDecl>) -> Self {
        let values = decls.iter().map(|d| d.default.clone()).collect();
        Self { solver, decls, values }
    }

    /// Name of the solver these options were declared for.
    pub fn solver(&self) -> &'static str {
        self.solver
    }

    pub fn decls(&self) -> &[OptionDecl] {
        &self.decls
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.decls.iter().any(|d| d.name == name)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.decls
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownOption {
                name: name.to_string(),
                valid: self.decls.iter().map(|d| d.name).collect::<Vec<_>>().join(", "),
            })
    }

    pub fn set(&mut self, name: &str, value: impl Into<OptionValue>) -> Result<()> {
        let i = self.index(name)?;
        let decl = &self.decls[i];
        let value = match (&decl.default, value.into()) {
            (OptionValue::Real(_), OptionValue::Int(v)) => OptionValue::Real(v as f64),
            (d, v) if std::mem::discriminant(d) == std::mem::discriminant(&v) => v,
            (d, v) => {
                return Err(Error::OptionType {
                    name: name.to_string(),
                    expected: d.type_name(),
                    got: v.to_string(),
                })
            }
        };
        let ok = match (decl.check, &value) {
            (Check::None, OptionValue::Real(v)) => !v.is_nan(),
            (Check::None, _) => true,
            (Check::Positive, OptionValue::Int(v)) => *v > 0,
            (Check::Positive, OptionValue::Real(v)) => *v > 0.0 && v.is_finite(),
            (Check::NonNegative, OptionValue::Int(v)) => *v >= 0,
            (Check::NonNegative, OptionValue::Real(v)) => *v >= 0.0 && v.is_finite(),
            (Check::OneOf(c), OptionValue::Text(t)) => c.contains(&t.as_str()),
            _ => true,
        };
        if !ok {
            let expected = match decl.check {
                Check::Positive => "positive value",
                Check::NonNegative => "nonnegative value",
                Check::OneOf(_) => "one of the declared choices",
                Check::None => "number",
            };
            return Err(Error::OptionType {
                name: name.to_string(),
                expected,
                got: value.to_string(),
            });
        }
        self.values[i] = value;
        Ok(())
    }

    /// Builder form of [`set`](Self::set).
    pub fn with(mut self, name: &str, value: impl Into<OptionValue>) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    /// Sets an option from text, parsed according to its declared type.
    pub fn set_str(&mut self, name: &str, text: &str) -> Result<()> {
        let i = self.index(name)?;
        let bad = |expected| Error::OptionType {
            name: name.to_string(),
            expected,
            got: text.to_string(),
        };
        let value = match self.decls[i].default {
            OptionValue::Int(_) => OptionValue::Int(text.trim().parse().map_err(|_| bad("integer"))?),
            OptionValue::Real(_) => OptionValue::Real(text.trim().parse().map_err(|_| bad("real"))?),
            OptionValue::Bool(_) => OptionValue::Bool(match text.trim() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => return Err(bad("bool")),
            }),
            OptionValue::Text(_) => OptionValue::Text(text.to_string()),
        };
        self.set(name, value)
    }

    /// Parses and applies a `name=value` assignment.
    pub fn parse_assignment(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment.split_once('=').ok_or_else(|| Error::OptionType {
            name: assignment.to_string(),
            expected: "name=value",
            got: assignment.to_string(),
        })?;
        self.set_str(name.trim(), value)
    }

    pub fn get(&self, name: &str) -> Option<&OptionValue> {
        self.decls.iter().position(|d| d.name == name).map(|i| &self.values[i])
    }

    fn expect(&self, name: &str) -> &OptionValue {
        self.get(name)
            .unwrap_or_else(|| panic!("option `{name}` is not declared for {}", self.solver))
    }

    pub fn int(&self, name: &str) -> i64 {
        match self.expect(name) {
            OptionValue::Int(v) => *v,
            other => panic!("option `{name}` is {other:?}, not an integer"),
        }
    }

    /// Integer option as a count; negative values clamp to zero.
    pub fn count(&self, name: &str) -> usize {
        self.int(name).max(0) as usize
    }

    pub fn real(&self, name: &str) -> f64 {
        match self.expect(name) {
            OptionValue::Real(v) => *v,
            OptionValue::Int(v) => *v as f64,
            other => panic!("option `{name}` is {other:?}, not a real"),
        }
    }

    pub fn bool(&self, name: &str) -> bool {
        match self.expect(name) {
            OptionValue::Bool(v) => *v,
            other => panic!("option `{name}` is {other:?}, not a bool"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.expect(name) {
            OptionValue::Text(v) => v,
            other => panic!("option `{name}` is {other:?}, not text"),
        }
    }

    /// `(name, value)` pairs in declaration order, as written to records.
    pub fn as_strings(&self) -> Vec<(String, String)> {
        self.decls
            .iter()
            .zip(&self.values)
            .map(|(d, v)| (d.name.to_string(), v.to_string()))
            .collect()
    }
}

impl fmt::Display for SolverOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, v) in self.decls.iter().zip(&self.values) {
            writeln!(f, "{:<16} {:<12} {}", d.name, v.to_string(), d.help)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::new(
            "demo",
            vec![
                OptionDecl::new("maxiter", 500, "iteration limit").positive(),
                OptionDecl::new("opt_tol", 1e-6, "tolerance").positive(),
                OptionDecl::new("use_line_search", true, "line search"),
                OptionDecl::new("variant", "bfgs", "update").one_of(&["bfgs", "sr1"]),
            ],
        )
    }

    #[test]
    fn defaults_and_overrides() {
        let mut o = opts();
        assert_eq!(o.int("maxiter"), 500);
        o.set("opt_tol", 1e-8).unwrap();
        o.set("opt_tol", 2).unwrap();
        assert_eq!(o.real("opt_tol"), 2.0);
        o.parse_assignment("variant=sr1").unwrap();
        assert_eq!(o.text("variant"), "sr1");
        o.parse_assignment("use_line_search=false").unwrap();
        assert!(!o.bool("use_line_search"));
    }

    #[test]
    fn unknown_name_lists_valid_options() {
        match opts().set("nosuch", 1) {
            Err(Error::UnknownOption { valid, .. }) => assert!(valid.contains("maxiter")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_and_range_errors() {
        let mut o = opts();
        assert!(matches!(o.set("maxiter", 1.5), Err(Error::OptionType { .. })));
        assert!(o.set("maxiter", 0).is_err());
        assert!(o.set("opt_tol", -1.0).is_err());
        assert!(o.set("variant", "dfp").is_err());
        assert!(o.set_str("maxiter", "ten").is_err());
        assert!(o.parse_assignment("maxiter").is_err());
    }

    #[test]
    fn integer_option_displays_plainly() {
        let o = opts();
        assert_eq!(o.as_strings()[0], ("maxiter".to_string(), "500".to_string()));
        assert_eq!(o.as_strings()[1].1, "1e-6");
    }
}
