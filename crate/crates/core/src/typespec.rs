//! Named data types and their value domains.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataTypeDomain {
    Int,
    String,
    Bool,
    Enum { values: Vec<String> },
}

impl DataTypeDomain {
    pub fn enumeration(values: &[&str]) -> Self {
        DataTypeDomain::Enum {
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn is_enumerable(&self) -> bool {
        matches!(self, DataTypeDomain::Bool | DataTypeDomain::Enum { .. })
    }
}

/// A raw value before it is checked against a type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Int(i64),
    Text(String),
    Bool(bool),
    Enum(String),
}

impl From<i64> for Payload {
    fn from(v: i64) -> Self {
        Payload::Int(v)
    }
}

impl From<&str> for Payload {
    fn from(v: &str) -> Self {
        Payload::Text(v.to_string())
    }
}

impl From<String> for Payload {
    fn from(v: String) -> Self {
        Payload::Text(v)
    }
}

impl From<bool> for Payload {
    fn from(v: bool) -> Self {
        Payload::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    type_name: String,
    payload: Payload,
}

impl Value {
    pub fn type_name(&self) -> &str {
        &self.type_name
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.payload {
            Payload::Int(i) => serde_json::Value::from(*i),
            Payload::Text(s) | Payload::Enum(s) => serde_json::Value::from(s.as_str()),
            Payload::Bool(b) => serde_json::Value::from(*b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Int(i) => write!(f, "{i}"),
            Payload::Text(s) | Payload::Enum(s) => f.write_str(s),
            Payload::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeSpec {
    types: BTreeMap<String, DataTypeDomain>,
}

impl TypeSpec {
    pub fn new<I, S>(types: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, DataTypeDomain)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, domain) in types {
            let name = name.into();
            if map.insert(name.clone(), domain).is_some() {
                return Err(Error::InvalidTypeSpec(format!("duplicate type `{name}`")));
            }
        }
        let spec = TypeSpec { types: map };
        spec.validate()?;
        Ok(spec)
    }

    /// Int `Z`, string `Str` and `Bool`, the types used throughout the worked examples.
    pub fn standard() -> Self {
        TypeSpec::new([
            ("Z", DataTypeDomain::Int),
            ("Str", DataTypeDomain::String),
            ("Bool", DataTypeDomain::Bool),
        ])
        .expect("standard spec is valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, domain) in &self.types {
            if name.is_empty() {
                return Err(Error::InvalidTypeSpec("empty type name".into()));
            }
            if let DataTypeDomain::Enum { values } = domain {
                if values.is_empty() {
                    return Err(Error::InvalidTypeSpec(format!("enum `{name}` has no literals")));
                }
                for (i, v) in values.iter().enumerate() {
                    if values[..i].contains(v) {
                        return Err(Error::InvalidTypeSpec(format!(
                            "enum `{name}` repeats literal `{v}`"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn types(&self) -> impl Iterator<Item = (&str, &DataTypeDomain)> {
        self.types.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn contains(&self, type_name: &str) -> bool {
        self.types.contains_key(type_name)
    }

    pub fn domain(&self, type_name: &str) -> Result<&DataTypeDomain> {
        self.types
            .get(type_name)
            .ok_or_else(|| Error::UnknownType(type_name.to_string()))
    }

    pub fn is_enumerable(&self, type_name: &str) -> Result<bool> {
        Ok(self.domain(type_name)?.is_enumerable())
    }

    pub fn check_member(&self, type_name: &str, payload: &Payload) -> Result<bool> {
        Ok(match (self.domain(type_name)?, payload) {
            (DataTypeDomain::Int, Payload::Int(_)) => true,
            (DataTypeDomain::String, Payload::Text(_)) => true,
            (DataTypeDomain::Bool, Payload::Bool(_)) => true,
            (DataTypeDomain::Enum { values }, Payload::Enum(l) | Payload::Text(l)) => {
                values.contains(l)
            }
            _ => false,
        })
    }

    /// Checks membership and normalizes the payload (text naming an enum literal becomes that literal).
    pub fn value(&self, type_name: &str, payload: impl Into<Payload>) -> Result<Value> {
        let payload = payload.into();
        if !self.check_member(type_name, &payload)? {
            return Err(Error::TypeMismatch {
                position: 0,
                type_name: type_name.to_string(),
            });
        }
        let payload = match (self.domain(type_name)?, payload) {
            (DataTypeDomain::Enum { .. }, Payload::Text(l)) => Payload::Enum(l),
            (_, p) => p,
        };
        Ok(Value {
            type_name: type_name.to_string(),
            payload,
        })
    }

    pub fn parse_value(&self, type_name: &str, text: &str) -> Result<Value> {
        let bad = || Error::Parse {
            type_name: type_name.to_string(),
            text: text.to_string(),
        };
        let payload = match self.domain(type_name)? {
            DataTypeDomain::Int => Payload::Int(text.trim().parse().map_err(|_| bad())?),
            DataTypeDomain::String => Payload::Text(text.to_string()),
            DataTypeDomain::Bool => match text {
                "true" => Payload::Bool(true),
                "false" => Payload::Bool(false),
                _ => return Err(bad()),
            },
            DataTypeDomain::Enum { values } => {
                if !values.iter().any(|v| v == text) {
                    return Err(bad());
                }
                Payload::Enum(text.to_string())
            }
        };
        Ok(Value {
            type_name: type_name.to_string(),
            payload,
        })
    }

    pub fn enumerate_domain(&self, type_name: &str) -> Result<Vec<Value>> {
        let payloads = match self.domain(type_name)? {
            DataTypeDomain::Bool => vec![Payload::Bool(false), Payload::Bool(true)],
            DataTypeDomain::Enum { values } => values.iter().cloned().map(Payload::Enum).collect(),
            _ => return Err(Error::NotEnumerable(type_name.to_string())),
        };
        Ok(payloads
            .into_iter()
            .map(|payload| Value {
                type_name: type_name.to_string(),
                payload,
            })
            .collect())
    }

    pub fn value_from_json(&self, type_name: &str, json: &serde_json::Value) -> Result<Value> {
        let payload = match (self.domain(type_name)?, json) {
            (DataTypeDomain::Int, serde_json::Value::Number(n)) => Payload::Int(
                n.as_i64()
                    .ok_or_else(|| Error::Format(format!("{n} is not a 64-bit integer")))?,
            ),
            (DataTypeDomain::Bool, serde_json::Value::Bool(b)) => Payload::Bool(*b),
            (_, serde_json::Value::String(s)) => Payload::Text(s.clone()),
            _ => {
                return Err(Error::Format(format!(
                    "{json} is not a value of type `{type_name}`"
                )))
            }
        };
        self.value(type_name, payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TypeSpec {
        TypeSpec::new([
            ("Z", DataTypeDomain::Int),
            ("Str", DataTypeDomain::String),
            ("Strings", DataTypeDomain::String),
            ("Bool", DataTypeDomain::Bool),
            ("parity", DataTypeDomain::enumeration(&["even", "odd"])),
        ])
        .unwrap()
    }

    #[test]
    fn membership() {
        let s = spec();
        assert!(s.check_member("Z", &Payload::Int(5)).unwrap());
        assert!(s.check_member("parity", &"even".into()).unwrap());
        assert!(!s.check_member("parity", &"three".into()).unwrap());
        assert!(!s.check_member("Strings", &Payload::Int(5)).unwrap());
        assert!(matches!(
            s.check_member("Nope", &Payload::Int(1)),
            Err(Error::UnknownType(_))
        ));
    }

    #[test]
    fn parsing() {
        let s = spec();
        assert_eq!(s.parse_value("Z", "1961").unwrap(), s.value("Z", 1961).unwrap());
        assert_eq!(s.parse_value("Str", "Obama").unwrap().to_string(), "Obama");
        assert!(matches!(s.parse_value("Bool", "maybe"), Err(Error::Parse { .. })));
        for text in ["-4", "0", "123"] {
            assert_eq!(s.parse_value("Z", text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn enumeration() {
        let s = spec();
        let b: Vec<String> = s.enumerate_domain("Bool").unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(b, ["false", "true"]);
        let p: Vec<String> = s.enumerate_domain("parity").unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(p, ["even", "odd"]);
        assert!(matches!(s.enumerate_domain("Z"), Err(Error::NotEnumerable(_))));
        for name in ["Bool", "parity"] {
            for v in s.enumerate_domain(name).unwrap() {
                assert!(s.check_member(name, v.payload()).unwrap());
            }
        }
    }

    #[test]
    fn values_of_different_types_differ() {
        let s = spec();
        assert_ne!(s.value("Str", "a").unwrap(), s.value("Strings", "a").unwrap());
    }

    #[test]
    fn rejects_bad_enums() {
        assert!(TypeSpec::new([("e", DataTypeDomain::Enum { values: vec![] })]).is_err());
        assert!(TypeSpec::new([("e", DataTypeDomain::enumeration(&["a", "a"]))]).is_err());
    }
}
