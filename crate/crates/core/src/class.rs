//! Noun-class identifiers.
//!
//! Classes are small integers (Bantu classes run 1 through the low
//! twenties). The symbolic value `unknown` is used for clusters whose
//! prefix does not map onto any inventory entry. On the wire a class is a
//! JSON integer; `unknown` is the string `"unknown"`. Parsing also accepts
//! numeric strings and `BANTU<n>` tags.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NounClass {
    Class(u16),
    /// Sorts after every numbered class.
    Unknown,
}

impl NounClass {
    pub fn id(self) -> Option<u16> {
        match self {
            NounClass::Class(id) => Some(id),
            NounClass::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, NounClass::Class(_))
    }
}

impl From<u16> for NounClass {
    fn from(id: u16) -> Self {
        NounClass::Class(id)
    }
}

impl fmt::Display for NounClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NounClass::Class(id) => write!(f, "{id}"),
            NounClass::Unknown => f.write_str("unknown"),
        }
    }
}

impl FromStr for NounClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("unknown") {
            return Ok(NounClass::Unknown);
        }
        let digits = t
            .strip_prefix("BANTU")
            .or_else(|| t.strip_prefix("bantu"))
            .unwrap_or(t);
        digits
            .parse::<u16>()
            .map(NounClass::Class)
            .map_err(|_| Error::Validation(format!("invalid noun class `{s}`")))
    }
}

impl Serialize for NounClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NounClass::Class(id) => serializer.serialize_u16(*id),
            NounClass::Unknown => serializer.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for NounClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ClassVisitor;

        impl Visitor<'_> for ClassVisitor {
            type Value = NounClass;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a noun class id or \"unknown\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NounClass, E> {
                u16::try_from(v)
                    .map(NounClass::Class)
                    .map_err(|_| E::custom(format!("noun class {v} out of range")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NounClass, E> {
                u16::try_from(v)
                    .map(NounClass::Class)
                    .map_err(|_| E::custom(format!("noun class {v} out of range")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NounClass, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }
        }

        deserializer.deserialize_any(ClassVisitor)
    }
}

/// The set of class ids an inventory or label file may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassUniverse {
    ids: BTreeSet<u16>,
}

impl ClassUniverse {
    pub fn new(ids: impl IntoIterator<Item = u16>) -> Self {
        Self {
            ids: ids.into_iter().collect(),
        }
    }

    /// Classes 1 through 23.
    pub fn bantu() -> Self {
        Self::new(1..=23)
    }

    pub fn contains(&self, class: NounClass) -> bool {
        match class {
            NounClass::Class(id) => self.ids.contains(&id),
            NounClass::Unknown => false,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = u16> + '_ {
        self.ids.iter().copied()
    }
}

impl Default for ClassUniverse {
    fn default() -> Self {
        Self::bantu()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wire_forms() {
        let parsed: Vec<NounClass> = serde_json::from_str(r#"[6, "7", "BANTU14", "unknown"]"#).unwrap();
        assert_eq!(
            parsed,
            vec![
                NounClass::Class(6),
                NounClass::Class(7),
                NounClass::Class(14),
                NounClass::Unknown
            ]
        );
        assert_eq!(serde_json::to_string(&parsed).unwrap(), r#"[6,7,14,"unknown"]"#);
    }

    #[test]
    fn rejects_garbage() {
        assert!("ma".parse::<NounClass>().is_err());
        assert!(serde_json::from_str::<NounClass>("-3").is_err());
    }

    #[test]
    fn unknown_sorts_last() {
        assert!(NounClass::Class(23) < NounClass::Unknown);
        assert!(NounClass::Class(1) < NounClass::Class(2));
    }
}
