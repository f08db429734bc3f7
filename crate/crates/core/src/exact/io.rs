//! Text encodings of rationals for JSON records: `"p/q"` strings.

use serde::{Deserialize, Deserializer, Serializer};

use crate::scalar::{parse_rational, Rational};

pub fn rat_to_string(q: &Rational) -> String {
    q.to_string()
}

pub fn rat_from_str(s: &str) -> crate::error::Result<Rational> {
    parse_rational(s)
}

/// `#[serde(with = "rational_str")]` for a single rational field.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rational_vec")]` for a list of rationals.
pub mod rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&rat_to_string(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| rat_from_str(s).map_err(serde::de::Error::custom)).collect()
    }
}
