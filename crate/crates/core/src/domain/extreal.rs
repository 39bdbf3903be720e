//! Serde helpers for reals that may be infinite. JSON has no infinity
//! literal, so `"inf"`, `"+inf"` and `"-inf"` strings are accepted and
//! emitted in place of non-finite values.

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use std::fmt;

pub fn parse(s: &str) -> Option<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

pub mod ext_real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\"")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse(v).ok_or_else(|| E::custom(format!("cannot parse `{v}` as a real number")))
    }
}

pub(crate) struct Pair;

impl Pair {
    pub(crate) fn serialize<S: Serializer>(a: f64, b: f64, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        struct W(f64);
        impl serde::Serialize for W {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                ext_real::serialize(&self.0, s)
            }
        }
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&W(a))?;
        t.serialize_element(&W(b))?;
        t.end()
    }

    pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        #[derive(serde::Deserialize)]
        struct W(#[serde(with = "ext_real")] f64);
        let (a, b): (W, W) = serde::Deserialize::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
    struct Holder(#[serde(with = "ext_real")] f64);

    #[test]
    fn infinity_round_trips_through_strings() {
        let s = serde_json::to_string(&Holder(f64::INFINITY)).unwrap();
        assert_eq!(s, "\"inf\"");
        let back: Holder = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, f64::INFINITY);
        let neg: Holder = serde_json::from_str("\"-inf\"").unwrap();
        assert_eq!(neg.0, f64::NEG_INFINITY);
        let num: Holder = serde_json::from_str("2.5").unwrap();
        assert_eq!(num.0, 2.5);
        assert!(serde_json::from_str::<Holder>("\"abc\"").is_err());
    }
}
