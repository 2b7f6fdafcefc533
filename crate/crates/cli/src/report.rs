use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use seqcontract::{Normalized, Rational};

/// Hex SHA-256 of a canonical JSON text.
pub fn digest(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A flat JSON object whose keys serialize in sorted order, so equal inputs
/// give byte-identical output.
pub struct Report(Map<String, Value>);

impl Report {
    pub fn new(instance_digest: String) -> Self {
        let mut map = Map::new();
        map.insert("instance_digest".into(), Value::String(instance_digest));
        Report(map)
    }

    /// Keyed by the normalized instance, so documents that differ only in
    /// outcome order or number spelling share a digest.
    pub fn for_instance(norm: &Normalized) -> Self {
        Report::new(digest(&norm.instance.to_json()))
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.0.insert(key.into(), serde_json::to_value(value).expect("report values serialize"));
    }

    pub fn finish(self) -> Value {
        Value::Object(self.0)
    }
}

/// Rewrite every fractional rational string `"p/q"` as `"p/q ≈ decimal"`.
pub fn approximate(v: &mut Value) {
    match v {
        Value::String(s) if s.contains('/') => {
            if let Ok(r) = s.parse::<Rational>() {
                *s = format!("{s} ≈ {:.6}", r.to_f64());
            }
        }
        Value::Array(items) => items.iter_mut().for_each(approximate),
        Value::Object(map) => map.values_mut().for_each(approximate),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_is_sha256() {
        assert_eq!(digest("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn approximation_leaves_integers_and_names() {
        let mut v = json!({"a": "1/3", "b": ["2", "x/y", 4]});
        approximate(&mut v);
        assert_eq!(v, json!({"a": "1/3 ≈ 0.333333", "b": ["2", "x/y", 4]}));
    }
}
