//! Flag values, the JSON config-file layer and output provenance.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::Failure;

/// A real number written as a decimal or an exact fraction like `7/32`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let v = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
                let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
                if den == 0.0 {
                    return Err(format!("zero denominator in `{s}`"));
                }
                num / den
            }
            None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
        };
        if !v.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Real(v))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

/// Fills every unset field of `$dst` from `$src`.
macro_rules! merge_fields {
    ($dst:expr, $src:expr, $($f:ident),+ $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.take(); } )+
    };
}
pub(crate) use merge_fields;

/// Parsed config file. Keys mirror the long flag names with `_` for `-`.
pub struct ConfigFile {
    value: serde_json::Value,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let value = match path {
            None => serde_json::Value::Object(Default::default()),
            Some(p) => {
                let text = read_text(p)?;
                let v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
                if !v.is_object() {
                    return Err(Failure::Validation(format!("{}: expected a JSON object", p.display())));
                }
                v
            }
        };
        Ok(Self { value })
    }

    pub fn seed(&self) -> Result<Option<u64>, Failure> {
        match self.value.get("seed") {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| Failure::Validation("config `seed` must be a nonnegative integer".into())),
        }
    }

    /// Deserializes the file into a subcommand's option set; `seed` and
    /// `config` are handled globally and skipped here.
    pub fn options<T: for<'de> Deserialize<'de> + Default>(&self) -> Result<T, Failure> {
        let mut map = self.value.as_object().cloned().unwrap_or_default();
        map.remove("seed");
        map.remove("config");
        serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Failure::Validation(format!("config file: {e}")))
    }
}

/// `flag > config file > GEP_SEED > 0`.
pub fn resolve_seed(flag: Option<u64>, file: &ConfigFile) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file.seed()? {
        return Ok(s);
    }
    match std::env::var("GEP_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Validation(format!("GEP_SEED=`{v}` is not an integer"))),
        Err(_) => Ok(0),
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Version, seed and a hash of the resolved configuration. The hash covers
/// every parameter that can change results (including input file contents)
/// and nothing that cannot (output paths, thread count).
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, resolved: &serde_json::Value) -> Self {
        let canonical = serde_json::json!({ "command": command, "seed": seed, "config": resolved });
        Self {
            seed,
            config_hash: sha256_hex(canonical.to_string().as_bytes()),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "gepflow {} seed={} config=sha256:{}",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            self.config_hash
        )
    }

    /// Pretty JSON whose first key (and so first content line) is the
    /// provenance string.
    pub fn json(&self, body: serde_json::Value) -> String {
        let mut out = serde_json::Map::new();
        out.insert("provenance".into(), self.line().into());
        if let serde_json::Value::Object(map) = body {
            out.extend(map);
        }
        let mut text = to_pretty(&serde_json::Value::Object(out));
        text.push('\n');
        text
    }
}

fn to_pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_parse_exactly() {
        assert_eq!("7/32".parse::<Real>().unwrap(), Real(0.21875));
        assert_eq!("0.21875".parse::<Real>().unwrap(), Real(7.0 / 32.0));
        assert_eq!(" 35 / 32 ".parse::<Real>().unwrap(), Real(35.0 / 32.0));
        assert!("1/0".parse::<Real>().is_err());
        assert!("abc".parse::<Real>().is_err());
        assert!("inf".parse::<Real>().is_err());
    }

    #[test]
    fn reals_deserialize_from_numbers_and_strings() {
        let a: Real = serde_json::from_str("0.5").unwrap();
        let b: Real = serde_json::from_str("\"1/2\"").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn provenance_hash_tracks_config() {
        let a = Provenance::new("solve", 1, &serde_json::json!({"eta": 0.2}));
        let b = Provenance::new("solve", 1, &serde_json::json!({"eta": 0.3}));
        let c = Provenance::new("solve", 2, &serde_json::json!({"eta": 0.2}));
        assert_ne!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash, Provenance::new("solve", 1, &serde_json::json!({"eta": 0.2})).config_hash);
    }

    #[test]
    fn provenance_is_first_json_line() {
        let p = Provenance::new("generate", 3, &serde_json::json!({}));
        let text = p.json(serde_json::json!({"a": 1, "z": 2}));
        let second = text.lines().nth(1).unwrap();
        assert!(second.trim_start().starts_with("\"provenance\": \"gepflow "));
    }
}
