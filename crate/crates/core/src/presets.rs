//! Standard lattice models for the known deformation types, shipped as
//! JSON data.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::QuadLattice;

const K3: &str = include_str!("../data/presets/K3.json");
const K3N: &str = include_str!("../data/presets/K3n.json");
const KUMN: &str = include_str!("../data/presets/Kumn.json");
const OG6: &str = include_str!("../data/presets/OG6.json");
const OG10: &str = include_str!("../data/presets/OG10.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKey {
    K3,
    K3n(u32),
    Kumn(u32),
    OG6,
    OG10,
}

impl PresetKey {
    pub fn expected_b2(self) -> usize {
        match self {
            PresetKey::K3 => 22,
            PresetKey::K3n(_) => 23,
            PresetKey::Kumn(_) => 7,
            PresetKey::OG6 => 8,
            PresetKey::OG10 => 24,
        }
    }

    fn data(self) -> &'static str {
        match self {
            PresetKey::K3 => K3,
            PresetKey::K3n(_) => K3N,
            PresetKey::Kumn(_) => KUMN,
            PresetKey::OG6 => OG6,
            PresetKey::OG10 => OG10,
        }
    }

    pub fn all_examples() -> [PresetKey; 5] {
        [PresetKey::K3, PresetKey::K3n(2), PresetKey::Kumn(2), PresetKey::OG6, PresetKey::OG10]
    }
}

impl fmt::Display for PresetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetKey::K3 => f.write_str("K3"),
            PresetKey::K3n(n) => write!(f, "K3n({n})"),
            PresetKey::Kumn(n) => write!(f, "Kumn({n})"),
            PresetKey::OG6 => f.write_str("OG6"),
            PresetKey::OG10 => f.write_str("OG10"),
        }
    }
}

impl FromStr for PresetKey {
    type Err = Error;

    /// Accepts `K3`, `OG6`, `OG10`, `K3n(n)` and `Kumn(n)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let param = |prefix: &str| -> Option<Result<u32>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(inner.trim().parse().map_err(|_| Error::input(format!("bad preset parameter in {s}"))))
        };
        match s {
            "K3" => Ok(PresetKey::K3),
            "OG6" => Ok(PresetKey::OG6),
            "OG10" => Ok(PresetKey::OG10),
            _ => {
                if let Some(n) = param("K3n") {
                    Ok(PresetKey::K3n(n?))
                } else if let Some(n) = param("Kumn") {
                    Ok(PresetKey::Kumn(n?))
                } else {
                    Err(Error::input(format!("unknown preset {s:?}")))
                }
            }
        }
    }
}

#[derive(Deserialize)]
struct PresetFile {
    name: String,
    expected_b2: usize,
    rank: usize,
    gram: Vec<Vec<i64>>,
    #[serde(default)]
    parameter: Option<Parameter>,
}

/// The diagonal entry `(row,row)` equals `a n + b`.
#[derive(Deserialize)]
struct Parameter {
    row: usize,
    a: i64,
    b: i64,
    min_n: u32,
}

pub fn load_preset(key: PresetKey) -> Result<QuadLattice> {
    let file: PresetFile = serde_json::from_str(key.data()).expect("preset data is valid JSON");
    debug_assert_eq!(file.expected_b2, key.expected_b2());
    debug_assert_eq!(file.rank, file.gram.len());
    let mut gram = file.gram;
    match (key, file.parameter) {
        (PresetKey::K3n(n) | PresetKey::Kumn(n), Some(p)) => {
            if n < p.min_n {
                return Err(Error::input(format!("{} needs n >= {}", file.name, p.min_n)));
            }
            gram[p.row][p.row] = p.a * n as i64 + p.b;
        }
        (_, None) => {}
        _ => unreachable!("parameter presence matches the key"),
    }
    let mut lat = QuadLattice::new(gram)?.named(key.to_string());
    lat.hyperkahler = true;
    if let PresetKey::K3n(n) | PresetKey::Kumn(n) = key {
        lat.n = Some(n);
    }
    Ok(lat)
}

pub fn load_preset_str(s: &str) -> Result<QuadLattice> {
    load_preset(s.parse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate_lattice;

    #[test]
    fn presets_have_expected_rank_and_signature() {
        for key in PresetKey::all_examples() {
            let lat = load_preset(key).unwrap();
            let d = key.expected_b2();
            assert_eq!(lat.rank(), d, "{key}");
            assert_eq!(lat.signature().unwrap(), (3, d - 3), "{key}");
            assert!(validate_lattice(&lat).passed());
        }
    }

    #[test]
    fn parsing_keys() {
        assert_eq!("Kumn(3)".parse::<PresetKey>().unwrap(), PresetKey::Kumn(3));
        assert!("K5".parse::<PresetKey>().is_err());
        assert!(load_preset(PresetKey::K3n(1)).is_err());
    }
}
