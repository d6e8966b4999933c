//! Level schemes as TOML documents, so that other ions with the same
//! S/P/D structure (Sr⁺, Ba⁺) can be loaded without code changes.
//!
//! ```toml
//! species = "40Ca+"
//!
//! [[levels]]
//! name = "D5/2"
//! l = 2
//! j = 2.5
//! g = 1.2004
//!
//! [[transitions]]
//! lower = "S1/2"
//! upper = "D5/2"
//! wavelength_nm = 729.0
//! multipole = "quadrupole"
//! linewidth_MHz = 1.4e-7
//! branching = 1.0
//! ```
//!
//! `linewidth_MHz` is the total decay rate of the upper level divided by 2π.

use std::f64::consts::TAU;
use std::path::Path;

use quadcool_core::atomic_model::{Level, LevelId, LevelScheme, Multipole, Transition};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDoc {
    species: String,
    levels: Vec<LevelDoc>,
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    name: String,
    l: u8,
    j: f64,
    g: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    lower: String,
    upper: String,
    wavelength_nm: f64,
    multipole: String,
    #[serde(rename = "linewidth_MHz")]
    linewidth_mhz: f64,
    branching: f64,
}

fn level_id(name: &str) -> Result<LevelId> {
    LevelId::from_name(name).ok_or_else(|| config_error(format!("unknown level `{name}`")))
}

pub fn scheme_to_toml(scheme: &LevelScheme) -> String {
    let doc = SchemeDoc {
        species: scheme.species.clone(),
        levels: scheme
            .levels()
            .iter()
            .map(|l| LevelDoc { name: l.id.name().to_string(), l: l.l, j: l.j(), g: l.g })
            .collect(),
        transitions: scheme
            .transitions()
            .iter()
            .map(|t| TransitionDoc {
                lower: t.lower.name().to_string(),
                upper: t.upper.name().to_string(),
                wavelength_nm: t.wavelength_nm(),
                multipole: t.kind.name().to_string(),
                linewidth_mhz: t.upper_rate / TAU / 1e6,
                branching: t.branching,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scheme documents always serialize")
}

pub fn scheme_from_toml(text: &str) -> Result<LevelScheme> {
    let doc: SchemeDoc = toml::from_str(text).map_err(|e| config_error(format!("level scheme: {e}")))?;
    let mut levels = Vec::new();
    for l in doc.levels {
        let twice_j = (2.0 * l.j).round();
        if (2.0 * l.j - twice_j).abs() > 1e-9 || !(1.0..=9.0).contains(&twice_j) {
            return Err(config_error(format!("level {}: j must be a positive half-integer", l.name)));
        }
        let mut level = Level::new(level_id(&l.name)?, l.l, 1, twice_j as u8, 2.0);
        level.g = l.g;
        levels.push(level);
    }
    let mut transitions = Vec::new();
    for t in doc.transitions {
        let kind = match t.multipole.as_str() {
            "dipole" => Multipole::Dipole,
            "quadrupole" => Multipole::Quadrupole,
            other => return Err(config_error(format!("unknown multipole `{other}`"))),
        };
        transitions.push(Transition {
            lower: level_id(&t.lower)?,
            upper: level_id(&t.upper)?,
            wavelength: t.wavelength_nm * 1e-9,
            kind,
            upper_rate: t.linewidth_mhz * 1e6 * TAU,
            branching: t.branching,
        });
    }
    LevelScheme::new(doc.species, levels, transitions).map_err(|e| config_error(format!("level scheme: {e}")))
}

pub fn load_scheme(path: &Path) -> Result<LevelScheme> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    scheme_from_toml(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadcool_core::atomic_model::build_ca40_scheme;

    #[test]
    fn ca40_round_trip() {
        let s = build_ca40_scheme();
        let back = scheme_from_toml(&scheme_to_toml(&s)).unwrap();
        assert_eq!(back.species, s.species);
        assert_eq!(back.levels(), s.levels());
        for (a, b) in back.transitions().iter().zip(s.transitions()) {
            assert_eq!((a.lower, a.upper, a.kind), (b.lower, b.upper, b.kind));
            assert!((a.wavelength / b.wavelength - 1.0).abs() < 1e-12);
            assert!((a.upper_rate / b.upper_rate - 1.0).abs() < 1e-12);
            assert!((a.branching - b.branching).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let good = scheme_to_toml(&build_ca40_scheme());
        let unnormalized = good.replacen("branching = 0.07\n", "branching = 0.1\n", 1);
        assert!(scheme_from_toml(&unnormalized).unwrap_err().to_string().contains("sum"));
        let unknown = good.replacen("name = \"D5/2\"", "name = \"F7/2\"", 1);
        assert!(scheme_from_toml(&unknown).unwrap_err().to_string().contains("F7/2"));
        assert!(scheme_from_toml(&format!("{good}\nextra = 1\n")).is_err());
    }
}
