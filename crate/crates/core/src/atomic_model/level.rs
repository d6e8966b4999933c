use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::constants::{wavenumber, TWO_PI};
use crate::error::{invalid, Error, Result};

/// The five electronic levels of the reduced alkaline-earth-ion scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelId {
    S12,
    P12,
    P32,
    D32,
    D52,
}

impl LevelId {
    pub const ALL: [LevelId; 5] = [LevelId::S12, LevelId::P12, LevelId::P32, LevelId::D32, LevelId::D52];

    pub fn name(self) -> &'static str {
        match self {
            LevelId::S12 => "S1/2",
            LevelId::P12 => "P1/2",
            LevelId::P32 => "P3/2",
            LevelId::D32 => "D3/2",
            LevelId::D52 => "D5/2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        LevelId::ALL.into_iter().find(|id| id.name() == name)
    }

    /// Position of the level in [`LevelId::ALL`] (and in level-resolved rate matrices).
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LevelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Landé g-factor with orbital g_L = 1 and electron spin g-factor `g_s`.
///
/// For `g_s = 2` this is the textbook `1 + [J(J+1) + S(S+1) − L(L+1)] / [2J(J+1)]`.
pub fn lande_g(l: u8, twice_s: u8, twice_j: u8, g_s: f64) -> f64 {
    let l = l as f64;
    let s = twice_s as f64 / 2.0;
    let j = twice_j as f64 / 2.0;
    let jj = j * (j + 1.0);
    let ss = s * (s + 1.0);
    let ll = l * (l + 1.0);
    (jj - ss + ll) / (2.0 * jj) + g_s * (jj + ss - ll) / (2.0 * jj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub id: LevelId,
    pub l: u8,
    pub twice_s: u8,
    pub twice_j: u8,
    pub g: f64,
}

impl Level {
    pub fn new(id: LevelId, l: u8, twice_s: u8, twice_j: u8, g_s: f64) -> Self {
        Level { id, l, twice_s, twice_j, g: lande_g(l, twice_s, twice_j, g_s) }
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn multiplicity(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic quantum numbers as 2m, ascending from −2J to +2J.
    pub fn sublevels(&self) -> impl Iterator<Item = i8> + Clone {
        let tj = self.twice_j as i8;
        (0..=tj).map(move |k| -tj + 2 * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multipole {
    Dipole,
    Quadrupole,
}

impl Multipole {
    pub fn rank(self) -> u8 {
        match self {
            Multipole::Dipole => 1,
            Multipole::Quadrupole => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Multipole::Dipole => "dipole",
            Multipole::Quadrupole => "quadrupole",
        }
    }
}

/// A radiative channel between two levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub lower: LevelId,
    pub upper: LevelId,
    /// Vacuum wavelength in m.
    pub wavelength: f64,
    pub kind: Multipole,
    /// Total spontaneous decay rate of the upper level, rad/s.
    pub upper_rate: f64,
    /// Fraction of upper-level decays that go through this channel.
    pub branching: f64,
}

impl Transition {
    /// Partial decay rate Γ·β of this channel.
    pub fn partial_rate(&self) -> f64 {
        self.upper_rate * self.branching
    }

    pub fn wavenumber(&self) -> f64 {
        wavenumber(self.wavelength)
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength * 1e9
    }
}

/// Tunable constants of the ⁴⁰Ca⁺ scheme that the measurements leave open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    /// Electron spin g-factor; sets g(S1/2) directly.
    pub g_s: f64,
    /// Fraction of P1/2 decays into D3/2.
    pub p12_to_d32: f64,
}

impl SchemeParams {
    pub const DEFAULT_G_S: f64 = 2.002;
    pub const DEFAULT_P12_TO_D32: f64 = 0.064;
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams { g_s: Self::DEFAULT_G_S, p12_to_d32: Self::DEFAULT_P12_TO_D32 }
    }
}

/// Level structure and radiative channels of one ion species.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    pub species: String,
    levels: Vec<Level>,
    transitions: Vec<Transition>,
}

pub const CA40_WAVELENGTH_729: f64 = 729e-9;
pub const CA40_WAVELENGTH_733: f64 = 733e-9;
pub const CA40_WAVELENGTH_854: f64 = 854e-9;
pub const CA40_WAVELENGTH_850: f64 = 850e-9;
pub const CA40_WAVELENGTH_866: f64 = 866e-9;
pub const CA40_WAVELENGTH_393: f64 = 393e-9;
pub const CA40_WAVELENGTH_397: f64 = 397e-9;

/// Natural width of the S1/2–D5/2 quadrupole line, Γc = 2π × 0.14 Hz.
pub const CA40_GAMMA_D52: f64 = TWO_PI * 0.14;
/// D3/2 lifetime of 1.17 s.
pub const CA40_GAMMA_D32: f64 = 1.0 / 1.17;
/// P3/2 total decay rate, 2π × 23 MHz.
pub const CA40_GAMMA_P32: f64 = TWO_PI * 23e6;
/// P1/2 total decay rate, 2π × 22.4 MHz.
pub const CA40_GAMMA_P12: f64 = TWO_PI * 22.4e6;
pub const CA40_P32_TO_D52: f64 = 0.07;
pub const CA40_P32_TO_D32: f64 = 0.008;

/// The ⁴⁰Ca⁺ scheme with default [`SchemeParams`].
pub fn build_ca40_scheme() -> LevelScheme {
    build_ca40_scheme_with(SchemeParams::default())
}

pub fn build_ca40_scheme_with(params: SchemeParams) -> LevelScheme {
    use LevelId::*;
    use Multipole::*;
    let g_s = params.g_s;
    let levels = alloc::vec![
        Level::new(S12, 0, 1, 1, g_s),
        Level::new(P12, 1, 1, 1, g_s),
        Level::new(P32, 1, 1, 3, g_s),
        Level::new(D32, 2, 1, 3, g_s),
        Level::new(D52, 2, 1, 5, g_s),
    ];
    let p32_to_s = 1.0 - CA40_P32_TO_D52 - CA40_P32_TO_D32;
    let t = |lower, upper, wavelength, kind, upper_rate, branching| Transition {
        lower,
        upper,
        wavelength,
        kind,
        upper_rate,
        branching,
    };
    let transitions = alloc::vec![
        t(S12, D52, CA40_WAVELENGTH_729, Quadrupole, CA40_GAMMA_D52, 1.0),
        t(S12, D32, CA40_WAVELENGTH_733, Quadrupole, CA40_GAMMA_D32, 1.0),
        t(D52, P32, CA40_WAVELENGTH_854, Dipole, CA40_GAMMA_P32, CA40_P32_TO_D52),
        t(D32, P32, CA40_WAVELENGTH_850, Dipole, CA40_GAMMA_P32, CA40_P32_TO_D32),
        t(S12, P32, CA40_WAVELENGTH_393, Dipole, CA40_GAMMA_P32, p32_to_s),
        t(D32, P12, CA40_WAVELENGTH_866, Dipole, CA40_GAMMA_P12, params.p12_to_d32),
        t(S12, P12, CA40_WAVELENGTH_397, Dipole, CA40_GAMMA_P12, 1.0 - params.p12_to_d32),
    ];
    LevelScheme { species: String::from("40Ca+"), levels, transitions }
}

impl LevelScheme {
    /// Assembles and validates a scheme; every level in [`LevelId::ALL`] must be present.
    pub fn new(species: String, levels: Vec<Level>, transitions: Vec<Transition>) -> Result<Self> {
        for id in LevelId::ALL {
            if !levels.iter().any(|l| l.id == id) {
                return Err(invalid("levels", alloc::format!("missing level {id}")));
            }
        }
        let mut levels = levels;
        levels.sort_by_key(|l| l.id);
        levels.dedup_by_key(|l| l.id);
        if levels.len() != LevelId::ALL.len() {
            return Err(invalid("levels", "duplicate level"));
        }
        let scheme = LevelScheme { species, levels, transitions };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn level(&self, id: LevelId) -> &Level {
        // levels are sorted and complete
        &self.levels[id.index()]
    }

    /// Transition between two levels, in either order.
    pub fn transition(&self, a: LevelId, b: LevelId) -> Option<&Transition> {
        self.transitions.iter().find(|t| (t.lower == a && t.upper == b) || (t.lower == b && t.upper == a))
    }

    /// Decay channels out of `upper`.
    pub fn decays_from(&self, upper: LevelId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.upper == upper)
    }

    /// Total spontaneous decay rate of a level (0 for the ground state).
    pub fn total_decay_rate(&self, id: LevelId) -> f64 {
        self.decays_from(id).map(|t| t.upper_rate).next().unwrap_or(0.0)
    }

    /// Transition whose wavelength lies within `tolerance` (m) of `wavelength`.
    pub fn transition_at(&self, wavelength: f64, tolerance: f64) -> Result<&Transition> {
        self.transitions
            .iter()
            .filter(|t| (t.wavelength - wavelength).abs() <= tolerance)
            .min_by(|a, b| {
                let da = (a.wavelength - wavelength).abs();
                let db = (b.wavelength - wavelength).abs();
                da.total_cmp(&db)
            })
            .ok_or(Error::UnknownWavelength { wavelength_nm: wavelength * 1e9 })
    }

    /// Checks branching normalization, consistent upper-level rates and
    /// multipole selection rules.
    pub fn validate(&self) -> Result<()> {
        for level in &self.levels {
            let decays: Vec<&Transition> = self.decays_from(level.id).collect();
            if decays.is_empty() {
                continue;
            }
            let sum: f64 = decays.iter().map(|t| t.branching).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::BranchingNotNormalized { level: level.id.name(), sum });
            }
            let rate = decays[0].upper_rate;
            if decays.iter().any(|t| t.upper_rate != rate) || !(rate > 0.0) {
                return Err(invalid("upper_rate", alloc::format!("inconsistent decay rate of {}", level.id)));
            }
            if decays.iter().any(|t| t.branching < 0.0) {
                return Err(invalid("branching", "negative branching fraction"));
            }
        }
        for t in &self.transitions {
            let dj = (self.level(t.upper).twice_j as i32 - self.level(t.lower).twice_j as i32).abs();
            if dj > 2 * t.kind.rank() as i32 {
                return Err(invalid(
                    "transitions",
                    alloc::format!("{} {}–{} violates |ΔJ| ≤ {}", t.kind.name(), t.lower, t.upper, t.kind.rank()),
                ));
            }
            if !(t.wavelength > 0.0) {
                return Err(invalid("wavelength", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ca40_constants() {
        let s = build_ca40_scheme();
        assert_relative_eq!(s.total_decay_rate(LevelId::P32), TWO_PI * 23e6, max_relative = 1e-15);
        let p32_s = s.transition(LevelId::S12, LevelId::P32).unwrap();
        assert_relative_eq!(p32_s.branching, 0.922, epsilon = 1e-12);
        assert_relative_eq!(s.level(LevelId::D52).g, 1.2, epsilon = 5e-4);
        assert_relative_eq!(s.level(LevelId::S12).g, 2.002, epsilon = 1e-12);
        let q = s.transition(LevelId::S12, LevelId::D52).unwrap();
        assert_eq!(q.kind, Multipole::Quadrupole);
        assert_relative_eq!(q.upper_rate, TWO_PI * 0.14);
        s.validate().unwrap();
    }

    #[test]
    fn lande_textbook_limit() {
        // g_s = 2 gives the textbook values
        assert_relative_eq!(lande_g(2, 1, 5, 2.0), 1.2, epsilon = 1e-15);
        assert_relative_eq!(lande_g(1, 1, 3, 2.0), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(lande_g(1, 1, 1, 2.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(lande_g(2, 1, 3, 2.0), 0.8, epsilon = 1e-15);
        assert_relative_eq!(lande_g(0, 1, 1, 2.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn sublevel_counts() {
        let s = build_ca40_scheme();
        for level in s.levels() {
            assert_eq!(level.sublevels().count(), level.twice_j as usize + 1);
            let ms: Vec<i8> = level.sublevels().collect();
            assert_eq!(ms.first().copied(), Some(-(level.twice_j as i8)));
            assert_eq!(ms.last().copied(), Some(level.twice_j as i8));
        }
    }

    #[test]
    fn branching_sums_for_every_level() {
        let s = build_ca40_scheme_with(SchemeParams { g_s: 2.0023, p12_to_d32: 0.0587 });
        for id in LevelId::ALL {
            let total: f64 = s.decays_from(id).map(|t| t.branching).sum();
            if id != LevelId::S12 {
                assert!((total - 1.0).abs() <= 1e-12, "{id}: {total}");
            }
        }
    }

    #[test]
    fn rejects_bad_branching() {
        let s = build_ca40_scheme();
        let mut transitions = s.transitions().to_vec();
        transitions[2].branching = 0.08;
        let err = LevelScheme::new("x".into(), s.levels().to_vec(), transitions).unwrap_err();
        assert!(matches!(err, Error::BranchingNotNormalized { level: "P3/2", .. }));
    }

    #[test]
    fn finds_transitions_by_wavelength() {
        let s = build_ca40_scheme();
        let t = s.transition_at(854.2e-9, 1e-9).unwrap();
        assert_eq!((t.lower, t.upper), (LevelId::D52, LevelId::P32));
        assert!(matches!(s.transition_at(600e-9, 1e-9), Err(Error::UnknownWavelength { .. })));
    }
}
