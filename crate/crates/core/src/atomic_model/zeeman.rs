use alloc::vec::Vec;

use nalgebra::Vector3;

use super::angular::clebsch_gordan;
use super::geometry::{component_weights, Polarization};
use super::level::{LevelId, LevelScheme, Transition};
use crate::constants::{BOHR_MAGNETON, HBAR};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// A magnetic sublevel; `twice_m` is 2m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sublevel {
    pub level: LevelId,
    pub twice_m: i8,
}

impl Sublevel {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// One Zeeman component of a transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanLine {
    pub lower: Sublevel,
    pub upper: Sublevel,
    /// g′m′ − g·m; multiplies μ_B·B/ħ.
    pub shift_coefficient: f64,
    /// Relative coupling amplitude in [0, 1] from polarization geometry.
    pub geometry_factor: f64,
    /// Squared Clebsch–Gordan coefficient ⟨J m; k q | J′ m′⟩².
    pub strength: f64,
}

impl ZeemanLine {
    pub fn delta_m(&self) -> i32 {
        (self.upper.twice_m as i32 - self.lower.twice_m as i32) / 2
    }
}

/// Frequency shift (rad/s) of a Zeeman component in a field of `b` tesla.
pub fn zeeman_shift(line: &ZeemanLine, b: f64) -> f64 {
    line.shift_coefficient * BOHR_MAGNETON * b / HBAR
}

/// Field geometry used to weight Zeeman components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGeometry {
    pub field_dir: Vector3<f64>,
    pub k_dir: Vector3<f64>,
    pub polarization: Polarization,
}

/// All Zeeman components of `transition` allowed by its multipole rank
/// (|Δm| ≤ k). Without a geometry, components get the isotropic weight.
pub fn zeeman_lines(scheme: &LevelScheme, transition: &Transition, geometry: Option<&LineGeometry>) -> Vec<ZeemanLine> {
    let lower = scheme.level(transition.lower);
    let upper = scheme.level(transition.upper);
    let rank = transition.kind.rank();
    let weights = match geometry {
        Some(g) => component_weights(rank, &g.field_dir, &g.k_dir, &g.polarization),
        None => {
            let w = 1.0 / (2 * rank + 1) as f64;
            let mut a = [0.0; 5];
            for q in -(rank as i32)..=rank as i32 {
                a[(q + 2) as usize] = w;
            }
            a
        }
    };
    let mut lines = Vec::new();
    for tm in lower.sublevels() {
        for tmu in upper.sublevels() {
            let tq = tmu as i32 - tm as i32;
            if tq.abs() > 2 * rank as i32 {
                continue;
            }
            let q = tq / 2;
            let cg =
                clebsch_gordan(lower.twice_j as i32, tm as i32, 2 * rank as i32, tq, upper.twice_j as i32, tmu as i32);
            lines.push(ZeemanLine {
                lower: Sublevel { level: lower.id, twice_m: tm },
                upper: Sublevel { level: upper.id, twice_m: tmu },
                shift_coefficient: upper.g * tmu as f64 / 2.0 - lower.g * tm as f64 / 2.0,
                geometry_factor: weights[(q + 2) as usize].sqrt(),
                strength: cg * cg,
            });
        }
    }
    lines
}
