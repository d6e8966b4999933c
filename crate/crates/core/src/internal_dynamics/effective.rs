use alloc::vec::Vec;

use crate::atomic_model::{rabi_from_power, LaserBeam, LevelId, LevelScheme, Multipole, Transition};
use crate::error::{Error, Result};

/// Metastable level dressed by a dipole laser to a short-lived level, after
/// adiabatic elimination of the short-lived level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTwoLevel {
    /// Effective decay rate Γ′ of the metastable level (rad/s).
    pub linewidth: f64,
    /// Natural decay rate of the metastable level (rad/s).
    pub natural_linewidth: f64,
    /// AC Stark shift of the metastable level (rad/s); negative for red
    /// detuned dressing.
    pub light_shift: f64,
    /// (2J_lower+1)/(2J_upper+1) of the narrow transition.
    pub degeneracy_ratio: f64,
}

impl EffectiveTwoLevel {
    /// Detuning of the narrow-line laser from the light-shifted resonance.
    pub fn effective_detuning(&self, detuning: f64) -> f64 {
        detuning - self.light_shift
    }

    /// On-resonance saturation parameter 2Ω²/Γ′².
    pub fn saturation(&self, rabi: f64) -> f64 {
        2.0 * rabi * rabi / (self.linewidth * self.linewidth)
    }

    /// Absorption rate per ground-state ion (s⁻¹) at laser detuning
    /// `detuning` from the unshifted line.
    pub fn pump_rate(&self, rabi: f64, detuning: f64) -> f64 {
        let d = self.effective_detuning(detuning);
        let g = self.linewidth;
        rabi * rabi * g / (4.0 * d * d + g * g)
    }

    /// Steady-state population of the metastable level.
    pub fn upper_population(&self, rabi: f64, detuning: f64) -> f64 {
        let r = self.pump_rate(rabi, detuning);
        if r == 0.0 {
            return 0.0;
        }
        r / (r * (1.0 + self.degeneracy_ratio) + self.linewidth)
    }

    /// Rate of laser-induced returns to the ground state (s⁻¹), each of
    /// which emits one photon on the short-lived level's ground-state line.
    pub fn cycling_rate(&self, rabi: f64, detuning: f64) -> f64 {
        (self.linewidth - self.natural_linewidth) * self.upper_population(rabi, detuning)
    }
}

/// Width and shift that dipole `beams` (with Doppler-shifted detunings)
/// impose on the metastable `level`.
pub(crate) fn dress(scheme: &LevelScheme, level: LevelId, beams: &[(&LaserBeam, f64)]) -> Result<(f64, f64)> {
    let mut width = scheme.total_decay_rate(level);
    let mut shift = 0.0;
    for &(beam, detuning) in beams {
        let t = scheme.transition_at(beam.wavelength, 1e-9)?;
        if t.lower != level || t.kind != Multipole::Dipole {
            continue;
        }
        let rabi = rabi_from_power(beam, t)?;
        let gamma = t.upper_rate;
        let denominator = gamma * gamma + 4.0 * detuning * detuning + 2.0 * rabi * rabi;
        // Decays that do not land back in the dressed level empty it.
        width += (1.0 - t.branching) * gamma * rabi * rabi / denominator;
        shift += detuning * rabi * rabi / denominator;
    }
    Ok((width, shift))
}

/// Γ′ and light shift of D5/2 produced by an 854 nm assisting beam.
pub fn effective_decay_rate(assist: &LaserBeam, scheme: &LevelScheme) -> Result<EffectiveTwoLevel> {
    let t = scheme.transition(LevelId::D52, LevelId::P32).ok_or(Error::MissingBeam("D5/2-P3/2"))?;
    if (assist.wavelength - t.wavelength).abs() > 1e-9 {
        return Err(Error::WavelengthMismatch { beam_nm: assist.wavelength * 1e9, transition_nm: t.wavelength_nm() });
    }
    let cooling = scheme.transition(LevelId::S12, LevelId::D52).ok_or(Error::MissingBeam("S1/2-D5/2"))?;
    effective_two_level(scheme, cooling, core::slice::from_ref(assist))
}

/// Effective two-level reduction of the narrow line `cooling`, dressed by
/// whichever of `beams` drive dipole lines out of its upper level (at rest).
pub fn effective_two_level(
    scheme: &LevelScheme,
    cooling: &Transition,
    beams: &[LaserBeam],
) -> Result<EffectiveTwoLevel> {
    let dressing: Vec<(&LaserBeam, f64)> = beams.iter().map(|b| (b, b.detuning)).collect();
    let (linewidth, light_shift) = dress(scheme, cooling.upper, &dressing)?;
    Ok(EffectiveTwoLevel {
        linewidth,
        natural_linewidth: scheme.total_decay_rate(cooling.upper),
        light_shift,
        degeneracy_ratio: degeneracy_ratio(scheme, cooling.lower, cooling.upper),
    })
}

pub(crate) fn degeneracy_ratio(scheme: &LevelScheme, lower: LevelId, upper: LevelId) -> f64 {
    scheme.level(lower).multiplicity() as f64 / scheme.level(upper).multiplicity() as f64
}
