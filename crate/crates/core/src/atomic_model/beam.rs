use core::f64::consts::PI;

use nalgebra::Vector3;

use super::geometry::{check_unit, Polarization};
use super::level::Transition;
use crate::constants::{wavenumber, HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// How strongly a beam drives its transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamCoupling {
    /// Power in W and 1/e² intensity radius in m at the ion.
    PowerWaist { power: f64, waist: f64 },
    /// Resonant Rabi frequency in rad/s.
    Rabi(f64),
}

/// One driving field.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserBeam {
    /// Vacuum wavelength in m.
    pub wavelength: f64,
    /// Detuning from the unshifted line centre in rad/s (negative = red).
    pub detuning: f64,
    pub coupling: BeamCoupling,
    direction: Vector3<f64>,
    pub polarization: Polarization,
}

impl LaserBeam {
    pub fn new(
        wavelength: f64,
        detuning: f64,
        coupling: BeamCoupling,
        direction: Vector3<f64>,
        polarization: Polarization,
    ) -> Result<Self> {
        check_unit("direction", &direction, 1e-12)?;
        if let Polarization::Linear(pol) = &polarization {
            check_unit("polarization", pol, 1e-12)?;
            let dot = pol.dot(&direction).abs();
            if dot > 1e-6 {
                return Err(Error::NotTransverse { dot });
            }
        }
        match coupling {
            BeamCoupling::PowerWaist { power, waist } => {
                if !(power >= 0.0) || !power.is_finite() {
                    return Err(invalid("power", "must be finite and non-negative"));
                }
                if !(waist > 0.0) || !waist.is_finite() {
                    return Err(invalid("waist", "must be finite and positive"));
                }
            }
            BeamCoupling::Rabi(rabi) => {
                if !(rabi >= 0.0) || !rabi.is_finite() {
                    return Err(invalid("rabi", "must be finite and non-negative"));
                }
            }
        }
        if !(wavelength > 0.0) || !detuning.is_finite() {
            return Err(invalid("wavelength", "must be positive with finite detuning"));
        }
        Ok(LaserBeam { wavelength, detuning, coupling, direction, polarization })
    }

    /// Unit propagation direction.
    pub fn direction(&self) -> &Vector3<f64> {
        &self.direction
    }

    /// Wave vector in m⁻¹.
    pub fn k_vector(&self) -> Vector3<f64> {
        self.direction * wavenumber(self.wavelength)
    }

    /// Copy with another detuning.
    pub fn with_detuning(&self, detuning: f64) -> Self {
        LaserBeam { detuning, ..self.clone() }
    }

    /// Copy with the coupling scaled so the intensity is multiplied by `factor`.
    pub fn with_intensity_scaled(&self, factor: f64) -> Self {
        let coupling = match self.coupling {
            BeamCoupling::PowerWaist { power, waist } => BeamCoupling::PowerWaist { power: power * factor, waist },
            BeamCoupling::Rabi(r) => BeamCoupling::Rabi(r * factor.sqrt()),
        };
        LaserBeam { coupling, ..self.clone() }
    }

    pub fn is_off(&self) -> bool {
        match self.coupling {
            BeamCoupling::PowerWaist { power, .. } => power == 0.0,
            BeamCoupling::Rabi(r) => r == 0.0,
        }
    }
}

/// Two-level saturation intensity 2π²ħcΓ/(3λ³) of a channel with partial
/// linewidth `partial_rate`, in W/m².
pub fn saturation_intensity(wavelength: f64, partial_rate: f64) -> f64 {
    2.0 * PI * PI * HBAR * SPEED_OF_LIGHT * partial_rate / (3.0 * wavelength.powi(3))
}

/// Resonant Rabi frequency (rad/s) of `beam` on `transition`.
///
/// From the peak intensity I = 2P/(πw²) and Ω² = (I/I_sat)·Γ²/2 with Γ the
/// partial linewidth of the channel. A beam that already carries a Rabi
/// frequency returns it unchanged.
pub fn rabi_from_power(beam: &LaserBeam, transition: &Transition) -> Result<f64> {
    if (beam.wavelength - transition.wavelength).abs() > 1e-9 {
        return Err(Error::WavelengthMismatch {
            beam_nm: beam.wavelength * 1e9,
            transition_nm: transition.wavelength * 1e9,
        });
    }
    match beam.coupling {
        BeamCoupling::Rabi(rabi) => Ok(rabi),
        BeamCoupling::PowerWaist { power, waist } => {
            if power < 0.0 {
                return Err(invalid("power", "must be non-negative"));
            }
            if !(waist > 0.0) {
                return Err(invalid("waist", "must be positive"));
            }
            let gamma = transition.partial_rate();
            let intensity = 2.0 * power / (PI * waist * waist);
            let saturation = intensity / saturation_intensity(transition.wavelength, gamma);
            Ok((saturation * gamma * gamma / 2.0).sqrt())
        }
    }
}
