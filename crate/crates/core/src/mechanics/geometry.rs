use alloc::vec::Vec;

use nalgebra::Vector3;

use crate::atomic_model::{perpendicular, LaserBeam, LevelScheme, Multipole, Polarization};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Beam arrangement relative to the trap axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryTag {
    /// 729 and 854 nm beams both along the axis, same direction.
    CoPropagating,
    /// 729 nm along the axis, 854 nm against it.
    CounterPropagating,
    /// 729 nm at 45° to the axis, 854 nm along it.
    Angled45,
}

impl GeometryTag {
    pub fn name(self) -> &'static str {
        match self {
            GeometryTag::CoPropagating => "co",
            GeometryTag::CounterPropagating => "counter",
            GeometryTag::Angled45 => "angled45",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "co" | "co_propagating_axial" => Some(GeometryTag::CoPropagating),
            "counter" | "counter_propagating_axial" => Some(GeometryTag::CounterPropagating),
            "angled45" | "angled_45_with_axial_assist" => Some(GeometryTag::Angled45),
            _ => None,
        }
    }
}

/// Directions of the cooling (729 nm) and assisting (854 nm) beams and of the
/// trap axis. The repumper pushes the ion only if `k866` is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    pub tag: GeometryTag,
    k729: Vector3<f64>,
    k854: Vector3<f64>,
    axis: Vector3<f64>,
    k866: Option<Vector3<f64>>,
}

impl BeamGeometry {
    pub fn new(
        tag: GeometryTag,
        k729: Vector3<f64>,
        k854: Vector3<f64>,
        axis: Vector3<f64>,
        k866: Option<Vector3<f64>>,
    ) -> Result<Self> {
        for (name, v) in [("k729", &k729), ("k854", &k854), ("axis", &axis)] {
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::NotUnitVector { name, norm });
            }
        }
        let ok = match tag {
            GeometryTag::CoPropagating => (k729.dot(&k854) - 1.0).abs() <= 1e-9 && k729.dot(&axis).abs() >= 1.0 - 1e-9,
            GeometryTag::CounterPropagating => {
                (k729.dot(&k854) + 1.0).abs() <= 1e-9 && k729.dot(&axis).abs() >= 1.0 - 1e-9
            }
            GeometryTag::Angled45 => {
                (k729.dot(&axis) - core::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9
                    && k854.dot(&axis).abs() >= 1.0 - 1e-9
            }
        };
        if !ok {
            return Err(invalid("geometry", alloc::format!("beam directions do not match tag `{}`", tag.name())));
        }
        Ok(BeamGeometry { tag, k729, k854, axis, k866 })
    }

    /// Standard arrangement for `tag` around `axis`; the 45° beam tilts
    /// towards an arbitrary perpendicular.
    pub fn standard(tag: GeometryTag, axis: Vector3<f64>) -> Result<Self> {
        let axis = axis.normalize();
        let (k729, k854) = match tag {
            GeometryTag::CoPropagating => (axis, axis),
            GeometryTag::CounterPropagating => (axis, -axis),
            GeometryTag::Angled45 => ((axis + perpendicular(&axis)).normalize(), axis),
        };
        BeamGeometry::new(tag, k729, k854, axis, None)
    }

    pub fn with_repumper_direction(mut self, k866: Vector3<f64>) -> Result<Self> {
        let norm = k866.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitVector { name: "k866", norm });
        }
        self.k866 = Some(k866);
        Ok(self)
    }

    pub fn k729(&self) -> &Vector3<f64> {
        &self.k729
    }

    pub fn k854(&self) -> &Vector3<f64> {
        &self.k854
    }

    pub fn axis(&self) -> &Vector3<f64> {
        &self.axis
    }

    pub fn k866(&self) -> Option<&Vector3<f64>> {
        self.k866.as_ref()
    }

    /// Both beams along the trap axis.
    pub fn is_axial(&self) -> bool {
        matches!(self.tag, GeometryTag::CoPropagating | GeometryTag::CounterPropagating)
    }

    /// Momentum (in units of ħ, m⁻¹) delivered along the axis per excitation
    /// cycle: one cooling photon plus one assisting photon.
    pub fn kick_per_cycle(&self, cooling_wavelength: f64, assist_wavelength: f64) -> f64 {
        let k = crate::constants::wavenumber;
        k(cooling_wavelength) * self.k729.dot(&self.axis) + k(assist_wavelength) * self.k854.dot(&self.axis)
    }
}

/// Role of a beam in the cooling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamRole {
    /// Drives the narrow quadrupole line.
    Cooling,
    /// Drains the metastable level of the cooling line.
    Assist,
    /// Any other dipole beam, e.g. the 866 nm repumper.
    Repump,
}

/// Classifies `beams` by the transition each drives.
pub fn beam_roles(scheme: &LevelScheme, beams: &[LaserBeam]) -> Result<Vec<BeamRole>> {
    let transitions: Vec<_> = beams.iter().map(|b| scheme.transition_at(b.wavelength, 1e-9)).collect::<Result<_>>()?;
    let metastable: Vec<_> = transitions.iter().filter(|t| t.kind == Multipole::Quadrupole).map(|t| t.upper).collect();
    Ok(transitions
        .iter()
        .map(|t| match t.kind {
            Multipole::Quadrupole => BeamRole::Cooling,
            Multipole::Dipole if metastable.contains(&t.lower) => BeamRole::Assist,
            Multipole::Dipole => BeamRole::Repump,
        })
        .collect())
}

/// Copies of `beams` pointed along the geometry's directions. Linear
/// polarizations are re-projected transverse to the new direction.
pub fn orient_beams(scheme: &LevelScheme, beams: &[LaserBeam], geometry: &BeamGeometry) -> Result<Vec<LaserBeam>> {
    let roles = beam_roles(scheme, beams)?;
    for (role, name) in [(BeamRole::Cooling, "cooling (729 nm)"), (BeamRole::Assist, "assisting (854 nm)")] {
        if !roles.contains(&role) {
            return Err(Error::MissingBeam(name));
        }
    }
    beams
        .iter()
        .zip(&roles)
        .map(|(beam, role)| {
            let direction = match role {
                BeamRole::Cooling => geometry.k729,
                BeamRole::Assist => geometry.k854,
                BeamRole::Repump => geometry.k866.unwrap_or(*beam.direction()),
            };
            let polarization = match beam.polarization {
                Polarization::Linear(p) => {
                    let projected = p - direction * direction.dot(&p);
                    if projected.norm() > 1e-6 {
                        Polarization::Linear(projected.normalize())
                    } else {
                        Polarization::Linear(perpendicular(&direction))
                    }
                }
                Polarization::Rotating => Polarization::Rotating,
            };
            LaserBeam::new(beam.wavelength, beam.detuning, beam.coupling, direction, polarization)
        })
        .collect()
}

/// Ratio of momentum kicks per cycle for co- and counter-propagating beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KickRatio {
    Finite(f64),
    /// Equal wavelengths: the counter-propagating kick vanishes.
    Unbounded,
}

impl KickRatio {
    pub fn value(self) -> f64 {
        match self {
            KickRatio::Finite(r) => r,
            KickRatio::Unbounded => f64::INFINITY,
        }
    }
}

/// (k₁ + k₂)/|k₁ − k₂| for the cooling and assisting wavelengths.
pub fn momentum_kick_ratio(cooling_wavelength: f64, assist_wavelength: f64) -> KickRatio {
    let k1 = 1.0 / cooling_wavelength;
    let k2 = 1.0 / assist_wavelength;
    let diff = (k1 - k2).abs();
    if diff <= 1e-12 * (k1 + k2) {
        KickRatio::Unbounded
    } else {
        KickRatio::Finite((k1 + k2) / diff)
    }
}

/// Ratio of the axial kicks per cycle of two axial geometries.
pub fn geometry_kick_ratio(
    a: &BeamGeometry,
    b: &BeamGeometry,
    cooling_wavelength: f64,
    assist_wavelength: f64,
) -> Result<KickRatio> {
    if !a.is_axial() || !b.is_axial() {
        return Err(invalid("geometry", "kick ratio needs axial geometries"));
    }
    let ka = a.kick_per_cycle(cooling_wavelength, assist_wavelength).abs();
    let kb = b.kick_per_cycle(cooling_wavelength, assist_wavelength).abs();
    if kb <= 1e-12 * ka {
        Ok(KickRatio::Unbounded)
    } else {
        Ok(KickRatio::Finite(ka / kb))
    }
}
