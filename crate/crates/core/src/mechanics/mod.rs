//! Mean radiative force, momentum diffusion, friction, Doppler limit and
//! capture range, all from steady-state flux balance of the rate equations.
//!
//! Each absorbed or stimulated photon transfers ħk along its beam; spontaneous
//! emission has zero mean but contributes ξ·ħ²k² per photon to the axial
//! diffusion, with ξ the emission-pattern factor.

mod force;
mod geometry;

pub use force::{
    capture_range, force_profile, friction_and_diffusion, mean_force, ForceProfile, ForceSample, FrictionDiffusion,
    ProfilePoint, RadiationModel, ISOTROPIC_EMISSION_FACTOR,
};
pub use geometry::{
    beam_roles, geometry_kick_ratio, momentum_kick_ratio, orient_beams, BeamGeometry, BeamRole, GeometryTag, KickRatio,
};
