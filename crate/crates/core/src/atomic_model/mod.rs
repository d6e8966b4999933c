//! Level structure, transition constants, Zeeman components, quadrupole
//! coupling geometry and laser beams.

mod angular;
mod beam;
mod geometry;
mod level;
mod zeeman;

pub use angular::{clebsch_gordan, wigner_3j};
pub use beam::{rabi_from_power, saturation_intensity, BeamCoupling, LaserBeam};
pub use geometry::{component_weights, perpendicular, quadrupole_geometry_factor, Polarization};
pub use level::*;
pub use zeeman::{zeeman_lines, zeeman_shift, LineGeometry, Sublevel, ZeemanLine};
