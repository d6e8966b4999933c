//! Stochastic molecular dynamics of ion strings in a linear Paul trap.
//!
//! The radial confinement is a static pseudopotential; micromotion is not
//! modelled. Addressed ions feel the tabulated laser force as a train of
//! photon events, each carrying the mean momentum per detected photon plus
//! an isotropic emission recoil.

mod cooling;
mod integrate;
mod jumps;
mod state;
mod thermometry;
mod trap;

pub use cooling::{Cooling, LiveCooling, LocalResponse, TabulatedCooling, MAX_CHANNELS};
pub use integrate::{
    impulse_statistics, integrate, run, total_energy, CollisionEvent, ImpulseStatistics, IntegrationParams, NoiseModel,
    Observer, PhotonEvent, Trajectory,
};
pub use jumps::{detect_jumps, JumpDetector, JumpEvent, JumpReport, DEBOUNCE_PERIODS};
pub use state::{string_at_rest, thermal_string, IonState, Species};
pub use thermometry::{temperature_estimate, MotionMode, TemperatureMeter, MIN_WINDOW_PERIODS};
pub use trap::{equilibrium_positions, normal_modes, scaled_equilibrium, string_hessians, TrapConfig, MAX_IONS};
