//! Rate-equation model of the internal state at fixed velocity, field and
//! laser configuration.
//!
//! Coherences are dropped: with Γ′ above the trap frequencies and laser
//! linewidths comparable to the power-broadened line, the populations follow
//! rate equations whose generator is a [`RateMatrix`].

mod effective;
mod expm;
mod rates;
mod solve;

pub use effective::{effective_decay_rate, effective_two_level, EffectiveTwoLevel};
pub use rates::{build_rate_matrix, quantization_axis, Process, ProcessKind, RateMatrix, Resolution, StateLabel};
pub use solve::{
    evolve_populations, scattering_rates, steady_state, EmissionChannel, PopulationVector, ScatteringRates,
};
