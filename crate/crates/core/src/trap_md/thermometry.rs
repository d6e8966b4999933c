use super::integrate::{Observer, Trajectory};
use super::state::IonState;
use crate::constants::BOLTZMANN;
use crate::error::{invalid, Error, Result};

/// Periods of the axial motion a temperature window must span.
pub const MIN_WINDOW_PERIODS: f64 = 10.0;

/// Which motional degrees of freedom a temperature refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMode {
    /// Along the trap axis.
    Axial,
    /// Per transverse degree of freedom.
    Radial,
}

fn mode_energy(ion: &IonState, mode: MotionMode) -> f64 {
    let v = ion.velocity;
    let v2 = match mode {
        MotionMode::Axial => v.z * v.z,
        MotionMode::Radial => 0.5 * (v.x * v.x + v.y * v.y),
    };
    ion.species.mass * v2
}

/// Running kinetic temperature over samples at or after `from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureMeter {
    pub mode: MotionMode,
    pub from: f64,
    sum: f64,
    count: usize,
}

impl TemperatureMeter {
    pub fn new(mode: MotionMode, from: f64) -> Self {
        TemperatureMeter { mode, from, sum: 0.0, count: 0 }
    }

    pub fn add(&mut self, ions: &[IonState]) {
        for ion in ions {
            self.sum += mode_energy(ion, self.mode);
            self.count += 1;
        }
    }

    /// m⟨v²⟩/k_B, or `None` before the first sample.
    pub fn temperature(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64 / BOLTZMANN)
    }
}

impl Observer for TemperatureMeter {
    fn sample(&mut self, time: f64, ions: &[IonState]) {
        if time >= self.from {
            self.add(ions);
        }
    }
}

/// Secular temperature (K) from the samples inside `window`, averaged over
/// samples and ions.
pub fn temperature_estimate(trajectory: &Trajectory, mode: MotionMode, window: (f64, f64)) -> Result<f64> {
    let (start, end) = window;
    let need = MIN_WINDOW_PERIODS * core::f64::consts::TAU / trajectory.trap.omega_axial;
    if !(end - start >= need) {
        return Err(Error::WindowTooShort { got: end - start, need });
    }
    let slack = 1e-12 * trajectory.t_end.abs().max(1e-9);
    if start < trajectory.t_start - slack || end > trajectory.t_end + slack {
        return Err(invalid("window", "must lie inside the trajectory"));
    }
    let mut meter = TemperatureMeter::new(mode, start);
    for (t, ions) in trajectory.times.iter().zip(&trajectory.states) {
        if *t >= start && *t <= end {
            meter.add(ions);
        }
    }
    meter.temperature().ok_or_else(|| invalid("window", "contains no samples"))
}
