use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, UnitSphere};

use super::cooling::{Cooling, LocalResponse};
use super::state::IonState;
use super::trap::TrapConfig;
use crate::constants::{wavenumber, ELECTRON_VOLT, HBAR, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Stochastic terms of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Draw photon events (and their recoils) instead of applying the mean
    /// force continuously.
    pub recoil: bool,
    /// Background-gas collision rate per ion (s⁻¹).
    pub collision_rate: f64,
    /// Mean kinetic energy delivered per collision (J).
    pub collision_energy: f64,
    /// Heating rate in axial quanta per second, applied as white noise.
    pub heating_rate: f64,
}

impl NoiseModel {
    /// Deterministic dynamics: mean force only.
    pub const NONE: NoiseModel =
        NoiseModel { recoil: false, collision_rate: 0.0, collision_energy: 0.0, heating_rate: 0.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("collision_rate", self.collision_rate),
            ("collision_energy", self.collision_energy),
            ("heating_rate", self.heating_rate),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { recoil: true, collision_rate: 0.05, collision_energy: 0.1 * ELECTRON_VOLT, heating_rate: 0.0 }
    }
}

/// Time stepping and sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationParams {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Spacing of recorded samples (s); the final state is always sampled.
    pub sample_interval: f64,
    pub seed: u64,
}

impl IntegrationParams {
    /// Largest step allowed for `trap`.
    pub fn max_dt(trap: &TrapConfig, ions: &[IonState]) -> f64 {
        let mut omega = trap.omega_axial.max(trap.omega_radial);
        for ion in ions {
            let m = ion.species.mass;
            omega = omega
                .max((trap.axial_stiffness(ion.species.charge) / m).sqrt())
                .max((trap.radial_stiffness(m, ion.species.charge) / m).sqrt());
        }
        1.0 / (50.0 * omega)
    }
}

/// One detected photon and the momentum its cycle delivered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonEvent {
    pub time: f64,
    pub ion: usize,
    /// Wavelength (m) of the detected channel.
    pub wavelength: f64,
    /// Momentum transferred to the ion (kg·m/s).
    pub impulse: Vector3<f64>,
}

/// A background-gas collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub time: f64,
    pub ion: usize,
    /// Kinetic energy of the kick (J).
    pub energy: f64,
}

/// Receives the integrator's output as it is produced.
pub trait Observer {
    fn sample(&mut self, _time: f64, _ions: &[IonState]) {}
    fn photon(&mut self, _event: &PhotonEvent) {}
    fn collision(&mut self, _event: &CollisionEvent) {}
}

/// Discards everything.
impl Observer for () {}

/// Recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub trap: TrapConfig,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
    pub times: Vec<f64>,
    /// Ion states at each sample time.
    pub states: Vec<Vec<IonState>>,
    pub photons: Vec<PhotonEvent>,
    pub collisions: Vec<CollisionEvent>,
}

impl Trajectory {
    pub fn ion_count(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// Axial positions of every ion at sample `index`.
    pub fn axial_positions(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.states[index].iter().map(|ion| ion.position.z)
    }
}

struct Recorder<'a> {
    trajectory: &'a mut Trajectory,
}

impl Observer for Recorder<'_> {
    fn sample(&mut self, time: f64, ions: &[IonState]) {
        self.trajectory.times.push(time);
        self.trajectory.states.push(ions.to_vec());
    }
    fn photon(&mut self, event: &PhotonEvent) {
        self.trajectory.photons.push(*event);
    }
    fn collision(&mut self, event: &CollisionEvent) {
        self.trajectory.collisions.push(*event);
    }
}

/// Integrates and records every sample and event.
pub fn integrate(
    ions: &[IonState],
    trap: &TrapConfig,
    cooling: Option<&dyn Cooling>,
    noise: &NoiseModel,
    params: &IntegrationParams,
) -> Result<Trajectory> {
    let mut trajectory = Trajectory {
        trap: *trap,
        seed: params.seed,
        t_start: params.t_start,
        t_end: params.t_end,
        times: Vec::new(),
        states: Vec::new(),
        photons: Vec::new(),
        collisions: Vec::new(),
    };
    run(ions, trap, cooling, noise, params, &mut Recorder { trajectory: &mut trajectory })?;
    Ok(trajectory)
}

/// Conservative accelerations with the per-ion and per-pair constants
/// precomputed.
struct ForceField {
    /// (k_r/m, k_z/m) per ion.
    springs: Vec<(f64, f64)>,
    /// (i, j, qᵢqⱼ/(4πε₀ mᵢ), qᵢqⱼ/(4πε₀ mⱼ)) per pair.
    pairs: Vec<(usize, usize, f64, f64)>,
}

impl ForceField {
    fn new(ions: &[IonState], trap: &TrapConfig) -> Self {
        let coulomb = 1.0 / (4.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY);
        let springs = ions
            .iter()
            .map(|ion| {
                let (m, q) = (ion.species.mass, ion.species.charge);
                (trap.radial_stiffness(m, q) / m, trap.axial_stiffness(q) / m)
            })
            .collect();
        let mut pairs = Vec::new();
        for i in 0..ions.len() {
            for j in i + 1..ions.len() {
                let c = coulomb * ions[i].species.charge * ions[j].species.charge;
                pairs.push((i, j, c / ions[i].species.mass, c / ions[j].species.mass));
            }
        }
        ForceField { springs, pairs }
    }

    fn accelerations(&self, ions: &[IonState], out: &mut [Vector3<f64>]) {
        for ((a, ion), &(wr, wz)) in out.iter_mut().zip(ions).zip(&self.springs) {
            let r = ion.position;
            *a = Vector3::new(-wr * r.x, -wr * r.y, -wz * r.z);
        }
        for &(i, j, ci, cj) in &self.pairs {
            let d = ions[i].position - ions[j].position;
            let r2 = d.norm_squared();
            let d = d / (r2 * r2.sqrt());
            out[i] += d * ci;
            out[j] -= d * cj;
        }
    }
}

/// Trap plus Coulomb potential energy plus kinetic energy (J).
pub fn total_energy(ions: &[IonState], trap: &TrapConfig) -> f64 {
    let coulomb = 1.0 / (4.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY);
    let mut e = 0.0;
    for (i, ion) in ions.iter().enumerate() {
        let r = ion.position;
        let kr = trap.radial_stiffness(ion.species.mass, ion.species.charge);
        e += ion.kinetic_energy()
            + 0.5 * kr * (r.x * r.x + r.y * r.y)
            + 0.5 * trap.axial_stiffness(ion.species.charge) * r.z * r.z;
        for other in &ions[i + 1..] {
            e += coulomb * ion.species.charge * other.species.charge / (r - other.position).norm();
        }
    }
    e
}

/// Draws photon events for one ion over one step.
struct PhotonSampler {
    /// Integrated rate since the last event.
    accumulated: f64,
    threshold: f64,
}

impl PhotonSampler {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        PhotonSampler { accumulated: 0.0, threshold: Exp1.sample(rng) }
    }

    /// Returns the impulses of the events fired during `dt`, passing each to
    /// `emit` with its channel index.
    fn step(
        &mut self,
        response: &LocalResponse,
        wavelengths: &[f64],
        dt: f64,
        rng: &mut ChaCha8Rng,
        mut emit: impl FnMut(usize, Vector3<f64>),
    ) {
        if !(response.violet > 0.0) {
            return;
        }
        self.accumulated += response.violet * dt;
        while self.accumulated >= self.threshold {
            self.accumulated -= self.threshold;
            self.threshold = Exp1.sample(rng);
            let total: f64 = response.channels[..wavelengths.len()].iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut channel = 0;
            for (c, &r) in response.channels[..wavelengths.len()].iter().enumerate() {
                channel = c;
                if u < r {
                    break;
                }
                u -= r;
            }
            let n: [f64; 3] = UnitSphere.sample(rng);
            let recoil = Vector3::from(n) * (HBAR * wavenumber(wavelengths[channel]));
            emit(channel, response.force / response.violet + recoil);
        }
    }
}

/// Statistics of the momentum delivered to an ion held at fixed velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseStatistics {
    pub duration: f64,
    pub events: usize,
    pub total: Vector3<f64>,
    /// Σ impulse² per component, for the statistical error of `total`.
    pub sum_squares: Vector3<f64>,
}

impl ImpulseStatistics {
    pub fn mean_force(&self) -> Vector3<f64> {
        self.total / self.duration
    }

    /// One-σ error of `mean_force`, treating events as a compound Poisson
    /// process.
    pub fn standard_error(&self) -> Vector3<f64> {
        self.sum_squares.map(|s| s.sqrt() / self.duration)
    }
}

/// Runs the photon-event sampler of the integrator at a fixed velocity.
pub fn impulse_statistics(
    cooling: &dyn Cooling,
    velocity: &Vector3<f64>,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<ImpulseStatistics> {
    if !(dt > 0.0) || !(duration >= dt) {
        return Err(invalid("duration", "need duration ≥ dt > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let response = cooling.response(velocity)?;
    let mut sampler = PhotonSampler::new(&mut rng);
    let steps = (duration / dt).round() as usize;
    let mut stats = ImpulseStatistics {
        duration: steps as f64 * dt,
        events: 0,
        total: Vector3::zeros(),
        sum_squares: Vector3::zeros(),
    };
    for _ in 0..steps {
        sampler.step(&response, cooling.channel_wavelengths(), dt, &mut rng, |_, p| {
            stats.events += 1;
            stats.total += p;
            stats.sum_squares += p.component_mul(&p);
        });
    }
    Ok(stats)
}

/// Integrates the string with a velocity-Verlet step for the conservative
/// forces followed by the laser, collision and heating kicks. Returns the
/// final state; samples and events go to `observer`.
pub fn run(
    ions: &[IonState],
    trap: &TrapConfig,
    cooling: Option<&dyn Cooling>,
    noise: &NoiseModel,
    params: &IntegrationParams,
    observer: &mut dyn Observer,
) -> Result<Vec<IonState>> {
    noise.validate()?;
    if ions.is_empty() {
        return Err(invalid("ions", "need at least one ion"));
    }
    if let Some(index) = ions.iter().position(|ion| !ion.is_finite()) {
        return Err(Error::NonFinite { time: params.t_start, ion: index });
    }
    let limit = IntegrationParams::max_dt(trap, ions);
    if !(params.dt > 0.0) || params.dt > limit {
        return Err(Error::TimeStepTooLarge { dt: params.dt, limit });
    }
    if !(params.t_end > params.t_start) || !(params.sample_interval > 0.0) {
        return Err(invalid("t_end", "need t_end > t_start and a positive sample interval"));
    }
    if let Some(c) = cooling {
        if c.axis().cross(&Vector3::z()).norm() > 1e-9 {
            return Err(invalid("cooling", "response must be computed for the trap axis (z)"));
        }
    }

    let n = ions.len();
    let dt = params.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = ions.to_vec();
    let mut acc = vec![Vector3::zeros(); n];
    let field = ForceField::new(&state, trap);
    field.accelerations(&state, &mut acc);
    let mut samplers: Vec<PhotonSampler> = (0..n).map(|_| PhotonSampler::new(&mut rng)).collect();
    let heating_sigma: Vec<f64> = state
        .iter()
        .map(|ion| {
            let power = HBAR * trap.omega_axial * noise.heating_rate;
            (2.0 * power * dt / (3.0 * ion.species.mass)).sqrt()
        })
        .collect();
    let collision_probability = -(-noise.collision_rate * dt).exp_m1();

    let steps = ((params.t_end - params.t_start) / dt).ceil() as u64;
    let sample_every = ((params.sample_interval / dt).round() as u64).max(1);
    observer.sample(params.t_start, &state);

    for step in 1..=steps {
        let t = if step == steps { params.t_end } else { params.t_start + step as f64 * dt };
        for (ion, a) in state.iter_mut().zip(&acc) {
            ion.velocity += a * (0.5 * dt);
            ion.position += ion.velocity * dt;
        }
        field.accelerations(&state, &mut acc);
        for (ion, a) in state.iter_mut().zip(&acc) {
            ion.velocity += a * (0.5 * dt);
        }

        if let Some(cooling) = cooling {
            let wavelengths = cooling.channel_wavelengths();
            for (i, ion) in state.iter_mut().enumerate() {
                if !ion.addressed {
                    continue;
                }
                let response = cooling.response(&ion.velocity)?;
                if noise.recoil {
                    let mass = ion.species.mass;
                    let mut kick = Vector3::zeros();
                    samplers[i].step(&response, wavelengths, dt, &mut rng, |channel, impulse| {
                        kick += impulse;
                        observer.photon(&PhotonEvent { time: t, ion: i, wavelength: wavelengths[channel], impulse });
                    });
                    ion.velocity += kick / mass;
                } else {
                    ion.velocity += response.force * (dt / ion.species.mass);
                }
            }
        }

        if noise.collision_rate > 0.0 {
            for (i, ion) in state.iter_mut().enumerate() {
                if rng.random::<f64>() < collision_probability {
                    let e: f64 = Exp1.sample(&mut rng);
                    let energy = e * noise.collision_energy;
                    let dir: [f64; 3] = UnitSphere.sample(&mut rng);
                    ion.velocity += Vector3::from(dir) * (2.0 * energy / ion.species.mass).sqrt();
                    observer.collision(&CollisionEvent { time: t, ion: i, energy });
                }
            }
        }

        if noise.heating_rate > 0.0 {
            for (ion, sigma) in state.iter_mut().zip(&heating_sigma) {
                for c in 0..3 {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    ion.velocity[c] += sigma * g;
                }
            }
        }

        if let Some(index) = state.iter().position(|ion| !ion.is_finite()) {
            return Err(Error::NonFinite { time: t, ion: index });
        }
        if step % sample_every == 0 || step == steps {
            observer.sample(t, &state);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::mhz;
    use crate::trap_md::Species;
    use approx::assert_relative_eq;

    fn trap() -> TrapConfig {
        TrapConfig::ca40(mhz(0.4), mhz(0.95)).unwrap()
    }

    #[test]
    fn rejects_large_steps() {
        let ions = [IonState::at_rest(0.0, Species::CA40, true)];
        let dt = 1.0 / (40.0 * mhz(0.95));
        let params = IntegrationParams { dt, t_start: 0.0, t_end: 1e-6, sample_interval: 1e-7, seed: 0 };
        assert!(matches!(
            run(&ions, &trap(), None, &NoiseModel::NONE, &params, &mut ()),
            Err(Error::TimeStepTooLarge { .. })
        ));
    }

    #[test]
    fn harmonic_oscillation_of_one_ion() {
        let trap = trap();
        let z0 = 1e-6;
        let ions = [IonState::at_rest(z0, Species::CA40, false)];
        let period = core::f64::consts::TAU / trap.omega_axial;
        let dt = period / 2000.0;
        let params = IntegrationParams { dt, t_start: 0.0, t_end: 2.25 * period, sample_interval: period, seed: 0 };
        let end = run(&ions, &trap, None, &NoiseModel::NONE, &params, &mut ()).unwrap();
        // A quarter period after two full ones: at the origin moving at −ω z₀.
        assert!(end[0].position.z.abs() < 1e-4 * z0);
        assert_relative_eq!(end[0].velocity.z, -trap.omega_axial * z0, max_relative = 1e-4);
    }

    #[test]
    fn collisions_are_recorded_and_reproducible() {
        let trap = trap();
        let ions = [IonState::at_rest(0.0, Species::CA40, false)];
        let noise = NoiseModel { collision_rate: 2e5, ..NoiseModel::default() };
        let params = IntegrationParams {
            dt: IntegrationParams::max_dt(&trap, &ions),
            t_start: 0.0,
            t_end: 1e-5,
            sample_interval: 1e-6,
            seed: 3,
        };
        let a = integrate(&ions, &trap, None, &noise, &params).unwrap();
        let b = integrate(&ions, &trap, None, &noise, &params).unwrap();
        assert_eq!(a, b);
        assert!(!a.collisions.is_empty());
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*a.times.last().unwrap(), params.t_end);
    }
}
