use alloc::vec::Vec;

use nalgebra::Vector3;

use super::geometry::{beam_roles, orient_beams, BeamGeometry, BeamRole};
use crate::atomic_model::{LaserBeam, LevelId, LevelScheme, Multipole};
use crate::constants::{wavenumber, BOLTZMANN, HBAR};
use crate::error::{invalid, Error, Result};
use crate::internal_dynamics::{
    build_rate_matrix, effective_two_level, scattering_rates, steady_state, EffectiveTwoLevel, ProcessKind, RateMatrix,
    Resolution,
};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Default emission-pattern factor: mean squared projection of an isotropic
/// emission direction on an axis.
pub const ISOTROPIC_EMISSION_FACTOR: f64 = 1.0 / 3.0;

/// Radiative response of one ion at one velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSample {
    /// Mean force (N).
    pub force: Vector3<f64>,
    /// Momentum diffusion along the trap axis, d⟨p²⟩/dt (kg²·m²/s³).
    pub diffusion: f64,
    /// Detected (violet) photon rate (s⁻¹).
    pub violet: f64,
    /// Rates of the individual detected channels, in scheme order.
    pub detected: Vec<f64>,
}

/// Everything that fixes the radiative force on an ion except its velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationModel {
    scheme: LevelScheme,
    beams: Vec<LaserBeam>,
    roles: Vec<BeamRole>,
    geometry: BeamGeometry,
    field: Vector3<f64>,
    resolution: Resolution,
    emission_factor: f64,
}

impl RadiationModel {
    /// Points `beams` along `geometry` and classifies them; a cooling and an
    /// assisting beam are required.
    pub fn new(scheme: &LevelScheme, beams: &[LaserBeam], geometry: &BeamGeometry) -> Result<Self> {
        let beams = orient_beams(scheme, beams, geometry)?;
        let roles = beam_roles(scheme, &beams)?;
        Ok(RadiationModel {
            scheme: scheme.clone(),
            beams,
            roles,
            geometry: *geometry,
            field: Vector3::zeros(),
            resolution: Resolution::Auto,
            emission_factor: ISOTROPIC_EMISSION_FACTOR,
        })
    }

    /// Magnetic field in T.
    pub fn with_field(mut self, field: Vector3<f64>) -> Self {
        self.field = field;
        self
    }

    pub fn with_resolution(mut self, resolution: Resolution) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_emission_factor(mut self, xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(invalid("emission_factor", "must lie in [0, 1]"));
        }
        self.emission_factor = xi;
        Ok(self)
    }

    /// Copy with the cooling beam detuned by `detuning` (rad/s) from the
    /// unshifted line.
    pub fn with_cooling_detuning(&self, detuning: f64) -> Self {
        let mut model = self.clone();
        for (beam, role) in model.beams.iter_mut().zip(&model.roles) {
            if *role == BeamRole::Cooling {
                beam.detuning = detuning;
            }
        }
        model
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn beams(&self) -> &[LaserBeam] {
        &self.beams
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    pub fn field(&self) -> &Vector3<f64> {
        &self.field
    }

    fn cooling_beam(&self) -> &LaserBeam {
        let i = self.roles.iter().position(|r| *r == BeamRole::Cooling).expect("checked at construction");
        &self.beams[i]
    }

    /// Cooling-beam detuning from the unshifted line (rad/s).
    pub fn cooling_detuning(&self) -> f64 {
        self.cooling_beam().detuning
    }

    /// Γ′ and light shift of the cooling line's upper level at rest.
    pub fn effective(&self) -> Result<EffectiveTwoLevel> {
        let cooling = self.scheme.transition_at(self.cooling_beam().wavelength, 1e-9)?;
        effective_two_level(&self.scheme, cooling, &self.beams)
    }

    /// Rate matrix at velocity `v`.
    pub fn rate_matrix(&self, v: &Vector3<f64>) -> Result<RateMatrix> {
        build_rate_matrix(&self.scheme, &self.beams, v, &self.field, self.resolution)
    }

    /// Whether the momentum of beam `index` is counted.
    fn pushes(&self, index: usize) -> bool {
        self.roles[index] != BeamRole::Repump || self.geometry.k866().is_some()
    }

    /// Force, axial diffusion and detected rate at velocity `v`.
    pub fn sample(&self, v: &Vector3<f64>) -> Result<ForceSample> {
        let m = self.rate_matrix(v)?;
        let p = steady_state(&m)?;
        let pops = p.values();
        let axis = self.geometry.axis();
        let mut force = Vector3::zeros();
        let mut diffusion = 0.0;
        for (index, beam) in self.beams.iter().enumerate() {
            if !self.pushes(index) {
                continue;
            }
            let k = beam.k_vector();
            force += k * (HBAR * m.net_absorption(pops, index));
            diffusion += k.dot(axis).powi(2) * m.gross_stimulated(pops, index);
        }
        for (index, t) in self.scheme.transitions().iter().enumerate() {
            let rate = m.flux(pops, |proc| proc.kind == ProcessKind::Spontaneous { transition: index });
            diffusion += self.emission_factor * wavenumber(t.wavelength).powi(2) * rate;
        }
        diffusion *= HBAR * HBAR;
        let rates = scattering_rates(&p, &self.scheme);
        let detected = detected_channels(&self.scheme).map(|i| rates.channels[i].rate).collect();
        Ok(ForceSample { force, diffusion, violet: rates.violet(), detected })
    }

    /// Tabulates the response for ion velocities `v·axis`, v from `grid`.
    pub fn profile(&self, grid: &[f64]) -> Result<ForceProfile> {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite()) {
            return Err(invalid("v_grid", "must be non-empty, finite and strictly increasing"));
        }
        let axis = *self.geometry.axis();
        let mut samples = Vec::with_capacity(grid.len());
        for &v in grid {
            samples.push(self.sample(&(axis * v))?);
        }
        let effective = self.effective()?;
        let k_dir = *self.cooling_beam().direction();
        Ok(ForceProfile {
            velocities: grid.to_vec(),
            force: samples.iter().map(|s| s.force.dot(&axis)).collect(),
            diffusion: samples.iter().map(|s| s.diffusion).collect(),
            force_vectors: samples.iter().map(|s| s.force).collect(),
            violet: samples.iter().map(|s| s.violet).collect(),
            detected_wavelengths: detected_channels(&self.scheme)
                .map(|i| self.scheme.transitions()[i].wavelength)
                .collect(),
            detected: samples.into_iter().map(|s| s.detected).collect(),
            axis,
            doppler_direction: k_dir,
            detuning: self.cooling_detuning(),
            field: self.field,
            geometry: self.geometry,
            linewidth: effective.linewidth,
            light_shift: effective.light_shift,
            cooling_wavenumber: wavenumber(self.cooling_beam().wavelength),
        })
    }
}

fn detected_channels(scheme: &LevelScheme) -> impl Iterator<Item = usize> + '_ {
    scheme
        .transitions()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.lower == LevelId::S12 && t.kind == Multipole::Dipole)
        .map(|(i, _)| i)
}

/// Mean radiative force (N) at velocity `v` in zero field.
pub fn mean_force(
    scheme: &LevelScheme,
    beams: &[LaserBeam],
    geometry: &BeamGeometry,
    v: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    Ok(RadiationModel::new(scheme, beams, geometry)?.sample(v)?.force)
}

/// Force and diffusion tabulated against axial velocity, with the cooling
/// beam at `detuning_729` from the unshifted line and field `field` (T).
pub fn force_profile(
    scheme: &LevelScheme,
    beams: &[LaserBeam],
    geometry: &BeamGeometry,
    detuning_729: f64,
    field: &Vector3<f64>,
    v_grid: &[f64],
) -> Result<ForceProfile> {
    RadiationModel::new(scheme, beams, geometry)?.with_field(*field).with_cooling_detuning(detuning_729).profile(v_grid)
}

/// Mean force and diffusion versus velocity along the trap axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    /// Axial velocities (m/s), strictly increasing.
    pub velocities: Vec<f64>,
    /// Axial force (N).
    pub force: Vec<f64>,
    /// Axial momentum diffusion d⟨p²⟩/dt (kg²·m²/s³).
    pub diffusion: Vec<f64>,
    /// Full force vectors (N).
    pub force_vectors: Vec<Vector3<f64>>,
    /// Detected photon rate (s⁻¹).
    pub violet: Vec<f64>,
    /// Wavelengths (m) of the detected channels.
    pub detected_wavelengths: Vec<f64>,
    /// Per grid point, the rate of each detected channel.
    pub detected: Vec<Vec<f64>>,
    pub axis: Vector3<f64>,
    /// Propagation direction of the cooling beam.
    pub doppler_direction: Vector3<f64>,
    /// Cooling-beam detuning from the unshifted line (rad/s).
    pub detuning: f64,
    /// Magnetic field (T).
    pub field: Vector3<f64>,
    pub geometry: BeamGeometry,
    /// Γ′ at rest (rad/s).
    pub linewidth: f64,
    /// Light shift of the cooling line at rest (rad/s).
    pub light_shift: f64,
    /// Cooling-beam wavenumber (m⁻¹).
    pub cooling_wavenumber: f64,
}

/// Profile values at one velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub force: Vector3<f64>,
    pub violet: f64,
    pub diffusion: f64,
}

impl ForceProfile {
    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    /// Axial velocity that produces the same cooling-beam Doppler shift as
    /// the full velocity `v`.
    pub fn equivalent_velocity(&self, v: &Vector3<f64>) -> f64 {
        self.doppler_direction.dot(v) / self.doppler_direction.dot(&self.axis)
    }

    /// Linear interpolation at axial velocity `v`; clamps outside the grid.
    pub fn interpolate(&self, v: f64) -> ProfilePoint {
        let n = self.velocities.len();
        let at = |i: usize| ProfilePoint {
            force: self.force_vectors[i],
            violet: self.violet[i],
            diffusion: self.diffusion[i],
        };
        if n == 1 || v <= self.velocities[0] {
            return at(0);
        }
        if v >= self.velocities[n - 1] {
            return at(n - 1);
        }
        let hi = self.velocities.partition_point(|&x| x <= v).min(n - 1);
        let lo = hi - 1;
        let t = (v - self.velocities[lo]) / (self.velocities[hi] - self.velocities[lo]);
        let (a, b) = (at(lo), at(hi));
        ProfilePoint {
            force: a.force * (1.0 - t) + b.force * t,
            violet: a.violet * (1.0 - t) + b.violet * t,
            diffusion: a.diffusion * (1.0 - t) + b.diffusion * t,
        }
    }

    /// Indices of local maxima of the axial cooling-force magnitude.
    pub fn force_extrema(&self) -> Vec<usize> {
        let f: Vec<f64> = self.force.iter().map(|x| x.abs()).collect();
        let peak = f.iter().cloned().fold(0.0, f64::max);
        (1..f.len().saturating_sub(1)).filter(|&i| f[i] > f[i - 1] && f[i] >= f[i + 1] && f[i] > 1e-6 * peak).collect()
    }
}

/// Friction and diffusion at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionDiffusion {
    /// α = −dF/dv at v = 0 (kg/s); positive for cooling.
    pub alpha: f64,
    /// d⟨p²⟩/dt at v = 0 (kg²·m²/s³).
    pub diffusion: f64,
}

impl FrictionDiffusion {
    /// Steady-state temperature D/(2α k_B), or `None` without cooling.
    pub fn temperature(&self) -> Option<f64> {
        (self.alpha > 0.0).then(|| self.diffusion / (2.0 * self.alpha * BOLTZMANN))
    }
}

/// α from a central difference around v = 0 and D(0) by interpolation.
pub fn friction_and_diffusion(profile: &ForceProfile) -> Result<FrictionDiffusion> {
    let v = &profile.velocities;
    let n = v.len();
    if n < 2 || !(v[0] < 0.0 && v[n - 1] > 0.0) {
        return Err(Error::GridDoesNotBracketZero);
    }
    let hi = v.partition_point(|&x| x <= 0.0);
    let (lo, hi) = if v[hi - 1] == 0.0 && hi < n { (hi - 2, hi) } else { (hi - 1, hi) };
    let spacing = (v[hi] - v[lo]) / (hi - lo) as f64;
    let dark = profile.force.iter().all(|f| *f == 0.0);
    let limit = profile.linewidth / (10.0 * profile.cooling_wavenumber);
    if !dark && spacing > limit {
        return Err(Error::GridTooCoarse { spacing, limit });
    }
    let alpha = -(profile.force[hi] - profile.force[lo]) / (v[hi] - v[lo]);
    Ok(FrictionDiffusion { alpha, diffusion: profile.interpolate(0.0).diffusion })
}

/// Largest contiguous velocity interval around the force peak where the
/// axial force magnitude stays at or above `threshold_fraction` × peak.
/// Edges are interpolated linearly between grid points.
pub fn capture_range(profile: &ForceProfile, threshold_fraction: f64) -> Result<(f64, f64)> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(invalid("threshold_fraction", "must lie in (0, 1)"));
    }
    let f: Vec<f64> = profile.force.iter().map(|x| x.abs()).collect();
    let (peak_index, peak) =
        f.iter().enumerate().fold((0, 0.0), |(bi, b), (i, &x)| if x > b { (i, x) } else { (bi, b) });
    if peak <= 0.0 {
        return Err(Error::BelowThreshold);
    }
    let threshold = threshold_fraction * peak;
    let v = &profile.velocities;
    let crossing = |inside: usize, outside: usize| {
        let t = (f[inside] - threshold) / (f[inside] - f[outside]);
        v[inside] + t * (v[outside] - v[inside])
    };
    let mut lo = peak_index;
    while lo > 0 && f[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = peak_index;
    while hi + 1 < f.len() && f[hi + 1] >= threshold {
        hi += 1;
    }
    let left = if lo > 0 { crossing(lo, lo - 1) } else { v[0] };
    let right = if hi + 1 < f.len() { crossing(hi, hi + 1) } else { v[f.len() - 1] };
    Ok((left, right))
}
