use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::mechanics::{ForceProfile, RadiationModel};

/// Detected emission channels tracked per ion.
pub const MAX_CHANNELS: usize = 4;

/// Laser response of an addressed ion at a given velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalResponse {
    /// Mean radiative force (N).
    pub force: Vector3<f64>,
    /// Rate of photons emitted on the ground-state dipole lines (s⁻¹).
    pub violet: f64,
    /// Rate per detected channel, in the order of `channel_wavelengths`.
    pub channels: [f64; MAX_CHANNELS],
}

/// Anything that maps an ion velocity to its mean laser response.
pub trait Cooling {
    fn response(&self, velocity: &Vector3<f64>) -> Result<LocalResponse>;

    /// Wavelengths (m) of the detected channels.
    fn channel_wavelengths(&self) -> &[f64];

    /// Trap-axis direction the response was computed for.
    fn axis(&self) -> Vector3<f64>;
}

fn pack(rates: &[f64]) -> Result<[f64; MAX_CHANNELS]> {
    if rates.len() > MAX_CHANNELS {
        return Err(invalid("channels", "too many detected channels"));
    }
    let mut out = [0.0; MAX_CHANNELS];
    out[..rates.len()].copy_from_slice(rates);
    Ok(out)
}

/// Detected rates at axial velocity `v`, interpolated like the profile.
fn channel_rates(profile: &ForceProfile, v: f64) -> [f64; MAX_CHANNELS] {
    let grid = &profile.velocities;
    let n = grid.len();
    let mut channels = [0.0; MAX_CHANNELS];
    let mut put = |rates: &[f64], w: f64| {
        for (c, r) in channels.iter_mut().zip(rates) {
            *c += w * r;
        }
    };
    if n == 1 || v <= grid[0] {
        put(&profile.detected[0], 1.0);
    } else if v >= grid[n - 1] {
        put(&profile.detected[n - 1], 1.0);
    } else {
        let i = grid.partition_point(|&x| x <= v);
        let t = (v - grid[i - 1]) / (grid[i] - grid[i - 1]);
        put(&profile.detected[i - 1], 1.0 - t);
        put(&profile.detected[i], t);
    }
    channels
}

impl Cooling for ForceProfile {
    fn response(&self, velocity: &Vector3<f64>) -> Result<LocalResponse> {
        let v = self.equivalent_velocity(velocity);
        if self.detected_wavelengths.len() > MAX_CHANNELS {
            return Err(invalid("channels", "too many detected channels"));
        }
        let p = self.interpolate(v);
        Ok(LocalResponse { force: p.force, violet: p.violet, channels: channel_rates(self, v) })
    }

    fn channel_wavelengths(&self) -> &[f64] {
        &self.detected_wavelengths
    }

    fn axis(&self) -> Vector3<f64> {
        self.axis
    }
}

/// Live evaluation: one steady-state solve per call. Exact but slow.
pub struct LiveCooling {
    model: RadiationModel,
    wavelengths: Vec<f64>,
}

impl LiveCooling {
    pub fn new(model: RadiationModel) -> Result<Self> {
        let wavelengths = model.profile(&[0.0])?.detected_wavelengths;
        Ok(LiveCooling { model, wavelengths })
    }
}

impl Cooling for LiveCooling {
    fn response(&self, velocity: &Vector3<f64>) -> Result<LocalResponse> {
        let s = self.model.sample(velocity)?;
        Ok(LocalResponse { force: s.force, violet: s.violet, channels: pack(&s.detected)? })
    }

    fn channel_wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    fn axis(&self) -> Vector3<f64> {
        *self.model.geometry().axis()
    }
}

/// A force profile resampled onto a uniform grid for constant-time lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCooling {
    v0: f64,
    inverse_step: f64,
    /// Rows of (F_x, F_y, F_z, violet, channels…).
    rows: Vec<[f64; 4 + MAX_CHANNELS]>,
    /// Maps a velocity to the equivalent axial velocity by a dot product.
    doppler: Vector3<f64>,
    axis: Vector3<f64>,
    wavelengths: Vec<f64>,
}

impl TabulatedCooling {
    /// Largest table built when resampling a non-uniform profile.
    const MAX_ROWS: usize = 1 << 20;

    pub fn new(profile: &ForceProfile) -> Result<Self> {
        if profile.detected_wavelengths.len() > MAX_CHANNELS {
            return Err(invalid("channels", "too many detected channels"));
        }
        let v = &profile.velocities;
        let n = v.len();
        let (v0, step, count) = if n < 2 {
            (v[0], 1.0, 1)
        } else {
            let min_step = v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let span = v[n - 1] - v[0];
            let count = ((span / min_step).round() as usize + 1).min(Self::MAX_ROWS);
            (v[0], span / (count - 1) as f64, count)
        };
        let rows = (0..count)
            .map(|i| {
                let vel = v0 + i as f64 * step;
                let p = profile.interpolate(vel);
                let mut row = [0.0; 4 + MAX_CHANNELS];
                row[..3].copy_from_slice(p.force.as_slice());
                row[3] = p.violet;
                let channels = channel_rates(profile, vel);
                row[4..].copy_from_slice(&channels);
                row
            })
            .collect();
        let d = profile.doppler_direction;
        Ok(TabulatedCooling {
            v0,
            inverse_step: 1.0 / step,
            rows,
            doppler: d / d.dot(&profile.axis),
            axis: profile.axis,
            wavelengths: profile.detected_wavelengths.clone(),
        })
    }
}

impl Cooling for TabulatedCooling {
    fn response(&self, velocity: &Vector3<f64>) -> Result<LocalResponse> {
        let x = (self.doppler.dot(velocity) - self.v0) * self.inverse_step;
        let last = self.rows.len() - 1;
        let row = if !(x > 0.0) {
            self.rows[0]
        } else if x >= last as f64 {
            self.rows[last]
        } else {
            let i = x as usize;
            let t = x - i as f64;
            let (a, b) = (&self.rows[i], &self.rows[i + 1]);
            core::array::from_fn(|k| a[k] + (b[k] - a[k]) * t)
        };
        let mut channels = [0.0; MAX_CHANNELS];
        channels.copy_from_slice(&row[4..]);
        Ok(LocalResponse { force: Vector3::new(row[0], row[1], row[2]), violet: row[3], channels })
    }

    fn channel_wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    fn axis(&self) -> Vector3<f64> {
        self.axis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic_model::{build_ca40_scheme, BeamCoupling, LaserBeam, Polarization};
    use crate::constants::mhz;
    use crate::mechanics::{BeamGeometry, GeometryTag};
    use approx::assert_relative_eq;

    #[test]
    fn table_matches_profile() {
        let s = build_ca40_scheme();
        let pw = |power, waist| BeamCoupling::PowerWaist { power, waist };
        let beams = [
            LaserBeam::new(729e-9, 0.0, pw(0.25, 50e-6), Vector3::z(), Polarization::Linear(Vector3::x())).unwrap(),
            LaserBeam::new(854e-9, mhz(-100.0), pw(1e-3, 280e-6), Vector3::z(), Polarization::Rotating).unwrap(),
            LaserBeam::new(866e-9, 0.0, pw(1e-3, 100e-6), Vector3::x(), Polarization::Rotating).unwrap(),
        ];
        let g = BeamGeometry::standard(GeometryTag::Angled45, Vector3::z()).unwrap();
        let m = RadiationModel::new(&s, &beams, &g).unwrap();
        let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.05).collect();
        let p = m.with_cooling_detuning(m.effective().unwrap().light_shift - mhz(0.5)).profile(&grid).unwrap();
        let table = TabulatedCooling::new(&p).unwrap();
        for v in [Vector3::new(0.3, -0.2, 0.77), Vector3::new(0.0, 0.0, -9.0), Vector3::new(1.0, 0.0, 2.0)] {
            let a = p.response(&v).unwrap();
            let b = table.response(&v).unwrap();
            assert_relative_eq!(a.force, b.force, max_relative = 1e-9, epsilon = 1e-30);
            assert_relative_eq!(a.violet, b.violet, max_relative = 1e-9);
            for (x, y) in a.channels.iter().zip(&b.channels) {
                assert_relative_eq!(x, y, max_relative = 1e-9);
            }
        }
    }
}
