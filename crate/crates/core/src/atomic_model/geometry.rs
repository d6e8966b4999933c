//! Polarization and field-orientation dependence of the coupling strength of
//! individual Δm components.
//!
//! Weights are normalized so that, for any geometry, they sum to one over the
//! 2k+1 components of a rank-k transition: the geometry only redistributes
//! line strength among Δm channels.

use nalgebra::{Complex, Vector3};

use super::angular::clebsch_gordan;
use crate::error::{Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

const UNIT_TOLERANCE: f64 = 1e-9;
const TRANSVERSE_TOLERANCE: f64 = 1e-6;

/// Polarization of a driving field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    /// Linear along the given unit vector (transverse to propagation).
    Linear(Vector3<f64>),
    /// Linear polarization rotating fast in the transverse plane; rates are
    /// the equal-weight average over polarization angle.
    Rotating,
}

pub(crate) fn check_unit(name: &'static str, v: &Vector3<f64>, tol: f64) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > tol || !norm.is_finite() {
        return Err(Error::NotUnitVector { name, norm });
    }
    Ok(())
}

/// Orthonormal frame with `z` along the quantization axis.
fn frame(axis: &Vector3<f64>) -> [Vector3<f64>; 3] {
    let z = *axis;
    let trial = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let x = (trial - z * z.dot(&trial)).normalize();
    let y = z.cross(&x);
    [x, y, z]
}

/// Any unit vector perpendicular to `v`.
pub fn perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    frame(&v.normalize())[0]
}

/// Spherical components (q = −1, 0, +1) of a real vector in the field frame.
fn spherical(frame: &[Vector3<f64>; 3], a: &Vector3<f64>) -> [Complex<f64>; 3] {
    let ax = a.dot(&frame[0]);
    let ay = a.dot(&frame[1]);
    let az = a.dot(&frame[2]);
    let s = 0.5f64.sqrt();
    [Complex::new(ax * s, -ay * s), Complex::new(az, 0.0), Complex::new(-ax * s, -ay * s)]
}

fn linear_weights(rank: u8, field_dir: &Vector3<f64>, k_dir: &Vector3<f64>, pol: &Vector3<f64>) -> [f64; 5] {
    let f = frame(field_dir);
    let eps = spherical(&f, pol);
    let mut w = [0.0; 5];
    match rank {
        1 => {
            for q in -1i32..=1 {
                w[(q + 2) as usize] = eps[(q + 1) as usize].norm_sqr();
            }
        }
        _ => {
            let n = spherical(&f, k_dir);
            for q in -2i32..=2 {
                let mut t = Complex::new(0.0, 0.0);
                for q1 in -1i32..=1 {
                    let q2 = q - q1;
                    if q2.abs() > 1 {
                        continue;
                    }
                    let cg = clebsch_gordan(2, 2 * q1, 2, 2 * q2, 4, 2 * q);
                    t += eps[(q1 + 1) as usize] * n[(q2 + 1) as usize] * cg;
                }
                // The rank-2 part of ε⊗n carries norm² 1/2 for ε ⟂ n.
                w[(q + 2) as usize] = 2.0 * t.norm_sqr();
            }
        }
    }
    w
}

/// Relative strengths of the Δm = q components, indexed by `q + 2`
/// (entries outside ±rank are zero).
pub fn component_weights(
    rank: u8,
    field_dir: &Vector3<f64>,
    k_dir: &Vector3<f64>,
    polarization: &Polarization,
) -> [f64; 5] {
    match polarization {
        Polarization::Linear(pol) => linear_weights(rank, field_dir, k_dir, pol),
        Polarization::Rotating => {
            // Rates are quadratic in ε, so the angle average equals the mean
            // over two orthogonal transverse polarizations.
            let e1 = perpendicular(k_dir);
            let e2 = k_dir.cross(&e1);
            let a = linear_weights(rank, field_dir, k_dir, &e1);
            let b = linear_weights(rank, field_dir, k_dir, &e2);
            let mut w = [0.0; 5];
            for i in 0..5 {
                w[i] = 0.5 * (a[i] + b[i]);
            }
            w
        }
    }
}

/// Relative coupling amplitude in [0, 1] of the Δm = `delta_m` component of a
/// quadrupole transition driven by a plane wave along `k_dir` with linear
/// polarization `pol_dir`, quantization axis `bfield_dir`.
pub fn quadrupole_geometry_factor(
    bfield_dir: &Vector3<f64>,
    k_dir: &Vector3<f64>,
    pol_dir: &Vector3<f64>,
    delta_m: i32,
) -> Result<f64> {
    check_unit("bfield_dir", bfield_dir, UNIT_TOLERANCE)?;
    check_unit("k_dir", k_dir, UNIT_TOLERANCE)?;
    check_unit("pol_dir", pol_dir, UNIT_TOLERANCE)?;
    let dot = pol_dir.dot(k_dir).abs();
    if dot > TRANSVERSE_TOLERANCE {
        return Err(Error::NotTransverse { dot });
    }
    if delta_m.abs() > 2 {
        return Err(crate::error::invalid("delta_m", "quadrupole components have |Δm| ≤ 2"));
    }
    let w = linear_weights(2, bfield_dir, k_dir, pol_dir);
    Ok(w[(delta_m + 2) as usize].sqrt())
}
