use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constants::{CA40_ION_MASS, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Largest string handled by the equilibrium solver.
pub const MAX_IONS: usize = 32;

/// Linear Paul trap in the pseudopotential approximation; the trap axis is z.
///
/// Frequencies refer to an ion of the reference `mass` and `charge`. An ion
/// of another species sees the same axial spring constant per unit charge
/// and a radial pseudopotential scaled by (q/q₀)²(m₀/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    /// Axial secular angular frequency (rad/s).
    pub omega_axial: f64,
    /// Radial secular angular frequency (rad/s).
    pub omega_radial: f64,
    /// Reference ion mass (kg).
    pub mass: f64,
    /// Reference ion charge (C).
    pub charge: f64,
}

impl TrapConfig {
    pub fn new(omega_axial: f64, omega_radial: f64, mass: f64, charge: f64) -> Result<Self> {
        for (name, value) in
            [("omega_axial", omega_axial), ("omega_radial", omega_radial), ("mass", mass), ("charge", charge)]
        {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(name, "must be finite and positive"));
            }
        }
        Ok(TrapConfig { omega_axial, omega_radial, mass, charge })
    }

    /// Trap for singly charged ⁴⁰Ca⁺.
    pub fn ca40(omega_axial: f64, omega_radial: f64) -> Result<Self> {
        TrapConfig::new(omega_axial, omega_radial, CA40_ION_MASS, ELEMENTARY_CHARGE)
    }

    /// Length unit ℓ = (q²/(4πε₀ m ω_z²))^(1/3) of the string.
    pub fn length_scale(&self) -> f64 {
        (self.charge * self.charge
            / (4.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY * self.mass * self.omega_axial.powi(2)))
        .cbrt()
    }

    /// Axial spring constant (N/m) for an ion of charge `charge`.
    pub fn axial_stiffness(&self, charge: f64) -> f64 {
        self.mass * self.omega_axial.powi(2) * charge / self.charge
    }

    /// Radial spring constant (N/m) for an ion of `mass` and `charge`.
    pub fn radial_stiffness(&self, mass: f64, charge: f64) -> f64 {
        let q = charge / self.charge;
        self.mass * self.omega_radial.powi(2) * q * q * self.mass / mass
    }

    /// Smallest ω_r/ω_z at which an `n`-ion string is stable against the
    /// zigzag transition.
    pub fn zigzag_threshold(n: usize) -> Result<f64> {
        if n <= 1 {
            return Ok(0.0);
        }
        let u = scaled_equilibrium(n)?;
        let mut c = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let k = 1.0 / (u[i] - u[j]).abs().powi(3);
                    c[(i, j)] = -k;
                    c[(i, i)] += k;
                }
            }
        }
        let lambda = SymmetricEigen::new(c).eigenvalues.max();
        Ok(lambda.sqrt())
    }

    /// Errors unless an `n`-ion string of reference ions is linear and stable.
    pub fn check_string(&self, n: usize) -> Result<()> {
        let threshold = TrapConfig::zigzag_threshold(n)?;
        let ratio = self.omega_radial / self.omega_axial;
        if n > 1 && ratio <= threshold {
            return Err(Error::StringUnstable { n, ratio, threshold });
        }
        Ok(())
    }
}

/// Gradient and Hessian of U = Σ uᵢ²/2 + Σ_{i<j} 1/|uᵢ − uⱼ| for ordered u.
fn gradient_hessian(u: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = u.len();
    let mut g = DVector::from_column_slice(u);
    let mut h = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = u[i] - u[j];
            g[i] -= d.signum() / (d * d);
            let k = 2.0 / d.abs().powi(3);
            h[(i, i)] += k;
            h[(i, j)] -= k;
        }
    }
    (g, h)
}

/// Equilibrium positions of `n` identical ions in units of ℓ, ascending.
pub fn scaled_equilibrium(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_IONS {
        return Err(invalid("n", alloc::format!("must lie in 1..={MAX_IONS}")));
    }
    // Start from an even spacing of roughly the right extent; the Hessian is
    // positive definite on ordered configurations, so Newton converges.
    let half_width = 0.8 * (n as f64).powf(0.56) * 1.1;
    let mut u: Vec<f64> =
        (0..n).map(|i| if n == 1 { 0.0 } else { -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64 }).collect();
    for _ in 0..200 {
        let (g, h) = gradient_hessian(&u);
        if g.amax() <= 1e-14 {
            return Ok(u);
        }
        let step = h.cholesky().ok_or(Error::NoConvergence("string Hessian lost definiteness"))?.solve(&g);
        // Halve the step until the ordering is preserved.
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x - scale * s).collect();
            if trial.windows(2).all(|w| w[1] > w[0]) {
                u = trial;
                break;
            }
            scale *= 0.5;
            if scale < 1e-12 {
                return Err(Error::NoConvergence("string ordering collapsed"));
            }
        }
    }
    let (g, _) = gradient_hessian(&u);
    if g.amax() <= 1e-12 {
        Ok(u)
    } else {
        Err(Error::NoConvergence("equilibrium positions"))
    }
}

/// Axial equilibrium positions (m) of an `n`-ion string, ascending.
pub fn equilibrium_positions(n: usize, trap: &TrapConfig) -> Result<Vec<f64>> {
    trap.check_string(n)?;
    let l = trap.length_scale();
    Ok(scaled_equilibrium(n)?.into_iter().map(|u| u * l).collect())
}

/// Hessians of the string potential at the equilibrium `z` (m) for ions of
/// the given masses and charges: (axial, radial) in N/m.
pub fn string_hessians(trap: &TrapConfig, z: &[f64], masses: &[f64], charges: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = z.len();
    let mut axial = DMatrix::zeros(n, n);
    let mut radial = DMatrix::zeros(n, n);
    let coulomb = 1.0 / (4.0 * core::f64::consts::PI * VACUUM_PERMITTIVITY);
    for i in 0..n {
        axial[(i, i)] = trap.axial_stiffness(charges[i]);
        radial[(i, i)] = trap.radial_stiffness(masses[i], charges[i]);
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = coulomb * charges[i] * charges[j] / (z[i] - z[j]).abs().powi(3);
            axial[(i, i)] += 2.0 * k;
            axial[(i, j)] -= 2.0 * k;
            radial[(i, i)] -= k;
            radial[(i, j)] += k;
        }
    }
    (axial, radial)
}

/// Normal modes of a stiffness matrix for the given masses: angular
/// frequencies and mass-weighted eigenvectors (columns).
pub fn normal_modes(stiffness: &DMatrix<f64>, masses: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = masses.len();
    let mut weighted = stiffness.clone();
    for i in 0..n {
        for j in 0..n {
            weighted[(i, j)] /= (masses[i] * masses[j]).sqrt();
        }
    }
    let eig = SymmetricEigen::new(weighted);
    let mut frequencies = vec![0.0; n];
    for (f, &l) in frequencies.iter_mut().zip(eig.eigenvalues.iter()) {
        if !(l > 0.0) {
            return Err(Error::NoConvergence("string has an unstable normal mode"));
        }
        *f = l.sqrt();
    }
    Ok((frequencies, eig.eigenvectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::mhz;
    use approx::assert_relative_eq;

    #[test]
    fn small_strings() {
        assert_eq!(scaled_equilibrium(1).unwrap(), vec![0.0]);
        let two = scaled_equilibrium(2).unwrap();
        assert_relative_eq!(two[1], 0.25f64.cbrt(), epsilon = 1e-13);
        let three = scaled_equilibrium(3).unwrap();
        assert_relative_eq!(three[2], 1.25f64.cbrt(), epsilon = 1e-13);
        assert!(three[1].abs() < 1e-15);
    }

    #[test]
    fn zigzag_thresholds() {
        assert_relative_eq!(TrapConfig::zigzag_threshold(2).unwrap(), 1.0, epsilon = 1e-12);
        // Three ions: ω_r/ω_z > √(12/5)^(1/2)·… = 1.5492.
        assert_relative_eq!(TrapConfig::zigzag_threshold(3).unwrap(), (2.4f64).sqrt(), epsilon = 1e-12);
        let four = TrapConfig::zigzag_threshold(4).unwrap();
        assert!((four - 2.038).abs() < 1e-3, "{four}");
    }

    #[test]
    fn single_ion_frequencies_do_not_hold_four_ions() {
        let trap = TrapConfig::ca40(mhz(0.56), mhz(0.95)).unwrap();
        assert!(matches!(trap.check_string(4), Err(Error::StringUnstable { .. })));
        assert!(trap.check_string(1).is_ok());
    }

    #[test]
    fn axial_modes_of_two_ions() {
        let trap = TrapConfig::ca40(mhz(0.4), mhz(0.95)).unwrap();
        let z = equilibrium_positions(2, &trap).unwrap();
        let m = [trap.mass; 2];
        let (axial, radial) = string_hessians(&trap, &z, &m, &[trap.charge; 2]);
        let (fa, _) = normal_modes(&axial, &m).unwrap();
        let mut fa = fa;
        fa.sort_by(f64::total_cmp);
        assert_relative_eq!(fa[0], mhz(0.4), max_relative = 1e-9);
        assert_relative_eq!(fa[1], mhz(0.4) * 3f64.sqrt(), max_relative = 1e-9);
        let (mut fr, _) = normal_modes(&radial, &m).unwrap();
        fr.sort_by(f64::total_cmp);
        let rocking = (mhz(0.95).powi(2) - mhz(0.4).powi(2)).sqrt();
        assert_relative_eq!(fr[0], rocking, max_relative = 1e-9);
        assert_relative_eq!(fr[1], mhz(0.95), max_relative = 1e-9);
    }
}
