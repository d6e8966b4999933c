use alloc::vec::Vec;

use nalgebra::{DMatrix, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::trap::{normal_modes, scaled_equilibrium, string_hessians, TrapConfig};
use crate::constants::{BOLTZMANN, CA40_ION_MASS, ELEMENTARY_CHARGE};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Mass and charge of an ion species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Species {
    pub mass: f64,
    pub charge: f64,
}

impl Species {
    pub const CA40: Species = Species { mass: CA40_ION_MASS, charge: ELEMENTARY_CHARGE };
}

/// Position and velocity of one ion. Unaddressed ions ignore the lasers and
/// are cooled only through the Coulomb coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub species: Species,
    pub addressed: bool,
}

impl IonState {
    pub fn at_rest(z: f64, species: Species, addressed: bool) -> Self {
        IonState { position: Vector3::new(0.0, 0.0, z), velocity: Vector3::zeros(), species, addressed }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|x| x.is_finite())
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.species.mass * self.velocity.norm_squared()
    }
}

/// Linear string at its equilibrium, ions in the order given by `ions`
/// (species and addressed flags are kept, positions and velocities reset).
pub fn string_at_rest(ions: &[IonState], trap: &TrapConfig) -> Result<Vec<IonState>> {
    if ions.is_empty() {
        return Err(invalid("ions", "need at least one ion"));
    }
    if ions.iter().any(|ion| (ion.species.charge - trap.charge).abs() > 1e-9 * trap.charge) {
        return Err(invalid("ions", "all ions must carry the trap's reference charge"));
    }
    let n = ions.len();
    trap.check_string(n)?;
    let l = trap.length_scale();
    let z: Vec<f64> = scaled_equilibrium(n)?.into_iter().map(|u| u * l).collect();
    let masses: Vec<f64> = ions.iter().map(|ion| ion.species.mass).collect();
    let charges: Vec<f64> = ions.iter().map(|ion| ion.species.charge).collect();
    // Light or heavy dopants change the radial modes; reject a string that
    // would buckle even if the reference ratio clears the threshold.
    let (_, radial) = string_hessians(trap, &z, &masses, &charges);
    if normal_modes(&radial, &masses).is_err() {
        let threshold = TrapConfig::zigzag_threshold(n)?;
        return Err(Error::StringUnstable { n, ratio: trap.omega_radial / trap.omega_axial, threshold });
    }
    Ok(ions.iter().zip(z).map(|(ion, z)| IonState::at_rest(z, ion.species, ion.addressed)).collect())
}

/// String in thermal equilibrium at `temperature` (K): positions drawn from
/// the normal modes about equilibrium, velocities from Maxwell–Boltzmann.
pub fn thermal_string(ions: &[IonState], trap: &TrapConfig, temperature: f64, seed: u64) -> Result<Vec<IonState>> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(invalid("temperature", "must be finite and non-negative"));
    }
    let mut state = string_at_rest(ions, trap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = state.iter().map(|ion| ion.position.z).collect();
    let masses: Vec<f64> = state.iter().map(|ion| ion.species.mass).collect();
    let charges: Vec<f64> = state.iter().map(|ion| ion.species.charge).collect();
    let (axial, radial) = string_hessians(trap, &z, &masses, &charges);
    let kt = BOLTZMANN * temperature;
    let mut displace = |stiffness: &DMatrix<f64>, component: usize, rng: &mut ChaCha8Rng| -> Result<()> {
        let (frequencies, vectors) = normal_modes(stiffness, &masses)?;
        for (mode, omega) in frequencies.iter().enumerate() {
            let g: f64 = StandardNormal.sample(rng);
            let q = g * kt.sqrt() / omega;
            for (i, ion) in state.iter_mut().enumerate() {
                ion.position[component] += vectors[(i, mode)] * q / masses[i].sqrt();
            }
        }
        Ok(())
    };
    displace(&axial, 2, &mut rng)?;
    displace(&radial, 0, &mut rng)?;
    displace(&radial, 1, &mut rng)?;
    for ion in state.iter_mut() {
        let sigma = (kt / ion.species.mass).sqrt();
        for c in 0..3 {
            let g: f64 = StandardNormal.sample(&mut rng);
            ion.velocity[c] = sigma * g;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::mhz;
    use alloc::vec;

    #[test]
    fn thermal_string_is_reproducible_and_ordered() {
        let trap = TrapConfig::ca40(mhz(0.4), mhz(0.95)).unwrap();
        let ions = vec![IonState::at_rest(0.0, Species::CA40, true); 4];
        let a = thermal_string(&ions, &trap, 1e-3, 7).unwrap();
        let b = thermal_string(&ions, &trap, 1e-3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].position.z > w[0].position.z));
        let cold = thermal_string(&ions, &trap, 0.0, 7).unwrap();
        assert_eq!(cold, string_at_rest(&ions, &trap).unwrap());
    }

    #[test]
    fn heavy_dopant_can_buckle_the_string() {
        // Radial confinement falls as 1/m; a very heavy ion in the centre
        // sees a weak radial well and the string zigzags.
        let trap = TrapConfig::ca40(mhz(0.4), mhz(0.95)).unwrap();
        let heavy = Species { mass: 20.0 * CA40_ION_MASS, charge: ELEMENTARY_CHARGE };
        let mut ions = vec![IonState::at_rest(0.0, Species::CA40, true); 4];
        ions[1].species = heavy;
        assert!(matches!(string_at_rest(&ions, &trap), Err(Error::StringUnstable { .. })));
    }
}
