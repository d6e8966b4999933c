//! Physical constants in SI units (CODATA 2018).

use core::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Mass of a ⁴⁰Ca⁺ ion (neutral-atom mass less one electron).
pub const CA40_ION_MASS: f64 = 39.962_590_863 * ATOMIC_MASS_UNIT - 9.109_383_701_5e-31;

pub const TWO_PI: f64 = 2.0 * PI;

/// Coulomb constant times e², in J·m.
pub const COULOMB_E2: f64 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY);

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts a frequency in MHz to an angular frequency in rad/s.
#[inline]
pub fn mhz(value: f64) -> f64 {
    TWO_PI * value * 1e6
}

/// Wavenumber 2π/λ in m⁻¹.
#[inline]
pub fn wavenumber(wavelength: f64) -> f64 {
    TWO_PI / wavelength
}
