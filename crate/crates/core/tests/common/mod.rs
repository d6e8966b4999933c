#![allow(dead_code)]

use nalgebra::Vector3;
use quadcool_core::atomic_model::{build_ca40_scheme, BeamCoupling, LaserBeam, LevelScheme, Polarization};
use quadcool_core::constants::mhz;
use quadcool_core::mechanics::{BeamGeometry, GeometryTag, RadiationModel};
use quadcool_core::trap_md::TrapConfig;

/// 729 nm at 250 mW / 50 μm, 854 nm at 1 mW / 280 μm / −100 MHz, 866 nm
/// repumper at 1 mW.
pub fn beams(detuning_729: f64) -> Vec<LaserBeam> {
    let pw = |power, waist| BeamCoupling::PowerWaist { power, waist };
    vec![
        LaserBeam::new(729e-9, detuning_729, pw(0.25, 50e-6), Vector3::z(), Polarization::Linear(Vector3::x()))
            .unwrap(),
        LaserBeam::new(854e-9, mhz(-100.0), pw(1e-3, 280e-6), Vector3::z(), Polarization::Rotating).unwrap(),
        LaserBeam::new(866e-9, 0.0, pw(1e-3, 280e-6), Vector3::x(), Polarization::Rotating).unwrap(),
    ]
}

pub fn scheme() -> LevelScheme {
    build_ca40_scheme()
}

pub fn geometry(tag: GeometryTag) -> BeamGeometry {
    BeamGeometry::standard(tag, Vector3::z()).unwrap()
}

/// Model with the 729 nm laser `x` effective linewidths from the
/// light-shifted resonance.
pub fn model(tag: GeometryTag, x: f64) -> RadiationModel {
    let m = RadiationModel::new(&scheme(), &beams(0.0), &geometry(tag)).unwrap();
    let e = m.effective().unwrap();
    m.with_cooling_detuning(e.light_shift + x * e.linewidth)
}

pub fn grid(half_width: f64, step: f64) -> Vec<f64> {
    let n = (half_width / step).round() as i64;
    (-n..=n).map(|i| i as f64 * step).collect()
}

pub fn trap() -> TrapConfig {
    TrapConfig::ca40(mhz(0.4), mhz(0.95)).unwrap()
}
