//! Scan harnesses: fluorescence versus detuning, reordering statistics of
//! a string with a dark ion, magnetic-field scans, and the inferences drawn
//! from them.
//!
//! Every trial starts from a thermal string at the pre-cool temperature and
//! runs the stochastic dynamics for one measurement window. Detected counts
//! are the violet photon events times the detection efficiency, so changing
//! the efficiency rescales the counts of the same event log exactly. Trials
//! run in parallel; each has its own seed derived from the run seed and its
//! grid position, and results are merged in grid order.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use quadcool_core::atomic_model::{
    zeeman_lines, zeeman_shift, BeamCoupling, LaserBeam, LevelId, LevelScheme, LineGeometry, Polarization,
};
use quadcool_core::constants::HBAR;
use quadcool_core::internal_dynamics::Resolution;
use quadcool_core::mechanics::{BeamGeometry, ForceProfile, RadiationModel};
use quadcool_core::trap_md::{
    integrate, run, temperature_estimate, thermal_string, Cooling, IntegrationParams, IonState, JumpDetector,
    JumpReport, MotionMode, NoiseModel, Observer, PhotonEvent, Species, TabulatedCooling, Trajectory, TrapConfig,
    DEBOUNCE_PERIODS, MIN_WINDOW_PERIODS,
};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{config_error, Error, Result};

/// One detuning of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    /// Detuning from the light-shifted resonance (rad/s).
    pub detuning: f64,
    /// Detected counts per second of each trial.
    pub trial_rates: Vec<f64>,
    pub mean_rate: f64,
    /// Sample standard deviation of `trial_rates` (0 for a single trial).
    pub std_rate: f64,
    /// Fraction of trials in which the dark ion changed place.
    pub jump_fraction: Option<f64>,
    /// Scattering force inferred from `mean_rate` (N).
    pub inferred_force: f64,
}

/// Reordering statistics with every laser off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub fraction: f64,
    pub trials: usize,
    /// Expected fraction: a collision somewhere in the string within the
    /// window, after which the dark ion ends at a random place.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub baseline: Option<Baseline>,
    pub field: f64,
    pub efficiency: f64,
    /// Ions that scatter light.
    pub fluorescing_ions: usize,
    /// Γ′ and light shift of the cooling line at rest (rad/s).
    pub linewidth: f64,
    pub light_shift: f64,
    pub cooling_wavelength: f64,
    pub assist_wavelength: f64,
}

impl ScanResult {
    pub fn detunings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.detuning).collect()
    }

    pub fn mean_rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_rate).collect()
    }

    /// Index of the highest mean count rate.
    pub fn peak_index(&self) -> usize {
        self.points.iter().enumerate().max_by(|a, b| a.1.mean_rate.total_cmp(&b.1.mean_rate)).map_or(0, |(i, _)| i)
    }

    pub fn peak_rate(&self) -> f64 {
        self.points.get(self.peak_index()).map_or(0.0, |p| p.mean_rate)
    }
}

/// Scan at one magnetic field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldScan {
    pub field: f64,
    pub result: ScanResult,
    /// Full width at half maximum of the count-rate resonance (rad/s), if
    /// both half-maximum crossings lie on the grid.
    pub fwhm: Option<f64>,
    pub peak_rate: f64,
    /// Zeeman shifts of the coupled Δm = ±1 lines (rad/s), ascending.
    pub line_centers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Γ′ exceeds every secular frequency.
    Doppler,
    /// Γ′ lies between the secular frequencies or equals one of them.
    Marginal,
    /// Γ′ lies below every secular frequency: resolved sidebands, not modelled.
    Resolved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub linewidth: f64,
    pub light_shift: f64,
    pub omega_axial: f64,
    pub omega_radial: f64,
    pub regime: Regime,
}

/// Seed of one task, decorrelated from its neighbours (SplitMix64).
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_START: u64 = 1;
const STREAM_DYNAMICS: u64 = 2;
const STREAM_BASELINE: u64 = 3;

fn wavelength(scheme: &LevelScheme, a: LevelId, b: LevelId) -> Result<f64> {
    scheme
        .transition(a, b)
        .map(|t| t.wavelength)
        .ok_or_else(|| config_error(format!("level scheme lacks the {a}–{b} transition")))
}

/// The configured beams, with the cooling laser at `detuning_729` from the
/// unshifted line.
pub fn beams(cfg: &Config, scheme: &LevelScheme, detuning_729: f64) -> Result<Vec<LaserBeam>> {
    let l = &cfg.lasers;
    let pw = |power, waist| BeamCoupling::PowerWaist { power, waist };
    let beam = |wavelength, detuning, coupling, direction, polarization| {
        LaserBeam::new(wavelength, detuning, coupling, direction, polarization).map_err(Error::from)
    };
    Ok(vec![
        beam(
            wavelength(scheme, LevelId::S12, LevelId::D52)?,
            detuning_729,
            pw(l.power_729, l.waist_729),
            Vector3::z(),
            Polarization::Linear(Vector3::x()),
        )?,
        beam(
            wavelength(scheme, LevelId::D52, LevelId::P32)?,
            l.detuning_854,
            pw(l.power_854, l.waist_854),
            Vector3::z(),
            Polarization::Rotating,
        )?,
        beam(
            wavelength(scheme, LevelId::D32, LevelId::P12)?,
            l.detuning_866,
            pw(l.power_866, l.waist_866),
            Vector3::x(),
            Polarization::Rotating,
        )?,
    ])
}

pub fn geometry(cfg: &Config) -> Result<BeamGeometry> {
    Ok(BeamGeometry::standard(cfg.lasers.geometry, Vector3::z())?)
}

/// Radiation model of the configured beams in `field` (T, along the axis),
/// with the cooling laser on the unshifted line.
pub fn radiation_model(
    cfg: &Config,
    scheme: &LevelScheme,
    field: f64,
    resolution: Resolution,
) -> Result<RadiationModel> {
    Ok(RadiationModel::new(scheme, &beams(cfg, scheme, 0.0)?, &geometry(cfg)?)?
        .with_field(Vector3::z() * field)
        .with_resolution(resolution)
        .with_emission_factor(cfg.lasers.emission_factor)?)
}

pub fn trap(cfg: &Config) -> Result<TrapConfig> {
    Ok(TrapConfig::ca40(cfg.trap.axial, cfg.trap.radial)?)
}

/// Ions at rest: every ion fluoresces except the configured dark one.
pub fn ion_template(cfg: &Config) -> Vec<IonState> {
    (0..cfg.ions.count)
        .map(|i| {
            let dark = cfg.ions.dark == Some(i);
            let species = if dark { Species { mass: cfg.ions.dark_mass, ..Species::CA40 } } else { Species::CA40 };
            IonState::at_rest(0.0, species, !dark)
        })
        .collect()
}

pub fn noise(cfg: &Config) -> NoiseModel {
    NoiseModel {
        recoil: cfg.noise.recoil,
        collision_rate: cfg.noise.collision_rate,
        collision_energy: cfg.noise.collision_energy,
        heating_rate: cfg.noise.heating_rate,
    }
}

pub fn velocity_grid(cfg: &Config) -> Vec<f64> {
    let n = (cfg.scan.profile_span / cfg.scan.profile_step).round() as i64;
    (-n..=n).map(|i| i as f64 * cfg.scan.profile_step).collect()
}

/// Force profile at the configured `detuning_729` (relative to the
/// light-shifted resonance) and field.
pub fn force_profile(cfg: &Config) -> Result<ForceProfile> {
    let scheme = cfg.scheme()?;
    let model = radiation_model(cfg, &scheme, cfg.lasers.bfield, Resolution::Auto)?;
    let e = model.effective()?;
    Ok(model.with_cooling_detuning(e.light_shift + cfg.lasers.detuning_729).profile(&velocity_grid(cfg))?)
}

/// Counts photons and, with a dark ion, watches the ordering.
struct TrialObserver {
    photons: u64,
    jumps: Option<JumpDetector>,
}

impl Observer for TrialObserver {
    fn sample(&mut self, time: f64, ions: &[IonState]) {
        if let Some(d) = &mut self.jumps {
            d.sample(time, ions);
        }
    }

    fn photon(&mut self, _event: &PhotonEvent) {
        self.photons += 1;
    }
}

struct TrialOutcome {
    photons: u64,
    jumped: Option<bool>,
}

fn debounce(trap: &TrapConfig) -> f64 {
    DEBOUNCE_PERIODS * TAU / trap.omega_axial
}

fn run_trial(
    cfg: &Config,
    trap: &TrapConfig,
    cooling: Option<&dyn Cooling>,
    noise: &NoiseModel,
    start_seed: u64,
    seed: u64,
) -> Result<TrialOutcome> {
    let ions = thermal_string(&ion_template(cfg), trap, cfg.ions.precool, start_seed)?;
    let params = IntegrationParams {
        dt: IntegrationParams::max_dt(trap, &ions),
        t_start: 0.0,
        t_end: cfg.scan.window,
        sample_interval: cfg.scan.sample_interval,
        seed,
    };
    let jumps = match cfg.ions.dark {
        Some(dark) => Some(JumpDetector::new(ions.len(), dark, debounce(trap))?),
        None => None,
    };
    let mut observer = TrialObserver { photons: 0, jumps };
    run(&ions, trap, cooling, noise, &params, &mut observer)?;
    Ok(TrialOutcome { photons: observer.photons, jumped: observer.jumps.map(|d| d.report().jumped) })
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn momentum_per_cycle(cfg: &Config, cooling: f64, assist: f64) -> Result<f64> {
    Ok(HBAR * geometry(cfg)?.kick_per_cycle(cooling, assist).abs())
}

fn scan(cfg: &Config, field: f64, resolution: Resolution) -> Result<ScanResult> {
    let scheme = cfg.scheme()?;
    let trap = trap(cfg)?;
    let noise = noise(cfg);
    let model = radiation_model(cfg, &scheme, field, resolution)?;
    let e = model.effective()?;
    let detunings = cfg.detunings();
    let grid = velocity_grid(cfg);
    let tables: Vec<TabulatedCooling> = detunings
        .par_iter()
        .map(|&d| {
            let profile = model.with_cooling_detuning(e.light_shift + d).profile(&grid)?;
            Ok(TabulatedCooling::new(&profile)?)
        })
        .collect::<Result<_>>()?;

    let trials = cfg.scan.trials;
    let tasks: Vec<(usize, usize)> = (0..detunings.len()).flat_map(|i| (0..trials).map(move |j| (i, j))).collect();
    let outcomes: Vec<TrialOutcome> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let index = (i * trials + j) as u64;
            run_trial(
                cfg,
                &trap,
                Some(&tables[i]),
                &noise,
                derive_seed(cfg.scan.seed, STREAM_START, index),
                derive_seed(cfg.scan.seed, STREAM_DYNAMICS, index),
            )
        })
        .collect::<Result<_>>()?;

    let cooling_wavelength = wavelength(&scheme, LevelId::S12, LevelId::D52)?;
    let assist_wavelength = wavelength(&scheme, LevelId::D52, LevelId::P32)?;
    let kick = momentum_per_cycle(cfg, cooling_wavelength, assist_wavelength)?;
    let fluorescing = ion_template(cfg).iter().filter(|ion| ion.addressed).count();
    let efficiency = cfg.scan.efficiency;
    let points = detunings
        .iter()
        .zip(outcomes.chunks(trials))
        .map(|(&detuning, chunk)| {
            let trial_rates: Vec<f64> = chunk.iter().map(|o| o.photons as f64 * efficiency / cfg.scan.window).collect();
            let (mean_rate, std_rate) = mean_and_std(&trial_rates);
            let jump_fraction = cfg
                .ions
                .dark
                .map(|_| chunk.iter().filter(|o| o.jumped == Some(true)).count() as f64 / chunk.len() as f64);
            let inferred_force = inferred_force(mean_rate, efficiency, fluorescing, kick);
            ScanPoint { detuning, trial_rates, mean_rate, std_rate, jump_fraction, inferred_force }
        })
        .collect();
    Ok(ScanResult {
        points,
        baseline: None,
        field,
        efficiency,
        fluorescing_ions: fluorescing,
        linewidth: e.linewidth,
        light_shift: e.light_shift,
        cooling_wavelength,
        assist_wavelength,
    })
}

fn inferred_force(rate: f64, efficiency: f64, ions: usize, kick: f64) -> f64 {
    if rate == 0.0 || ions == 0 {
        return 0.0;
    }
    rate / efficiency / ions as f64 * kick
}

/// Fluorescence versus 729 nm detuning in the configured field.
pub fn detuning_scan(cfg: &Config) -> Result<ScanResult> {
    scan(cfg, cfg.lasers.bfield, Resolution::Auto)
}

/// Chance that the dark ion ends up elsewhere with all lasers off: some ion
/// of the string is hit within the window, melting it, and the dark ion
/// refreezes at one of the N places at random.
pub fn collision_baseline(ions: usize, collision_rate: f64, window: f64) -> f64 {
    let n = ions as f64;
    let hit = 1.0 - (-n * collision_rate * window).exp();
    hit * (n - 1.0) / n
}

/// Jump fraction versus detuning, plus a run with all lasers off.
pub fn jump_fraction_scan(cfg: &Config) -> Result<ScanResult> {
    if cfg.ions.dark.is_none() {
        return Err(config_error("jump scans need ions.dark"));
    }
    if cfg.scan.trials < 20 {
        return Err(config_error("jump scans need scan.trials >= 20"));
    }
    let mut result = detuning_scan(cfg)?;
    result.baseline = Some(baseline(cfg)?);
    Ok(result)
}

/// Reordering fraction with every laser off.
pub fn baseline(cfg: &Config) -> Result<Baseline> {
    let trap = trap(cfg)?;
    let noise = noise(cfg);
    let trials = cfg.scan.baseline_trials;
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|j| {
            run_trial(
                cfg,
                &trap,
                None,
                &noise,
                derive_seed(cfg.scan.seed, STREAM_BASELINE, 2 * j),
                derive_seed(cfg.scan.seed, STREAM_BASELINE, 2 * j + 1),
            )
        })
        .collect::<Result<_>>()?;
    let jumped = outcomes.iter().filter(|o| o.jumped == Some(true)).count();
    Ok(Baseline {
        fraction: jumped as f64 / trials as f64,
        trials,
        expected: collision_baseline(cfg.ions.count, cfg.noise.collision_rate, cfg.scan.window),
    })
}

/// Full width at half maximum of `rates` over `x`, with linear
/// interpolation of the crossings.
pub fn resonance_width(x: &[f64], rates: &[f64]) -> Option<f64> {
    let (peak, &max) = rates.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if max.is_nan() || max <= 0.0 {
        return None;
    }
    let half = max / 2.0;
    let crossing = |inside: usize, outside: usize| {
        let t = (rates[inside] - half) / (rates[inside] - rates[outside]);
        x[inside] + t * (x[outside] - x[inside])
    };
    let left = (0..peak).rev().find(|&i| rates[i] < half).map(|i| crossing(i + 1, i))?;
    let right = (peak + 1..rates.len()).find(|&i| rates[i] < half).map(|i| crossing(i - 1, i))?;
    Some(right - left)
}

/// Zeeman shifts of the Δm = ±1 components of the cooling line that the
/// configured geometry couples, for a field `field` along the axis.
pub fn coupled_line_shifts(cfg: &Config, scheme: &LevelScheme, field: f64) -> Result<Vec<f64>> {
    let g = geometry(cfg)?;
    let t = scheme
        .transition(LevelId::S12, LevelId::D52)
        .ok_or_else(|| config_error("level scheme lacks the S1/2–D5/2 transition"))?;
    let oriented = RadiationModel::new(scheme, &beams(cfg, scheme, 0.0)?, &g)?;
    let cooling = &oriented.beams()[0];
    let line_geometry =
        LineGeometry { field_dir: Vector3::z(), k_dir: *cooling.direction(), polarization: cooling.polarization };
    let mut shifts: Vec<f64> = zeeman_lines(scheme, t, Some(&line_geometry))
        .iter()
        .filter(|l| l.delta_m().abs() == 1 && l.geometry_factor > 1e-9)
        .map(|l| zeeman_shift(l, field))
        .collect();
    shifts.sort_by(f64::total_cmp);
    Ok(shifts)
}

/// One Zeeman-resolved detuning scan per field, all with the sublevel model.
pub fn bfield_scan(cfg: &Config, fields: &[f64]) -> Result<Vec<FieldScan>> {
    if !geometry(cfg)?.is_axial() {
        return Err(config_error("field scans need an axial beam geometry"));
    }
    let scheme = cfg.scheme()?;
    fields
        .iter()
        .map(|&field| {
            let result = scan(cfg, field, Resolution::Sublevels)?;
            Ok(FieldScan {
                field,
                fwhm: resonance_width(&result.detunings(), &result.mean_rates()),
                peak_rate: result.peak_rate(),
                line_centers: coupled_line_shifts(cfg, &scheme, field)?,
                result,
            })
        })
        .collect()
}

/// Peak scattering force inferred from fluorescence, as in the experiment:
/// peak rate / efficiency / ions × ħ|k₇₂₉ ± k₈₅₄| for `geometry`.
pub fn force_estimate(result: &ScanResult, geometry: &BeamGeometry) -> Result<f64> {
    let peak = result.peak_index();
    let rate = result.peak_rate();
    if rate == 0.0 {
        return Ok(0.0);
    }
    if peak == 0 || peak + 1 == result.points.len() {
        return Err(Error::Analysis("the scan does not bracket the fluorescence peak".into()));
    }
    let kick = HBAR * geometry.kick_per_cycle(result.cooling_wavelength, result.assist_wavelength).abs();
    Ok(inferred_force(rate, result.efficiency, result.fluorescing_ions, kick))
}

/// Compares Γ′ with the secular frequencies.
pub fn doppler_regime_check(cfg: &Config) -> Result<RegimeReport> {
    let scheme = cfg.scheme()?;
    let e = radiation_model(cfg, &scheme, 0.0, Resolution::Levels)?.effective()?;
    let (wz, wr) = (cfg.trap.axial, cfg.trap.radial);
    let tol = 1e-9;
    let g = e.linewidth;
    let regime = if g > wz.max(wr) * (1.0 + tol) {
        Regime::Doppler
    } else if g < wz.min(wr) * (1.0 - tol) {
        Regime::Resolved
    } else {
        Regime::Marginal
    };
    Ok(RegimeReport { linewidth: g, light_shift: e.light_shift, omega_axial: wz, omega_radial: wr, regime })
}

/// A single recorded trajectory of the configured string.
pub struct MdRun {
    pub trajectory: Trajectory,
    /// Kinetic temperatures over the second half of the run, if it spans
    /// enough axial periods.
    pub axial_temperature: Option<f64>,
    pub radial_temperature: Option<f64>,
    pub jumps: Option<JumpReport>,
}

pub fn md_run(cfg: &Config) -> Result<MdRun> {
    let scheme = cfg.scheme()?;
    let trap = trap(cfg)?;
    let model = radiation_model(cfg, &scheme, cfg.lasers.bfield, Resolution::Auto)?;
    let e = model.effective()?;
    let profile = model.with_cooling_detuning(e.light_shift + cfg.lasers.detuning_729).profile(&velocity_grid(cfg))?;
    let table = TabulatedCooling::new(&profile)?;
    let seed = cfg.scan.seed;
    let ions = thermal_string(&ion_template(cfg), &trap, cfg.ions.precool, derive_seed(seed, STREAM_START, 0))?;
    let params = IntegrationParams {
        dt: IntegrationParams::max_dt(&trap, &ions),
        t_start: 0.0,
        t_end: cfg.md.duration,
        sample_interval: cfg.md.sample_interval,
        seed: derive_seed(seed, STREAM_DYNAMICS, 0),
    };
    let trajectory = integrate(&ions, &trap, Some(&table), &noise(cfg), &params)?;
    let window = (cfg.md.duration / 2.0, cfg.md.duration);
    let enough = window.1 - window.0 >= MIN_WINDOW_PERIODS * TAU / trap.omega_axial;
    let temperature = |mode| if enough { temperature_estimate(&trajectory, mode, window).ok() } else { None };
    let jumps = match cfg.ions.dark {
        Some(dark) => Some(quadcool_core::trap_md::detect_jumps(&trajectory, dark)?),
        None => None,
    };
    Ok(MdRun {
        axial_temperature: temperature(MotionMode::Axial),
        radial_temperature: temperature(MotionMode::Radial),
        jumps,
        trajectory,
    })
}
