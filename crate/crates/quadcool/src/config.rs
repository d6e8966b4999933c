//! Run configuration: a sectioned key = value file with unit suffixes.
//!
//! ```text
//! [lasers]
//! geometry = counter
//! power_729 = 250 mW
//! bfield = 1.2 G
//!
//! [scan]
//! detuning_start = -6 MHz
//! trials = 20
//! ```
//!
//! Every key has a default from the built-in preset; unknown keys, missing
//! units and units of the wrong dimension are errors. Values are stored in
//! base SI units with angular frequencies in rad/s.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::{Ini, ParseOption};
use quadcool_core::atomic_model::{build_ca40_scheme_with, LevelScheme, SchemeParams};
use quadcool_core::constants::{mhz, CA40_ION_MASS, ELECTRON_VOLT};
use quadcool_core::mechanics::{GeometryTag, ISOTROPIC_EMISSION_FACTOR};
use quadcool_core::trap_md::MAX_IONS;

use crate::error::{config_error, Error, Result};
use crate::units::{
    format_number, format_quantity, format_quantity_list, parse_quantity, parse_quantity_list, Dimension,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Lasers {
    pub geometry: GeometryTag,
    /// 729 nm detuning from the light-shifted resonance, for single runs.
    pub detuning_729: f64,
    pub power_729: f64,
    pub waist_729: f64,
    pub power_854: f64,
    pub waist_854: f64,
    /// 854 nm detuning from the unshifted line.
    pub detuning_854: f64,
    pub power_866: f64,
    pub waist_866: f64,
    pub detuning_866: f64,
    /// Magnetic field along the trap axis (T).
    pub bfield: f64,
    pub emission_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub g_s: f64,
    pub p12_to_d32: f64,
    /// Level-scheme file replacing the built-in ⁴⁰Ca⁺ constants.
    pub scheme: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trap {
    pub axial: f64,
    pub radial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ions {
    pub count: usize,
    /// Index of the non-fluorescing ion, if any.
    pub dark: Option<usize>,
    pub dark_mass: f64,
    pub precool: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    /// Detuning grid relative to the light-shifted resonance (rad/s).
    pub detuning_start: f64,
    pub detuning_stop: f64,
    pub detuning_step: f64,
    pub window: f64,
    pub trials: usize,
    pub efficiency: f64,
    pub seed: u64,
    pub bfields: Vec<f64>,
    pub baseline_trials: usize,
    /// Force tables span ±`profile_span` with spacing `profile_step` (m/s).
    pub profile_span: f64,
    pub profile_step: f64,
    pub sample_interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Md {
    pub duration: f64,
    pub sample_interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    pub recoil: bool,
    pub collision_rate: f64,
    pub collision_energy: f64,
    /// Axial heating in motional quanta per second.
    pub heating_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub lasers: Lasers,
    pub atom: Atom,
    pub trap: Trap,
    pub ions: Ions,
    pub scan: Scan,
    pub md: Md,
    pub noise: Noise,
}

impl Default for Config {
    /// The built-in preset. The trap is softened axially to 0.40 MHz so that
    /// a four-ion string stays linear at 0.95 MHz radial confinement.
    fn default() -> Self {
        Config {
            lasers: Lasers {
                geometry: GeometryTag::CoPropagating,
                detuning_729: mhz(-0.7),
                power_729: 0.25,
                waist_729: 50e-6,
                power_854: 1e-3,
                waist_854: 280e-6,
                detuning_854: mhz(-100.0),
                power_866: 1e-3,
                waist_866: 280e-6,
                detuning_866: 0.0,
                bfield: 0.0,
                emission_factor: ISOTROPIC_EMISSION_FACTOR,
            },
            atom: Atom { g_s: SchemeParams::DEFAULT_G_S, p12_to_d32: SchemeParams::DEFAULT_P12_TO_D32, scheme: None },
            trap: Trap { axial: mhz(0.40), radial: mhz(0.95) },
            ions: Ions { count: 4, dark: None, dark_mass: CA40_ION_MASS, precool: 2e-3 },
            scan: Scan {
                detuning_start: mhz(-6.0),
                detuning_stop: mhz(2.0),
                detuning_step: mhz(0.25),
                window: 0.2,
                trials: 20,
                efficiency: 3.6e-4,
                seed: 1,
                bfields: vec![0.0, 0.4e-4, 0.8e-4, 1.2e-4, 3e-4],
                baseline_trials: 50,
                profile_span: 40.0,
                profile_step: 0.05,
                sample_interval: 1e-6,
            },
            md: Md { duration: 5e-3, sample_interval: 1e-6 },
            noise: Noise {
                recoil: true,
                collision_rate: 0.05,
                collision_energy: 0.1 * ELECTRON_VOLT,
                heating_rate: 0.0,
            },
        }
    }
}

fn quantity(section: &str, key: &str, value: &str, dim: Dimension) -> Result<f64> {
    parse_quantity(value, dim).map_err(|e| config_error(format!("{section}.{key} = {value}: {e}")))
}

fn integer<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| config_error(format!("{section}.{key} = {value}: expected an integer")))
}

fn boolean(section: &str, key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(config_error(format!("{section}.{key} = {value}: expected true or false"))),
    }
}

fn optional<T>(value: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    match value.trim() {
        "" | "none" => Ok(None),
        v => parse(v).map(Some),
    }
}

impl Config {
    /// Parses config text on top of the preset.
    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        config.apply_text(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Config::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        let option = ParseOption { enabled_quote: false, enabled_escape: false, ..ParseOption::default() };
        let ini = Ini::load_from_str_opt(text, option).map_err(|e| config_error(e.to_string()))?;
        let mut seen = std::collections::HashSet::new();
        for (section, properties) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in properties.iter() {
                if !seen.insert((section.to_string(), key.to_string())) {
                    return Err(config_error(format!("duplicate key {section}.{key}")));
                }
                self.set(section, key, value)?;
            }
        }
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| config_error(format!("override `{assignment}` needs key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| config_error(format!("override key `{}` needs section.key", path.trim())))?;
        self.set(section, key, value.trim())?;
        self.validate()
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        use Dimension::*;
        let q = |dim| quantity(section, key, value, dim);
        let l = &mut self.lasers;
        match (section, key) {
            ("lasers", "geometry") => {
                l.geometry = GeometryTag::from_name(value.trim()).ok_or_else(|| {
                    config_error(format!("lasers.geometry = {value}: expected co, counter or angled45"))
                })?
            }
            ("lasers", "detuning_729") => l.detuning_729 = q(Frequency)?,
            ("lasers", "power_729") => l.power_729 = q(Power)?,
            ("lasers", "waist_729") => l.waist_729 = q(Length)?,
            ("lasers", "power_854") => l.power_854 = q(Power)?,
            ("lasers", "waist_854") => l.waist_854 = q(Length)?,
            ("lasers", "detuning_854") => l.detuning_854 = q(Frequency)?,
            ("lasers", "power_866") => l.power_866 = q(Power)?,
            ("lasers", "waist_866") => l.waist_866 = q(Length)?,
            ("lasers", "detuning_866") => l.detuning_866 = q(Frequency)?,
            ("lasers", "bfield") => l.bfield = q(Field)?,
            ("lasers", "emission_factor") => l.emission_factor = q(Dimensionless)?,
            ("atom", "g_s") => self.atom.g_s = q(Dimensionless)?,
            ("atom", "p12_to_d32") => self.atom.p12_to_d32 = q(Dimensionless)?,
            ("atom", "scheme") => self.atom.scheme = optional(value, |v| Ok(PathBuf::from(v)))?,
            ("trap", "axial") => self.trap.axial = q(Frequency)?,
            ("trap", "radial") => self.trap.radial = q(Frequency)?,
            ("ions", "count") => self.ions.count = integer(section, key, value)?,
            ("ions", "dark") => self.ions.dark = optional(value, |v| integer(section, key, v))?,
            ("ions", "dark_mass") => self.ions.dark_mass = q(Mass)?,
            ("ions", "precool") => self.ions.precool = q(Temperature)?,
            ("scan", "detuning_start") => self.scan.detuning_start = q(Frequency)?,
            ("scan", "detuning_stop") => self.scan.detuning_stop = q(Frequency)?,
            ("scan", "detuning_step") => self.scan.detuning_step = q(Frequency)?,
            ("scan", "window") => self.scan.window = q(Time)?,
            ("scan", "trials") => self.scan.trials = integer(section, key, value)?,
            ("scan", "efficiency") => self.scan.efficiency = q(Dimensionless)?,
            ("scan", "seed") => self.scan.seed = integer(section, key, value)?,
            ("scan", "bfields") => {
                self.scan.bfields = parse_quantity_list(value, Field)
                    .map_err(|e| config_error(format!("{section}.{key} = {value}: {e}")))?
            }
            ("scan", "baseline_trials") => self.scan.baseline_trials = integer(section, key, value)?,
            ("scan", "profile_span") => self.scan.profile_span = q(Velocity)?,
            ("scan", "profile_step") => self.scan.profile_step = q(Velocity)?,
            ("scan", "sample_interval") => self.scan.sample_interval = q(Time)?,
            ("md", "duration") => self.md.duration = q(Time)?,
            ("md", "sample_interval") => self.md.sample_interval = q(Time)?,
            ("noise", "recoil") => self.noise.recoil = boolean(section, key, value)?,
            ("noise", "collision_rate") => self.noise.collision_rate = q(Rate)?,
            ("noise", "collision_energy") => self.noise.collision_energy = q(Energy)?,
            ("noise", "heating_rate") => self.noise.heating_rate = q(Rate)?,
            _ if section.is_empty() => return Err(config_error(format!("key `{key}` outside any section"))),
            _ => return Err(config_error(format!("unknown key {section}.{key}"))),
        }
        Ok(())
    }

    /// Range checks that do not need the physics core.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(config_error(what.to_string())) };
        let l = &self.lasers;
        for (name, p) in [("power_729", l.power_729), ("power_854", l.power_854), ("power_866", l.power_866)] {
            check(p >= 0.0, &format!("lasers.{name} must be non-negative"))?;
        }
        for (name, w) in [("waist_729", l.waist_729), ("waist_854", l.waist_854), ("waist_866", l.waist_866)] {
            check(w > 0.0, &format!("lasers.{name} must be positive"))?;
        }
        check((0.0..=1.0).contains(&l.emission_factor), "lasers.emission_factor must lie in [0, 1]")?;
        check((0.0..=1.0).contains(&self.atom.p12_to_d32), "atom.p12_to_d32 must lie in [0, 1]")?;
        check(self.atom.g_s > 0.0, "atom.g_s must be positive")?;
        check(self.trap.axial > 0.0 && self.trap.radial > 0.0, "trap frequencies must be positive")?;
        let ions = &self.ions;
        check((1..=MAX_IONS).contains(&ions.count), &format!("ions.count must lie in 1..={MAX_IONS}"))?;
        check(ions.dark.is_none_or(|d| d < ions.count), "ions.dark must index an ion")?;
        check(ions.dark_mass > 0.0, "ions.dark_mass must be positive")?;
        check(ions.precool >= 0.0, "ions.precool must be non-negative")?;
        let s = &self.scan;
        check(s.detuning_step > 0.0, "scan.detuning_step must be positive")?;
        check(s.detuning_stop >= s.detuning_start, "scan.detuning_stop must not lie below detuning_start")?;
        check(s.window > 0.0, "scan.window must be positive")?;
        check(s.trials >= 1 && s.baseline_trials >= 1, "scan trial counts must be at least 1")?;
        check(s.efficiency > 0.0 && s.efficiency <= 1.0, "scan.efficiency must lie in (0, 1]")?;
        check(s.profile_span > 0.0 && s.profile_step > 0.0, "scan profile span and step must be positive")?;
        check(s.sample_interval > 0.0, "scan.sample_interval must be positive")?;
        check(
            self.md.duration > 0.0 && self.md.sample_interval > 0.0,
            "md duration and sample_interval must be positive",
        )?;
        let n = &self.noise;
        check(n.collision_rate >= 0.0 && n.collision_energy >= 0.0, "noise collision parameters must be non-negative")?;
        check(n.heating_rate >= 0.0, "noise.heating_rate must be non-negative")?;
        Ok(())
    }

    /// The config in base units; parses back to an identical value.
    pub fn to_text(&self) -> String {
        use Dimension::*;
        let l = &self.lasers;
        let mut out = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
            out.push('\n');
        };
        let f = format_quantity;
        section(
            "lasers",
            vec![
                ("geometry", l.geometry.name().to_string()),
                ("detuning_729", f(l.detuning_729, Frequency)),
                ("power_729", f(l.power_729, Power)),
                ("waist_729", f(l.waist_729, Length)),
                ("power_854", f(l.power_854, Power)),
                ("waist_854", f(l.waist_854, Length)),
                ("detuning_854", f(l.detuning_854, Frequency)),
                ("power_866", f(l.power_866, Power)),
                ("waist_866", f(l.waist_866, Length)),
                ("detuning_866", f(l.detuning_866, Frequency)),
                ("bfield", f(l.bfield, Field)),
                ("emission_factor", f(l.emission_factor, Dimensionless)),
            ],
        );
        section(
            "atom",
            vec![
                ("g_s", format_number(self.atom.g_s)),
                ("p12_to_d32", format_number(self.atom.p12_to_d32)),
                ("scheme", self.atom.scheme.as_ref().map_or("none".to_string(), |p| p.display().to_string())),
            ],
        );
        section("trap", vec![("axial", f(self.trap.axial, Frequency)), ("radial", f(self.trap.radial, Frequency))]);
        let i = &self.ions;
        section(
            "ions",
            vec![
                ("count", i.count.to_string()),
                ("dark", i.dark.map_or("none".to_string(), |d| d.to_string())),
                ("dark_mass", f(i.dark_mass, Mass)),
                ("precool", f(i.precool, Temperature)),
            ],
        );
        let s = &self.scan;
        section(
            "scan",
            vec![
                ("detuning_start", f(s.detuning_start, Frequency)),
                ("detuning_stop", f(s.detuning_stop, Frequency)),
                ("detuning_step", f(s.detuning_step, Frequency)),
                ("window", f(s.window, Time)),
                ("trials", s.trials.to_string()),
                ("efficiency", format_number(s.efficiency)),
                ("seed", s.seed.to_string()),
                ("bfields", format_quantity_list(&s.bfields, Field)),
                ("baseline_trials", s.baseline_trials.to_string()),
                ("profile_span", f(s.profile_span, Velocity)),
                ("profile_step", f(s.profile_step, Velocity)),
                ("sample_interval", f(s.sample_interval, Time)),
            ],
        );
        section(
            "md",
            vec![("duration", f(self.md.duration, Time)), ("sample_interval", f(self.md.sample_interval, Time))],
        );
        let n = &self.noise;
        section(
            "noise",
            vec![
                ("recoil", n.recoil.to_string()),
                ("collision_rate", f(n.collision_rate, Rate)),
                ("collision_energy", f(n.collision_energy, Energy)),
                ("heating_rate", f(n.heating_rate, Rate)),
            ],
        );
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    }

    /// Detuning grid of the scan, relative to the light-shifted resonance.
    pub fn detunings(&self) -> Vec<f64> {
        let s = &self.scan;
        let n = ((s.detuning_stop - s.detuning_start) / s.detuning_step + 1e-9).floor() as usize;
        (0..=n).map(|i| s.detuning_start + i as f64 * s.detuning_step).collect()
    }

    /// The level scheme: the built-in ⁴⁰Ca⁺ constants with the `[atom]`
    /// overrides, or the scheme file.
    pub fn scheme(&self) -> Result<LevelScheme> {
        match &self.atom.scheme {
            Some(path) => crate::scheme_io::load_scheme(path),
            None => Ok(build_ca40_scheme_with(SchemeParams { g_s: self.atom.g_s, p12_to_d32: self.atom.p12_to_d32 })),
        }
    }
}
