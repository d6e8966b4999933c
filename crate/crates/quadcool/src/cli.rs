//! Command-line front end.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use quadcool_core::constants::BOLTZMANN;
use quadcool_core::mechanics::{friction_and_diffusion, momentum_kick_ratio};

use crate::config::Config;
use crate::error::{config_error, Error, Result};
use crate::experiments::{self, Regime};
use crate::output::{self, RunManifest, Series};

#[derive(Debug, Parser)]
#[command(name = "quadcool", version, about = "Doppler cooling of trapped-ion strings on a narrow quadrupole line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file (INI sections with unit-suffixed values); the built-in
    /// preset is used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config entry, e.g. `--set lasers.power_729=100mW`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Seed of every random stream of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".", global = true)]
    pub out: PathBuf,
    /// Worker threads (0: one per core).
    #[arg(long, env = "QUADCOOL_THREADS", global = true)]
    pub threads: Option<usize>,
    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    /// Beam geometry: co, counter or angled45.
    #[arg(long, global = true)]
    pub geometry: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fluorescence versus 729 nm detuning.
    Scan,
    /// Reordering probability of a string with one dark ion, and the
    /// lasers-off collision baseline.
    Jumps,
    /// Detuning scans at each of `scan.bfields`.
    Bfield,
    /// Force and momentum diffusion versus velocity at `lasers.detuning_729`.
    ForceProfile,
    /// One recorded trajectory.
    Md,
    /// Print Γ′, the regime verdict and the momentum-kick ratio.
    Check {
        /// Also write the rate matrix at rest.
        #[arg(long)]
        rates: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Jumps => "jumps",
            Command::Bfield => "bfield",
            Command::ForceProfile => "force-profile",
            Command::Md => "md",
            Command::Check { .. } => "check",
        }
    }
}

/// Config file (or preset) with overrides and flags applied, validated.
pub fn resolve_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = common.seed {
        cfg.scan.seed = seed;
    }
    if let Some(g) = &common.geometry {
        cfg.set("lasers", "geometry", g)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

struct Outputs<'a> {
    dir: &'a Path,
    gnuplot: bool,
    written: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(PathBuf::from(name));
        self.dir.join(name)
    }

    fn plot(&mut self, name: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>]) -> Result<()> {
        if self.gnuplot {
            let png = name.replace(".gp", ".png");
            let path = self.path(name);
            output::write_text(&path, &output::gnuplot_script(&png, xlabel, ylabel, series))?;
        }
        Ok(())
    }
}

fn execute(command: &Command, cfg: &Config, out: &mut Outputs<'_>) -> Result<()> {
    match command {
        Command::Scan => {
            let r = experiments::detuning_scan(cfg)?;
            output::write_scan(&out.path("scan.csv"), &r)?;
            out.plot(
                "scan.gp",
                "detuning (MHz)",
                "counts/s",
                &[Series { file: "scan.csv", x: 1, y: 2, title: "mean" }],
            )?;
            match experiments::force_estimate(&r, &experiments::geometry(cfg)?) {
                Ok(f) => println!("peak {:.4e} counts/s; inferred force {f:.3e} N", r.peak_rate()),
                Err(e) => println!("peak {:.4e} counts/s; no force estimate: {e}", r.peak_rate()),
            }
        }
        Command::Jumps => {
            let r = experiments::jump_fraction_scan(cfg)?;
            output::write_scan(&out.path("jumps.csv"), &r)?;
            out.plot(
                "jumps.gp",
                "detuning (MHz)",
                "jump fraction",
                &[Series { file: "jumps.csv", x: 1, y: 4, title: "R" }],
            )?;
            if let Some(b) = r.baseline {
                println!("lasers off: R = {:.3} over {} trials (expected {:.3})", b.fraction, b.trials, b.expected);
            }
        }
        Command::Bfield => {
            let scans = experiments::bfield_scan(cfg, &cfg.scan.bfields)?;
            let names: Vec<String> = (0..scans.len()).map(|i| format!("bfield_{i}.csv")).collect();
            for (s, name) in scans.iter().zip(&names) {
                output::write_scan(&out.path(name), &s.result)?;
                let fwhm = s.fwhm.map_or("n/a".to_string(), |w| format!("{:.3} MHz", mhz(w)));
                println!("B = {:.3} G: peak {:.4e} counts/s, FWHM {fwhm}", s.field * 1e4, s.peak_rate);
            }
            output::write_bfield_summary(&out.path("bfield_summary.csv"), &scans)?;
            let titles: Vec<String> = scans.iter().map(|s| format!("{} G", s.field * 1e4)).collect();
            let series: Vec<Series<'_>> =
                names.iter().zip(&titles).map(|(f, t)| Series { file: f, x: 1, y: 2, title: t }).collect();
            out.plot("bfield.gp", "detuning (MHz)", "counts/s", &series)?;
        }
        Command::ForceProfile => {
            let p = experiments::force_profile(cfg)?;
            output::write_profile(&out.path("force_profile.csv"), &p)?;
            out.plot(
                "force_profile.gp",
                "v (m/s)",
                "F (N)",
                &[Series { file: "force_profile.csv", x: 1, y: 2, title: "F" }],
            )?;
            let fd = friction_and_diffusion(&p)?;
            println!("alpha = {:.4e} kg/s, D = {:.4e} kg^2 m^2/s^3", fd.alpha, fd.diffusion);
            match fd.temperature() {
                Some(t) => println!("D/(2 alpha k_B) = {:.4e} K", t),
                None => println!("no friction at this detuning"),
            }
            println!(
                "Doppler limit hbar Gamma'/2k_B = {:.4e} K",
                quadcool_core::constants::HBAR * p.linewidth / (2.0 * BOLTZMANN)
            );
        }
        Command::Md => {
            let run = experiments::md_run(cfg)?;
            output::write_trajectory(&out.path("trajectory.csv"), &run.trajectory)?;
            output::write_photons(&out.path("photons.csv"), &run.trajectory)?;
            out.plot(
                "trajectory.gp",
                "t (s)",
                "z (m)",
                &(0..cfg.ions.count)
                    .map(|i| Series { file: "trajectory.csv", x: 1, y: 4 + 6 * i, title: "" })
                    .collect::<Vec<_>>(),
            )?;
            println!("{} photons, {} collisions", run.trajectory.photons.len(), run.trajectory.collisions.len());
            if let (Some(a), Some(r)) = (run.axial_temperature, run.radial_temperature) {
                println!("axial {a:.4e} K, radial {r:.4e} K (second half)");
            }
            if let Some(j) = run.jumps {
                println!("dark ion rank {} -> {}; jumped: {}", j.start_rank, j.end_rank, j.jumped);
            }
        }
        Command::Check { rates } => {
            let r = experiments::doppler_regime_check(cfg)?;
            println!("Gamma' = 2pi x {:.4} MHz (light shift 2pi x {:.4} MHz)", mhz(r.linewidth), mhz(r.light_shift));
            println!("omega_z = 2pi x {:.4} MHz, omega_r = 2pi x {:.4} MHz", mhz(r.omega_axial), mhz(r.omega_radial));
            let verdict = match r.regime {
                Regime::Doppler => "Doppler regime: Gamma' exceeds every secular frequency",
                Regime::Marginal => "marginal: Gamma' lies between the secular frequencies",
                Regime::Resolved => "resolved sidebands: Gamma' below every secular frequency (not modelled)",
            };
            println!("{verdict}");
            let scheme = cfg.scheme()?;
            let b = experiments::beams(cfg, &scheme, 0.0)?;
            println!("momentum-kick ratio = {:.2}", momentum_kick_ratio(b[0].wavelength, b[1].wavelength).value());
            if *rates {
                let model = experiments::radiation_model(
                    cfg,
                    &scheme,
                    cfg.lasers.bfield,
                    quadcool_core::internal_dynamics::Resolution::Auto,
                )?;
                let m = model
                    .with_cooling_detuning(r.light_shift + cfg.lasers.detuning_729)
                    .rate_matrix(&Default::default())?;
                output::write_rate_matrix(&out.path("rate_matrix.csv"), &m)?;
            }
        }
    }
    Ok(())
}

fn now() -> String {
    chrono::Local::now().to_rfc3339()
}

/// Runs one command and returns the files written, relative to `--out`.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = resolve_config(&cli.common)?;
    let started = now();
    std::fs::create_dir_all(&cli.common.out).map_err(|source| Error::Write { path: cli.common.out.clone(), source })?;
    let mut out = Outputs { dir: &cli.common.out, gnuplot: cli.common.gnuplot, written: Vec::new() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads.unwrap_or(0))
        .build()
        .map_err(|e| config_error(format!("thread pool: {e}")))?;
    pool.install(|| execute(&cli.command, &cfg, &mut out))?;
    if out.written.is_empty() {
        return Ok(out.written);
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        seed: cfg.scan.seed,
        config: cfg.to_text(),
        started,
        finished: now(),
        outputs: out.written.clone(),
    };
    manifest.write(&cli.common.out.join("manifest.json"))?;
    let mut written = out.written;
    written.push(PathBuf::from("manifest.json"));
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_config() {
        let cli =
            Cli::try_parse_from(["quadcool", "scan", "--seed", "9", "--geometry", "counter", "--set", "ions.count=2"])
                .unwrap();
        let cfg = resolve_config(&cli.common).unwrap();
        assert_eq!(cfg.scan.seed, 9);
        assert_eq!(cfg.ions.count, 2);
        assert_eq!(cfg.lasers.geometry, quadcool_core::mechanics::GeometryTag::CounterPropagating);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        for bad in ["lasers.power_729=5", "lasers.nope=1 W", "lasers.power_729=-1 W"] {
            let cli = Cli::try_parse_from(["quadcool", "check", "--set", bad]).unwrap();
            assert_eq!(resolve_config(&cli.common).unwrap_err().exit_code(), 2, "{bad}");
        }
    }
}
