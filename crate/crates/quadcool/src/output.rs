//! CSV writers, the run manifest and companion gnuplot scripts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! results give byte-identical files.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use quadcool_core::internal_dynamics::RateMatrix;
use quadcool_core::mechanics::ForceProfile;
use quadcool_core::trap_md::Trajectory;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{FieldScan, ScanResult};
use crate::units::format_number;

pub const SCAN_HEADER: [&str; 5] =
    ["detuning_MHz", "mean_counts_per_s", "std_counts_per_s", "jump_fraction", "inferred_force_N"];
pub const PROFILE_HEADER: [&str; 3] = ["v[m/s]", "F[N]", "D[kg^2 m^2/s^3]"];

/// rad/s to MHz, rounded to 1 Hz so that grid points print cleanly.
fn to_mhz(omega: f64) -> f64 {
    (omega / TAU).round() / 1e6
}

fn num(x: f64) -> String {
    format_number(x)
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|source| Error::Write { path: path.to_path_buf(), source })?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

pub fn write_scan(path: &Path, result: &ScanResult) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SCAN_HEADER)?;
    for p in &result.points {
        w.write_record([
            num(to_mhz(p.detuning)),
            num(p.mean_rate),
            num(p.std_rate),
            p.jump_fraction.map(num).unwrap_or_default(),
            num(p.inferred_force),
        ])?;
    }
    finish(w, path)
}

/// One row per field: width and height of the resonance, and the Zeeman
/// shifts of the coupled lines.
pub fn write_bfield_summary(path: &Path, scans: &[FieldScan]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["bfield_G", "fwhm_MHz", "peak_counts_per_s", "peak_detuning_MHz", "line_shifts_MHz"])?;
    for s in scans {
        let peak = &s.result.points[s.result.peak_index()];
        let lines: Vec<String> = s.line_centers.iter().map(|&c| num(to_mhz(c))).collect();
        w.write_record([
            num(s.field * 1e4),
            s.fwhm.map(|f| num(to_mhz(f))).unwrap_or_default(),
            num(s.peak_rate),
            num(to_mhz(peak.detuning)),
            lines.join(" "),
        ])?;
    }
    finish(w, path)
}

pub fn write_profile(path: &Path, profile: &ForceProfile) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(PROFILE_HEADER)?;
    for i in 0..profile.len() {
        w.write_record([num(profile.velocities[i]), num(profile.force[i]), num(profile.diffusion[i])])?;
    }
    finish(w, path)
}

/// Positions and velocities of every ion at each sample.
pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    let n = trajectory.ion_count();
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for c in ["x", "y", "z", "vx", "vy", "vz"] {
            header.push(format!("{c}{i}"));
        }
    }
    w.write_record(&header)?;
    for (t, ions) in trajectory.times.iter().zip(&trajectory.states) {
        let mut row = vec![num(*t)];
        for ion in ions {
            row.extend(ion.position.iter().chain(ion.velocity.iter()).map(|&x| num(x)));
        }
        w.write_record(&row)?;
    }
    finish(w, path)
}

pub fn write_photons(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["t", "ion", "channel_nm"])?;
    for p in &trajectory.photons {
        w.write_record([num(p.time), p.ion.to_string(), num((p.wavelength * 1e9 * 1e6).round() / 1e6)])?;
    }
    finish(w, path)
}

/// Generator of the rate equations: a header of state labels, then one row
/// per state (rates in s⁻¹; column j holds the flow out of state j).
pub fn write_rate_matrix(path: &Path, rates: &RateMatrix) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(rates.labels().iter().map(ToString::to_string))?;
    let m = rates.matrix();
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| num(m[(i, j)])))?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    /// Resolved configuration in config-file syntax, base units.
    pub config: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifests always serialize");
        std::fs::write(path, text + "\n").map_err(|source| Error::Write { path: path.to_path_buf(), source })
    }
}

/// Columns of one plotted series: file, x column, y column, title.
pub struct Series<'a> {
    pub file: &'a str,
    pub x: usize,
    pub y: usize,
    pub title: &'a str,
}

/// Plain gnuplot script drawing `series` on shared axes into a PNG.
pub fn gnuplot_script(png: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset key autotitle columnhead\n"));
    let plots: Vec<String> = series
        .iter()
        .map(|p| format!("'{}' using {}:{} with linespoints title '{}'", p.file, p.x, p.y, p.title))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|source| Error::Write { path: path.to_path_buf(), source })?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ScanPoint;

    fn result() -> ScanResult {
        let point = |d: f64, rate: f64, jump: Option<f64>| ScanPoint {
            detuning: d * TAU * 1e6,
            trial_rates: vec![rate],
            mean_rate: rate,
            std_rate: 0.0,
            jump_fraction: jump,
            inferred_force: 1.5e-21,
        };
        ScanResult {
            points: vec![point(-1.0, 10.0, Some(0.25)), point(0.5, 2.5, None)],
            baseline: None,
            field: 0.0,
            efficiency: 1.0,
            fluorescing_ions: 1,
            linewidth: 1.0,
            light_shift: 0.0,
            cooling_wavelength: 729e-9,
            assist_wavelength: 854e-9,
        }
    }

    #[test]
    fn scan_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        write_scan(&path, &result()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "detuning_MHz,mean_counts_per_s,std_counts_per_s,jump_fraction,inferred_force_N\n\
             -1,10,0,0.25,1.5e-21\n\
             0.5,2.5,0,,1.5e-21\n"
        );
    }

    #[test]
    fn gnuplot_lists_every_series() {
        let s = gnuplot_script(
            "a.png",
            "x",
            "y",
            &[Series { file: "a.csv", x: 1, y: 2, title: "a" }, Series { file: "b.csv", x: 1, y: 3, title: "b" }],
        );
        assert!(s.contains("'a.csv' using 1:2") && s.contains("'b.csv' using 1:3"));
        assert!(s.starts_with("set datafile separator ','"));
    }

    #[test]
    fn manifest_is_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = RunManifest {
            tool: "quadcool",
            version: "0",
            command: "scan".into(),
            seed: 3,
            config: "[scan]\nseed = 3\n".into(),
            started: "a".into(),
            finished: "b".into(),
            outputs: vec!["scan.csv".into()],
        };
        m.write(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["seed"], 3);
        assert_eq!(v["outputs"][0], "scan.csv");
    }
}
