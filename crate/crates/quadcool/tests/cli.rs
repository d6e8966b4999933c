use std::path::Path;
use std::process::{Command, Output};

use quadcool::Config;

const TINY: &[&str] = &[
    "--set",
    "ions.count=2",
    "--set",
    "scan.detuning_start=-2 MHz",
    "--set",
    "scan.detuning_stop=0.5 MHz",
    "--set",
    "scan.detuning_step=0.5 MHz",
    "--set",
    "scan.window=0.3 ms",
    "--set",
    "scan.trials=2",
];

fn quadcool(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadcool"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QUADCOOL_THREADS")
        .output()
        .unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn check_prints_the_regime_and_kick_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = quadcool(&["check"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Gamma' = 2pi x"), "{text}");
    assert!(text.contains("Doppler regime"), "{text}");
    assert!(text.contains("momentum-kick ratio = 12.6"), "{text}");
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn check_can_dump_the_rate_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = quadcool(&["check", "--rates"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = read(&dir.path().join("rate_matrix.csv"));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "S1/2,P1/2,P3/2,D3/2,D5/2");
    assert_eq!(rows.len(), 6);
    for j in 0..5 {
        let column: f64 = rows[1..].iter().map(|r| r.split(',').nth(j).unwrap().parse::<f64>().unwrap()).sum();
        assert!(column.abs() < 1e-6 * 1e8, "column {j} sums to {column}");
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.ini");
    let out = quadcool(&["scan", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing.ini"));

    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, "[lasers]\ndetunin_729 = 1 MHz\n").unwrap();
    let out = quadcool(&["scan", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("detunin_729"));

    let out = quadcool(&["check", "--set", "trap.axial=0.4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = quadcool(&["check", "--geometry", "sideways"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Field scans need the cooling beam along the axis.
    let out = quadcool(&["bfield", "--geometry", "angled45", "--set", "scan.bfields=0 G"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    // A velocity grid too coarse to resolve the friction slope.
    let dir = tempfile::tempdir().unwrap();
    let out = quadcool(&["force-profile", "--set", "scan.profile_step=5 m/s"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scans_are_byte_identical_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let run = |dir: &Path, seed: &str, threads: &str| {
        let mut args = vec!["scan", "--seed", seed, "--threads", threads];
        args.extend_from_slice(TINY);
        let out = quadcool(&args, dir);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        read(&dir.join("scan.csv"))
    };
    let first = run(a.path(), "11", "1");
    assert_eq!(first, run(b.path(), "11", "3"));
    assert_ne!(first, run(c.path(), "12", "1"));
    let header = first.lines().next().unwrap();
    assert_eq!(header, "detuning_MHz,mean_counts_per_s,std_counts_per_s,jump_fraction,inferred_force_N");
    assert_eq!(first.lines().count(), 7);
    assert!(!first.contains('\r'));
}

#[test]
fn manifest_records_a_reloadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["scan", "--seed", "5", "--gnuplot", "--geometry", "counter"];
    args.extend_from_slice(TINY);
    let out = quadcool(&args, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["command"], "scan");
    assert_eq!(manifest["outputs"], serde_json::json!(["scan.csv", "scan.gp"]));
    assert!(manifest["started"].as_str().is_some_and(|s| !s.is_empty()));

    let cfg = Config::parse(manifest["config"].as_str().unwrap()).unwrap();
    assert_eq!(cfg.scan.seed, 5);
    assert_eq!(cfg.ions.count, 2);
    assert_eq!(cfg.lasers.geometry.name(), "counter");
    assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);

    // The same config file replays the same CSV.
    let replay = tempfile::tempdir().unwrap();
    let file = replay.path().join("run.ini");
    std::fs::write(&file, manifest["config"].as_str().unwrap()).unwrap();
    let out = quadcool(&["scan", "--config", file.to_str().unwrap()], replay.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(&replay.path().join("scan.csv")), read(&dir.path().join("scan.csv")));
}

#[test]
fn force_profile_and_md_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = quadcool(&["force-profile", "--set", "scan.profile_span=2 m/s"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let profile = read(&dir.path().join("force_profile.csv"));
    assert!(profile.starts_with("v[m/s],F[N],D[kg^2 m^2/s^3]\n"));
    assert_eq!(profile.lines().count(), 1 + 81);

    let out = quadcool(
        &["md", "--set", "ions.count=2", "--set", "md.duration=50 us", "--set", "md.sample_interval=10 us"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = read(&dir.path().join("trajectory.csv"));
    let header = traj.lines().next().unwrap();
    assert!(header.starts_with("t,x0,y0,z0,vx0,vy0,vz0,x1"));
    assert_eq!(header.split(',').count(), 13);
    assert!(read(&dir.path().join("photons.csv")).starts_with("t,ion,channel_nm\n"));
}

#[test]
fn shipped_preset_file_matches_the_built_in_preset() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/preset.ini");
    assert_eq!(Config::load(&path).unwrap(), Config::default());
}
