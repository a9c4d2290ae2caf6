use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use layered_gsm::config::SweepConfig;
use layered_gsm::gsmio::read_gsm;
use layered_gsm::output::read_csv;
use layered_gsm::sweep::Engine;

fn lgsm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgsm")).current_dir(dir).args(args).output().expect("run lgsm")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn copy_config(dir: &Path, name: &str) {
    std::fs::copy(configs().join(name), dir.join(name)).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const VACUUM_SWEEP: &str = r#"
[gsm]
path = "antenna.lgsm"

[stack]
z_interface = "-150 mm"
termination = { kind = "half_space", eps_r = 1.0 }

[sweep]
frequencies = ["3.2 GHz", "3.5 GHz"]

[output]
path = "vacuum.csv"
"#;

#[test]
fn synthetic_file_over_vacuum_returns_its_own_reflection() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgsm(
        dir.path(),
        &[
            "synth-gsm",
            "--l-max",
            "4",
            "--r-min",
            "146mm",
            "--frequencies",
            "3.2GHz,3.5GHz",
            "--ports",
            "2",
            "--out",
            "antenna.lgsm",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.path().join("vacuum.toml"), VACUUM_SWEEP).unwrap();
    let o = lgsm(dir.path(), &["sweep", "--config", "vacuum.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gsm = read_gsm(dir.path().join("antenna.lgsm")).unwrap();
    let obs = read_csv(std::fs::File::open(dir.path().join("vacuum.csv")).unwrap()).unwrap();
    assert_eq!(obs.frequencies.len(), 2);
    for (f, g) in obs.frequencies.iter().zip(&obs.gamma_c) {
        assert_eq!(g, &gsm.at_frequency(*f).unwrap().gamma);
    }
}

#[test]
fn missing_frequency_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = lgsm(
        dir.path(),
        &["synth-gsm", "--l-max", "2", "--r-min", "146mm", "--frequencies", "3.2GHz", "--out", "antenna.lgsm"],
    );
    assert!(o.status.success());
    std::fs::write(dir.path().join("vacuum.toml"), VACUUM_SWEEP).unwrap();
    let o = lgsm(dir.path(), &["sweep", "--config", "vacuum.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("3200000000"), "{}", stderr(&o));
}

#[test]
fn pec_height_sweep_matches_library_and_shifts_phase() {
    let dir = tempfile::tempdir().unwrap();
    copy_config(dir.path(), "sweep-pec-height.toml");
    let o = lgsm(dir.path(), &["sweep", "--config", "sweep-pec-height.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("pec-height.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 14);

    let cfg = SweepConfig::load(dir.path().join("sweep-pec-height.toml")).unwrap();
    let freqs = cfg.frequencies().unwrap();
    let engine = Engine::new(cfg.gsm.load(&freqs).unwrap(), cfg.contour.clone(), cfg.solve.options().unwrap()).unwrap();
    let template = cfg.stack.build().unwrap();
    let gamma = engine.gsm().blocks[0].gamma[(0, 0)];
    for row in &rows {
        let stack = layered_gsm::fresnel::LayerStack { z_interface: row[1], ..template.clone() };
        let g = engine.evaluate(&stack, row[0]).unwrap().gamma_c[(0, 0)];
        assert_eq!((g.re, g.im), (row[4], row[5]));
    }
    // Reflected part at the two heights: the farther plane lags by ≈ 2kΔz.
    let at = |z: f64| {
        let r = rows.iter().find(|r| r[0] == 3.5e9 && r[1] == z).unwrap();
        layered_gsm::Complex64::new(r[4], r[5]) - gamma
    };
    let k = 2.0 * std::f64::consts::PI * 3.5e9 / layered_gsm::C0;
    let lag = (at(-0.2) / at(-0.1)).arg();
    let expect = (-2.0 * k * 0.1).rem_euclid(2.0 * std::f64::consts::PI) - 2.0 * std::f64::consts::PI;
    let d = (lag - expect).rem_euclid(2.0 * std::f64::consts::PI);
    assert!(d.min(2.0 * std::f64::consts::PI - d) < 0.1, "lag {lag}, expected {expect}");
}

#[test]
fn slab_fit_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    copy_config(dir.path(), "slab-observed.toml");
    copy_config(dir.path(), "slab-fit.toml");
    assert!(lgsm(dir.path(), &["sweep", "--config", "slab-observed.toml"]).status.success());
    let o = lgsm(dir.path(), &["fit", "--config", "slab-fit.toml", "--json", "fit.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    let p = r["parameters"].as_array().unwrap();
    let eps = p[0][1].as_f64().unwrap();
    let h = p[1][1].as_f64().unwrap();
    assert!((eps / 4.0 - 1.0).abs() < 0.02 && (h / 0.03 - 1.0).abs() < 0.02, "{eps} {h}");
    assert!(r["evaluations"].as_u64().unwrap() >= 100);
}

#[test]
fn touchstone_output_and_cache_reuse() {
    let dir = tempfile::tempdir().unwrap();
    copy_config(dir.path(), "slab-observed.toml");
    let args = [
        "--cache-dir",
        "wcache",
        "sweep",
        "--config",
        "slab-observed.toml",
        "--format",
        "touchstone",
        "--out",
        "slab.s2p",
    ];
    let first = lgsm(dir.path(), &args);
    assert!(first.status.success(), "{}", stderr(&first));
    let a = std::fs::read(dir.path().join("slab.s2p")).unwrap();
    let second = lgsm(dir.path(), &args);
    assert!(stderr(&second).contains("0 assembled"), "{}", stderr(&second));
    assert_eq!(a, std::fs::read(dir.path().join("slab.s2p")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# Hz S RI R 50"));
    assert_eq!(text.lines().filter(|l| !l.starts_with(['!', '#'])).count(), 5);

    copy_config(dir.path(), "sweep-pec-height.toml");
    let o =
        lgsm(dir.path(), &["sweep", "--config", "sweep-pec-height.toml", "--format", "touchstone", "--out", "x.s1p"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lgsm(dir.path(), &["validate", "--only", "fresnel,structure", "--lmax", "6", "--json", "report.json"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let pec = lgsm(dir.path(), &["validate", "--only", "pec", "--lmax", "8"]);
    assert_eq!(pec.status.code(), Some(3), "{}", stdout(&pec));
    assert!(stdout(&pec).contains("FAIL"));

    assert_eq!(lgsm(dir.path(), &["sweep", "--config", "nope.toml"]).status.code(), Some(1));
    assert_eq!(lgsm(dir.path(), &["validate", "--bogus"]).status.code(), Some(2));
}
