use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn dislab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dislab")).args(args).output().expect("spawn dislab")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(sub: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    dislab(&args)
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

const SMALL_MC: &str = r#"
[domain]
name = "unit-disk"
[montecarlo]
runs = 40
delta = 0.2
gamma = 0.5
bins = 10
"#;

#[test]
fn manifest_lists_every_file_with_its_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", SMALL_MC);
    let out = tmp.path().join("out");
    let o = run("montecarlo", &cfg, &out, &["--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    let files = m["files"].as_array().unwrap();
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|f| f["file"].as_str().unwrap().to_string()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in files {
        let bytes = fs::read(out.join(f["file"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn same_config_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", SMALL_MC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("montecarlo", &cfg, &a, &["--threads", "1"]).status.success());
    assert!(run("montecarlo", &cfg, &b, &["--threads", "3"]).status.success());
    for f in ["runs.csv", "trajectories.csv", "histogram.csv", "histogram.svg", "superposition.svg", "summary.json", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let c = tmp.path().join("c");
    assert!(run("montecarlo", &cfg, &c, &["--seed", "7"]).status.success());
    assert_ne!(fs::read(a.join("runs.csv")).unwrap(), fs::read(c.join("runs.csv")).unwrap());
}

#[test]
fn every_small_ensemble_run_ends_in_an_event() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", &SMALL_MC.replace("runs = 40", "runs = 100"));
    let out = tmp.path().join("out");
    assert!(run("montecarlo", &cfg, &out, &["--seed", "1"]).status.success());
    let s = summary(&out);
    assert_eq!(s["runs"], 100);
    assert_eq!(s["boundary_hits"].as_u64().unwrap() + s["dipole_collisions"].as_u64().unwrap(), 100);
    let rows = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
    assert!((s["leading_order_bound"].as_f64().unwrap() - 0.2513).abs() < 1e-4);
}

#[test]
fn zero_runs_give_empty_tables_and_a_valid_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mc.toml", &SMALL_MC.replace("runs = 40", "runs = 0"));
    let out = tmp.path().join("out");
    let o = run("montecarlo", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest(&out)["status"], "ok");
    assert_eq!(fs::read_to_string(out.join("runs.csv")).unwrap().lines().count(), 1);
    assert_eq!(summary(&out)["completed"], 0);
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("missing.toml");
    assert_eq!(run("simulate", missing.to_str().unwrap(), &out, &[]).status.code(), Some(2));
    let bad = write_config(tmp.path(), "bad.toml", "[domain]\nname = \"unit-disk\"\nfoo = 1\n");
    assert_eq!(run("simulate", &bad, &out, &[]).status.code(), Some(2));
    let outside = write_config(
        tmp.path(),
        "outside.toml",
        "[domain]\nname = \"unit-disk\"\n[simulate]\npositions = [[1.5, 0.0]]\nburgers = [1]\nt_max = 1.0\n",
    );
    assert_eq!(run("simulate", &outside, &out, &[]).status.code(), Some(2));
    let datum = write_config(
        tmp.path(),
        "datum.toml",
        "[domain]\nname = \"unit-disk\"\n[confinement]\ndatum = { kind = \"fourier\", cos = [0.0], sin = [] }\n",
    );
    let o = run("confinement", &datum, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("circulation"));
}

#[test]
fn numerical_failure_exits_with_three_and_keeps_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "mc.toml",
        &format!("{SMALL_MC}\n[integrator]\nmax_steps = 3\n").replace("runs = 40", "runs = 5"),
    );
    let out = tmp.path().join("out");
    let o = run("montecarlo", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(&out);
    assert_eq!(m["status"], "partial");
    assert!(out.join("runs.csv").exists());

    let sim = write_config(
        tmp.path(),
        "sim.toml",
        "[domain]\nname = \"unit-disk\"\n[integrator]\nmax_steps = 2\n[simulate]\npositions = [[0.8, 0.0]]\nburgers = [1]\nt_max = 1.0\n",
    );
    let out2 = tmp.path().join("out2");
    assert_eq!(run("simulate", &sim, &out2, &[]).status.code(), Some(3));
    assert_eq!(manifest(&out2)["status"], "partial");
}

#[test]
fn simulate_reports_the_disk_collision_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sim.toml",
        "[domain]\nname = \"unit-disk\"\n[simulate]\npositions = [[0.8, 0.0]]\nburgers = [1]\nt_max = 5.0\n",
    );
    let out = tmp.path().join("out");
    assert!(run("simulate", &cfg, &out, &[]).status.success());
    let t = summary(&out)["first_event_time"].as_f64().unwrap();
    let exact = 2.0 * std::f64::consts::PI * (0.32 - 0.8f64.ln() - 0.5);
    assert!((t - exact).abs() / exact < 1e-4);
    let svg = fs::read_to_string(out.join("trajectory.svg")).unwrap();
    assert!(svg.contains("version=\"1.1\"") && svg.contains("#d62728"));
}

#[test]
fn greens_probe_prints_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "probe.toml",
        "[domain]\nname = \"unit-disk\"\n[probe]\npairs = [[0.1, 0.2, -0.3, 0.4]]\ndelimiter = \";\"\n",
    );
    let out = tmp.path().join("out");
    let o = run("greens-probe", &cfg, &out, &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("x1;x2;y1;y2;k;"));
    let rec: Vec<f64> = lines.next().unwrap().split(';').take(5).map(|s| s.parse().unwrap()).collect();
    let (x, y) = ((rec[0], rec[1]), (rec[2], rec[3]));
    let q = 1.0 - 2.0 * (x.0 * y.0 + x.1 * y.1) + (x.0 * x.0 + x.1 * x.1) * (y.0 * y.0 + y.1 * y.1);
    assert!((rec[4] - q.ln() / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert_eq!(fs::read_to_string(out.join("probe.csv")).unwrap(), text);
}

#[test]
fn cardioid_start_at_equilibrium_does_not_move() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[domain]\nname = \"cardioid-smoothed\"\nkernel_nodes = 128\n[integrator]\nrtol = 1e-8\n[cardioid]\nstarts = 1\nradius = 0.0\nt_max = 5.0\n",
    );
    let out = tmp.path().join("out");
    assert!(run("cardioid", &cfg, &out, &[]).status.success());
    let s = summary(&out);
    assert_eq!(s["boundary_hits"], 0);
    assert_eq!(s["flagged"].as_array().unwrap().len(), 1);
    let eq = (s["equilibrium"]["x"].as_f64().unwrap(), s["equilibrium"]["y"].as_f64().unwrap());
    let rows = fs::read_to_string(out.join("trajectories.csv")).unwrap();
    for line in rows.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((f[3] - eq.0).abs() < 1e-9 && (f[4] - eq.1).abs() < 1e-9);
    }
}

#[test]
fn confinement_shifted_vortex_minimizer() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "conf.toml",
        r#"
[domain]
name = "unit-disk"
[confinement]
datum = { kind = "shifted-vortex", center = { x = 0.3, y = 0.0 } }
epsilons = [0.05, 0.025]
probes = [[0.3, 0.0]]
search = { grid = 24 }
"#,
    );
    let out = tmp.path().join("out");
    let o = run("confinement", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = &summary(&out)["minimizer"];
    assert!((m["a"]["x"].as_f64().unwrap() - 0.3).abs() < 1e-3 && m["a"]["y"].as_f64().unwrap().abs() < 1e-3);
    assert_eq!(m["certificate"]["holds"], true);
    assert!(fs::read_to_string(out.join("heatmap.svg")).unwrap().starts_with("<?xml"));
}

#[test]
fn experiment_field_must_match_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "experiment = \"cardioid\"\n[domain]\nname = \"unit-disk\"\n");
    assert_eq!(run("montecarlo", &cfg, &tmp.path().join("o"), &[]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (file, exp) in [
        ("simulate_disk.toml", dislab_cli::Experiment::Simulate),
        ("simulate_dipole.toml", dislab_cli::Experiment::Simulate),
        ("montecarlo.toml", dislab_cli::Experiment::Montecarlo),
        ("cardioid.toml", dislab_cli::Experiment::Cardioid),
        ("confinement.toml", dislab_cli::Experiment::Confinement),
        ("greens_probe.toml", dislab_cli::Experiment::GreensProbe),
    ] {
        let c = dislab_cli::ExperimentConfig::load(&root.join(file)).unwrap();
        c.validate(exp).unwrap();
        c.domain.build().unwrap();
    }
}
