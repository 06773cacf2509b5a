use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jamiton_cli::commands::resolve;
use jamiton_cli::scenario::{sidecar_name, Task};
use jamiton_cli::{load_scenario, RunOptions, TaskKind};

fn jamiton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jamiton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .expect("readable dir")
        .map(|e| e.expect("entry").file_name().into_string().expect("utf-8"))
        .collect();
    v.sort();
    v
}

#[test]
fn solve_preset_writes_five_profiles_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = jamiton(&["solve", "--preset", "paper-fig1", "--out", path(&a), "--svg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 5);
    let cases: Vec<String> = listing(&a).into_iter().filter(|n| n.starts_with("case_")).collect();
    assert_eq!(cases.len(), 5);
    for c in &cases {
        let text = fs::read_to_string(a.join(c).join("profile.csv")).unwrap();
        assert!(text.starts_with("eta_mps,x_m,u_mps,rho_vpm,sonic_flag,shock_flag\n"));
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 6);
    assert!(a.join("profiles.svg").is_file());

    // rerun from the sidecar alone
    let o = jamiton(&["solve", "--config", path(&a.join("solve.meta")), "--out", path(&b)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for c in &cases {
        let f = Path::new(c).join("profile.csv");
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
    }
    assert_eq!(fs::read(a.join("summary.csv")).unwrap(), fs::read(b.join("summary.csv")).unwrap());
    assert_eq!(listing(tmp.path()), ["a", "b"]);
}

#[test]
fn sidecar_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    for task in [TaskKind::Stability, TaskKind::Sweep] {
        let out = tmp.path().join(task.name());
        let opts = RunOptions {
            preset: Some("paper-fig1".into()),
            out: Some(out.clone()),
            ..RunOptions::default()
        };
        jamiton_cli::run(task, &opts).unwrap();
        let (expected, _) = resolve(task, &opts).unwrap();
        let back = load_scenario(&out.join(sidecar_name(task)), task, None).unwrap();
        assert_eq!(back, expected);
    }
}

#[test]
fn stability_reports_the_band() {
    let tmp = tempfile::tempdir().unwrap();
    let o = jamiton(&["stability", "--preset", "paper-fig1", "--out", path(tmp.path())]);
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("stability.txt")).unwrap();
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .unwrap()
    };
    assert!((value("band_lo_vpm=") - 0.00513).abs() < 5e-6);
    assert!((value("band_hi_vpm=") - 0.19487).abs() < 5e-6);
    assert_eq!(text.matches(" unstable").count(), 2);
    assert_eq!(String::from_utf8_lossy(&o.stdout), text);
}

#[test]
fn bad_parameter_names_key_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "# canonical apart from tau\ntau_s=-1\n").unwrap();
    let out = tmp.path().join("out");
    let o = jamiton(&["solve", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("tau_s") && err.contains("line 2"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unit_suffixes_are_mandatory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for (text, needle) in [
        ("tau=5\n", "missing unit suffix"),
        ("tau_min=5\n", "wrong unit suffix"),
        ("speed_limit_mps=30\n", "unknown key"),
        ("tau_s=5\ntau_s=6\n", "duplicate key"),
        ("task=sim\n", "not `solve`"),
    ] {
        let cfg = tmp.path().join("c.cfg");
        fs::write(&cfg, text).unwrap();
        let o = jamiton(&["solve", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out)]);
        assert_eq!(o.status.code(), Some(3), "{text}");
        assert!(stderr(&o).contains(needle), "{text}: {}", stderr(&o));
    }
    let o = jamiton(&["solve", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let o = jamiton(&["solve", "--preset", "no-such-preset", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_simulation_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    fs::write(&cfg, format!("sim_dir={}\n", path(&tmp.path().join("nowhere")))).unwrap();
    let out = tmp.path().join("out");
    let o = jamiton(&["compare", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("sim_dir"));
}

#[test]
fn no_jamiton_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    fs::write(&cfg, "rho_minus_vpm=0.003\n").unwrap();
    let out = tmp.path().join("out");
    let o = jamiton(&["solve", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("no jamiton"));

    fs::write(&cfg, "beta_m2ps2=1000\n").unwrap();
    let o = jamiton(&["stability", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sim_then_traj_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let cfg = tmp.path().join("short.cfg");
    fs::write(&cfg, "particles_count=1000\nt_end_s=6\noutput_every_s=0.5\n").unwrap();
    let o = jamiton(&["sim", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&run), "--svg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run.join("spacetime.svg").is_file() && run.join("density.svg").is_file());
    let index = fs::read_to_string(run.join("snapshots/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 14);
    assert!(fs::read_to_string(run.join("snapshots/snap_000000.csv"))
        .unwrap()
        .starts_with("t_s,x_m,u_mps,rho_vpm\n"));

    fs::write(&cfg, "source=sim\ncells_count=30\n").unwrap();
    let o = jamiton(&["traj", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&run)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = fs::read_to_string(run.join("trajectories.csv")).unwrap();
    assert!(traj.starts_with("vehicle_id,t_s,x_m,u_mps\n"));

    fs::write(&cfg, "source=sim\ncells_count=3000\n").unwrap();
    let o = jamiton(&["traj", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&run)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    // the perturbation has not steepened into shocks yet
    let o = jamiton(&["compare", "--preset", "paper-fig1", "--out", path(&run)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    // the simulation's sidecar survives the later tasks
    let sim = load_scenario(&run.join("sim.meta"), TaskKind::Sim, None).unwrap();
    let Task::Sim(t) = sim.task else { panic!() };
    assert_eq!((t.particles, t.t_end), (1000, 6.0));
}

#[test]
fn seed_scale_multiplies_particles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    fs::write(&cfg, "particles_count=1000\nt_end_s=1\noutput_every_s=1\n").unwrap();
    let out = tmp.path().join("out");
    let o = jamiton(&["sim", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out), "--seed-scale", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = fs::read_to_string(out.join("sim.meta")).unwrap();
    assert!(meta.contains("particles_count=2000\n"));
    let o = jamiton(&["sim", "--preset", "paper-fig1", "--config", path(&cfg), "--out", path(&out), "--seed-scale", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn numerical_failure_leaves_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    // without viscosity the jam on the Sugiyama ring overruns the jam density
    fs::write(&cfg, "visc_quadratic_rel=0\nvisc_linear_rel=0\nt_end_s=60\noutput_every_s=10\n").unwrap();
    let out = tmp.path().join("out");
    let o = jamiton(&["sim", "--preset", "sugiyama-ring", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let diag = fs::read_to_string(out.join("diagnostics.txt")).unwrap();
    assert!(diag.contains("jam density") && diag.contains("visc_linear_rel=0"));
    assert!(!out.join("sim.meta").exists());
}
