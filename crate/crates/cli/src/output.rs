//! File formats. Numbers are written with the shortest representation that
//! parses back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jamiton_core::analysis::{ProfileComparison, Trajectory};
use jamiton_core::jamiton::{SweepReport, WaveKind};
use jamiton_core::{FieldSnapshot, JamitonSolution};

use crate::scenario::{sidecar_name, Scenario};

pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SNAPSHOT_INDEX: &str = "index.csv";

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Profile CSV at time `t`. The shock appears as two rows at η = 0: the
/// state ahead of it, then the state behind it.
pub fn write_profile(path: &Path, sol: &JamitonSolution, t: f64) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["eta_mps", "x_m", "u_mps", "rho_vpm", "sonic_flag", "shock_flag"])?;
    let x0 = sol.x_of(0.0, t);
    w.write_record([
        "0".to_string(),
        x0.to_string(),
        sol.pre_shock.u.to_string(),
        sol.pre_shock.rho.to_string(),
        "0".into(),
        "1".into(),
    ])?;
    for p in &sol.profile {
        w.write_record([
            p.eta.to_string(),
            sol.x_of(p.eta, t).to_string(),
            p.u.to_string(),
            p.rho.to_string(),
            flag(p.sonic).into(),
            flag(p.shock).into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One summary row per solved case.
pub fn write_summary(path: &Path, rows: &[(f64, Result<&JamitonSolution, String>)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "rho_minus_vpm",
        "s_mps",
        "m_vps",
        "u_plus_mps",
        "u_sonic_mps",
        "rho_plus_vpm",
        "wavelength_eta_mps",
        "status",
    ])?;
    for (rho, row) in rows {
        match row {
            Ok(sol) => {
                let wl = match sol.kind {
                    WaveKind::Solitary => "inf".to_string(),
                    WaveKind::Periodic { wavelength_eta } => wavelength_eta.to_string(),
                };
                w.write_record([
                    rho.to_string(),
                    sol.frame.s.to_string(),
                    sol.frame.m.to_string(),
                    sol.post_shock.u.to_string(),
                    sol.sonic.u_s.to_string(),
                    sol.post_shock.rho.to_string(),
                    wl,
                    "ok".into(),
                ])?;
            }
            Err(e) => {
                let blank = String::new();
                w.write_record([
                    rho.to_string(),
                    blank.clone(),
                    blank.clone(),
                    blank.clone(),
                    blank.clone(),
                    blank.clone(),
                    blank,
                    e.clone(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn snapshot_file(index: usize) -> String {
    format!("snap_{index:06}.csv")
}

pub fn write_snapshot(path: &Path, snap: &FieldSnapshot) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "x_m", "u_mps", "rho_vpm"])?;
    let t = snap.t.to_string();
    for i in 0..snap.len() {
        w.write_record([t.as_str(), &snap.x[i].to_string(), &snap.u[i].to_string(), &snap.rho[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes snapshots under `dir/snapshots` with an index, as they arrive.
pub struct SnapshotWriter {
    dir: PathBuf,
    index: csv::Writer<fs::File>,
    count: usize,
}

impl SnapshotWriter {
    pub fn create(out: &Path) -> Result<Self> {
        let dir = out.join(SNAPSHOT_DIR);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut index = writer(&dir.join(SNAPSHOT_INDEX))?;
        index.write_record(["index", "t_s", "file"])?;
        Ok(Self { dir, index, count: 0 })
    }

    pub fn push(&mut self, snap: &FieldSnapshot) -> Result<()> {
        let name = snapshot_file(self.count);
        write_snapshot(&self.dir.join(&name), snap)?;
        self.index
            .write_record([self.count.to_string(), snap.t.to_string(), name])?;
        self.index.flush()?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Snapshot times and file names from a run directory's index.
pub fn read_index(run_dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let dir = run_dir.join(SNAPSHOT_DIR);
    let path = dir.join(SNAPSHOT_INDEX);
    let mut r = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t: f64 = rec.get(1).unwrap_or("").parse().context("bad time in snapshot index")?;
        out.push((t, dir.join(rec.get(2).unwrap_or(""))));
    }
    Ok(out)
}

pub fn read_snapshot(path: &Path, ring_length: f64) -> Result<FieldSnapshot> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut snap = FieldSnapshot {
        t: f64::NAN,
        ring_length,
        x: Vec::new(),
        u: Vec::new(),
        rho: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad number in {}", path.display()))?;
        if v.len() != 4 {
            bail!("{}: expected 4 columns, got {}", path.display(), v.len());
        }
        snap.t = v[0];
        snap.x.push(v[1]);
        snap.u.push(v[2]);
        snap.rho.push(v[3]);
    }
    if snap.is_empty() {
        bail!("{} holds no rows", path.display());
    }
    Ok(snap)
}

pub fn write_trajectories(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["vehicle_id", "t_s", "x_m", "u_mps"])?;
    for tr in trajs {
        let id = tr.vehicle_id.to_string();
        for s in &tr.samples {
            w.write_record([id.as_str(), &s.t.to_string(), &s.x.to_string(), &s.u.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn comparison_report(c: &ProfileComparison, t: f64, window: f64) -> String {
    format!(
        "t_s={t}\nwindow_s={window}\nwaves_count={}\nlinf_rel={}\nl2_rel={}\ntheory_speed_mps={}\n\
         measured_speed_mps={}\nspeed_err_rel={}\noffset_m={}\nexcluded_rel={}\n",
        c.waves,
        c.linf_rel(),
        c.l2_rel(),
        c.theory_speed,
        c.measured_speed,
        c.speed_err_rel,
        c.fields.offset,
        c.fields.excluded,
    )
}

pub fn write_sweep(path: &Path, report: &SweepReport<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["rho_minus_vpm", "exists", "s_mps", "m_vps", "amplitude_mps", "density_jump_vpm", "reason"])?;
    for p in &report.points {
        let rho = p.rho_minus.to_string();
        match &p.outcome {
            Ok(m) => w.write_record([
                rho,
                "1".into(),
                m.s.to_string(),
                m.m.to_string(),
                m.amplitude.to_string(),
                m.density_jump.to_string(),
                String::new(),
            ])?,
            Err(e) => w.write_record([
                rho,
                "0".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// The resolved scenario, with the code version and wall time as comments so
/// that the file loads back as the same scenario.
pub fn write_sidecar(out: &Path, scenario: &Scenario, wall_time: f64) -> Result<()> {
    let text = format!(
        "# jamiton {}\n# wall_time_s={wall_time:.3}\n{}",
        env!("CARGO_PKG_VERSION"),
        scenario.to_text()
    );
    let path = out.join(sidecar_name(scenario.task.kind()));
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
