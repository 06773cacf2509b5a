//! Scenario files.
//!
//! A scenario is flat `key=value` text, one entry per line, `#` starting a
//! comment. Every numeric key carries its unit as a suffix (`_m`, `_s`,
//! `_mps`, `_vpm`, `_m2ps2`; `_rel` and `_count` for dimensionless values).
//! A preset supplies defaults that the file may override.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use jamiton_core::model::ModelError;
use jamiton_core::particle::{Perturbation, SimError, Viscosity};
use jamiton_core::{ModelParams, SimConfig};

pub const PRESET_PAPER_FIG1: &str = jamiton_core::PAPER_FIG1;
pub const PRESET_SUGIYAMA: &str = "sugiyama-ring";
pub const PRESETS: [&str; 2] = [PRESET_PAPER_FIG1, PRESET_SUGIYAMA];

/// Metadata sidecar written into the output directory of each task.
pub fn sidecar_name(task: TaskKind) -> String {
    format!("{}.meta", task.name())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    /// 1-based line in the scenario file; `None` for preset values and flags.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Solve,
    Train,
    Stability,
    Sim,
    Traj,
    Compare,
    Sweep,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Solve,
        TaskKind::Train,
        TaskKind::Stability,
        TaskKind::Sim,
        TaskKind::Traj,
        TaskKind::Compare,
        TaskKind::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Solve => "solve",
            TaskKind::Train => "train",
            TaskKind::Stability => "stability",
            TaskKind::Sim => "sim",
            TaskKind::Traj => "traj",
            TaskKind::Compare => "compare",
            TaskKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTask {
    pub rho_minus: Vec<f64>,
    /// Time at which profile positions are reported, s.
    pub profile_time: f64,
    /// Sonic escape offset relative to ũ₀.
    pub sonic_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTask {
    pub rho_mean: f64,
    pub ring_length: f64,
    pub waves: usize,
    pub profile_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTask {
    /// Densities to classify in the report.
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTask {
    pub rho0: f64,
    pub ring_length: f64,
    pub particles: usize,
    pub mode: usize,
    pub amplitude: f64,
    pub cfl: f64,
    pub viscosity: Viscosity<f64>,
    pub t_end: f64,
    pub output_every: f64,
}

impl SimTask {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            cfl: self.cfl,
            viscosity: self.viscosity,
            perturbation: Perturbation {
                mode: self.mode,
                amplitude: self.amplitude,
            },
            t_end: self.t_end,
            output_every: self.output_every,
            ..SimConfig::for_density(self.particles, self.ring_length, self.rho0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajSource {
    /// Solitary jamiton at this far-field density.
    Analytic { rho_minus: f64, t_start: f64, t_end: f64 },
    /// Snapshots of an earlier `sim` run.
    Sim { dir: PathBuf, cells: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajTask {
    pub source: TrajSource,
    pub tracers: usize,
    pub first: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTask {
    /// Directory of the `sim` run; the output directory when absent.
    pub sim_dir: Option<PathBuf>,
    pub shock_halfwidth: f64,
    /// Length of the trailing snapshot window used to measure wave speeds, s.
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTask {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SweepTask {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Solve(SolveTask),
    Train(TrainTask),
    Stability(StabilityTask),
    Sim(SimTask),
    Traj(TrajTask),
    Compare(CompareTask),
    Sweep(SweepTask),
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Solve(_) => TaskKind::Solve,
            Task::Train(_) => TaskKind::Train,
            Task::Stability(_) => TaskKind::Stability,
            Task::Sim(_) => TaskKind::Sim,
            Task::Traj(_) => TaskKind::Traj,
            Task::Compare(_) => TaskKind::Compare,
            Task::Sweep(_) => TaskKind::Sweep,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub preset: Option<String>,
    pub params: ModelParams,
    pub task: Task,
    pub out_dir: Option<PathBuf>,
}

fn preset_text(preset: &str, task: TaskKind) -> Option<String> {
    let model = "beta_m2ps2=10\nrho_max_vpm=0.2\nu0_mps=20\ntau_s=5\n";
    let body = match (preset, task) {
        (PRESET_PAPER_FIG1, TaskKind::Solve) => "rho_minus_vpm=0.02,0.04,0.06,0.08,0.1\n",
        (PRESET_PAPER_FIG1, TaskKind::Train) => "rho_mean_vpm=0.025\nring_length_m=300\nwaves_count=3\n",
        (PRESET_PAPER_FIG1, TaskKind::Stability) => "probe_rho_vpm=0.002,0.02,0.19,0.198\n",
        (PRESET_PAPER_FIG1, TaskKind::Sim) => {
            "rho0_vpm=0.025\nring_length_m=300\nparticles_count=2500\nmode_count=3\namplitude_rel=0.05\n\
             t_end_s=200\noutput_every_s=1\n"
        }
        (PRESET_PAPER_FIG1, TaskKind::Traj) => {
            "source=analytic\nrho_minus_vpm=0.07\ntracers_count=12\ntracer_first_m=-1040\n\
             tracer_spacing_m=40\nt_start_s=0\nt_end_s=200\n"
        }
        (PRESET_PAPER_FIG1, TaskKind::Compare) => "shock_halfwidth_m=1\nwindow_s=20\n",
        (_, TaskKind::Sweep) => "grid_lo_vpm=0.001\ngrid_hi_vpm=0.199\ngrid_points_count=199\n",
        (PRESET_SUGIYAMA, TaskKind::Solve) => "rho_minus_vpm=0.09565217391304348\n",
        (PRESET_SUGIYAMA, TaskKind::Train) => "rho_mean_vpm=0.09565217391304348\nring_length_m=230\nwaves_count=1\n",
        (PRESET_SUGIYAMA, TaskKind::Stability) => "probe_rho_vpm=0.09565217391304348\n",
        (PRESET_SUGIYAMA, TaskKind::Sim) => {
            "rho0_vpm=0.09565217391304348\nring_length_m=230\nparticles_count=2300\nmode_count=1\n\
             amplitude_rel=0.01\nt_end_s=300\noutput_every_s=1\n"
        }
        (PRESET_SUGIYAMA, TaskKind::Traj) => "source=sim\ntracers_count=22\ntracer_first_m=0\ntracer_spacing_m=10.454545454545455\ncells_count=10\n",
        (PRESET_SUGIYAMA, TaskKind::Compare) => "shock_halfwidth_m=1\nwindow_s=20\n",
        _ => return None,
    };
    Some(format!("{model}{body}"))
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Key-value entries with the keys consumed so far, for strictness checks.
struct Fields {
    entries: BTreeMap<String, Entry>,
    known: Vec<&'static str>,
}

fn err(key: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_lines(text: &str, from_file: bool, into: &mut BTreeMap<String, Entry>) -> Result<(), ConfigError> {
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = from_file.then_some(i + 1);
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(content, line, "expected `key=value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err(key, line, "empty key or value"));
        }
        if seen.contains(&key) {
            return Err(err(key, line, "duplicate key"));
        }
        seen.push(key);
        into.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(())
}

impl Fields {
    fn take(&mut self, key: &'static str) -> Option<Entry> {
        self.known.push(key);
        self.entries.remove(key)
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    fn required(&mut self, key: &'static str) -> Result<Entry, ConfigError> {
        if let Some(e) = self.take(key) {
            return Ok(e);
        }
        // a present key with a missing or different unit is the likelier mistake
        let stem = key.rsplit_once('_').map_or(key, |(s, _)| s);
        if let Some((k, e)) = self.entries.iter().find(|(k, _)| *k == stem) {
            return Err(err(k, e.line, format!("missing unit suffix (expected `{key}`)")));
        }
        if let Some((k, e)) = self.entries.iter().find(|(k, _)| k.rsplit_once('_').is_some_and(|(s, _)| s == stem)) {
            return Err(err(k, e.line, format!("wrong unit suffix (expected `{key}`)")));
        }
        Err(err(key, None, "missing required key"))
    }

    fn number(e: &Entry, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| err(key, e.line, format!("`{}` is not a number", e.value)))?;
        if !v.is_finite() {
            return Err(err(key, e.line, "must be finite"));
        }
        Ok(v)
    }

    fn num(&mut self, key: &'static str) -> Result<(f64, Option<usize>), ConfigError> {
        let e = self.required(key)?;
        Ok((Self::number(&e, key)?, e.line))
    }

    fn num_or(&mut self, key: &'static str, default: f64) -> Result<(f64, Option<usize>), ConfigError> {
        match self.take(key) {
            Some(e) => Ok((Self::number(&e, key)?, e.line)),
            None => Ok((default, None)),
        }
    }

    fn positive(&mut self, key: &'static str) -> Result<f64, ConfigError> {
        let (v, line) = self.num(key)?;
        if !(v > 0.0) {
            return Err(err(key, line, format!("{v} must be positive")));
        }
        Ok(v)
    }

    fn count(&mut self, key: &'static str) -> Result<(usize, Option<usize>), ConfigError> {
        let e = self.required(key)?;
        let v = e
            .value
            .parse::<usize>()
            .map_err(|_| err(key, e.line, format!("`{}` is not a non-negative integer", e.value)))?;
        Ok((v, e.line))
    }

    fn list(&mut self, key: &'static str, default: Option<Vec<f64>>) -> Result<(Vec<f64>, Option<usize>), ConfigError> {
        let Some(e) = self.take(key) else {
            return default.map(|d| (d, None)).ok_or_else(|| err(key, None, "missing required key"));
        };
        let values = e
            .value
            .split(',')
            .map(|s| {
                Self::number(
                    &Entry {
                        value: s.trim().to_string(),
                        line: e.line,
                    },
                    key,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((values, e.line))
    }

    fn text(&mut self, key: &'static str) -> Option<Entry> {
        self.take(key)
    }

    /// Rejects whatever was not consumed.
    fn finish(self) -> Result<(), ConfigError> {
        // preset values for an alternative the file switched away from are dropped
        if let Some((key, e)) = self.entries.into_iter().find(|(_, e)| e.line.is_some()) {
            let prefix = format!("{key}_");
            if let Some(k) = self.known.iter().find(|k| k.starts_with(&prefix)) {
                return Err(err(&key, e.line, format!("missing unit suffix (expected `{k}`)")));
            }
            let stem = key.rsplit_once('_').map_or(key.as_str(), |(s, _)| s);
            if let Some(k) = self
                .known
                .iter()
                .find(|k| k.rsplit_once('_').is_some_and(|(s, _)| s == stem))
            {
                return Err(err(&key, e.line, format!("wrong unit suffix (expected `{k}`)")));
            }
            return Err(err(&key, e.line, "unknown key"));
        }
        Ok(())
    }
}

fn model_key(field: &str) -> &'static str {
    match field {
        "beta" => "beta_m2ps2",
        "rho_max" => "rho_max_vpm",
        "u0" => "u0_mps",
        _ => "tau_s",
    }
}

fn sim_key(field: &str) -> &'static str {
    match field {
        "n_particles" => "particles_count",
        "ring_length" => "ring_length_m",
        "mass_per_particle" => "rho0_vpm",
        "cfl" => "cfl_rel",
        "viscosity.quadratic" => "visc_quadratic_rel",
        "viscosity.linear" => "visc_linear_rel",
        "perturbation.amplitude" => "amplitude_rel",
        "perturbation.mode" => "mode_count",
        "t_end" => "t_end_s",
        _ => "output_every_s",
    }
}

fn in_density_range(values: &[f64], params: &ModelParams, key: &str, line: Option<usize>) -> Result<(), ConfigError> {
    match values.iter().find(|&&r| !(r > 0.0 && r < params.rho_max)) {
        Some(r) => Err(err(key, line, format!("density {r} outside (0, rho_max)"))),
        None => Ok(()),
    }
}

impl Scenario {
    /// The scenario a preset defines for `task`.
    pub fn preset(name: &str, task: TaskKind) -> Result<Self, ConfigError> {
        Self::from_text("", task, Some(name))
    }

    /// Parses scenario text for `task`, on top of `preset` defaults when given.
    /// A `preset` key in the text takes the place of the argument.
    pub fn from_text(text: &str, task: TaskKind, preset: Option<&str>) -> Result<Self, ConfigError> {
        let mut user = BTreeMap::new();
        parse_lines(text, true, &mut user)?;

        let preset = match user.remove("preset") {
            Some(e) => {
                if let Some(p) = preset.filter(|p| *p != e.value) {
                    return Err(err("preset", e.line, format!("file names `{}` but `{p}` was requested", e.value)));
                }
                Some((e.value, e.line))
            }
            None => preset.map(|p| (p.to_string(), None)),
        };
        let mut entries = BTreeMap::new();
        if let Some((name, line)) = &preset {
            if !PRESETS.contains(&name.as_str()) {
                return Err(err("preset", *line, format!("unknown preset `{name}` (known: {})", PRESETS.join(", "))));
            }
            let defaults = preset_text(name, task)
                .ok_or_else(|| err("preset", *line, format!("preset `{name}` has no `{}` task", task.name())))?;
            parse_lines(&defaults, false, &mut entries)?;
        }
        entries.extend(user);

        let mut f = Fields {
            entries,
            known: Vec::new(),
        };
        if let Some(e) = f.text("task") {
            if e.value != task.name() {
                return Err(err("task", e.line, format!("file is for `{}`, not `{}`", e.value, task.name())));
            }
        }
        let out_dir = f.text("out_dir").map(|e| PathBuf::from(e.value));

        let lines: Vec<_> = ["beta_m2ps2", "rho_max_vpm", "u0_mps", "tau_s"]
            .iter()
            .map(|k| f.line(k))
            .collect();
        let (beta, _) = f.num("beta_m2ps2")?;
        let (rho_max, _) = f.num("rho_max_vpm")?;
        let (u0, _) = f.num("u0_mps")?;
        let (tau, _) = f.num("tau_s")?;
        let params = ModelParams::new(beta, rho_max, u0, tau).map_err(|e| match e {
            ModelError::InvalidParameter { field, value } => {
                let key = model_key(field);
                let idx = ["beta_m2ps2", "rho_max_vpm", "u0_mps", "tau_s"]
                    .iter()
                    .position(|k| *k == key)
                    .unwrap_or(3);
                err(key, lines[idx], format!("{value} must be strictly positive and finite"))
            }
            other => err("tau_s", lines[3], other.to_string()),
        })?;

        let task = match task {
            TaskKind::Solve => {
                let (rho_minus, line) = f.list("rho_minus_vpm", None)?;
                in_density_range(&rho_minus, &params, "rho_minus_vpm", line)?;
                let (profile_time, _) = f.num_or("profile_time_s", 0.0)?;
                let (sonic_offset, line) = f.num_or("sonic_offset_rel", jamiton_core::jamiton::DEFAULT_SONIC_OFFSET)?;
                if !(sonic_offset > 0.0 && sonic_offset < 1.0) {
                    return Err(err("sonic_offset_rel", line, "must lie in (0, 1)"));
                }
                Task::Solve(SolveTask {
                    rho_minus,
                    profile_time,
                    sonic_offset,
                })
            }
            TaskKind::Train => {
                let line = f.line("rho_mean_vpm");
                let (rho_mean, _) = f.num("rho_mean_vpm")?;
                in_density_range(&[rho_mean], &params, "rho_mean_vpm", line)?;
                let ring_length = f.positive("ring_length_m")?;
                let (waves, line) = f.count("waves_count")?;
                if waves == 0 {
                    return Err(err("waves_count", line, "must be at least 1"));
                }
                let (profile_time, _) = f.num_or("profile_time_s", 0.0)?;
                Task::Train(TrainTask {
                    rho_mean,
                    ring_length,
                    waves,
                    profile_time,
                })
            }
            TaskKind::Stability => {
                let (probes, line) = f.list("probe_rho_vpm", Some(Vec::new()))?;
                in_density_range(&probes, &params, "probe_rho_vpm", line)?;
                Task::Stability(StabilityTask { probes })
            }
            TaskKind::Sim => {
                let mut lines = BTreeMap::new();
                for k in [
                    "rho0_vpm",
                    "ring_length_m",
                    "particles_count",
                    "mode_count",
                    "amplitude_rel",
                    "cfl_rel",
                    "visc_quadratic_rel",
                    "visc_linear_rel",
                    "t_end_s",
                    "output_every_s",
                ] {
                    lines.insert(k, f.line(k));
                }
                let defaults = Viscosity::default();
                let sim = SimTask {
                    rho0: f.num("rho0_vpm")?.0,
                    ring_length: f.num("ring_length_m")?.0,
                    particles: f.count("particles_count")?.0,
                    mode: f.count("mode_count")?.0,
                    amplitude: f.num("amplitude_rel")?.0,
                    cfl: f.num_or("cfl_rel", 0.5)?.0,
                    viscosity: Viscosity {
                        quadratic: f.num_or("visc_quadratic_rel", defaults.quadratic)?.0,
                        linear: f.num_or("visc_linear_rel", defaults.linear)?.0,
                    },
                    t_end: f.num("t_end_s")?.0,
                    output_every: f.num("output_every_s")?.0,
                };
                validate_sim(&sim, &params, |k| lines.get(k).copied().flatten())?;
                Task::Sim(sim)
            }
            TaskKind::Traj => {
                let src = f.text("source").ok_or_else(|| err("source", None, "missing required key"))?;
                let source = match src.value.as_str() {
                    "analytic" => {
                        let line = f.line("rho_minus_vpm");
                        let (rho_minus, _) = f.num("rho_minus_vpm")?;
                        in_density_range(&[rho_minus], &params, "rho_minus_vpm", line)?;
                        let (t_start, _) = f.num("t_start_s")?;
                        let (t_end, line) = f.num("t_end_s")?;
                        if !(t_end > t_start) {
                            return Err(err("t_end_s", line, "must exceed t_start_s"));
                        }
                        TrajSource::Analytic {
                            rho_minus,
                            t_start,
                            t_end,
                        }
                    }
                    "sim" => {
                        let dir = f.text("sim_dir").map(|e| PathBuf::from(e.value)).unwrap_or_default();
                        let (cells, line) = f.count("cells_count")?;
                        if cells == 0 {
                            return Err(err("cells_count", line, "must be at least 1"));
                        }
                        TrajSource::Sim { dir, cells }
                    }
                    other => return Err(err("source", src.line, format!("`{other}` is neither `analytic` nor `sim`"))),
                };
                let (tracers, line) = f.count("tracers_count")?;
                if tracers == 0 {
                    return Err(err("tracers_count", line, "must be at least 1"));
                }
                let (first, _) = f.num("tracer_first_m")?;
                let spacing = f.positive("tracer_spacing_m")?;
                Task::Traj(TrajTask {
                    source,
                    tracers,
                    first,
                    spacing,
                })
            }
            TaskKind::Compare => {
                let sim_dir = f.text("sim_dir").map(|e| PathBuf::from(e.value));
                let (shock_halfwidth, line) = f.num("shock_halfwidth_m")?;
                if shock_halfwidth < 0.0 {
                    return Err(err("shock_halfwidth_m", line, "must be non-negative"));
                }
                let window = f.positive("window_s")?;
                Task::Compare(CompareTask {
                    sim_dir,
                    shock_halfwidth,
                    window,
                })
            }
            TaskKind::Sweep => {
                let (lo, line_lo) = f.num("grid_lo_vpm")?;
                let (hi, line_hi) = f.num("grid_hi_vpm")?;
                in_density_range(&[lo], &params, "grid_lo_vpm", line_lo)?;
                in_density_range(&[hi], &params, "grid_hi_vpm", line_hi)?;
                if !(hi > lo) {
                    return Err(err("grid_hi_vpm", line_hi, "must exceed grid_lo_vpm"));
                }
                let (points, line) = f.count("grid_points_count")?;
                if points < 2 {
                    return Err(err("grid_points_count", line, "need at least 2 points"));
                }
                Task::Sweep(SweepTask { lo, hi, points })
            }
        };
        f.finish()?;
        Ok(Scenario {
            preset: preset.map(|p| p.0),
            params,
            task,
            out_dir,
        })
    }

    /// Full resolved text; loading it again yields an identical scenario.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("task", self.task.kind().name().to_string());
        if let Some(p) = &self.preset {
            put("preset", p.clone());
        }
        if let Some(d) = &self.out_dir {
            put("out_dir", d.display().to_string());
        }
        let p = &self.params;
        put("beta_m2ps2", p.beta.to_string());
        put("rho_max_vpm", p.rho_max.to_string());
        put("u0_mps", p.u0.to_string());
        put("tau_s", p.tau.to_string());
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        match &self.task {
            Task::Solve(t) => {
                put("rho_minus_vpm", list(&t.rho_minus));
                put("profile_time_s", t.profile_time.to_string());
                put("sonic_offset_rel", t.sonic_offset.to_string());
            }
            Task::Train(t) => {
                put("rho_mean_vpm", t.rho_mean.to_string());
                put("ring_length_m", t.ring_length.to_string());
                put("waves_count", t.waves.to_string());
                put("profile_time_s", t.profile_time.to_string());
            }
            Task::Stability(t) => {
                if !t.probes.is_empty() {
                    put("probe_rho_vpm", list(&t.probes));
                }
            }
            Task::Sim(t) => {
                put("rho0_vpm", t.rho0.to_string());
                put("ring_length_m", t.ring_length.to_string());
                put("particles_count", t.particles.to_string());
                put("mode_count", t.mode.to_string());
                put("amplitude_rel", t.amplitude.to_string());
                put("cfl_rel", t.cfl.to_string());
                put("visc_quadratic_rel", t.viscosity.quadratic.to_string());
                put("visc_linear_rel", t.viscosity.linear.to_string());
                put("t_end_s", t.t_end.to_string());
                put("output_every_s", t.output_every.to_string());
            }
            Task::Traj(t) => {
                match &t.source {
                    TrajSource::Analytic {
                        rho_minus,
                        t_start,
                        t_end,
                    } => {
                        put("source", "analytic".into());
                        put("rho_minus_vpm", rho_minus.to_string());
                        put("t_start_s", t_start.to_string());
                        put("t_end_s", t_end.to_string());
                    }
                    TrajSource::Sim { dir, cells } => {
                        put("source", "sim".into());
                        if !dir.as_os_str().is_empty() {
                            put("sim_dir", dir.display().to_string());
                        }
                        put("cells_count", cells.to_string());
                    }
                }
                put("tracers_count", t.tracers.to_string());
                put("tracer_first_m", t.first.to_string());
                put("tracer_spacing_m", t.spacing.to_string());
            }
            Task::Compare(t) => {
                if let Some(d) = &t.sim_dir {
                    put("sim_dir", d.display().to_string());
                }
                put("shock_halfwidth_m", t.shock_halfwidth.to_string());
                put("window_s", t.window.to_string());
            }
            Task::Sweep(t) => {
                put("grid_lo_vpm", t.lo.to_string());
                put("grid_hi_vpm", t.hi.to_string());
                put("grid_points_count", t.points.to_string());
            }
        }
        s
    }
}

fn validate_sim(sim: &SimTask, params: &ModelParams, line: impl Fn(&str) -> Option<usize>) -> Result<(), ConfigError> {
    if !(sim.rho0 > 0.0 && sim.rho0 < params.rho_max) {
        return Err(err("rho0_vpm", line("rho0_vpm"), format!("density {} outside (0, rho_max)", sim.rho0)));
    }
    if !(sim.ring_length > 0.0) {
        return Err(err("ring_length_m", line("ring_length_m"), "must be positive"));
    }
    sim.config().validate(params).map_err(|e| match e {
        SimError::InvalidConfig { field, reason } => {
            let key = sim_key(field);
            err(key, line(key), reason)
        }
        other => err("rho0_vpm", line("rho0_vpm"), other.to_string()),
    })
}

/// Rescales the particle count of a `sim` scenario, re-validating the result.
pub fn apply_seed_scale(scenario: &mut Scenario, scale: f64) -> Result<(), ConfigError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(err("seed-scale", None, format!("{scale} must be positive")));
    }
    let params = scenario.params;
    if let Task::Sim(sim) = &mut scenario.task {
        let scaled = SimTask {
            particles: (sim.particles as f64 * scale).round() as usize,
            ..sim.clone()
        };
        validate_sim(&scaled, &params, |_| None).map_err(|mut e| {
            e.message = format!("{} (after --seed-scale {scale})", e.message);
            e
        })?;
        *sim = scaled;
    }
    Ok(())
}

/// Reads a scenario file; missing or unreadable files are configuration errors.
pub fn load_scenario(path: &Path, task: TaskKind, preset: Option<&str>) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err("config", None, format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_text(&text, task, preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_for_every_task() {
        for preset in PRESETS {
            for task in TaskKind::ALL {
                let s = Scenario::preset(preset, task).unwrap();
                assert_eq!(s.task.kind(), task);
                assert_eq!(s.params, ModelParams::paper_fig1());
            }
        }
    }

    #[test]
    fn paper_fig1_solve_has_five_cases() {
        let s = Scenario::preset(PRESET_PAPER_FIG1, TaskKind::Solve).unwrap();
        let Task::Solve(t) = s.task else { panic!() };
        let fractions: Vec<f64> = t.rho_minus.iter().map(|r| r / 0.2).collect();
        for (f, want) in fractions.iter().zip([0.1, 0.2, 0.3, 0.4, 0.5]) {
            assert!((f - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sugiyama_ring_is_22_vehicles_on_230_m() {
        let s = Scenario::preset(PRESET_SUGIYAMA, TaskKind::Sim).unwrap();
        let Task::Sim(t) = s.task else { panic!() };
        assert_eq!(t.ring_length, 230.0);
        assert!((t.config().total_vehicles() - 22.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameter_names_key_and_line() {
        let text = "beta_m2ps2=10\nrho_max_vpm=0.2\nu0_mps=20\ntau_s=-1\nrho_minus_vpm=0.05\n";
        let e = Scenario::from_text(text, TaskKind::Solve, None).unwrap_err();
        assert_eq!(e.key, "tau_s");
        assert_eq!(e.line, Some(4));
        assert!(e.to_string().contains("tau_s"));
    }

    #[test]
    fn strictness() {
        let base = "beta_m2ps2=10\nrho_max_vpm=0.2\nu0_mps=20\ntau_s=5\nrho_minus_vpm=0.05\n";
        let e = Scenario::from_text(&format!("{base}colour=red\n"), TaskKind::Solve, None).unwrap_err();
        assert_eq!((e.key.as_str(), e.line, e.message.as_str()), ("colour", Some(6), "unknown key"));
        let e = Scenario::from_text(&base.replace("tau_s", "tau"), TaskKind::Solve, None).unwrap_err();
        assert_eq!(e.key, "tau");
        assert!(e.message.contains("missing unit suffix"));
        let e = Scenario::from_text(&base.replace("tau_s", "tau_ms"), TaskKind::Solve, None).unwrap_err();
        assert!(e.message.contains("wrong unit suffix"));
        let e = Scenario::from_text(&format!("{base}tau_s=4\n"), TaskKind::Solve, None).unwrap_err();
        assert_eq!(e.message, "duplicate key");
        let e = Scenario::from_text(&format!("task=sim\n{base}"), TaskKind::Solve, None).unwrap_err();
        assert_eq!(e.key, "task");
        let e = Scenario::from_text("u0_mps=20\n", TaskKind::Solve, None).unwrap_err();
        assert_eq!(e.message, "missing required key");
        let e = Scenario::from_text("u0_mps=fast\n", TaskKind::Solve, Some(PRESET_PAPER_FIG1)).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("u0_mps", Some(1)));
    }

    #[test]
    fn file_overrides_preset() {
        let s = Scenario::from_text("# comment\ntau_s=4 # trailing\n", TaskKind::Stability, Some(PRESET_PAPER_FIG1)).unwrap();
        assert_eq!(s.params.tau, 4.0);
        assert_eq!(s.preset.as_deref(), Some(PRESET_PAPER_FIG1));
    }

    #[test]
    fn sim_invariants_are_checked() {
        let e = Scenario::from_text("particles_count=500\n", TaskKind::Sim, Some(PRESET_PAPER_FIG1)).unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("particles_count", Some(1)));
        let e = Scenario::from_text("cfl_rel=1.5\n", TaskKind::Sim, Some(PRESET_PAPER_FIG1)).unwrap_err();
        assert_eq!(e.key, "cfl_rel");
        let mut s = Scenario::preset(PRESET_PAPER_FIG1, TaskKind::Sim).unwrap();
        assert!(apply_seed_scale(&mut s, 0.1).is_err());
        apply_seed_scale(&mut s, 2.0).unwrap();
        let Task::Sim(t) = &s.task else { panic!() };
        assert_eq!(t.particles, 5000);
    }

    #[test]
    fn text_round_trips() {
        for preset in PRESETS {
            for task in TaskKind::ALL {
                let mut s = Scenario::preset(preset, task).unwrap();
                s.out_dir = Some(PathBuf::from("runs/a"));
                let again = Scenario::from_text(&s.to_text(), task, None).unwrap();
                assert_eq!(again, s);
                assert_eq!(again.to_text(), s.to_text());
            }
        }
    }
}
