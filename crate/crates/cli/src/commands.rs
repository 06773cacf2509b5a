//! One function per subcommand. Everything a command writes goes under its
//! output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use jamiton_core::analysis::{
    compare_profiles, detect_jamitons, trajectories_analytic, trajectories_sim, AnalysisError, CompareOptions,
    RingField, TheoryTrain, DEFAULT_THRESHOLD,
};
use jamiton_core::jamiton::{
    matched_periodic_train, solitary_jamiton, solitary_jamiton_with_offset, sweep_existence, JamitonError,
};
use jamiton_core::particle::{SimError, Simulation};
use jamiton_core::{FieldSnapshot, JamitonSolution, ModelError, ModelParams};
use rayon::prelude::*;

use crate::output;
use crate::scenario::{
    apply_seed_scale, load_scenario, sidecar_name, ConfigError, Scenario, Task, TaskKind, TrajSource,
};
use crate::svg::{bin, heat_map, line_plot, Series};

pub const DIAGNOSTICS: &str = "diagnostics.txt";

const HEAT_MAP_BINS: usize = 200;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed_scale: Option<f64>,
    pub svg: bool,
}

fn config_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        line: None,
        message: message.into(),
    }
}

/// Scenario and output directory for `task`.
pub fn resolve(task: TaskKind, opts: &RunOptions) -> Result<(Scenario, PathBuf), ConfigError> {
    let mut scenario = match (&opts.config, &opts.preset) {
        (Some(path), preset) => load_scenario(path, task, preset.as_deref())?,
        (None, Some(preset)) => Scenario::preset(preset, task)?,
        (None, None) => return Err(config_err("preset", "give --preset or --config")),
    };
    if let Some(scale) = opts.seed_scale {
        apply_seed_scale(&mut scenario, scale)?;
    }
    let out = opts
        .out
        .clone()
        .or_else(|| scenario.out_dir.clone())
        .ok_or_else(|| config_err("out_dir", "give --out or `out_dir` in the scenario"))?;
    Ok((scenario, out))
}

/// Exit status for an error: 3 for configuration, 2 when no wave or band
/// exists, 4 for numerical failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<JamitonError>() {
            return jamiton_code(e);
        }
        if let Some(e) = cause.downcast_ref::<AnalysisError>() {
            match e {
                AnalysisError::NothingToCompare => return 2,
                // snapshots too sparse for the requested grid: fixable in the scenario
                AnalysisError::InsufficientOutputRate { .. } => return 3,
                AnalysisError::Jamiton(j) => return jamiton_code(j),
                _ => {}
            }
        }
        if let Some(ModelError::NoUnstableBand) = cause.downcast_ref::<ModelError>() {
            return 2;
        }
    }
    4
}

fn jamiton_code(e: &JamitonError) -> i32 {
    match e {
        JamitonError::NoJamiton { .. }
        | JamitonError::WavelengthInfeasible { .. }
        | JamitonError::Model(ModelError::NoUnstableBand) => 2,
        _ => 4,
    }
}

/// Runs `task` and returns a short report. On numerical failure a
/// diagnostics file is left in the output directory.
pub fn run(task: TaskKind, opts: &RunOptions) -> Result<String> {
    let (scenario, out) = resolve(task, opts)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();
    let result = dispatch(&scenario, &out, opts.svg);
    if let Err(e) = &result {
        if exit_code(e) == 4 {
            let text = format!("error: {e:#}\n\n# scenario\n{}", scenario.to_text());
            let _ = fs::write(out.join(DIAGNOSTICS), text);
        }
    }
    let report = result?;
    output::write_sidecar(&out, &scenario, start.elapsed().as_secs_f64())?;
    Ok(report)
}

fn dispatch(scenario: &Scenario, out: &Path, svg: bool) -> Result<String> {
    let p = &scenario.params;
    match &scenario.task {
        Task::Solve(t) => solve(p, &t.rho_minus, t.profile_time, t.sonic_offset, out, svg),
        Task::Train(t) => {
            let sol = matched_periodic_train(p, t.rho_mean, t.ring_length / t.waves as f64 / p.tau)?;
            output::write_profile(&out.join("profile.csv"), &sol, t.profile_time)?;
            output::write_summary(&out.join("summary.csv"), &[(sol.far.rho, Ok(&sol))])?;
            if svg {
                write_profile_svg(&out.join("profile.svg"), &[(format!("{}", t.rho_mean), &sol)])?;
            }
            Ok(format!(
                "rho_mean_vpm={} waves_count={} s_mps={} rho_minus_vpm={} u_plus_mps={}\n",
                t.rho_mean, t.waves, sol.frame.s, sol.far.rho, sol.post_shock.u
            ))
        }
        Task::Stability(t) => {
            let (lo, hi) = p.critical_densities()?;
            let mut report = format!("band_lo_vpm={lo}\nband_hi_vpm={hi}\n");
            for &r in &t.probes {
                let verdict = if p.is_unstable(r)? { "unstable" } else { "stable" };
                report.push_str(&format!("probe rho_vpm={r} {verdict}\n"));
            }
            fs::write(out.join("stability.txt"), &report)?;
            Ok(report)
        }
        Task::Sim(t) => simulate(p, &t.config(), out, svg),
        Task::Traj(t) => {
            let seeds: Vec<f64> = (0..t.tracers).map(|k| t.first + t.spacing * k as f64).collect();
            let trajs = match &t.source {
                TrajSource::Analytic {
                    rho_minus,
                    t_start,
                    t_end,
                } => {
                    let sol = solitary_jamiton(p, *rho_minus)?;
                    trajectories_analytic(&sol, &seeds, (*t_start, *t_end))?
                }
                TrajSource::Sim { dir, cells } => {
                    let dir = if dir.as_os_str().is_empty() { out } else { dir.as_path() };
                    let (_, snaps) = load_run(dir, None)?;
                    trajectories_sim(&snaps, &seeds, *cells)?
                }
            };
            output::write_trajectories(&out.join("trajectories.csv"), &trajs)?;
            let crossings: usize = trajs.iter().map(|tr| tr.shock_crossings().len()).sum();
            if svg {
                let series: Vec<Series> = trajs
                    .iter()
                    .map(|tr| Series {
                        label: String::new(),
                        points: tr.samples.iter().map(|s| (s.t, s.x)).collect(),
                    })
                    .collect();
                fs::write(out.join("trajectories.svg"), line_plot("vehicle paths", "t (s)", "x (m)", &series))?;
            }
            Ok(format!("vehicles_count={} shock_crossings_count={crossings}\n", trajs.len()))
        }
        Task::Compare(t) => {
            let dir = t.sim_dir.as_deref().unwrap_or(out);
            let (sim, snaps) = load_run(dir, Some(t.window))?;
            let sp = &sim.params;
            if sp != p {
                eprintln!("note: using the model parameters of the simulation in {}", dir.display());
            }
            let Task::Sim(st) = &sim.task else {
                unreachable!("load_run returns sim scenarios")
            };
            let waves = detect_jamitons(&snaps, DEFAULT_THRESHOLD)?;
            if waves.is_empty() {
                return Err(AnalysisError::NothingToCompare.into());
            }
            let theory = matched_periodic_train(sp, st.rho0, st.ring_length / waves.len() as f64 / sp.tau)?;
            let opts = CompareOptions {
                shock_halfwidth: t.shock_halfwidth,
                ..CompareOptions::default()
            };
            let c = compare_profiles(&theory, &snaps, &opts)?;
            let last = snaps.last().expect("load_run returns at least two snapshots");
            let report = output::comparison_report(&c, last.t, t.window);
            fs::write(out.join("comparison.txt"), &report)?;
            if svg {
                let train = TheoryTrain::new(&theory, last.ring_length, last.t)?;
                let n = 2000;
                let exact: Vec<(f64, f64)> = (0..n)
                    .map(|i| {
                        let x = last.ring_length * i as f64 / n as f64;
                        (x, train.density_at(x + c.fields.offset))
                    })
                    .collect();
                let series = [
                    Series {
                        label: "simulation".into(),
                        points: last.x.iter().copied().zip(last.rho.iter().copied()).collect(),
                    },
                    Series {
                        label: "exact".into(),
                        points: exact,
                    },
                ];
                fs::write(out.join("comparison.svg"), line_plot("density", "x (m)", "rho (1/m)", &series))?;
            }
            Ok(report)
        }
        Task::Sweep(t) => {
            let report = sweep_existence(p, &t.grid());
            output::write_sweep(&out.join("sweep.csv"), &report)?;
            let range = |r: Option<(f64, f64)>| r.map_or("none".to_string(), |(a, b)| format!("{a},{b}"));
            let text = format!(
                "existence_range_vpm={}\ncritical_vpm={}\nspeed_monotone_decreasing={}\n",
                range(report.existence_range),
                range(report.critical),
                report.speed_monotone_decreasing
            );
            fs::write(out.join("sweep.txt"), &text)?;
            if svg {
                let points = report
                    .points
                    .iter()
                    .map(|pt| (pt.rho_minus, pt.outcome.as_ref().map_or(f64::NAN, |m| m.s)))
                    .collect();
                let series = [Series {
                    label: "s".into(),
                    points,
                }];
                fs::write(out.join("sweep.svg"), line_plot("jamiton speed", "rho_minus (1/m)", "s (m/s)", &series))?;
            }
            Ok(text)
        }
    }
}

fn solve(p: &ModelParams, rhos: &[f64], t: f64, eps: f64, out: &Path, svg: bool) -> Result<String> {
    let results: Vec<Result<JamitonSolution, JamitonError>> =
        rhos.par_iter().map(|&r| solitary_jamiton_with_offset(p, r, eps)).collect();
    let solved: Vec<Result<(), anyhow::Error>> = results
        .par_iter()
        .enumerate()
        .map(|(k, res)| {
            let Ok(sol) = res else { return Ok(()) };
            let dir = out.join(format!("case_{k:02}"));
            fs::create_dir_all(&dir)?;
            output::write_profile(&dir.join("profile.csv"), sol, t)
        })
        .collect();
    solved.into_iter().collect::<Result<()>>()?;

    let rows: Vec<(f64, Result<&JamitonSolution, String>)> = rhos
        .iter()
        .zip(&results)
        .map(|(&r, res)| (r, res.as_ref().map_err(ToString::to_string)))
        .collect();
    output::write_summary(&out.join("summary.csv"), &rows)?;
    let mut report = String::new();
    for (r, res) in rhos.iter().zip(&results) {
        match res {
            Ok(sol) => report.push_str(&format!(
                "rho_minus_vpm={r} s_mps={} m_vps={} u_plus_mps={} u_sonic_mps={}\n",
                sol.frame.s, sol.frame.m, sol.post_shock.u, sol.sonic.u_s
            )),
            Err(e) => eprintln!("rho_minus_vpm={r}: {e}"),
        }
    }
    if svg {
        let ok: Vec<(String, &JamitonSolution)> = rhos
            .iter()
            .zip(&results)
            .filter_map(|(r, res)| res.as_ref().ok().map(|s| (format!("{r}"), s)))
            .collect();
        write_profile_svg(&out.join("profiles.svg"), &ok)?;
    }
    // report the first failure after writing what could be solved
    if let Some(e) = results.into_iter().find_map(Result::err) {
        return Err(e.into());
    }
    Ok(report)
}

fn write_profile_svg(path: &Path, sols: &[(String, &JamitonSolution)]) -> Result<()> {
    let series: Vec<Series> = sols
        .iter()
        .map(|(label, sol)| {
            let mut points = vec![(0.0, sol.pre_shock.rho / sol.params.rho_max)];
            points.extend(sol.profile.iter().map(|s| (s.eta, s.rho / sol.params.rho_max)));
            Series {
                label: label.clone(),
                points,
            }
        })
        .collect();
    fs::write(path, line_plot("jamiton profiles", "eta (m/s)", "rho / rho_max", &series))?;
    Ok(())
}

fn simulate(p: &ModelParams, cfg: &jamiton_core::SimConfig, out: &Path, svg: bool) -> Result<String> {
    let mut sim = Simulation::new(*cfg, *p)?;
    let mut writer = output::SnapshotWriter::create(out)?;
    let mut write_err = None;
    let mut last: Option<FieldSnapshot> = None;
    let mut map = Vec::new();
    let ran = sim.run_with(|snap| {
        if let Err(e) = writer.push(snap) {
            write_err = Some(e);
            return false;
        }
        if svg {
            map.push((snap.t, bin(&snap.x, &snap.rho, snap.ring_length, HEAT_MAP_BINS)));
        }
        last = Some(snap.clone());
        true
    });
    if let Some(e) = write_err {
        return Err(e);
    }
    ran.map_err(|e: SimError| {
        let t = sim.time();
        anyhow::Error::new(e).context(format!("simulation failed at t = {t} after {} steps", sim.steps()))
    })?;
    let last = last.expect("run_with emits the initial snapshot");
    if svg {
        let series = [Series {
            label: format!("t={}", last.t),
            points: last.x.iter().copied().zip(last.rho.iter().copied()).collect(),
        }];
        fs::write(out.join("density.svg"), line_plot("density", "x (m)", "rho (1/m)", &series))?;
        fs::write(out.join("spacetime.svg"), heat_map("density", last.ring_length, &map))?;
    }
    Ok(format!(
        "t_s={} steps_count={} snapshots_count={} rho_range_vpm={}\n",
        last.t,
        sim.steps(),
        writer.count(),
        last.density_range()
    ))
}

/// The scenario and snapshots of a `sim` run; with `window`, only those in
/// the trailing window of that length.
pub fn load_run(dir: &Path, window: Option<f64>) -> Result<(Scenario, Vec<FieldSnapshot>)> {
    let meta = dir.join(sidecar_name(TaskKind::Sim));
    if !meta.is_file() {
        return Err(config_err(
            "sim_dir",
            format!("{} is not a simulation output directory (no {})", dir.display(), meta.display()),
        )
        .into());
    }
    let sim = load_scenario(&meta, TaskKind::Sim, None)?;
    let Task::Sim(st) = &sim.task else {
        unreachable!("loaded as a sim scenario")
    };
    let index = output::read_index(dir)?;
    let t_last = index.last().map_or(0.0, |e| e.0);
    let chosen: Vec<&PathBuf> = index
        .iter()
        .filter(|(t, _)| window.map_or(true, |w| *t >= t_last - w - 1e-9))
        .map(|(_, f)| f)
        .collect();
    let snaps = chosen
        .par_iter()
        .map(|f| output::read_snapshot(f, st.ring_length))
        .collect::<Result<Vec<_>>>()?;
    if snaps.len() < 2 {
        return Err(AnalysisError::InsufficientSnapshots {
            needed: 2,
            got: snaps.len(),
        })
        .with_context(|| format!("in {}", dir.display()));
    }
    Ok((sim, snaps))
}
