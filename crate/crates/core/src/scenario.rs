//! Scenario orchestration: turn a validated config into deterministic
//! output files (series CSV, summary JSON, optional SVG, run manifest).

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    default_delta_beta, detect_critical_times, extract_phase_profile, fisher_convergence_defect,
    fisher_information, linspace, observable_series, phase_diagram, CriticalTimes, FisherSeries,
    FisherSettings, ObservableSeries, PhaseProfileResult, SeriesOptions, SweepSettings,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_conditioned_hamiltonian, build_dipolar_secular, build_full_hamiltonian,
    literature_dataset, make_chain_geometry, Constants, FieldSchedule, PairGeometry, QuenchSpec,
};
use crate::output::{
    write_comparison_csv, write_fisher_csv, write_json, write_observable_csv, write_sweep_csv,
};
use crate::propagation::{
    apply_manifold_quench, evolve_lindblad, evolve_static, evolve_timedep, verify_h0_eigenstate,
    HamiltonianSource, LindbladModel, TimeGrid, Trajectory,
};
use crate::spin::{SpinRegister, StateVector};
use crate::svg::{render_heatmap_svg, render_panels_svg, Panel};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub svg: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_hash: String,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

struct RunContext<'a> {
    config: &'a ExperimentConfig,
    constants: Constants,
    out_dir: &'a Path,
    svg: bool,
    outputs: Vec<String>,
}

impl RunContext<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn record(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    fn write_series(&mut self, name: &str, series: &ObservableSeries) -> Result<()> {
        write_observable_csv(&self.path(name), series)?;
        self.record(name);
        Ok(())
    }

    fn write_summary(&mut self, value: &serde_json::Value) -> Result<()> {
        write_json(&self.path("summary.json"), value)?;
        self.record("summary.json");
        Ok(())
    }

    fn maybe_series_svg(
        &mut self,
        name: &str,
        title: &str,
        series: &ObservableSeries,
        detected: &CriticalTimes,
    ) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        let times_us: Vec<f64> = series.times.iter().map(|t| t * 1e6).collect();
        let markers_us: Vec<f64> = detected.switch_times.iter().map(|t| t * 1e6).collect();
        let mut panels = vec![
            Panel { y_label: "lambda".into(), curves: vec![("lambda".into(), series.lambda.clone())] },
            Panel { y_label: "<Mz>".into(), curves: vec![("mz".into(), series.mz.clone())] },
        ];
        if let Some(conc) = &series.concurrence {
            panels.push(Panel {
                y_label: "concurrence".into(),
                curves: vec![("concurrence".into(), conc.clone())],
            });
        }
        if let Some(tangle) = &series.tangle {
            panels.push(Panel {
                y_label: "tau123".into(),
                curves: vec![("tau123".into(), tangle.tau123.clone())],
            });
        }
        render_panels_svg(&self.path(name), title, &times_us, &panels, &markers_us)?;
        self.record(name);
        Ok(())
    }
}

/// Execute a scenario, writing every requested artifact under
/// `options.out_dir`. Returns the manifest (also written there).
pub fn run_scenario(config: &ExperimentConfig, options: &RunOptions) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    std::fs::create_dir_all(&options.out_dir)?;
    let mut ctx = RunContext {
        config,
        constants: Constants::default(),
        out_dir: &options.out_dir,
        svg: options.svg || config.svg_requested(),
        outputs: Vec::new(),
    };

    match config.scenario.as_str() {
        "field-quench" => run_field_quench(&mut ctx)?,
        "central-quench" => run_central_quench(&mut ctx)?,
        "sweep" => run_sweep(&mut ctx, options.threads)?,
        "fisher" => run_fisher(&mut ctx)?,
        "validate" => run_validate(&mut ctx)?,
        "entanglement" => run_entanglement(&mut ctx)?,
        other => return Err(Error::UnknownScenario(other.to_string())),
    }

    let manifest = RunManifest {
        scenario: config.scenario.clone(),
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: ctx.outputs.clone(),
    };
    write_json(
        &options.out_dir.join("manifest.json"),
        &serde_json::to_value(&manifest)?,
    )?;
    Ok(manifest)
}

fn us(t: f64) -> f64 {
    t * 1e6
}

fn times_us(ts: &[f64]) -> Vec<f64> {
    ts.iter().map(|&t| us(t)).collect()
}

/// Largest distance between each switch time and its nearest magnetization
/// zero, in units of the output step. NaN when either list is empty.
fn switch_mz_coincidence_steps(detected: &CriticalTimes, step: f64) -> f64 {
    if detected.switch_times.is_empty() || detected.mz_zero_times.is_empty() {
        return f64::NAN;
    }
    let mut worst = 0.0f64;
    for &s in &detected.switch_times {
        let nearest = detected
            .mz_zero_times
            .iter()
            .map(|&z| (z - s).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest / step);
    }
    worst
}

fn evolve_with_schedule(
    schedule: &FieldSchedule,
    pairs: &[PairGeometry],
    register: &SpinRegister,
    psi0: &StateVector,
    grid: &TimeGrid,
    constants: &Constants,
) -> Result<Trajectory> {
    let mut traj = if schedule.is_static() {
        let h = build_conditioned_hamiltonian(
            0,
            &[],
            schedule.field_at(0.0),
            pairs,
            register,
            constants,
        )?;
        evolve_static(&h, psi0, grid)?
    } else {
        let builder = |t: f64| {
            build_conditioned_hamiltonian(0, &[], schedule.field_at(t), pairs, register, constants)
                .expect("validated inputs build")
        };
        evolve_timedep(&builder, psi0, grid)?
    };
    traj.schedule = Some(*schedule);
    Ok(traj)
}

fn quench_run_summary(
    tag: &str,
    n_nuclei: usize,
    series: &ObservableSeries,
    detected: &CriticalTimes,
    step: f64,
) -> serde_json::Value {
    let coincidence = switch_mz_coincidence_steps(detected, step);
    let coincidence: serde_json::Value =
        if coincidence.is_nan() { serde_json::Value::Null } else { json!(coincidence) };
    json!({
        "tag": tag,
        "n_nuclei": n_nuclei,
        "first_tc_us": detected.switch_times.first().map(|&t| us(t)),
        "switch_times_us": times_us(&detected.switch_times),
        "mz_zero_times_us": times_us(&detected.mz_zero_times),
        "skipped_brackets": detected.skipped_brackets,
        "switch_mz_coincidence_steps": coincidence,
        "max_lambda": series.lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "final_mz": series.mz.last(),
    })
}

fn run_field_quench(ctx: &mut RunContext) -> Result<()> {
    let cfg = ctx.config;
    let coupling = cfg.coupling_rad()?;
    let grid = cfg.time_grid()?;
    let schedules = cfg.field_schedules()?;
    let sizes = cfg
        .system
        .as_ref()
        .and_then(|s| s.chain_sizes.clone())
        .unwrap_or_else(|| vec![cfg.n_nuclei()]);
    let multi_size = sizes.len() > 1;
    let multi_schedule = schedules.len() > 1;

    let mut runs = Vec::new();
    for &n in &sizes {
        let register = SpinRegister::nuclear(n)?;
        let pairs = make_chain_geometry(n, coupling, &ctx.constants)?;
        let label = if multi_size { "d".repeat(n) } else { cfg.initial_state_label() };
        let psi0 = StateVector::basis(register, &label)?;
        let h0 = build_dipolar_secular(&pairs, &register)?;
        verify_h0_eigenstate(&h0, &psi0)?;

        for (stag, schedule) in &schedules {
            let traj = evolve_with_schedule(schedule, &pairs, &register, &psi0, &grid, &ctx.constants)?;
            let series = observable_series(&traj, SeriesOptions::default())?;
            let detected =
                detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);
            let tag = match (multi_size, multi_schedule) {
                (true, true) => format!("N{n}_{stag}"),
                (true, false) => format!("N{n}"),
                (false, true) => stag.clone(),
                (false, false) => "run".to_string(),
            };
            let csv = if tag == "run" { "series.csv".to_string() } else { format!("series_{tag}.csv") };
            ctx.write_series(&csv, &series)?;
            let svg_name = csv.replace(".csv", ".svg");
            ctx.maybe_series_svg(&svg_name, &format!("field quench ({tag})"), &series, &detected)?;
            runs.push(quench_run_summary(&tag, n, &series, &detected, grid.interval()));
        }
    }

    let summary = json!({
        "scenario": "field-quench",
        "parameters": serde_json::to_value(cfg)?,
        "coupling_khz": coupling / crate::hamiltonian::TWO_PI / 1e3,
        "runs": runs,
    });
    ctx.write_summary(&summary)
}

fn run_central_quench(ctx: &mut RunContext) -> Result<()> {
    let cfg = ctx.config;
    let dataset = cfg
        .system
        .as_ref()
        .and_then(|s| s.dataset.clone())
        .unwrap_or_else(|| "dreau".to_string());
    let sites = literature_dataset(&dataset)?;
    let n = sites.len();
    let register = SpinRegister::nuclear(n)?;
    let coupling = cfg.coupling_rad()?;
    let pairs = make_chain_geometry(n, coupling, &ctx.constants)?;
    let grid = cfg.time_grid()?;
    let label = cfg.initial_state_label();
    let psi0 = StateVector::basis(register, &label)?;
    let spec = QuenchSpec::CentralSpinQuench {
        initial_state: label.clone(),
        ms_target: cfg.ms_target(),
    };
    let (h_post, psi) = apply_manifold_quench(&psi0, &spec, &sites, &pairs, &ctx.constants)?;
    let mut traj = evolve_static(&h_post, &psi, &grid)?;
    traj.quench = Some(spec);
    let series = observable_series(&traj, SeriesOptions::default())?;
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);

    ctx.write_series("series.csv", &series)?;
    ctx.maybe_series_svg(
        "series.svg",
        &format!("central-spin quench ({dataset})"),
        &series,
        &detected,
    )?;

    let max_mz = series.mz.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "scenario": "central-quench",
        "parameters": serde_json::to_value(cfg)?,
        "dataset": dataset,
        "ms_target": cfg.ms_target(),
        "run": quench_run_summary("run", n, &series, &detected, grid.interval()),
        "mz_stays_negative": max_mz < 0.0,
    });
    ctx.write_summary(&summary)
}

fn run_sweep(ctx: &mut RunContext, threads: Option<usize>) -> Result<()> {
    let cfg = ctx.config;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep scenario needs a `sweep` section".into()))?;
    let coupling = cfg.coupling_rad()?;
    let n = cfg.n_nuclei();
    let pairs = make_chain_geometry(n, coupling, &ctx.constants)?;
    let settings = SweepSettings {
        bx_values: linspace(sweep.bx_min.as_gauss()?, sweep.bx_max.as_gauss()?, sweep.nx),
        bz_values: linspace(sweep.bz_min.as_gauss()?, sweep.bz_max.as_gauss()?, sweep.nz),
        horizon: sweep.horizon.as_seconds()?,
        n_output: sweep.n_output.unwrap_or(2000),
        n_nuclei: n,
    };
    let pd = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| phase_diagram(&settings, &pairs, &ctx.constants)),
        None => phase_diagram(&settings, &pairs, &ctx.constants),
    }?;

    write_sweep_csv(&ctx.path("sweep.csv"), &pd)?;
    ctx.record("sweep.csv");
    if ctx.svg {
        render_heatmap_svg(&ctx.path("sweep.svg"), &pd)?;
        ctx.record("sweep.svg");
    }

    let nx = pd.bx_values.len();
    let bx0_flags: Vec<bool> = (0..pd.bz_values.len())
        .map(|iz| pd.dqpt_flag[pd.index(0, iz)])
        .collect();
    let rows: Vec<serde_json::Value> = pd
        .bz_values
        .iter()
        .enumerate()
        .map(|(iz, &bz)| {
            let without = (0..nx).filter(|&ix| !pd.dqpt_flag[pd.index(ix, iz)]).count();
            json!({ "bz_g": bz, "n_without_dqpt": without })
        })
        .collect();
    let summary = json!({
        "scenario": "sweep",
        "parameters": serde_json::to_value(cfg)?,
        "n_points": pd.dqpt_flag.len(),
        "n_dqpt": pd.dqpt_flag.iter().filter(|f| **f).count(),
        "bx0_column_never_flags": pd.bx_values[0] == 0.0 && !bx0_flags.iter().any(|f| *f),
        "rows": rows,
    });
    ctx.write_summary(&summary)
}

/// The reference estimation protocol: no drive, probe "ud", measure one
/// nucleus. Its Fisher information grows exactly as t^2.
fn fisher_baseline_settings(bz: f64, beta_ref: f64, measured_site: usize) -> FisherSettings {
    FisherSettings {
        beta_ref,
        delta_beta: default_delta_beta(beta_ref),
        schedule: FieldSchedule::constant(0.0, bz),
        initial_state: "ud".into(),
        measured_site,
    }
}

fn max_rel_dev_from_t_squared(series: &FisherSeries) -> f64 {
    let mut worst = 0.0f64;
    for (k, &t) in series.times.iter().enumerate() {
        if t < 0.1e-6 || !series.fi[k].is_finite() {
            continue;
        }
        let expected = t * t;
        worst = worst.max((series.fi[k] - expected).abs() / expected);
    }
    worst
}

fn run_fisher(ctx: &mut RunContext) -> Result<()> {
    let cfg = ctx.config;
    let beta_ref = cfg.coupling_rad()?;
    let fisher_cfg = cfg.fisher.clone().unwrap_or_default();
    let measured_site = match fisher_cfg.measured_site {
        Some(0) => {
            return Err(Error::Config("fisher.measured_site is 1-based; use 1 or 2".into()))
        }
        Some(k) => k - 1,
        None => 0,
    };
    let delta_beta = match &fisher_cfg.delta {
        Some(q) => q.as_rad_per_s()?,
        None => default_delta_beta(beta_ref),
    };
    let grid = cfg.time_grid()?;
    let schedules = cfg.field_schedules()?;
    let (_, schedule) = schedules
        .first()
        .ok_or_else(|| Error::Config("fisher scenario needs a field schedule".into()))?;

    let main_is_baseline = schedule.is_static() && schedule.field_at(0.0).bx == 0.0;
    let settings = FisherSettings {
        beta_ref,
        delta_beta,
        schedule: *schedule,
        initial_state: cfg.initial_state_label(),
        measured_site,
    };
    let main = fisher_information(&settings, &grid, &ctx.constants)?;
    let main_name = if main_is_baseline { "fisher_bx0.csv" } else { "fisher_driven.csv" };
    write_fisher_csv(&ctx.path(main_name), &main)?;
    ctx.record(main_name);

    let baseline = if main_is_baseline {
        main.clone()
    } else {
        let b = fisher_information(
            &fisher_baseline_settings(schedule.bz, beta_ref, measured_site),
            &grid,
            &ctx.constants,
        )?;
        write_fisher_csv(&ctx.path("fisher_bx0.csv"), &b)?;
        ctx.record("fisher_bx0.csv");
        b
    };

    if ctx.svg {
        let t_us: Vec<f64> = times_us(&main.times);
        let tsq: Vec<f64> = main.times.iter().map(|&t| t * t).collect();
        let mut curves = vec![("fi".to_string(), main.fi.clone()), ("t^2".to_string(), tsq)];
        if !main_is_baseline {
            curves.push(("fi (bx=0)".to_string(), baseline.fi.clone()));
        }
        let panels = vec![Panel { y_label: "fisher information".into(), curves }];
        render_panels_svg(&ctx.path("fisher.svg"), "coupling estimation", &t_us, &panels, &[])?;
        ctx.record("fisher.svg");
    }

    let deviation = max_rel_dev_from_t_squared(&baseline);
    let fd_defect = fisher_convergence_defect(&settings, &coarse_grid(&grid)?, &ctx.constants)?;
    let driven_max_fi = main.fi.iter().cloned().filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let mut max_fi_over_t2 = 0.0f64;
    for (k, &t) in main.times.iter().enumerate() {
        if t >= 0.1e-6 && main.fi[k].is_finite() {
            max_fi_over_t2 = max_fi_over_t2.max(main.fi[k] / (t * t));
        }
    }
    let summary = json!({
        "scenario": "fisher",
        "parameters": serde_json::to_value(cfg)?,
        "beta_ref_khz": beta_ref / crate::hamiltonian::TWO_PI / 1e3,
        "delta_beta_hz": delta_beta / crate::hamiltonian::TWO_PI,
        "baseline_initial_state": "ud",
        "fi_bx0_max_rel_dev_from_t2": deviation,
        "bx0_matches_t_squared": deviation < 1e-5,
        "fd_convergence_defect": fd_defect,
        "fd_step_converged": fd_defect < 1e-4,
        "max_fi": driven_max_fi,
        "max_fi_over_t2": max_fi_over_t2,
    });
    ctx.write_summary(&summary)
}

/// Cheap grid for the finite-difference convergence probe.
fn coarse_grid(grid: &TimeGrid) -> Result<TimeGrid> {
    TimeGrid::new(grid.t_start, grid.t_end, 21.min(grid.n_output), grid.interval().max(grid.dt_internal))
}

fn run_validate(ctx: &mut RunContext) -> Result<()> {
    let cfg = ctx.config;
    let coupling = cfg.coupling_rad()?;
    let grid = cfg.time_grid()?;
    let schedules = cfg.field_schedules()?;
    let (_, schedule) = &schedules[0];
    if !schedule.is_static() {
        return Err(Error::Config("validate scenario runs at a constant field".into()));
    }
    let field = schedule.field_at(0.0);
    let relax = cfg.relaxation.clone().unwrap_or_default();
    let t2n = match &relax.t2n_star {
        Some(q) => q.as_seconds()?,
        None => 0.5e-3,
    };
    let t2e = match &relax.t2e {
        Some(q) => q.as_seconds()?,
        None => 7e-6,
    };

    // conditioned, lossless reference
    let reg_nuc = SpinRegister::nuclear(2)?;
    let pairs = make_chain_geometry(2, coupling, &ctx.constants)?;
    let h_sec = build_conditioned_hamiltonian(0, &[], field, &pairs, &reg_nuc, &ctx.constants)?;
    let psi0 = StateVector::basis(reg_nuc, "dd")?;
    let traj_sec = evolve_static(&h_sec, &psi0, &grid)?;
    let mz_sec = crate::analysis::magnetization(&traj_sec)?;

    // full non-secular model with dephasing
    let reg_full = SpinRegister::with_electron(2)?;
    let h_full = build_full_hamiltonian(&[], field, &pairs, &reg_full, &ctx.constants)?;
    let rho0 = StateVector::basis(reg_full, "0dd")?.to_density();
    let model = LindbladModel::nuclear_dephasing(t2n, &reg_full)?
        .with_electron_dephasing(t2e, &reg_full)?;
    let traj_full = evolve_lindblad(HamiltonianSource::Static(&h_full), &rho0, &model, &grid)?;
    let mz_full = crate::analysis::magnetization(&traj_full)?;

    let max_delta = mz_sec
        .iter()
        .zip(&mz_full)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    write_comparison_csv(
        &ctx.path("validate.csv"),
        &traj_sec.times,
        "mz_secular",
        &mz_sec,
        "mz_full",
        &mz_full,
    )?;
    ctx.record("validate.csv");

    if ctx.svg {
        let t_us: Vec<f64> = times_us(&traj_sec.times);
        let panels = vec![Panel {
            y_label: "<Mz>".into(),
            curves: vec![
                ("secular".to_string(), mz_sec.clone()),
                ("full+dephasing".to_string(), mz_full.clone()),
            ],
        }];
        render_panels_svg(&ctx.path("validate.svg"), "secular-model validation", &t_us, &panels, &[])?;
        ctx.record("validate.svg");
    }

    let summary = json!({
        "scenario": "validate",
        "parameters": serde_json::to_value(cfg)?,
        "t2n_star_ms": t2n * 1e3,
        "t2e_us": t2e * 1e6,
        "max_abs_delta_mz": max_delta,
        "within_secular_tolerance": max_delta < 0.02,
    });
    ctx.write_summary(&summary)
}

fn run_entanglement(ctx: &mut RunContext) -> Result<()> {
    let cfg = ctx.config;
    let n = cfg.n_nuclei();
    if n != 2 && n != 3 {
        return Err(Error::Config(format!(
            "entanglement scenario supports 2 or 3 nuclei, got {n}"
        )));
    }
    let coupling = cfg.coupling_rad()?;
    let register = SpinRegister::nuclear(n)?;
    let pairs = make_chain_geometry(n, coupling, &ctx.constants)?;
    let grid = cfg.time_grid()?;
    let psi0 = StateVector::basis(register, &cfg.initial_state_label())?;
    let schedules = cfg.field_schedules()?;
    let (_, schedule) = &schedules[0];
    let traj = evolve_with_schedule(schedule, &pairs, &register, &psi0, &grid, &ctx.constants)?;
    let opts = SeriesOptions { concurrence: n == 2, tangle: n == 3 };
    let series = observable_series(&traj, opts)?;
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);

    ctx.write_series("series.csv", &series)?;
    ctx.maybe_series_svg("series.svg", "entanglement dynamics", &series, &detected)?;

    let mut summary = json!({
        "scenario": "entanglement",
        "parameters": serde_json::to_value(cfg)?,
        "n_nuclei": n,
        "run": quench_run_summary("run", n, &series, &detected, grid.interval()),
    });
    if let Some(conc) = &series.concurrence {
        let (k_max, &c_max) = conc
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty series");
        summary["max_concurrence"] = json!(c_max);
        summary["t_max_concurrence_us"] = json!(us(series.times[k_max]));
        // cast the snapshot into the uniform-magnitude phase form
        let states = traj.pure_states().expect("pure entanglement run");
        match extract_phase_profile(&states[k_max], 0.05)? {
            PhaseProfileResult::Extracted(p) => {
                summary["phase_profile"] = json!({
                    "r": p.r,
                    "phi1": p.phi1,
                    "phi2": p.phi2,
                    "phi3": p.phi3,
                    "phi1_minus_phi3": p.phi1_minus_phi3,
                    "phi1_plus_phi3_minus_2phi2": p.phi1_plus_phi3_minus_2phi2,
                });
            }
            PhaseProfileResult::Mismatch(m) => {
                summary["phase_profile"] = json!({
                    "mismatch": true,
                    "magnitudes": m.magnitudes.to_vec(),
                    "max_deviation": m.max_deviation,
                    "tolerance": m.tolerance,
                });
            }
        }
    }
    if let Some(tangle) = &series.tangle {
        let (k_max, &t_max) = tangle
            .tau123
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty series");
        summary["max_tau123"] = json!(t_max);
        summary["t_max_tau123_us"] = json!(us(series.times[k_max]));
    }
    ctx.write_summary(&summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("dqpt_scn_{}_{name}", std::process::id()))
    }

    #[test]
    fn field_quench_scenario_writes_expected_files() {
        let dir = tmp_dir("fq");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig2", "grid": { "t_end": "5 us", "n_output": 501 } }"#,
        )
        .unwrap();
        let manifest = run_scenario(
            &cfg,
            &RunOptions { out_dir: dir.clone(), threads: None, svg: true },
        )
        .unwrap();
        assert!(manifest.outputs.contains(&"series.csv".to_string()));
        assert!(manifest.outputs.contains(&"series.svg".to_string()));
        assert!(manifest.outputs.contains(&"summary.json".to_string()));
        assert!(dir.join("manifest.json").is_file());
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["scenario"], "field-quench");
        // 5 us window ends before the first switch at ~2.4 us? no: it contains it
        let tc = summary["runs"][0]["first_tc_us"].as_f64().unwrap();
        assert!(tc > 2.2 && tc < 2.6, "tc = {tc}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn deterministic_reruns_are_byte_identical() {
        let dir_a = tmp_dir("det_a");
        let dir_b = tmp_dir("det_b");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig2", "grid": { "t_end": "2 us", "n_output": 101 } }"#,
        )
        .unwrap();
        for dir in [&dir_a, &dir_b] {
            run_scenario(
                &cfg,
                &RunOptions { out_dir: dir.clone(), threads: None, svg: false },
            )
            .unwrap();
        }
        for name in ["series.csv", "summary.json"] {
            let a = std::fs::read(dir_a.join(name)).unwrap();
            let b = std::fs::read(dir_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
        std::fs::remove_dir_all(&dir_a).ok();
        std::fs::remove_dir_all(&dir_b).ok();
    }

    #[test]
    fn central_quench_scenario_runs() {
        let dir = tmp_dir("cq");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig4", "grid": { "t_end": "20 us", "n_output": 2001 } }"#,
        )
        .unwrap();
        let manifest = run_scenario(
            &cfg,
            &RunOptions { out_dir: dir.clone(), threads: None, svg: false },
        )
        .unwrap();
        assert!(manifest.outputs.contains(&"series.csv".to_string()));
        let text = std::fs::read_to_string(dir.join("series.csv")).unwrap();
        assert!(text.starts_with("t_us,p_down,p_up,lambda,mz\n"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn sweep_scenario_small_grid() {
        let dir = tmp_dir("sweep");
        let cfg = ExperimentConfig::from_json(
            r#"{
                "scenario": "sweep",
                "sweep": {
                    "bx_min": "0 G", "bx_max": "100 G", "nx": 3,
                    "bz_min": "5 G", "bz_max": "50 G", "nz": 2,
                    "horizon": "10 us", "n_output": 301
                }
            }"#,
        )
        .unwrap();
        let manifest = run_scenario(
            &cfg,
            &RunOptions { out_dir: dir.clone(), threads: Some(2), svg: true },
        )
        .unwrap();
        assert!(manifest.outputs.contains(&"sweep.csv".to_string()));
        assert!(manifest.outputs.contains(&"sweep.svg".to_string()));
        let text = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
        assert_eq!(text.lines().count(), 7); // header + 6 points
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["bx0_column_never_flags"], true);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fisher_scenario_reports_t_squared_agreement() {
        let dir = tmp_dir("fisher");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fisher", "grid": { "t_end": "10 us", "n_output": 201 } }"#,
        )
        .unwrap();
        run_scenario(&cfg, &RunOptions { out_dir: dir.clone(), threads: None, svg: false })
            .unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["bx0_matches_t_squared"], true);
        assert!(dir.join("fisher_bx0.csv").is_file());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn entanglement_scenario_concurrence_columns() {
        let dir = tmp_dir("ent");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig8", "grid": { "t_end": "5 us", "n_output": 101 } }"#,
        )
        .unwrap();
        run_scenario(&cfg, &RunOptions { out_dir: dir.clone(), threads: None, svg: false })
            .unwrap();
        let text = std::fs::read_to_string(dir.join("series.csv")).unwrap();
        assert!(text.starts_with("t_us,p_down,p_up,lambda,mz,concurrence\n"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn tangle_scenario_runs_three_spins() {
        let dir = tmp_dir("tangle");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig9", "grid": { "t_end": "5 us", "n_output": 51 } }"#,
        )
        .unwrap();
        run_scenario(&cfg, &RunOptions { out_dir: dir.clone(), threads: None, svg: false })
            .unwrap();
        let text = std::fs::read_to_string(dir.join("series.csv")).unwrap();
        assert!(text.starts_with("t_us,p_down,p_up,lambda,mz,tau123,c_one_rest_sq,c12,c13\n"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn multi_period_and_chain_tags() {
        let dir = tmp_dir("tags");
        let cfg = ExperimentConfig::from_json(
            r#"{ "scenario": "fig5a", "grid": { "t_end": "2 us", "n_output": 41 } }"#,
        )
        .unwrap();
        let manifest = run_scenario(
            &cfg,
            &RunOptions { out_dir: dir.clone(), threads: None, svg: false },
        )
        .unwrap();
        assert_eq!(
            manifest.outputs.iter().filter(|n| n.starts_with("series_T")).count(),
            2
        );
        std::fs::remove_dir_all(&dir).ok();

        let dir = tmp_dir("tags2");
        let cfg = ExperimentConfig::from_json(
            r#"{
                "scenario": "fig10",
                "system": { "coupling": "2 kHz", "chain_sizes": [2, 3] },
                "grid": { "t_end": "4 us", "n_output": 101 }
            }"#,
        )
        .unwrap();
        let manifest = run_scenario(
            &cfg,
            &RunOptions { out_dir: dir.clone(), threads: None, svg: false },
        )
        .unwrap();
        assert!(manifest.outputs.contains(&"series_N2.csv".to_string()));
        assert!(manifest.outputs.contains(&"series_N3.csv".to_string()));
        std::fs::remove_dir_all(&dir).ok();
    }
}
