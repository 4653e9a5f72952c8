//! Python bindings: the main quench experiments and observables of
//! dqpt-core exposed as plain functions returning dicts of lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dqpt_core::analysis::{
    default_delta_beta, detect_critical_times, fisher_information, observable_series,
    FisherSettings, ObservableSeries, SeriesOptions,
};
use dqpt_core::config::ExperimentConfig;
use dqpt_core::hamiltonian::{
    build_conditioned_hamiltonian, literature_dataset, make_chain_geometry, Constants, Field,
    FieldSchedule, QuenchSpec, TWO_PI,
};
use dqpt_core::propagation::{apply_manifold_quench, evolve_static, TimeGrid};
use dqpt_core::scenario::{run_scenario as run_scenario_rs, RunOptions};
use dqpt_core::spin::{SpinRegister, StateVector};

fn err(e: dqpt_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn series_dict<'py>(py: Python<'py>, series: &ObservableSeries) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t_us", series.times.iter().map(|t| t * 1e6).collect::<Vec<f64>>())?;
    d.set_item("p_down", series.p_down.clone())?;
    d.set_item("p_up", series.p_up.clone())?;
    d.set_item("lambda", series.lambda.clone())?;
    d.set_item("mz", series.mz.clone())?;
    if let Some(conc) = &series.concurrence {
        d.set_item("concurrence", conc.clone())?;
    }
    if let Some(tangle) = &series.tangle {
        d.set_item("tau123", tangle.tau123.clone())?;
    }
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);
    d.set_item(
        "switch_times_us",
        detected.switch_times.iter().map(|t| t * 1e6).collect::<Vec<f64>>(),
    )?;
    d.set_item(
        "mz_zero_times_us",
        detected.mz_zero_times.iter().map(|t| t * 1e6).collect::<Vec<f64>>(),
    )?;
    Ok(d)
}

/// Crate version of the underlying simulator.
#[pyfunction]
fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Known scenario names and figure aliases accepted by `run_scenario`.
#[pyfunction]
fn scenarios() -> Vec<String> {
    dqpt_core::config::SCENARIOS
        .iter()
        .chain(dqpt_core::config::ALIASES.iter())
        .map(|s| s.to_string())
        .collect()
}

/// Field quench of a nuclear-spin chain from the all-down state:
/// constant fields (bx_g, bz_g) switched on at t = 0 over the dipolar
/// coupling (kHz, (b/2) two-spin convention). Returns the observable series
/// plus detected switch and magnetization-zero times.
#[pyfunction]
#[pyo3(signature = (coupling_khz, bx_g, bz_g, t_end_us, n_output, n_nuclei = 2, concurrence = false))]
#[allow(clippy::too_many_arguments)]
fn field_quench_series<'py>(
    py: Python<'py>,
    coupling_khz: f64,
    bx_g: f64,
    bz_g: f64,
    t_end_us: f64,
    n_output: usize,
    n_nuclei: usize,
    concurrence: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let constants = Constants::default();
    let register = SpinRegister::nuclear(n_nuclei).map_err(err)?;
    let pairs =
        make_chain_geometry(n_nuclei, TWO_PI * coupling_khz * 1e3, &constants).map_err(err)?;
    let h = build_conditioned_hamiltonian(
        0,
        &[],
        Field::new(bx_g, bz_g),
        &pairs,
        &register,
        &constants,
    )
    .map_err(err)?;
    let psi0 = StateVector::basis(register, &"d".repeat(n_nuclei)).map_err(err)?;
    let grid = TimeGrid::uniform(t_end_us * 1e-6, n_output).map_err(err)?;
    let traj = evolve_static(&h, &psi0, &grid).map_err(err)?;
    let series = observable_series(
        &traj,
        SeriesOptions { concurrence, tangle: n_nuclei == 3 && concurrence },
    )
    .map_err(err)?;
    series_dict(py, &series)
}

/// Central-spin quench: the electron is rotated instantaneously into the
/// `ms_target` manifold and the nuclei evolve under the conditioned
/// hamiltonian of a named hyperfine dataset ("dreau" or "nizovtsev").
#[pyfunction]
#[pyo3(signature = (dataset, t_end_us, n_output, ms_target = 1, coupling_khz = 2.0))]
fn central_quench_series<'py>(
    py: Python<'py>,
    dataset: &str,
    t_end_us: f64,
    n_output: usize,
    ms_target: i8,
    coupling_khz: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let constants = Constants::default();
    let sites = literature_dataset(dataset).map_err(err)?;
    let n = sites.len();
    let register = SpinRegister::nuclear(n).map_err(err)?;
    let pairs = make_chain_geometry(n, TWO_PI * coupling_khz * 1e3, &constants).map_err(err)?;
    let psi0 = StateVector::basis(register, &"d".repeat(n)).map_err(err)?;
    let spec = QuenchSpec::CentralSpinQuench {
        initial_state: "d".repeat(n),
        ms_target,
    };
    let (h_post, psi) =
        apply_manifold_quench(&psi0, &spec, &sites, &pairs, &constants).map_err(err)?;
    let grid = TimeGrid::uniform(t_end_us * 1e-6, n_output).map_err(err)?;
    let traj = evolve_static(&h_post, &psi, &grid).map_err(err)?;
    let series = observable_series(&traj, SeriesOptions::default()).map_err(err)?;
    series_dict(py, &series)
}

/// Fisher information of the pair coupling for the undriven estimation
/// protocol (no transverse field, probe "ud", one nucleus measured).
/// Returns t_us, p_up and fi; fi follows t^2 exactly in this configuration.
#[pyfunction]
#[pyo3(signature = (coupling_khz, bz_g, t_end_us, n_output))]
fn fisher_series<'py>(
    py: Python<'py>,
    coupling_khz: f64,
    bz_g: f64,
    t_end_us: f64,
    n_output: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let constants = Constants::default();
    let beta = TWO_PI * coupling_khz * 1e3;
    let settings = FisherSettings {
        beta_ref: beta,
        delta_beta: default_delta_beta(beta),
        schedule: FieldSchedule::constant(0.0, bz_g),
        initial_state: "ud".into(),
        measured_site: 0,
    };
    let grid = TimeGrid::uniform(t_end_us * 1e-6, n_output).map_err(err)?;
    let series = fisher_information(&settings, &grid, &constants).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t_us", series.times.iter().map(|t| t * 1e6).collect::<Vec<f64>>())?;
    d.set_item("p_up", series.p_up.clone())?;
    d.set_item("fi", series.fi.clone())?;
    Ok(d)
}

/// Finite-size rate function min_eta(-(1/n) log P_eta), elementwise.
#[pyfunction]
fn rate_function(p_down: Vec<f64>, p_up: Vec<f64>, n: usize) -> PyResult<Vec<f64>> {
    if p_down.len() != p_up.len() {
        return Err(PyValueError::new_err("p_down and p_up must have equal length"));
    }
    Ok(dqpt_core::analysis::rate_function(&p_down, &p_up, n))
}

/// Run a full scenario (name, figure alias, or config-file path), writing
/// CSV/JSON outputs into `out_dir`. Returns the run manifest as a dict.
#[pyfunction]
#[pyo3(signature = (target, out_dir, threads = None, svg = false))]
fn run_scenario<'py>(
    py: Python<'py>,
    target: &str,
    out_dir: &str,
    threads: Option<usize>,
    svg: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let path = std::path::Path::new(target);
    let config = if path.is_file() {
        ExperimentConfig::load(path).map_err(err)?
    } else {
        ExperimentConfig::preset(target)
            .ok_or_else(|| PyValueError::new_err(format!("unknown scenario `{target}`")))?
    };
    let manifest = run_scenario_rs(
        &config,
        &RunOptions { out_dir: out_dir.into(), threads, svg },
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("scenario", manifest.scenario)?;
    d.set_item("config_hash", manifest.config_hash)?;
    d.set_item("version", manifest.version)?;
    d.set_item("duration_seconds", manifest.duration_seconds)?;
    d.set_item("outputs", manifest.outputs)?;
    Ok(d)
}

#[pymodule]
fn dqpt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(field_quench_series, m)?)?;
    m.add_function(wrap_pyfunction!(central_quench_series, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_series, m)?)?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
