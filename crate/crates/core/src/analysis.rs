//! Observables on trajectories: Loschmidt echo, finite-size rate function,
//! magnetization, critical-time detection, phase diagrams, entanglement
//! measures, Fisher information and steady-state phase extraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_conditioned_hamiltonian, Constants, Field, FieldSchedule, PairGeometry,
};
use crate::linalg::{c, eigh, CMatrix, C64};
use crate::propagation::{evolve_static, evolve_timedep, TimeGrid, Trajectory};
use crate::spin::{
    partial_trace, spin_half_operators, sum_over_nuclei, DensityMatrix, SpinRegister, StateVector,
};

/// Probabilities are clamped to this floor before any logarithm.
pub const PROB_FLOOR: f64 = 1e-300;

/// Rate-function values above 690/N sit at the clamp floor and carry no
/// more information.
pub fn rate_is_saturated(lambda: f64, n: usize) -> bool {
    lambda > 690.0 / n as f64
}

/// Loschmidt amplitude G(t) = <psi0 | psi(t)> along a pure trajectory.
pub fn loschmidt_amplitude(trajectory: &Trajectory, psi0: &StateVector) -> Result<Vec<C64>> {
    let states = trajectory
        .pure_states()
        .ok_or_else(|| Error::QuenchKind("loschmidt amplitude needs a pure trajectory".into()))?;
    if psi0.register() != trajectory.register() {
        return Err(Error::DimensionMismatch {
            expected: trajectory.register().dim(),
            got: psi0.dim(),
        });
    }
    Ok(states.iter().map(|s| psi0.inner(s)).collect())
}

/// Populations of the two extremal nuclear product states along the
/// trajectory. For registers holding the electron the projection is onto
/// the ms = 0 manifold states.
pub fn manifold_probabilities(trajectory: &Trajectory) -> Result<(Vec<f64>, Vec<f64>)> {
    let reg = *trajectory.register();
    if reg.n_nuclei() < 2 {
        return Err(Error::TooFewNuclei(reg.n_nuclei()));
    }
    let prefix = if reg.has_electron() { "0" } else { "" };
    let down_label = format!("{}{}", prefix, "d".repeat(reg.n_nuclei()));
    let up_label = format!("{}{}", prefix, "u".repeat(reg.n_nuclei()));
    let idx_down = StateVector::basis_index(&reg, &down_label)?;
    let idx_up = StateVector::basis_index(&reg, &up_label)?;
    let mut p_down = Vec::with_capacity(trajectory.len());
    let mut p_up = Vec::with_capacity(trajectory.len());
    for k in 0..trajectory.len() {
        p_down.push(trajectory.basis_probability(k, idx_down).clamp(0.0, 1.0));
        p_up.push(trajectory.basis_probability(k, idx_up).clamp(0.0, 1.0));
    }
    Ok((p_down, p_up))
}

/// Finite-size rate function: elementwise
/// min_eta ( -(1/N) log P_eta ), with probabilities clamped to the floor.
pub fn rate_function(p_down: &[f64], p_up: &[f64], n: usize) -> Vec<f64> {
    let n = n.max(1) as f64;
    p_down
        .iter()
        .zip(p_up)
        .map(|(&pd, &pu)| {
            let ld = -(pd.clamp(PROB_FLOOR, 1.0)).ln() / n;
            let lu = -(pu.clamp(PROB_FLOOR, 1.0)).ln() / n;
            ld.min(lu).max(0.0)
        })
        .collect()
}

/// Mean nuclear z-magnetization (1/N) sum_i <Iz^(i)> along the trajectory.
pub fn magnetization(trajectory: &Trajectory) -> Result<Vec<f64>> {
    let reg = trajectory.register();
    let (_, _, iz, _, _) = spin_half_operators();
    let op = sum_over_nuclei(&iz, reg)? * c(1.0 / reg.n_nuclei() as f64);
    (0..trajectory.len()).map(|k| trajectory.expectation(k, &op)).collect()
}

/// Detected nonanalyticity markers.
#[derive(Debug, Clone, Default)]
pub struct CriticalTimes {
    /// roots of log P_up - log P_down (argmin branch switches)
    pub switch_times: Vec<f64>,
    /// zero crossings of the magnetization
    pub mz_zero_times: Vec<f64>,
    /// brackets skipped because both probabilities sat at the clamp floor
    pub skipped_brackets: usize,
}

/// Interpolated zero crossings of a sampled series.
pub fn zero_crossings(values: &[f64], times: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[k], values[k + 1]);
        if a == 0.0 {
            out.push(times[k]);
        } else if a * b < 0.0 {
            let frac = a / (a - b);
            out.push(times[k] + frac * (times[k + 1] - times[k]));
        }
    }
    if let (Some(&last), Some(&t)) = (values.last(), times.last()) {
        if last == 0.0 {
            out.push(t);
        }
    }
    out
}

/// Locate branch switches of the rate function as sign changes of
/// log P_up - log P_down, and magnetization zero crossings when a
/// magnetization series is supplied.
pub fn detect_critical_times(
    p_down: &[f64],
    p_up: &[f64],
    mz: Option<&[f64]>,
    times: &[f64],
) -> CriticalTimes {
    let mut result = CriticalTimes::default();
    let f: Vec<f64> = p_down
        .iter()
        .zip(p_up)
        .map(|(&pd, &pu)| pu.clamp(PROB_FLOOR, 1.0).ln() - pd.clamp(PROB_FLOOR, 1.0).ln())
        .collect();
    let floored = |k: usize| p_down[k] <= PROB_FLOOR && p_up[k] <= PROB_FLOOR;
    for k in 0..f.len().saturating_sub(1) {
        let (a, b) = (f[k], f[k + 1]);
        let crossing = a == 0.0 || a * b < 0.0;
        if !crossing {
            continue;
        }
        if floored(k) || floored(k + 1) {
            result.skipped_brackets += 1;
            continue;
        }
        if a == 0.0 {
            result.switch_times.push(times[k]);
        } else {
            let frac = a / (a - b);
            result.switch_times.push(times[k] + frac * (times[k + 1] - times[k]));
        }
    }
    if let Some(mz) = mz {
        result.mz_zero_times = zero_crossings(mz, times);
    }
    result
}

/// Per-run time series of every scalar observable.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub p_down: Vec<f64>,
    pub p_up: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mz: Vec<f64>,
    pub concurrence: Option<Vec<f64>>,
    pub tangle: Option<TangleSeries>,
}

#[derive(Debug, Clone)]
pub struct TangleSeries {
    pub tau123: Vec<f64>,
    pub c_one_rest_sq: Vec<f64>,
    pub c12: Vec<f64>,
    pub c13: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeriesOptions {
    pub concurrence: bool,
    pub tangle: bool,
}

/// Assemble the standard observable set from a trajectory.
pub fn observable_series(trajectory: &Trajectory, opts: SeriesOptions) -> Result<ObservableSeries> {
    let (p_down, p_up) = manifold_probabilities(trajectory)?;
    let lambda = rate_function(&p_down, &p_up, trajectory.register().n_nuclei());
    let mz = magnetization(trajectory)?;
    let concurrence_series = if opts.concurrence {
        let reg = trajectory.register();
        let keep = [reg.nucleus_site(0), reg.nucleus_site(1)];
        let mut vals = Vec::with_capacity(trajectory.len());
        for k in 0..trajectory.len() {
            let rho = match &trajectory.data {
                crate::propagation::TrajectoryData::Pure(states) => states[k].to_density(),
                crate::propagation::TrajectoryData::Mixed(rhos) => rhos[k].clone(),
            };
            let rho12 = partial_trace(&rho, &keep)?;
            vals.push(concurrence(&rho12)?);
        }
        Some(vals)
    } else {
        None
    };
    let tangle_series = if opts.tangle {
        let states = trajectory.pure_states().ok_or_else(|| {
            Error::QuenchKind("tangle series needs a pure trajectory".into())
        })?;
        let mut tau = Vec::with_capacity(states.len());
        let mut c1 = Vec::with_capacity(states.len());
        let mut c12s = Vec::with_capacity(states.len());
        let mut c13s = Vec::with_capacity(states.len());
        for s in states {
            let t = tangle(s)?;
            tau.push(t.tau123);
            c1.push(t.c_one_rest_sq);
            c12s.push(t.c12);
            c13s.push(t.c13);
        }
        Some(TangleSeries { tau123: tau, c_one_rest_sq: c1, c12: c12s, c13: c13s })
    } else {
        None
    };
    Ok(ObservableSeries {
        times: trajectory.times.clone(),
        p_down,
        p_up,
        lambda,
        mz,
        concurrence: concurrence_series,
        tangle: tangle_series,
    })
}

/// sigma_y (x) sigma_y in the two-spin computational basis.
fn spin_flip_matrix() -> CMatrix {
    let mut y = CMatrix::zeros(4, 4);
    y[(0, 3)] = c(-1.0);
    y[(1, 2)] = c(1.0);
    y[(2, 1)] = c(1.0);
    y[(3, 0)] = c(-1.0);
    y
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The lambda_i are obtained as the singular values of S^T Y S with
/// rho = S S^H and Y the two-spin spin-flip matrix, which coincide with the
/// square roots of the eigenvalues of rho Y rho* Y in decreasing order.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.matrix().nrows() != 4 {
        return Err(Error::BadDensityMatrix(format!(
            "concurrence needs a 4x4 density matrix, got {}x{}",
            rho.matrix().nrows(),
            rho.matrix().ncols()
        )));
    }
    rho.validate()?;
    let decomp = eigh(rho.matrix())?;
    let dim = 4;
    let mut s = decomp.vectors.clone();
    for (k, &w) in decomp.values.iter().enumerate() {
        let root = w.max(0.0).sqrt();
        for r in 0..dim {
            s[(r, k)] *= c(root);
        }
    }
    let t = s.transpose() * spin_flip_matrix() * &s;
    let gram = t.adjoint() * &t;
    let mut sv: Vec<f64> = eigh(&gram)?
        .values
        .iter()
        .map(|w| w.max(0.0).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).max(0.0))
}

/// Residual three-way entanglement of a pure three-qubit state.
#[derive(Debug, Clone, Copy)]
pub struct TangleComponents {
    pub tau123: f64,
    /// squared concurrence of the 1|(23) bipartition, 2 (1 - Tr[rho_1^2])
    pub c_one_rest_sq: f64,
    pub c12: f64,
    pub c13: f64,
}

pub fn tangle(psi: &StateVector) -> Result<TangleComponents> {
    let reg = psi.register();
    if reg.has_electron() || reg.n_nuclei() != 3 {
        return Err(Error::BadDensityMatrix(
            "tangle needs a pure state of exactly three spin-1/2 sites".into(),
        ));
    }
    let rho = psi.to_density();
    if (rho.purity() - 1.0).abs() > 1e-8 {
        return Err(Error::BadDensityMatrix("tangle input must be pure".into()));
    }
    let rho1 = partial_trace(&rho, &[0])?;
    let c_one_rest_sq = 2.0 * (1.0 - rho1.purity());
    let c12 = concurrence(&partial_trace(&rho, &[0, 1])?)?;
    let c13 = concurrence(&partial_trace(&rho, &[0, 2])?)?;
    Ok(TangleComponents {
        tau123: c_one_rest_sq - c12 * c12 - c13 * c13,
        c_one_rest_sq,
        c12,
        c13,
    })
}

/// Phase diagram over a (Bx, Bz) grid. Row-major storage, Bx fastest.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub bx_values: Vec<f64>,
    pub bz_values: Vec<f64>,
    pub dqpt_flag: Vec<bool>,
    /// first switch time per point, NaN where none occurs in the horizon
    pub first_tc: Vec<f64>,
    pub mean_mz: Vec<f64>,
}

impl PhaseDiagram {
    pub fn index(&self, ix: usize, iz: usize) -> usize {
        iz * self.bx_values.len() + ix
    }
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub bx_values: Vec<f64>,
    pub bz_values: Vec<f64>,
    pub horizon: f64,
    pub n_output: usize,
    pub n_nuclei: usize,
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|k| a + step * k as f64).collect()
}

/// Quench from the all-down state at every grid point and record whether a
/// branch switch occurs within the horizon. Points are independent and run
/// in parallel; results are ordered by grid index.
pub fn phase_diagram(
    settings: &SweepSettings,
    pairs: &[PairGeometry],
    constants: &Constants,
) -> Result<PhaseDiagram> {
    if settings.bx_values.is_empty() || settings.bz_values.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    if settings.horizon <= 0.0 || settings.horizon.is_nan() {
        return Err(Error::Config("sweep horizon must be positive".into()));
    }
    let reg = SpinRegister::nuclear(settings.n_nuclei)?;
    let psi0 = StateVector::basis(reg, &"d".repeat(settings.n_nuclei))?;
    let grid = TimeGrid::uniform(settings.horizon, settings.n_output)?;
    let nx = settings.bx_values.len();
    let total = nx * settings.bz_values.len();

    let points: Result<Vec<(bool, f64, f64)>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let ix = flat % nx;
            let iz = flat / nx;
            let field = Field::new(settings.bx_values[ix], settings.bz_values[iz]);
            let h = build_conditioned_hamiltonian(0, &[], field, pairs, &reg, constants)?;
            let traj = evolve_static(&h, &psi0, &grid)?;
            let (p_down, p_up) = manifold_probabilities(&traj)?;
            let mz = magnetization(&traj)?;
            let detected = detect_critical_times(&p_down, &p_up, None, &traj.times);
            let first_tc = detected.switch_times.first().copied().unwrap_or(f64::NAN);
            let mean_mz = mz.iter().sum::<f64>() / mz.len() as f64;
            Ok((first_tc.is_finite(), first_tc, mean_mz))
        })
        .collect();
    let points = points?;

    Ok(PhaseDiagram {
        bx_values: settings.bx_values.clone(),
        bz_values: settings.bz_values.clone(),
        dqpt_flag: points.iter().map(|p| p.0).collect(),
        first_tc: points.iter().map(|p| p.1).collect(),
        mean_mz: points.iter().map(|p| p.2).collect(),
    })
}

/// Fisher-information series for the pair coupling, via central differences
/// of the measured nucleus' up-probability.
#[derive(Debug, Clone)]
pub struct FisherSeries {
    pub times: Vec<f64>,
    /// up-probability of the measured nucleus at the reference coupling
    pub p_up: Vec<f64>,
    /// Fisher information, NaN where the outcome distribution degenerates
    pub fi: Vec<f64>,
    pub beta_ref: f64,
    pub delta_beta: f64,
}

#[derive(Debug, Clone)]
pub struct FisherSettings {
    /// reference coupling (rad/s) in the (b/2) pair convention
    pub beta_ref: f64,
    /// finite-difference step (rad/s)
    pub delta_beta: f64,
    pub schedule: FieldSchedule,
    /// nuclear basis label of the probe state, e.g. "ud"
    pub initial_state: String,
    /// nucleus whose up-probability is read out
    pub measured_site: usize,
}

pub fn default_delta_beta(beta_ref: f64) -> f64 {
    (1e-4 * beta_ref.abs()).max(crate::hamiltonian::TWO_PI)
}

fn probe_probabilities(
    beta: f64,
    settings: &FisherSettings,
    grid: &TimeGrid,
    constants: &Constants,
) -> Result<Vec<f64>> {
    let reg = SpinRegister::nuclear(2)?;
    if settings.measured_site >= reg.n_nuclei() {
        return Err(Error::InvalidSite { site: settings.measured_site, n_sites: reg.n_nuclei() });
    }
    settings.schedule.validate()?;
    let pair = PairGeometry::from_coupling(0, 1, beta, constants)?;
    let psi0 = StateVector::basis(reg, &settings.initial_state)?;
    let traj = if settings.schedule.is_static() {
        let field = settings.schedule.field_at(0.0);
        let h = build_conditioned_hamiltonian(0, &[], field, &[pair], &reg, constants)?;
        evolve_static(&h, &psi0, grid)?
    } else {
        let builder = |t: f64| {
            let field = settings.schedule.field_at(t);
            build_conditioned_hamiltonian(0, &[], field, &[pair], &reg, constants)
                .expect("conditioned hamiltonian over valid inputs")
        };
        evolve_timedep(&builder, &psi0, grid)?
    };
    let keep = [reg.nucleus_site(settings.measured_site)];
    let states = traj.pure_states().expect("pure propagation");
    states
        .iter()
        .map(|s| {
            let rho1 = partial_trace(&s.to_density(), &keep)?;
            Ok(rho1.matrix()[(0, 0)].re.clamp(0.0, 1.0))
        })
        .collect()
}

pub fn fisher_information(
    settings: &FisherSettings,
    grid: &TimeGrid,
    constants: &Constants,
) -> Result<FisherSeries> {
    if settings.delta_beta <= 0.0 || settings.delta_beta.is_nan() {
        return Err(Error::Config(format!(
            "delta_beta {} must be positive",
            settings.delta_beta
        )));
    }
    let p_minus = probe_probabilities(settings.beta_ref - settings.delta_beta, settings, grid, constants)?;
    let p_center = probe_probabilities(settings.beta_ref, settings, grid, constants)?;
    let p_plus = probe_probabilities(settings.beta_ref + settings.delta_beta, settings, grid, constants)?;

    let fi = p_center
        .iter()
        .zip(p_plus.iter().zip(&p_minus))
        .map(|(&pc, (&pp, &pm))| {
            let derivative = (pp - pm) / (2.0 * settings.delta_beta);
            let numerator = derivative * derivative;
            let denominator = pc * (1.0 - pc);
            if denominator < 1e-12 {
                // a deterministic outcome carries no information unless the
                // derivative is also substantial, which marks a genuine
                // degenerate point
                if numerator < 1e-24 {
                    0.0
                } else {
                    f64::NAN
                }
            } else {
                numerator / denominator
            }
        })
        .collect();

    Ok(FisherSeries {
        times: grid.times(),
        p_up: p_center,
        fi,
        beta_ref: settings.beta_ref,
        delta_beta: settings.delta_beta,
    })
}

/// Largest relative change of the Fisher series under halving delta_beta.
/// Values below 1e-4 indicate a converged finite-difference step.
pub fn fisher_convergence_defect(
    settings: &FisherSettings,
    grid: &TimeGrid,
    constants: &Constants,
) -> Result<f64> {
    let coarse = fisher_information(settings, grid, constants)?;
    let mut halved = settings.clone();
    halved.delta_beta = settings.delta_beta / 2.0;
    let fine = fisher_information(&halved, grid, constants)?;
    let mut worst = 0.0f64;
    for (a, b) in coarse.fi.iter().zip(&fine.fi) {
        if a.is_finite() && b.is_finite() && b.abs() > 1e-30 {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    Ok(worst)
}

/// Outcome of trying to cast a two-spin state into the uniform-magnitude
/// three-phase form r (e^{i phi1} |uu> + e^{i phi2} (|ud> + |du>) + e^{i phi3} |dd>).
#[derive(Debug, Clone)]
pub enum PhaseProfileResult {
    Extracted(PhaseProfile),
    Mismatch(PhaseMismatch),
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseProfile {
    pub r: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    /// gauge-invariant combinations
    pub phi1_minus_phi3: f64,
    pub phi1_plus_phi3_minus_2phi2: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PhaseMismatch {
    pub magnitudes: [f64; 4],
    pub max_deviation: f64,
    pub tolerance: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(std::f64::consts::TAU);
    if x > std::f64::consts::PI {
        x -= std::f64::consts::TAU;
    }
    x
}

/// Try to extract the (r, phi1, phi2, phi3) profile. All four amplitude
/// magnitudes must agree with their mean within `tol`; otherwise a
/// structured mismatch report is returned, never an error.
pub fn extract_phase_profile(psi: &StateVector, tol: f64) -> Result<PhaseProfileResult> {
    let reg = psi.register();
    if reg.has_electron() || reg.n_nuclei() != 2 {
        return Err(Error::BadDensityMatrix(
            "phase extraction needs a pure two-nucleus state".into(),
        ));
    }
    let a = [
        psi.amplitude(0), // uu
        psi.amplitude(1), // ud
        psi.amplitude(2), // du
        psi.amplitude(3), // dd
    ];
    let mags = [a[0].norm(), a[1].norm(), a[2].norm(), a[3].norm()];
    let mean = mags.iter().sum::<f64>() / 4.0;
    let max_dev = mags.iter().fold(0.0f64, |acc, m| acc.max((m - mean).abs()));
    let mid_dev = (mags[1] - mags[2]).abs();
    if max_dev > tol || mid_dev > tol {
        return Ok(PhaseProfileResult::Mismatch(PhaseMismatch {
            magnitudes: mags,
            max_deviation: max_dev.max(mid_dev),
            tolerance: tol,
        }));
    }
    let phi1 = a[0].arg();
    let phi2 = (a[1] + a[2]).arg();
    let phi3 = a[3].arg();
    Ok(PhaseProfileResult::Extracted(PhaseProfile {
        r: mean,
        phi1,
        phi2,
        phi3,
        phi1_minus_phi3: wrap_angle(phi1 - phi3),
        phi1_plus_phi3_minus_2phi2: wrap_angle(phi1 + phi3 - 2.0 * phi2),
    }))
}
