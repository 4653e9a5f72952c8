//! Time evolution: exact propagation of static hamiltonians through one
//! eigendecomposition, exponential-midpoint stepping for time-dependent
//! ones, Lindblad dephasing, and the instantaneous central-spin quench.
//!
//! Every matrix exponential goes through a hermitian eigendecomposition, so
//! each step is exactly unitary and the step error of the midpoint rule is
//! governed by the field's rate of change, not by the hamiltonian norm.

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_central_quench_h1, build_dipolar_secular, CarbonSite, Constants, FieldSchedule,
    PairGeometry, QuenchSpec,
};
use crate::linalg::{c, eigh, hermiticity_defect, max_abs, CMatrix};
use crate::spin::{spin_half_operators, spin_one_operators, DensityMatrix, StateVector};

pub const DEFAULT_DT_INTERNAL: f64 = 1e-9;

/// Output time axis plus the integrator substep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_output: usize,
    pub dt_internal: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_output: usize, dt_internal: f64) -> Result<Self> {
        if t_end <= t_start || !t_end.is_finite() || !t_start.is_finite() {
            return Err(Error::BadGrid(format!("t_end {t_end} must exceed t_start {t_start}")));
        }
        if n_output < 2 {
            return Err(Error::BadGrid(format!("n_output {n_output} must be at least 2")));
        }
        if dt_internal <= 0.0 || dt_internal.is_nan() {
            return Err(Error::BadGrid(format!("dt_internal {dt_internal} must be positive")));
        }
        let interval = (t_end - t_start) / (n_output - 1) as f64;
        if dt_internal > interval * (1.0 + 1e-12) {
            return Err(Error::BadGrid(format!(
                "dt_internal {dt_internal} exceeds the output interval {interval}"
            )));
        }
        Ok(Self { t_start, t_end, n_output, dt_internal })
    }

    /// Grid from 0 to `t_end` with dt_internal = min(1 ns, output interval).
    pub fn uniform(t_end: f64, n_output: usize) -> Result<Self> {
        let interval = t_end / (n_output.max(2) - 1) as f64;
        Self::new(0.0, t_end, n_output, DEFAULT_DT_INTERNAL.min(interval))
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn interval(&self) -> f64 {
        self.span() / (self.n_output - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.interval();
        (0..self.n_output).map(|k| self.t_start + dt * k as f64).collect()
    }

    /// Substeps per output interval, and the resulting substep length.
    fn substeps(&self) -> (usize, f64) {
        let interval = self.interval();
        let n = (interval / self.dt_internal - 1e-9).ceil().max(1.0) as usize;
        (n, interval / n as f64)
    }
}

/// States sampled on the output grid.
#[derive(Debug, Clone)]
pub enum TrajectoryData {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
}

/// Result of a propagation run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub data: TrajectoryData,
    /// schedule driving the run, when the hamiltonian came from one
    pub schedule: Option<FieldSchedule>,
    /// quench that produced the initial condition, when any
    pub quench: Option<QuenchSpec>,
}

impl Trajectory {
    fn pure(times: Vec<f64>, states: Vec<StateVector>) -> Self {
        Self { times, data: TrajectoryData::Pure(states), schedule: None, quench: None }
    }

    fn mixed(times: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        Self { times, data: TrajectoryData::Mixed(states), schedule: None, quench: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn register(&self) -> &crate::spin::SpinRegister {
        match &self.data {
            TrajectoryData::Pure(v) => v[0].register(),
            TrajectoryData::Mixed(v) => v[0].register(),
        }
    }

    pub fn pure_states(&self) -> Option<&[StateVector]> {
        match &self.data {
            TrajectoryData::Pure(v) => Some(v),
            TrajectoryData::Mixed(_) => None,
        }
    }

    /// Population of one computational basis state at output index k.
    pub fn basis_probability(&self, k: usize, basis_index: usize) -> f64 {
        match &self.data {
            TrajectoryData::Pure(v) => v[k].amplitude(basis_index).norm_sqr(),
            TrajectoryData::Mixed(v) => v[k].matrix()[(basis_index, basis_index)].re,
        }
    }

    pub fn expectation(&self, k: usize, op: &CMatrix) -> Result<f64> {
        match &self.data {
            TrajectoryData::Pure(v) => v[k].expectation(op),
            TrajectoryData::Mixed(v) => v[k].expectation(op),
        }
    }
}

fn check_norm(state: &StateVector) -> Result<()> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NormDrift { norm, tol: 1e-10 });
    }
    Ok(())
}

/// Evolve a pure state under a static hamiltonian. One eigendecomposition,
/// then every output point is exact.
pub fn evolve_static(h: &CMatrix, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory> {
    if h.nrows() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: psi0.dim(), got: h.nrows() });
    }
    let decomp = eigh(h)?;
    let reg = *psi0.register();
    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    for &t in &times {
        let amps = decomp.evolve(psi0.amplitudes(), t - grid.t_start);
        let state = StateVector::new(reg, amps)?;
        check_norm(&state)?;
        states.push(state);
    }
    Ok(Trajectory::pure(times, states))
}

/// Evolve a pure state under a time-dependent hamiltonian with
/// exponential-midpoint steps: psi <- exp(-i H(t + dt/2) dt) psi, each
/// exponential exact through an eigendecomposition.
pub fn evolve_timedep(
    h_of_t: &dyn Fn(f64) -> CMatrix,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let reg = *psi0.register();
    let dim = psi0.dim();
    let times = grid.times();
    let (n_sub, dt) = grid.substeps();

    let mut psi = psi0.amplitudes().clone();
    let mut states = Vec::with_capacity(times.len());
    states.push(StateVector::new(reg, psi.clone())?);

    for &t_k in times.iter().take(times.len() - 1) {
        let mut t = t_k;
        for _ in 0..n_sub {
            let h = h_of_t(t + dt / 2.0);
            if h.nrows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
            }
            psi = eigh(&h)?.evolve(&psi, dt);
            t += dt;
        }
        let state = StateVector::new(reg, psi.clone())?;
        check_norm(&state)?;
        states.push(state);
    }
    Ok(Trajectory::pure(times, states))
}

/// Dephasing model: collapse operators with rates (rad/s).
#[derive(Debug, Clone)]
pub struct LindbladModel {
    collapse: Vec<(CMatrix, f64)>,
    /// nuclear transverse coherence time behind the per-nucleus operators
    pub t2n_star: Option<f64>,
    /// electron coherence time, when electron dephasing is included
    pub t2e: Option<f64>,
}

impl LindbladModel {
    pub fn new(collapse: Vec<(CMatrix, f64)>) -> Result<Self> {
        for (_, rate) in &collapse {
            if *rate < 0.0 {
                return Err(Error::BadSchedule(format!("collapse rate {rate} must be >= 0")));
            }
        }
        Ok(Self { collapse, t2n_star: None, t2e: None })
    }

    pub fn none() -> Self {
        Self { collapse: Vec::new(), t2n_star: None, t2e: None }
    }

    /// Pure nuclear dephasing: L_i = 2 Iz^(i) at rate 1/(2 T2n*), which
    /// damps single-nucleus coherences as exp(-t/T2n*).
    pub fn nuclear_dephasing(t2n_star: f64, register: &crate::spin::SpinRegister) -> Result<Self> {
        if t2n_star <= 0.0 || t2n_star.is_nan() {
            return Err(Error::BadSchedule(format!("T2n* = {t2n_star} must be positive")));
        }
        let (_, _, iz, _, _) = spin_half_operators();
        let l_local = &iz * c(2.0);
        let rate = 1.0 / (2.0 * t2n_star);
        let mut collapse = Vec::new();
        for k in 0..register.n_nuclei() {
            let op = crate::spin::embed_site_operator(&l_local, register.nucleus_site(k), register)?;
            collapse.push((op, rate));
        }
        let mut model = Self::new(collapse)?;
        model.t2n_star = Some(t2n_star);
        Ok(model)
    }

    /// Add electron dephasing L = Sz at rate 1/(2 T2e) (full-model registers).
    pub fn with_electron_dephasing(
        mut self,
        t2e: f64,
        register: &crate::spin::SpinRegister,
    ) -> Result<Self> {
        if t2e <= 0.0 || t2e.is_nan() {
            return Err(Error::BadSchedule(format!("T2e = {t2e} must be positive")));
        }
        if !register.has_electron() {
            return Err(Error::ElectronRequired);
        }
        let (_, _, sz) = spin_one_operators();
        let op = crate::spin::embed_site_operator(&sz, 0, register)?;
        self.collapse.push((op, 1.0 / (2.0 * t2e)));
        self.t2e = Some(t2e);
        Ok(self)
    }

    pub fn collapse_operators(&self) -> &[(CMatrix, f64)] {
        &self.collapse
    }

    fn is_empty(&self) -> bool {
        self.collapse.is_empty()
    }

    /// Dissipator D(rho) = sum_k rate_k (L rho L^H - 1/2 {L^H L, rho}).
    fn dissipator(&self, rho: &CMatrix) -> CMatrix {
        let dim = rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for (l, rate) in &self.collapse {
            if *rate == 0.0 {
                continue;
            }
            let ldag = l.adjoint();
            let ldl = &ldag * l;
            let sandwich = l * rho * &ldag;
            let anti = (&ldl * rho + rho * &ldl) * c(0.5);
            out += (sandwich - anti) * c(*rate);
        }
        out
    }

    /// One classical RK4 step of the dissipator-only flow over `h` seconds.
    fn dissipator_step(&self, rho: &CMatrix, h: f64) -> CMatrix {
        if self.is_empty() {
            return rho.clone();
        }
        let k1 = self.dissipator(rho);
        let k2 = self.dissipator(&(rho + &k1 * c(h / 2.0)));
        let k3 = self.dissipator(&(rho + &k2 * c(h / 2.0)));
        let k4 = self.dissipator(&(rho + &k3 * c(h)));
        rho + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0)
    }
}

/// Hamiltonian input for the density-matrix propagator.
pub enum HamiltonianSource<'a> {
    Static(&'a CMatrix),
    TimeDependent(&'a dyn Fn(f64) -> CMatrix),
}

/// Integrate d rho/dt = -i [H(t), rho] + D(rho).
///
/// Each fixed step splits symmetrically: half a dissipator step (classical
/// 4th-order), the exact unitary midpoint propagator, then the second half.
/// Aborts if the trace drifts by more than 1e-6.
pub fn evolve_lindblad(
    source: HamiltonianSource,
    rho0: &DensityMatrix,
    model: &LindbladModel,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let reg = *rho0.register();
    let dim = rho0.matrix().nrows();
    let times = grid.times();
    let (n_sub, dt) = grid.substeps();

    // static hamiltonians use one propagator for every substep
    let static_u = match &source {
        HamiltonianSource::Static(h) => {
            if h.nrows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
            }
            Some(eigh(h)?.propagator(dt))
        }
        HamiltonianSource::TimeDependent(_) => None,
    };

    let mut rho = rho0.matrix().clone();
    let mut out = Vec::with_capacity(times.len());
    out.push(rho0.clone());

    for &t_k in times.iter().take(times.len() - 1) {
        let mut t = t_k;
        for _ in 0..n_sub {
            rho = model.dissipator_step(&rho, dt / 2.0);
            match (&static_u, &source) {
                (Some(u), _) => rho = u * rho * u.adjoint(),
                (None, HamiltonianSource::TimeDependent(f)) => {
                    let h = f(t + dt / 2.0);
                    if h.nrows() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
                    }
                    let u = eigh(&h)?.propagator(dt);
                    rho = &u * rho * u.adjoint();
                }
                (None, HamiltonianSource::Static(_)) => unreachable!(),
            }
            rho = model.dissipator_step(&rho, dt / 2.0);
            t += dt;
        }
        let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
        let drift = (trace - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::TraceDrift { drift });
        }
        if hermiticity_defect(&rho) > 1e-10 {
            return Err(Error::BadDensityMatrix(
                "hermiticity lost during integration".into(),
            ));
        }
        out.push(DensityMatrix::from_parts_unchecked(reg, rho.clone()));
    }
    Ok(Trajectory::mixed(times, out))
}

/// Check the field-quench precondition: `psi` must be an eigenstate of the
/// pre-quench hamiltonian within 1e-8 of the hamiltonian scale.
pub fn verify_h0_eigenstate(h0: &CMatrix, psi: &StateVector) -> Result<()> {
    if h0.nrows() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: h0.nrows() });
    }
    let hpsi = h0 * psi.amplitudes();
    let e = psi.amplitudes().dotc(&hpsi);
    let resid = (hpsi - psi.amplitudes() * e).norm();
    let scale = max_abs(h0).max(f64::MIN_POSITIVE);
    if resid > 1e-8 * scale {
        return Err(Error::NotAnEigenstate { residual: resid / scale });
    }
    Ok(())
}

/// Instantaneous electron rotation: the nuclear state is untouched, the
/// conditioned hamiltonian switches to H0 + H1(ms_target).
pub fn apply_manifold_quench(
    psi_nuclear: &StateVector,
    spec: &QuenchSpec,
    sites: &[CarbonSite],
    pairs: &[PairGeometry],
    _constants: &Constants,
) -> Result<(CMatrix, StateVector)> {
    let ms = match spec {
        QuenchSpec::CentralSpinQuench { ms_target, .. } => *ms_target,
        QuenchSpec::FieldQuench { .. } => {
            return Err(Error::QuenchKind(
                "apply_manifold_quench requires a central-spin quench spec".into(),
            ))
        }
    };
    let reg = psi_nuclear.register();
    let h0 = build_dipolar_secular(pairs, reg)?;
    let h1 = build_central_quench_h1(sites, ms, reg)?;
    Ok((h0 + h1, psi_nuclear.clone()))
}
