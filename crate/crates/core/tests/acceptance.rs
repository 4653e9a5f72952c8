//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured runtime. Run with `cargo test --test acceptance -- --nocapture`
//! to see every line.

use std::time::Instant;

use dqpt_core::analysis::{
    concurrence, default_delta_beta, detect_critical_times, fisher_information, linspace,
    magnetization, manifold_probabilities, observable_series, phase_diagram, rate_function,
    tangle, FisherSettings, SeriesOptions, SweepSettings,
};
use dqpt_core::config::ExperimentConfig;
use dqpt_core::hamiltonian::{
    build_conditioned_hamiltonian, build_full_hamiltonian, literature_dataset,
    make_chain_geometry, BxWaveform, Constants, Field, FieldSchedule, PairGeometry, QuenchSpec,
    TWO_PI,
};
use dqpt_core::linalg::{c, eigh, max_abs, CMatrix, CVector, C64};
use dqpt_core::propagation::{
    apply_manifold_quench, evolve_lindblad, evolve_static, evolve_timedep, HamiltonianSource,
    LindbladModel, TimeGrid,
};
use dqpt_core::spin::{
    embed_site_operator, partial_trace, spin_half_operators, DensityMatrix, SpinRegister,
    StateVector,
};

fn consts() -> Constants {
    Constants::default()
}

struct Stopwatch {
    label: &'static str,
    limit_s: f64,
    started: Instant,
}

impl Stopwatch {
    fn start(label: &'static str, limit_s: f64) -> Self {
        Self { label, limit_s, started: Instant::now() }
    }

    fn finish(self, detail: &str) {
        let elapsed = self.started.elapsed().as_secs_f64();
        eprintln!("{}: PASS — {detail} ({elapsed:.2} s)", self.label);
        assert!(
            elapsed < self.limit_s,
            "{} exceeded its runtime budget: {elapsed:.2} s > {} s",
            self.label,
            self.limit_s
        );
    }
}

fn coupled_pair(coupling: f64) -> PairGeometry {
    PairGeometry::from_coupling(0, 1, coupling, &consts()).unwrap()
}

#[test]
fn acceptance_01_fisher_matches_t_squared() {
    let sw = Stopwatch::start("acceptance 01 (analytic fisher oracle)", 1.0);
    let cst = consts();
    let grid = TimeGrid::uniform(20e-6, 2001).unwrap();
    let mut worst = 0.0f64;
    for beta_khz in [1.0, 10.0] {
        let beta = TWO_PI * beta_khz * 1e3;
        let settings = FisherSettings {
            beta_ref: beta,
            delta_beta: default_delta_beta(beta),
            schedule: FieldSchedule::constant(0.0, 50.0),
            initial_state: "ud".into(),
            measured_site: 0,
        };
        let series = fisher_information(&settings, &grid, &cst).unwrap();
        for (k, &t) in series.times.iter().enumerate() {
            if t < 0.1e-6 {
                continue;
            }
            let expected = t * t;
            let rel = (series.fi[k] - expected).abs() / expected;
            assert!(
                rel < 1e-5,
                "beta = {beta_khz} kHz, t = {t:.3e}: relative error {rel:.3e}"
            );
            worst = worst.max(rel);
        }
    }
    sw.finish(&format!("FI(t) = t^2 with max relative error {worst:.2e} < 1e-5"));
}

#[test]
fn acceptance_02_spectrum_oracle() {
    let sw = Stopwatch::start("acceptance 02 (spectrum oracle)", 0.1);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let bz = 50.0;
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(beta);
    let h =
        build_conditioned_hamiltonian(0, &[], Field::new(0.0, bz), &[pair], &reg, &cst).unwrap();

    let gn_bz = cst.gamma_n * bz;
    let mut expected = vec![-(gn_bz + beta / 2.0), gn_bz - beta / 2.0, 0.0, beta];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let decomp = eigh(&h).unwrap();
    let got = decomp.sorted_values();
    let scale = expected.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for (g, e) in got.iter().zip(&expected) {
        worst = worst.max((g - e).abs() / scale);
        assert!((g - e).abs() <= 1e-10 * scale, "eigenvalue {g} vs {e}");
    }

    // eigenvector residuals for the four known states
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vectors: Vec<(Vec<C64>, f64)> = vec![
        (vec![c(0.0), c(0.0), c(0.0), c(1.0)], -(gn_bz + beta / 2.0)),
        (vec![c(1.0), c(0.0), c(0.0), c(0.0)], gn_bz - beta / 2.0),
        (vec![c(0.0), c(s), c(-s), c(0.0)], 0.0),
        (vec![c(0.0), c(s), c(s), c(0.0)], beta),
    ];
    let h_scale = max_abs(&h);
    for (amps, e) in vectors {
        let v = CVector::from_vec(amps);
        let resid = (&h * &v - &v * c(e)).norm();
        assert!(resid <= 1e-10 * h_scale, "residual {resid:.3e}");
    }
    sw.finish(&format!("four eigenpairs verified, max eigenvalue error {worst:.2e} (rel)"));
}

#[test]
fn acceptance_03_flip_flop_probability() {
    let sw = Stopwatch::start("acceptance 03 (coupled-pair probability)", 0.1);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(beta);
    let h = build_conditioned_hamiltonian(0, &[], Field::new(0.0, 50.0), &[pair], &reg, &cst)
        .unwrap();
    let psi0 = StateVector::basis(reg, "ud").unwrap();
    let grid = TimeGrid::uniform(20e-6, 501).unwrap();
    let traj = evolve_static(&h, &psi0, &grid).unwrap();
    let states = traj.pure_states().unwrap();
    let mut worst = 0.0f64;
    for (k, &t) in traj.times.iter().enumerate() {
        let rho1 = partial_trace(&states[k].to_density(), &[0]).unwrap();
        let p_up = rho1.matrix()[(0, 0)].re;
        let expected = (beta * t / 2.0).cos().powi(2);
        let err = (p_up - expected).abs();
        assert!(err < 1e-10, "t = {t:.3e}: |P_up - cos^2| = {err:.3e}");
        worst = worst.max(err);
    }
    sw.finish(&format!("P_up(t) = cos^2(bt/2) with max error {worst:.2e} < 1e-10"));
}

#[test]
fn acceptance_04_reference_critical_time() {
    let sw = Stopwatch::start("acceptance 04 (reference critical time)", 2.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(beta);
    let h = build_conditioned_hamiltonian(0, &[], Field::new(100.0, 50.0), &[pair], &reg, &cst)
        .unwrap();
    let psi0 = StateVector::basis(reg, "dd").unwrap();
    // 10 ns output grid over 20 us
    let grid = TimeGrid::new(0.0, 20e-6, 2001, 1e-9).unwrap();
    let traj = evolve_static(&h, &psi0, &grid).unwrap();
    let series = observable_series(&traj, SeriesOptions::default()).unwrap();
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);

    let first = *detected.switch_times.first().expect("a branch switch occurs");
    assert!(
        (2.2e-6..=2.6e-6).contains(&first),
        "first switch at {first:.3e} s outside [2.2, 2.6] us"
    );
    // every rate-function kink coincides with a magnetization zero within
    // one output step
    let step = grid.interval();
    let mut worst_steps = 0.0f64;
    for &s in &detected.switch_times {
        let nearest = detected
            .mz_zero_times
            .iter()
            .map(|&z| (z - s).abs())
            .fold(f64::INFINITY, f64::min);
        worst_steps = worst_steps.max(nearest / step);
        assert!(nearest <= step, "switch at {s:.4e} has no mz zero within one step");
    }
    sw.finish(&format!(
        "first switch at {:.3} us, kink/zero offset {:.2e} steps",
        first * 1e6,
        worst_steps
    ));
}

#[test]
fn acceptance_05_oscillating_field_steering() {
    let sw = Stopwatch::start("acceptance 05 (oscillating-field steering)", 5.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(beta);
    let psi0 = StateVector::basis(reg, "dd").unwrap();
    let grid = TimeGrid::new(0.0, 15e-6, 1501, 1e-9).unwrap();
    let tc1 = 2.4e-6;

    let mut switch_counts = Vec::new();
    for factor in [2.0, 6.0] {
        let schedule = FieldSchedule {
            bz: 50.0,
            bx: BxWaveform::Oscillating { bx0: 50.0, amplitude: 50.0, period: factor * tc1 },
        };
        let builder = |t: f64| {
            build_conditioned_hamiltonian(0, &[], schedule.field_at(t), &[pair], &reg, &cst)
                .unwrap()
        };
        let traj = evolve_timedep(&builder, &psi0, &grid).unwrap();
        let (p_down, p_up) = manifold_probabilities(&traj).unwrap();
        let detected = detect_critical_times(&p_down, &p_up, None, &traj.times);
        switch_counts.push(detected.switch_times.len());
    }
    assert_eq!(switch_counts[0], 0, "period 2 tc1 must suppress the transition");
    assert!(switch_counts[1] >= 1, "period 6 tc1 must produce a transition");
    sw.finish(&format!(
        "switches: {} at T = 2 tc1, {} at T = 6 tc1",
        switch_counts[0], switch_counts[1]
    ));
}

#[test]
fn acceptance_06_central_spin_quench() {
    let sw = Stopwatch::start("acceptance 06 (central-spin quench)", 5.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(beta);
    let psi0 = StateVector::basis(reg, "dd").unwrap();
    let grid = TimeGrid::new(0.0, 60e-6, 6001, 1e-9).unwrap();
    let spec = QuenchSpec::CentralSpinQuench { initial_state: "dd".into(), ms_target: 1 };

    // anisotropy-dominated set: transitions with coincident mz zeros
    let dreau = literature_dataset("dreau").unwrap();
    let (h_post, psi) = apply_manifold_quench(&psi0, &spec, &dreau, &[pair], &cst).unwrap();
    let traj = evolve_static(&h_post, &psi, &grid).unwrap();
    let series = observable_series(&traj, SeriesOptions::default()).unwrap();
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);
    assert!(!detected.switch_times.is_empty(), "anisotropy-dominated set must switch");
    let step = grid.interval();
    for &s in &detected.switch_times {
        let nearest = detected
            .mz_zero_times
            .iter()
            .map(|&z| (z - s).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= step, "switch at {s:.4e} lacks a coincident mz zero");
    }
    let n_dreau = detected.switch_times.len();

    // isotropy-dominated set: no switches, magnetization stays negative
    let niz = literature_dataset("nizovtsev").unwrap();
    let (h_post, psi) = apply_manifold_quench(&psi0, &spec, &niz, &[pair], &cst).unwrap();
    let traj = evolve_static(&h_post, &psi, &grid).unwrap();
    let series = observable_series(&traj, SeriesOptions::default()).unwrap();
    let detected =
        detect_critical_times(&series.p_down, &series.p_up, Some(&series.mz), &series.times);
    assert!(detected.switch_times.is_empty(), "isotropy-dominated set must not switch");
    let max_mz = series.mz.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max_mz < 0.0, "magnetization must stay negative, got max {max_mz}");

    sw.finish(&format!(
        "{n_dreau} coincident switches (anisotropic set), none with max mz {max_mz:.3} (isotropic set)"
    ));
}

#[test]
fn acceptance_07_chain_scalability() {
    let sw = Stopwatch::start("acceptance 07 (chain scalability)", 60.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let field = Field::new(100.0, 50.0);
    let grid = TimeGrid::new(0.0, 20e-6, 2001, 1e-9).unwrap();

    let mut first_tcs = Vec::new();
    for n in [2usize, 4, 8] {
        let reg = SpinRegister::nuclear(n).unwrap();
        let pairs = make_chain_geometry(n, beta, &cst).unwrap();
        let h = build_conditioned_hamiltonian(0, &[], field, &pairs, &reg, &cst).unwrap();
        let psi0 = StateVector::basis(reg, &"d".repeat(n)).unwrap();
        let traj = evolve_static(&h, &psi0, &grid).unwrap();
        let (p_down, p_up) = manifold_probabilities(&traj).unwrap();
        let detected = detect_critical_times(&p_down, &p_up, None, &traj.times);
        let first = *detected
            .switch_times
            .first()
            .unwrap_or_else(|| panic!("chain of {n} must switch"));
        first_tcs.push(first);
    }
    let mut worst = 0.0f64;
    for a in &first_tcs {
        for b in &first_tcs {
            worst = worst.max((a - b).abs() / a.min(*b));
        }
    }
    assert!(worst <= 0.10, "critical times differ by {worst:.3} > 10%");
    sw.finish(&format!(
        "first switches {:.3}/{:.3}/{:.3} us, max pairwise spread {:.1}%",
        first_tcs[0] * 1e6,
        first_tcs[1] * 1e6,
        first_tcs[2] * 1e6,
        worst * 100.0
    ));
}

#[test]
fn acceptance_08_full_model_validation() {
    let sw = Stopwatch::start("acceptance 08 (full-model validation)", 120.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let field = Field::new(100.0, 50.0);
    let grid = TimeGrid::new(0.0, 20e-6, 2001, 1e-9).unwrap();
    let pairs = [coupled_pair(beta)];

    let reg_nuc = SpinRegister::nuclear(2).unwrap();
    let h_sec = build_conditioned_hamiltonian(0, &[], field, &pairs, &reg_nuc, &cst).unwrap();
    let psi0 = StateVector::basis(reg_nuc, "dd").unwrap();
    let mz_sec = magnetization(&evolve_static(&h_sec, &psi0, &grid).unwrap()).unwrap();

    let reg_full = SpinRegister::with_electron(2).unwrap();
    let h_full = build_full_hamiltonian(&[], field, &pairs, &reg_full, &cst).unwrap();
    let rho0 = StateVector::basis(reg_full, "0dd").unwrap().to_density();
    let model = LindbladModel::nuclear_dephasing(0.5e-3, &reg_full)
        .unwrap()
        .with_electron_dephasing(7e-6, &reg_full)
        .unwrap();
    let traj = evolve_lindblad(HamiltonianSource::Static(&h_full), &rho0, &model, &grid).unwrap();
    let mz_full = magnetization(&traj).unwrap();

    let max_delta = mz_sec
        .iter()
        .zip(&mz_full)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_delta < 0.02, "secular model deviates by {max_delta:.4} >= 0.02");
    sw.finish(&format!("max |delta mz| = {max_delta:.4} < 0.02 over 20 us at dt = 1 ns"));
}

#[test]
fn acceptance_09_phase_structure() {
    let sw = Stopwatch::start("acceptance 09 (phase structure)", 600.0);
    let cst = consts();
    let beta = TWO_PI * 2e3;
    let pairs = [coupled_pair(beta)];

    // full 60x60 sweep inside the runtime budget
    let full = SweepSettings {
        bx_values: linspace(0.0, 300.0, 60),
        bz_values: linspace(0.0, 100.0, 60),
        horizon: 20e-6,
        n_output: 2000,
        n_nuclei: 2,
    };
    let pd = phase_diagram(&full, &pairs, &cst).unwrap();
    for (iz, _) in pd.bz_values.iter().enumerate() {
        assert!(
            !pd.dqpt_flag[pd.index(0, iz)],
            "Bx = 0 column must never flag a transition (total-Iz conservation)"
        );
    }

    // strict comparison at exactly Bz = 5 G and 50 G over the same Bx range
    let rows = SweepSettings {
        bx_values: linspace(0.0, 300.0, 60),
        bz_values: vec![5.0, 50.0],
        horizon: 20e-6,
        n_output: 2000,
        n_nuclei: 2,
    };
    let pd2 = phase_diagram(&rows, &pairs, &cst).unwrap();
    let count_without = |iz: usize| {
        (0..pd2.bx_values.len())
            .filter(|&ix| !pd2.dqpt_flag[pd2.index(ix, iz)])
            .count()
    };
    let without_5 = count_without(0);
    let without_50 = count_without(1);
    assert!(
        without_50 > without_5,
        "no-transition measure at Bz = 50 G ({without_50}) must strictly exceed Bz = 5 G ({without_5})"
    );
    sw.finish(&format!(
        "60x60 sweep done; no-transition counts {without_50} (Bz = 50 G) > {without_5} (Bz = 5 G); Bx = 0 column clean"
    ));
}

#[test]
fn acceptance_10_entanglement_suite() {
    let sw = Stopwatch::start("acceptance 10 (entanglement suite)", 5.0);
    let reg2 = SpinRegister::nuclear(2).unwrap();
    // Bell and product states
    let mut amps = CVector::zeros(4);
    amps[1] = c(std::f64::consts::FRAC_1_SQRT_2);
    amps[2] = c(std::f64::consts::FRAC_1_SQRT_2);
    let bell = StateVector::new(reg2, amps).unwrap().to_density();
    assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-10);
    let product = StateVector::basis(reg2, "ud").unwrap().to_density();
    assert!(concurrence(&product).unwrap() < 1e-10);
    // Werner closed form
    for p in [0.25, 0.5, 0.8] {
        let m = bell.matrix() * c(p) + CMatrix::identity(4, 4) * c((1.0 - p) / 4.0);
        let rho = DensityMatrix::new(reg2, m).unwrap();
        let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
        assert!(
            (concurrence(&rho).unwrap() - expected).abs() < 1e-8,
            "werner p = {p}"
        );
    }
    // GHZ and W tangles
    let reg3 = SpinRegister::nuclear(3).unwrap();
    let mut amps = CVector::zeros(8);
    amps[0] = c(std::f64::consts::FRAC_1_SQRT_2);
    amps[7] = c(std::f64::consts::FRAC_1_SQRT_2);
    let ghz = tangle(&StateVector::new(reg3, amps).unwrap()).unwrap();
    assert!((ghz.tau123 - 1.0).abs() < 1e-8, "ghz tangle {}", ghz.tau123);
    let w = 1.0 / 3.0f64.sqrt();
    let mut amps = CVector::zeros(8);
    amps[1] = c(w);
    amps[2] = c(w);
    amps[4] = c(w);
    let wt = tangle(&StateVector::new(reg3, amps).unwrap()).unwrap();
    assert!(wt.tau123.abs() < 1e-8, "w tangle {}", wt.tau123);

    // concurrence growth on the entanglement-preset run at (100, 5) G
    let cfg = ExperimentConfig::preset("fig8").unwrap();
    let cst = consts();
    let coupling = cfg.coupling_rad().unwrap();
    let pair = coupled_pair(coupling);
    let schedule = cfg.field_schedules().unwrap()[0].1;
    let h = build_conditioned_hamiltonian(
        0,
        &[],
        schedule.field_at(0.0),
        &[pair],
        &reg2,
        &cst,
    )
    .unwrap();
    let psi0 = StateVector::basis(reg2, "dd").unwrap();
    let grid = cfg.time_grid().unwrap();
    assert!(grid.t_end <= 40e-6 + 1e-12);
    let traj = evolve_static(&h, &psi0, &grid).unwrap();
    let series =
        observable_series(&traj, SeriesOptions { concurrence: true, tangle: false }).unwrap();
    let conc = series.concurrence.as_ref().unwrap();
    assert!(conc[0] < 1e-8, "concurrence must start at zero, got {}", conc[0]);
    let max_c = conc.iter().cloned().fold(0.0f64, f64::max);
    assert!(max_c > 0.5, "concurrence must exceed 0.5 within 40 us, got {max_c:.3}");
    sw.finish(&format!(
        "reference states exact; run concurrence rises 0 -> {max_c:.2} inside 40 us"
    ));
}

#[test]
fn acceptance_11_property_suites() {
    let sw = Stopwatch::start("acceptance 11 (randomized property suites)", 60.0);
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(2026);

    let random_state = |rng: &mut ChaCha8Rng, reg: SpinRegister| {
        let amps = CVector::from_iterator(
            reg.dim(),
            (0..reg.dim()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)),
        );
        StateVector::new(reg, amps).unwrap().normalized()
    };
    let random_hermitian = |rng: &mut ChaCha8Rng, dim: usize, scale: f64| {
        let mut h = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let z = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * c(scale);
                if i == j {
                    h[(i, j)] = c(z.re);
                } else {
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
        }
        h
    };

    // spin-core invariants on 100 randomized registers/states
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let electron = rng.gen_bool(0.5);
        let reg = SpinRegister::new(electron, n).unwrap();
        let psi = random_state(&mut rng, reg);
        let rho = psi.to_density();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let keep: Vec<usize> = (0..reg.site_count())
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        let keep = if keep.is_empty() { vec![0] } else { keep };
        let red = partial_trace(&rho, &keep).unwrap();
        assert!((red.trace() - 1.0).abs() < 1e-12);
        red.validate().unwrap();
        // embedded operators on distinct sites commute
        if reg.site_count() >= 2 {
            let (ix, iy, _, _, _) = spin_half_operators();
            let s1 = reg.site_count() - 1;
            let s2 = reg.site_count() - 2;
            if reg.site_dim(s1) == 2 && reg.site_dim(s2) == 2 {
                let a = embed_site_operator(&ix, s1, &reg).unwrap();
                let b = embed_site_operator(&iy, s2, &reg).unwrap();
                let comm = &a * &b - &b * &a;
                assert!(max_abs(&comm) < 1e-12);
            }
        }
    }

    // propagation invariants on 100 randomized hamiltonians
    for k in 0..100 {
        let n = rng.gen_range(1..=3);
        let reg = SpinRegister::nuclear(n).unwrap();
        let h = random_hermitian(&mut rng, reg.dim(), 1e6);
        let psi0 = random_state(&mut rng, reg);
        let grid = TimeGrid::uniform(2e-6, 9).unwrap();
        let traj = evolve_static(&h, &psi0, &grid).unwrap();
        let e0 = psi0.expectation(&h).unwrap();
        for state in traj.pure_states().unwrap() {
            assert!((state.norm() - 1.0).abs() < 1e-10);
            let e = state.expectation(&h).unwrap();
            assert!((e - e0).abs() < 1e-10 * e0.abs().max(1e6));
        }
        // every tenth instance: lossless lindblad channel stays pure
        if k % 10 == 0 {
            let grid = TimeGrid::new(0.0, 2e-7, 3, 1e-9).unwrap();
            let lb = evolve_lindblad(
                HamiltonianSource::Static(&h),
                &psi0.to_density(),
                &LindbladModel::none(),
                &grid,
            )
            .unwrap();
            match &lb.data {
                dqpt_core::propagation::TrajectoryData::Mixed(rhos) => {
                    for rho in rhos {
                        assert!((rho.purity() - 1.0).abs() < 1e-8);
                        assert!((rho.trace() - 1.0).abs() < 1e-8);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // rate function stays finite and symmetric on random probabilities
    for _ in 0..100 {
        let pd: Vec<f64> = (0..16).map(|_| rng.gen::<f64>()).collect();
        let pu: Vec<f64> = (0..16).map(|_| rng.gen::<f64>()).collect();
        let a = rate_function(&pd, &pu, 2);
        let b = rate_function(&pu, &pd, 2);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    // second-order self-convergence of the midpoint stepper
    let cst = consts();
    let reg = SpinRegister::nuclear(2).unwrap();
    let pair = coupled_pair(TWO_PI * 2e3);
    let schedule = FieldSchedule {
        bz: 50.0,
        bx: BxWaveform::Oscillating { bx0: 50.0, amplitude: 50.0, period: 1e-6 },
    };
    let builder = |t: f64| {
        build_conditioned_hamiltonian(0, &[], schedule.field_at(t), &[pair], &reg, &cst).unwrap()
    };
    let psi0 = StateVector::basis(reg, "dd").unwrap();
    let t_end = 2e-6;
    let run = |dt: f64| {
        let grid = TimeGrid::new(0.0, t_end, 2, dt).unwrap();
        let traj = evolve_timedep(&builder, &psi0, &grid).unwrap();
        traj.pure_states().unwrap()[1].clone()
    };
    let reference = run(t_end / 16384.0);
    let defect = |psi: &StateVector| (psi.amplitudes() - reference.amplitudes()).norm();
    let ratio = defect(&run(t_end / 128.0)) / defect(&run(t_end / 256.0));
    assert!(
        (3.5..=4.5).contains(&ratio),
        "self-convergence ratio {ratio} outside [3.5, 4.5]"
    );

    sw.finish(&format!(
        "300 randomized instances hold; stepper convergence ratio {ratio:.2} in [3.5, 4.5]"
    ));
}
