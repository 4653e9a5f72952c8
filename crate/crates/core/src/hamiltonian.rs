//! Hamiltonian builders for the central-spin system: an NV- electron spin
//! hyperfine-coupled to nearby 13C nuclei that interact through magnetic
//! dipole-dipole coupling.
//!
//! Unit conventions, used everywhere in this crate:
//! - Hamiltonian entries are angular frequencies (rad/s) with hbar = 1.
//! - Magnetic fields cross the API in Gauss.
//! - Gyromagnetic ratios are stored in rad/s per Gauss; the dipolar formula
//!   converts to SI (rad/s per Tesla) internally.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64};
use crate::spin::{embed_site_operator, spin_half_operators, spin_one_operators, sum_over_nuclei, SpinRegister};

pub const TWO_PI: f64 = std::f64::consts::TAU;
pub const GAUSS_PER_TESLA: f64 = 1e4;

/// Physical constants of the system. Frequencies are angular (rad/s).
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    /// Electron gyromagnetic ratio, rad/s per Gauss (2*pi*2.8 MHz/G).
    pub gamma_e: f64,
    /// 13C gyromagnetic ratio, rad/s per Gauss (2*pi*1.07 kHz/G).
    pub gamma_n: f64,
    /// Ground-state zero-field splitting, rad/s (2*pi*2.87 GHz).
    pub zero_field_splitting: f64,
    /// Vacuum permeability, SI.
    pub mu0: f64,
    /// Reduced Planck constant, SI.
    pub hbar: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            gamma_e: TWO_PI * 2.8e6,
            gamma_n: TWO_PI * 1.07e3,
            zero_field_splitting: TWO_PI * 2.87e9,
            mu0: 1.256_637_062_12e-6,
            hbar: 1.054_571_817e-34,
        }
    }
}

impl Constants {
    /// mu0 * hbar / (4 pi), the SI prefactor of every dipolar coupling here.
    pub fn mu0_hbar_over_4pi(&self) -> f64 {
        self.mu0 * self.hbar / (4.0 * std::f64::consts::PI)
    }

    fn gamma_n_si(&self) -> f64 {
        self.gamma_n * GAUSS_PER_TESLA
    }

    fn gamma_e_si(&self) -> f64 {
        self.gamma_e * GAUSS_PER_TESLA
    }
}

/// Static magnetic field (Bx, 0, Bz) in Gauss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub bx: f64,
    pub bz: f64,
}

impl Field {
    pub fn new(bx: f64, bz: f64) -> Self {
        Self { bx, bz }
    }

    pub const ZERO: Field = Field { bx: 0.0, bz: 0.0 };
}

/// Secular nuclear-nuclear coupling, rad/s:
/// beta = -(mu0 hbar gamma_n^2 / 4 pi r^3) (1 - 3 cos^2 theta).
pub fn dipolar_beta(r: f64, theta: f64, constants: &Constants) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::BadGeometry(format!("pair distance r = {r} must be positive")));
    }
    let g = constants.gamma_n_si();
    let k = constants.mu0_hbar_over_4pi() * g * g / (r * r * r);
    Ok(-k * (1.0 - 3.0 * theta.cos().powi(2)))
}

/// Relative placement of one nuclear pair.
///
/// `beta` always satisfies the secular formula for (r, theta); the secular
/// hamiltonian term for the pair reads (beta/4) [(I+I- + I-I+) - 4 Iz Iz].
#[derive(Debug, Clone, Copy)]
pub struct PairGeometry {
    pub i: usize,
    pub j: usize,
    /// distance, meters
    pub r: f64,
    /// polar angle against the z axis, rad
    pub theta: f64,
    /// azimuth against the x axis, rad
    pub phi: f64,
    /// derived secular coupling, rad/s
    beta: f64,
}

impl PairGeometry {
    pub fn new(i: usize, j: usize, r: f64, theta: f64, phi: f64, constants: &Constants) -> Result<Self> {
        if i == j {
            return Err(Error::BadGeometry(format!("pair indices must differ, got ({i}, {j})")));
        }
        let beta = dipolar_beta(r, theta, constants)?;
        Ok(Self { i, j, r, theta, phi, beta })
    }

    /// Pair with a prescribed coupling `b` (rad/s), placed so that the
    /// two-spin secular term reads (b/2) [(I+I- + I-I+) - 4 Iz Iz]. This is
    /// the convention in which couplings are quoted in kHz throughout.
    pub fn from_coupling(i: usize, j: usize, coupling: f64, constants: &Constants) -> Result<Self> {
        if coupling == 0.0 {
            return Err(Error::BadGeometry("pair coupling must be nonzero".into()));
        }
        let g = constants.gamma_n_si();
        let k0 = constants.mu0_hbar_over_4pi() * g * g;
        // solve r so that beta(r, theta) = 2 * coupling
        let (theta, r3) = if coupling > 0.0 {
            (0.0, k0 / coupling)
        } else {
            (std::f64::consts::FRAC_PI_2, k0 / (2.0 * -coupling))
        };
        Self::new(i, j, r3.cbrt(), theta, 0.0, constants)
    }

    /// Secular coupling coefficient of Eq-style (beta/4) bookkeeping.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Coupling in the (b/2) two-spin convention: b = beta / 2.
    pub fn coupling(&self) -> f64 {
        self.beta / 2.0
    }

    /// Full-dipolar prefactor mu0 hbar gamma_n^2 / (4 pi r^3), rad/s.
    fn full_prefactor(&self, constants: &Constants) -> f64 {
        let g = constants.gamma_n_si();
        constants.mu0_hbar_over_4pi() * g * g / (self.r * self.r * self.r)
    }
}

fn check_pairs(pairs: &[PairGeometry], register: &SpinRegister) -> Result<()> {
    let n = register.n_nuclei();
    for p in pairs {
        if p.i >= n || p.j >= n {
            return Err(Error::BadGeometry(format!(
                "pair ({}, {}) out of range for {} nuclei",
                p.i, p.j, n
            )));
        }
    }
    Ok(())
}

/// Full dipole-dipole hamiltonian over all listed pairs, with every angular
/// term retained (no secular approximation on the nuclear bath).
pub fn build_dipolar_full(pairs: &[PairGeometry], register: &SpinRegister, constants: &Constants) -> Result<CMatrix> {
    check_pairs(pairs, register)?;
    let dim = register.dim();
    let (_, _, iz, ip, im) = spin_half_operators();
    let mut h = CMatrix::zeros(dim, dim);
    for p in pairs {
        let k = p.full_prefactor(constants);
        let (st, ct) = p.theta.sin_cos();
        let legendre = 1.0 - 3.0 * ct * ct;
        let e_m = C64::from_polar(1.0, -p.phi);
        let e_p = e_m.conj();
        let e_m2 = C64::from_polar(1.0, -2.0 * p.phi);
        let e_p2 = e_m2.conj();

        let si = register.nucleus_site(p.i);
        let sj = register.nucleus_site(p.j);
        let iz_i = embed_site_operator(&iz, si, register)?;
        let iz_j = embed_site_operator(&iz, sj, register)?;
        let ip_i = embed_site_operator(&ip, si, register)?;
        let ip_j = embed_site_operator(&ip, sj, register)?;
        let im_i = embed_site_operator(&im, si, register)?;
        let im_j = embed_site_operator(&im, sj, register)?;

        let term_a = &iz_i * &iz_j * c(legendre);
        let term_b = (&ip_i * &im_j + &im_i * &ip_j) * c(-0.25 * legendre);
        let term_c = (&ip_i * &iz_j + &iz_i * &ip_j) * (c(-1.5 * st * ct) * e_m);
        let term_d = (&im_i * &iz_j + &iz_i * &im_j) * (c(-1.5 * st * ct) * e_p);
        let term_e = &ip_i * &ip_j * (c(-0.75 * st * st) * e_m2);
        let term_f = &im_i * &im_j * (c(-0.75 * st * st) * e_p2);

        h += (term_a + term_b + term_c + term_d + term_e + term_f) * c(k);
    }
    Ok(h)
}

/// Secular dipolar hamiltonian: sum over pairs of
/// (beta/4) [(I+I- + I-I+) - 4 Iz Iz]. Conserves total Iz.
pub fn build_dipolar_secular(pairs: &[PairGeometry], register: &SpinRegister) -> Result<CMatrix> {
    check_pairs(pairs, register)?;
    let dim = register.dim();
    let (_, _, iz, ip, im) = spin_half_operators();
    let mut h = CMatrix::zeros(dim, dim);
    for p in pairs {
        let si = register.nucleus_site(p.i);
        let sj = register.nucleus_site(p.j);
        let iz_i = embed_site_operator(&iz, si, register)?;
        let iz_j = embed_site_operator(&iz, sj, register)?;
        let ip_i = embed_site_operator(&ip, si, register)?;
        let ip_j = embed_site_operator(&ip, sj, register)?;
        let im_i = embed_site_operator(&im, si, register)?;
        let im_j = embed_site_operator(&im, sj, register)?;
        let flip_flop = &ip_i * &im_j + &im_i * &ip_j;
        h += (flip_flop - &iz_i * &iz_j * c(4.0)) * c(p.beta / 4.0);
    }
    Ok(h)
}

/// Per-nucleus hyperfine data and/or position relative to the NV.
#[derive(Debug, Clone, Copy)]
pub struct CarbonSite {
    pub index: usize,
    /// position in meters, relative to the NV center
    pub position: Option<[f64; 3]>,
    /// z-row of the hyperfine tensor (A_zx, A_zy, A_zz), rad/s
    pub hyperfine_row: Option<[f64; 3]>,
}

impl CarbonSite {
    pub fn from_hyperfine(index: usize, a_zx: f64, a_zy: f64, a_zz: f64) -> Self {
        Self { index, position: None, hyperfine_row: Some([a_zx, a_zy, a_zz]) }
    }

    pub fn from_position(index: usize, position: [f64; 3]) -> Self {
        Self { index, position: Some(position), hyperfine_row: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.position.is_none() && self.hyperfine_row.is_none() {
            return Err(Error::BadSite {
                index: self.index,
                reason: "needs a position or a hyperfine row".into(),
            });
        }
        if let Some(p) = self.position {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r <= 0.0 {
                return Err(Error::BadSite { index: self.index, reason: "position at origin".into() });
            }
        }
        Ok(())
    }

    fn row(&self) -> Result<[f64; 3]> {
        self.hyperfine_row
            .ok_or(Error::MissingHyperfine { ms: 1, index: self.index })
    }

    /// Transverse hyperfine magnitude sqrt(A_zx^2 + A_zy^2), rad/s.
    pub fn a_ani(&self) -> Result<f64> {
        let [x, y, _] = self.row()?;
        Ok(x.hypot(y))
    }

    /// Hyperfine azimuth atan2(A_zy, A_zx) in (-pi, pi].
    pub fn phi(&self) -> Result<f64> {
        let [x, y, _] = self.row()?;
        Ok(y.atan2(x))
    }

    pub fn hyperfine_zz(&self) -> Result<f64> {
        Ok(self.row()?[2])
    }

    /// Full 3x3 hyperfine tensor (rad/s) for the non-secular model.
    ///
    /// Uses the point-dipole tensor at `position` when given; otherwise
    /// completes the known z-row with a point-dipole placement that
    /// reproduces it exactly. A zero row yields a zero tensor.
    pub fn full_tensor(&self, constants: &Constants) -> Result<Matrix3<f64>> {
        self.validate()?;
        let position = match self.position {
            Some(p) => p,
            None => {
                let row = self.row()?;
                if row[0] == 0.0 && row[1] == 0.0 && row[2] == 0.0 {
                    return Ok(Matrix3::zeros());
                }
                point_dipole_position_for_row(row, constants)?
            }
        };
        let r = (position[0] * position[0] + position[1] * position[1] + position[2] * position[2]).sqrt();
        if r <= 0.0 {
            return Err(Error::BadSite { index: self.index, reason: "position at origin".into() });
        }
        let n = [position[0] / r, position[1] / r, position[2] / r];
        let k = constants.mu0_hbar_over_4pi() * constants.gamma_e_si() * constants.gamma_n_si()
            / (r * r * r);
        let mut t = Matrix3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                t[(a, b)] = k * (delta - 3.0 * n[a] * n[b]);
            }
        }
        Ok(t)
    }
}

/// Solve for a point-dipole position whose tensor z-row equals `row`.
///
/// With k = mu0 hbar g_e g_n / (4 pi r^3) > 0 and n the unit direction:
///   A_zx = -3 k n_z n_x,  A_zy = -3 k n_z n_y,  A_zz = k (1 - 3 n_z^2).
fn point_dipole_position_for_row(row: [f64; 3], constants: &Constants) -> Result<[f64; 3]> {
    let [a_zx, a_zy, a_zz] = row;
    let a_ani = a_zx.hypot(a_zy);

    // x = cos^2(theta)
    let (x, k) = if a_ani <= 1e-12 * a_zz.abs() {
        if a_zz > 0.0 {
            (0.0, a_zz) // in-plane placement
        } else {
            (1.0, -a_zz / 2.0) // on-axis placement
        }
    } else if a_zz.abs() <= 1e-12 * a_ani {
        // magic-angle placement: 1 - 3x = 0
        let x: f64 = 1.0 / 3.0;
        let sc = (x * (1.0 - x)).sqrt();
        (x, a_ani / (3.0 * sc))
    } else {
        // 9 x (1 - x) / (1 - 3x)^2 = (a_ani / a_zz)^2, quadratic in x
        let rr = (a_ani / a_zz).powi(2);
        let aq = 9.0 + 9.0 * rr;
        let bq = 9.0 + 6.0 * rr;
        let disc = (81.0 + 72.0 * rr).sqrt();
        let roots = [(bq + disc) / (2.0 * aq), (bq - disc) / (2.0 * aq)];
        // k = a_zz / (1 - 3x) must be positive
        let x = if a_zz > 0.0 {
            roots.into_iter().find(|&x| x < 1.0 / 3.0)
        } else {
            roots.into_iter().find(|&x| x > 1.0 / 3.0)
        }
        .expect("quadratic has one root on each side of 1/3");
        (x, a_zz / (1.0 - 3.0 * x))
    };

    let r3 = constants.mu0_hbar_over_4pi() * constants.gamma_e_si() * constants.gamma_n_si() / k;
    let r = r3.cbrt();
    let nz = x.sqrt();
    let ns = (1.0 - x).sqrt();
    let (cos_phi, sin_phi) = if a_ani > 0.0 {
        (-a_zx / a_ani, -a_zy / a_ani)
    } else {
        (1.0, 0.0)
    };
    Ok([r * ns * cos_phi, r * ns * sin_phi, r * nz])
}

/// Nuclear hamiltonian conditioned to the electron manifold `ms`:
/// gamma_n B . sum I + ms sum_i sum_a A_za^(i) I_a^(i) + secular dipolar.
/// The manifold scalar (ms^2 D + ms gamma_e Bz) is dropped: it only adds a
/// global phase on the conditioned register.
pub fn build_conditioned_hamiltonian(
    ms: i8,
    sites: &[CarbonSite],
    b: Field,
    pairs: &[PairGeometry],
    register: &SpinRegister,
    constants: &Constants,
) -> Result<CMatrix> {
    if !(-1..=1).contains(&ms) {
        return Err(Error::InvalidMs(ms));
    }
    let (ix, iy, iz, _, _) = spin_half_operators();
    let mut h = build_dipolar_secular(pairs, register)?;
    h += sum_over_nuclei(&ix, register)? * c(constants.gamma_n * b.bx);
    h += sum_over_nuclei(&iz, register)? * c(constants.gamma_n * b.bz);
    if ms != 0 {
        if sites.len() != register.n_nuclei() {
            return Err(Error::MissingHyperfine { ms, index: sites.len() });
        }
        for (k, site) in sites.iter().enumerate() {
            let row = site
                .hyperfine_row
                .ok_or(Error::MissingHyperfine { ms, index: site.index })?;
            let local = &ix * c(row[0]) + &iy * c(row[1]) + &iz * c(row[2]);
            h += embed_site_operator(&local, register.nucleus_site(k), register)? * c(ms as f64);
        }
    }
    Ok(h)
}

/// The field-quench split: H0 is the secular dipolar part with two degenerate
/// extremal eigenstates, H1 the nuclear Zeeman term switched on at t = 0.
/// H0 + H1 equals the ms = 0 conditioned hamiltonian.
pub fn build_field_quench_pair(
    pairs: &[PairGeometry],
    b: Field,
    register: &SpinRegister,
    constants: &Constants,
) -> Result<(CMatrix, CMatrix)> {
    if register.n_nuclei() < 2 {
        return Err(Error::TooFewNuclei(register.n_nuclei()));
    }
    let h0 = build_dipolar_secular(pairs, register)?;
    let (ix, _, iz, _, _) = spin_half_operators();
    let h1 = sum_over_nuclei(&iz, register)? * c(constants.gamma_n * b.bz)
        + sum_over_nuclei(&ix, register)? * c(constants.gamma_n * b.bx);
    Ok((h0, h1))
}

/// Post-rotation hamiltonian term of the central-spin quench:
/// ms sum_i [ A_zz^(i) Iz + (A_ani^(i)/2)(I+ e^{-i phi_i} + I- e^{+i phi_i}) ].
/// The D Sz^2 scalar is dropped (global phase on the conditioned register).
pub fn build_central_quench_h1(
    sites: &[CarbonSite],
    ms: i8,
    register: &SpinRegister,
) -> Result<CMatrix> {
    if !matches!(ms, -1 | 1) {
        return Err(Error::InvalidMs(ms));
    }
    if sites.len() != register.n_nuclei() {
        return Err(Error::MissingHyperfine { ms, index: sites.len() });
    }
    let (_, _, iz, ip, im) = spin_half_operators();
    let dim = register.dim();
    let mut h = CMatrix::zeros(dim, dim);
    for (k, site) in sites.iter().enumerate() {
        let a_ani = site.a_ani().map_err(|_| Error::MissingHyperfine { ms, index: site.index })?;
        let phi = site.phi()?;
        let a_zz = site.hyperfine_zz()?;
        let ladder = &ip * C64::from_polar(1.0, -phi) + &im * C64::from_polar(1.0, phi);
        let local = &iz * c(a_zz) + ladder * c(a_ani / 2.0);
        h += embed_site_operator(&local, register.nucleus_site(k), register)? * c(ms as f64);
    }
    Ok(h)
}

/// Full non-secular model on the electron (x) nuclei register:
/// D Sz^2 + gamma_e B.S + S . A^(i) . I^(i) + gamma_n B . sum I + full dipolar.
pub fn build_full_hamiltonian(
    sites: &[CarbonSite],
    b: Field,
    pairs: &[PairGeometry],
    register: &SpinRegister,
    constants: &Constants,
) -> Result<CMatrix> {
    if !register.has_electron() {
        return Err(Error::ElectronRequired);
    }
    let (sx, sy, sz) = spin_one_operators();
    let (ix, iy, iz, _, _) = spin_half_operators();
    let dim = register.dim();
    let mut h = CMatrix::zeros(dim, dim);

    let sz_full = embed_site_operator(&sz, 0, register)?;
    h += &sz_full * &sz_full * c(constants.zero_field_splitting);
    h += embed_site_operator(&sx, 0, register)? * c(constants.gamma_e * b.bx);
    h += &sz_full * c(constants.gamma_e * b.bz);

    let electron_ops = [&sx, &sy, &sz];
    let nuclear_ops = [&ix, &iy, &iz];
    for (k, site) in sites.iter().enumerate() {
        let tensor = site.full_tensor(constants)?;
        for a in 0..3 {
            for bcomp in 0..3 {
                let coeff = tensor[(a, bcomp)];
                if coeff == 0.0 {
                    continue;
                }
                let sa = embed_site_operator(electron_ops[a], 0, register)?;
                let ib = embed_site_operator(nuclear_ops[bcomp], register.nucleus_site(k), register)?;
                h += sa * ib * c(coeff);
            }
        }
    }

    h += sum_over_nuclei(&ix, register)? * c(constants.gamma_n * b.bx);
    h += sum_over_nuclei(&iz, register)? * c(constants.gamma_n * b.bz);
    h += build_dipolar_full(pairs, register, constants)?;
    Ok(h)
}

/// Time profile of the longitudinal field component Bx(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BxWaveform {
    Constant { bx0: f64 },
    /// Bx(t) = bx0 + amplitude * cos(2 pi t / period)
    Oscillating { bx0: f64, amplitude: f64, period: f64 },
    /// Bx(t) = amplitude * exp(-(t - center)^2 / (2 sigma^2))
    Gaussian { amplitude: f64, center: f64, sigma: f64 },
}

/// Time-dependent field B(t) = (Bx(t), 0, Bz), Gauss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSchedule {
    pub bz: f64,
    pub bx: BxWaveform,
}

impl FieldSchedule {
    pub fn constant(bx0: f64, bz: f64) -> Self {
        Self { bz, bx: BxWaveform::Constant { bx0 } }
    }

    pub fn validate(&self) -> Result<()> {
        match self.bx {
            BxWaveform::Oscillating { period, .. } if period <= 0.0 => {
                Err(Error::BadSchedule(format!("oscillation period {period} must be positive")))
            }
            BxWaveform::Gaussian { sigma, .. } if sigma <= 0.0 => {
                Err(Error::BadSchedule(format!("gaussian width {sigma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self.bx, BxWaveform::Constant { .. })
    }

    /// Field at time t (seconds), in Gauss.
    pub fn field_at(&self, t: f64) -> Field {
        let bx = match self.bx {
            BxWaveform::Constant { bx0 } => bx0,
            BxWaveform::Oscillating { bx0, amplitude, period } => {
                bx0 + amplitude * (TWO_PI * t / period).cos()
            }
            BxWaveform::Gaussian { amplitude, center, sigma } => {
                amplitude * (-(t - center).powi(2) / (2.0 * sigma * sigma)).exp()
            }
        };
        Field { bx, bz: self.bz }
    }
}

/// Which quench drives the dynamics.
#[derive(Debug, Clone)]
pub enum QuenchSpec {
    /// Zeeman fields switched on at t = 0 over the dipolar ground manifold.
    FieldQuench { initial_state: String, schedule: FieldSchedule },
    /// Instantaneous electron rotation into the ms = +-1 manifold.
    CentralSpinQuench { initial_state: String, ms_target: i8 },
}

/// Nearest-neighbor 1D chain with a uniform coupling (rad/s, positive),
/// in the (b/2) two-spin convention.
pub fn make_chain_geometry(n: usize, coupling: f64, constants: &Constants) -> Result<Vec<PairGeometry>> {
    if n < 2 {
        return Err(Error::TooFewNuclei(n));
    }
    (0..n - 1)
        .map(|k| PairGeometry::from_coupling(k, k + 1, coupling, constants))
        .collect()
}

const HYPERFINE_TABLE: &str = include_str!("../data/hyperfine.tsv");

/// Parse a plain-text hyperfine table: one record per site,
/// `set site a_zx_khz a_zy_khz a_zz_khz`, whitespace separated, `#` comments.
pub fn parse_hyperfine_table(text: &str) -> Result<BTreeMap<String, Vec<CarbonSite>>> {
    let mut sets: BTreeMap<String, Vec<CarbonSite>> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::DatasetParse {
                line: lineno + 1,
                reason: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::DatasetParse {
                line: lineno + 1,
                reason: format!("bad {what} value `{s}`"),
            })
        };
        let index: usize = fields[1].parse().map_err(|_| Error::DatasetParse {
            line: lineno + 1,
            reason: format!("bad site index `{}`", fields[1]),
        })?;
        let to_rad = TWO_PI * 1e3;
        let site = CarbonSite::from_hyperfine(
            index,
            parse_f(fields[2], "a_zx")? * to_rad,
            parse_f(fields[3], "a_zy")? * to_rad,
            parse_f(fields[4], "a_zz")? * to_rad,
        );
        sets.entry(fields[0].to_string()).or_default().push(site);
    }
    Ok(sets)
}

fn dataset_table() -> &'static BTreeMap<String, Vec<CarbonSite>> {
    static TABLE: OnceLock<BTreeMap<String, Vec<CarbonSite>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse_hyperfine_table(HYPERFINE_TABLE).expect("shipped hyperfine table parses")
    })
}

/// Named hyperfine parameter sets shipped with the crate ("dreau",
/// "nizovtsev"), in register order.
pub fn literature_dataset(name: &str) -> Result<Vec<CarbonSite>> {
    dataset_table()
        .get(&name.to_ascii_lowercase())
        .cloned()
        .ok_or_else(|| Error::UnknownDataset(name.to_string()))
}

pub fn dataset_names() -> Vec<String> {
    dataset_table().keys().cloned().collect()
}
