//! Spin registers, operators and states for one spin-1 electron and up to
//! ten spin-1/2 nuclei.
//!
//! Site ordering is fixed: electron first (when present), then nuclei in
//! ascending index. All tensor products follow this order. Basis order per
//! site: electron {|+1>, |0>, |-1>}, nucleus {|up>, |down>}.

use crate::error::{Error, Result};
use crate::linalg::{c, kron_all, CMatrix, CVector, C64, I};

pub const MAX_NUCLEI: usize = 10;

/// Hilbert-space layout of the simulated register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinRegister {
    include_electron: bool,
    n_nuclei: usize,
}

impl SpinRegister {
    pub fn new(include_electron: bool, n_nuclei: usize) -> Result<Self> {
        if !(1..=MAX_NUCLEI).contains(&n_nuclei) {
            return Err(Error::RegisterSize(n_nuclei));
        }
        Ok(Self { include_electron, n_nuclei })
    }

    pub fn nuclear(n_nuclei: usize) -> Result<Self> {
        Self::new(false, n_nuclei)
    }

    pub fn with_electron(n_nuclei: usize) -> Result<Self> {
        Self::new(true, n_nuclei)
    }

    /// Register produced by a partial trace; permits an electron-only layout.
    fn reduced(include_electron: bool, n_nuclei: usize) -> Self {
        Self { include_electron, n_nuclei }
    }

    pub fn has_electron(&self) -> bool {
        self.include_electron
    }

    pub fn n_nuclei(&self) -> usize {
        self.n_nuclei
    }

    pub fn site_count(&self) -> usize {
        self.n_nuclei + usize::from(self.include_electron)
    }

    pub fn site_dim(&self, site: usize) -> usize {
        if self.include_electron && site == 0 {
            3
        } else {
            2
        }
    }

    pub fn dim(&self) -> usize {
        let nuclear = 1usize << self.n_nuclei;
        if self.include_electron {
            3 * nuclear
        } else {
            nuclear
        }
    }

    /// Site index of the k-th nucleus (k counted from 0).
    pub fn nucleus_site(&self, k: usize) -> usize {
        k + usize::from(self.include_electron)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.site_count() {
            return Err(Error::InvalidSite { site, n_sites: self.site_count() });
        }
        Ok(())
    }

    /// Column-stride of each site in the row-major tensor layout.
    fn strides(&self) -> Vec<usize> {
        let n = self.site_count();
        let mut strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.site_dim(s + 1);
        }
        strides
    }
}

/// Spin-1/2 operators: (Ix, Iy, Iz, I+, I-), each 2x2 in the {up, down} basis.
pub fn spin_half_operators() -> (CMatrix, CMatrix, CMatrix, CMatrix, CMatrix) {
    let ix = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]);
    let iy = CMatrix::from_row_slice(2, 2, &[c(0.0), -0.5 * I, 0.5 * I, c(0.0)]);
    let iz = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
    let iplus = &ix + &iy * I;
    let iminus = &ix - &iy * I;
    (ix, iy, iz, iplus, iminus)
}

/// Spin-1 operators (Sx, Sy, Sz), 3x3 in the {|+1>, |0>, |-1>} basis.
pub fn spin_one_operators() -> (CMatrix, CMatrix, CMatrix) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sx = CMatrix::from_row_slice(3, 3, &[
        c(0.0), c(s), c(0.0),
        c(s), c(0.0), c(s),
        c(0.0), c(s), c(0.0),
    ]);
    let sy = CMatrix::from_row_slice(3, 3, &[
        c(0.0), -s * I, c(0.0),
        s * I, c(0.0), -s * I,
        c(0.0), s * I, c(0.0),
    ]);
    let sz = CMatrix::from_row_slice(3, 3, &[
        c(1.0), c(0.0), c(0.0),
        c(0.0), c(0.0), c(0.0),
        c(0.0), c(0.0), c(-1.0),
    ]);
    (sx, sy, sz)
}

/// Embed a single-site operator into the full register:
/// id (x) ... (x) op (x) ... (x) id.
pub fn embed_site_operator(op: &CMatrix, site: usize, register: &SpinRegister) -> Result<CMatrix> {
    register.check_site(site)?;
    let d = register.site_dim(site);
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
    }
    let factors: Vec<CMatrix> = (0..register.site_count())
        .map(|s| {
            if s == site {
                op.clone()
            } else {
                CMatrix::identity(register.site_dim(s), register.site_dim(s))
            }
        })
        .collect();
    Ok(kron_all(&factors))
}

/// Sum of `op` embedded on every nucleus of the register.
pub fn sum_over_nuclei(op: &CMatrix, register: &SpinRegister) -> Result<CMatrix> {
    let dim = register.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for k in 0..register.n_nuclei() {
        acc += embed_site_operator(op, register.nucleus_site(k), register)?;
    }
    Ok(acc)
}

/// Per-site basis symbol. Electron: `+`, `0`, `-`; nucleus: `u`/`d`
/// (unicode arrows accepted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteLabel {
    Ms(i8),
    Up,
    Down,
}

impl SiteLabel {
    fn index(&self) -> usize {
        match self {
            SiteLabel::Ms(1) => 0,
            SiteLabel::Ms(0) => 1,
            SiteLabel::Ms(-1) => 2,
            SiteLabel::Ms(_) => unreachable!("validated at parse"),
            SiteLabel::Up => 0,
            SiteLabel::Down => 1,
        }
    }
}

/// Parse a label string like `0dd` or `0↑↓` into per-site symbols.
pub fn parse_label(label: &str, register: &SpinRegister) -> Result<Vec<SiteLabel>> {
    let bad = |why: &str| Error::BadLabel(label.to_string(), why.to_string());
    let chars: Vec<char> = label.chars().collect();
    if chars.len() != register.site_count() {
        return Err(bad(&format!(
            "expected {} site symbols, got {}",
            register.site_count(),
            chars.len()
        )));
    }
    let mut out = Vec::with_capacity(chars.len());
    for (site, ch) in chars.iter().enumerate() {
        let electron = register.has_electron() && site == 0;
        let sym = match (electron, ch) {
            (true, '+') => SiteLabel::Ms(1),
            (true, '0') => SiteLabel::Ms(0),
            (true, '-') => SiteLabel::Ms(-1),
            (true, _) => return Err(bad("electron symbol must be one of `+`, `0`, `-`")),
            (false, 'u') | (false, '↑') => SiteLabel::Up,
            (false, 'd') | (false, '↓') => SiteLabel::Down,
            (false, _) => return Err(bad("nuclear symbol must be `u`/`d` (or arrows)")),
        };
        out.push(sym);
    }
    Ok(out)
}

/// Pure state of the register.
#[derive(Debug, Clone)]
pub struct StateVector {
    register: SpinRegister,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(register: SpinRegister, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { register, amplitudes })
    }

    /// Computational-basis state from a per-site symbol string.
    pub fn basis(register: SpinRegister, label: &str) -> Result<Self> {
        let symbols = parse_label(label, &register)?;
        let strides = register.strides();
        let idx: usize = symbols
            .iter()
            .enumerate()
            .map(|(s, sym)| sym.index() * strides[s])
            .sum();
        let mut amps = CVector::zeros(register.dim());
        amps[idx] = c(1.0);
        Ok(Self { register, amplitudes: amps })
    }

    /// Basis index of a label without building the vector.
    pub fn basis_index(register: &SpinRegister, label: &str) -> Result<usize> {
        let symbols = parse_label(label, register)?;
        let strides = register.strides();
        Ok(symbols
            .iter()
            .enumerate()
            .map(|(s, sym)| sym.index() * strides[s])
            .sum())
    }

    pub fn register(&self) -> &SpinRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes /= c(n);
        }
        self
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// <psi| A |psi> for hermitian A; the imaginary residue is checked and
    /// discarded.
    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        check_expectation_operand(op, self.dim())?;
        let v = op * &self.amplitudes;
        let z = self.amplitudes.dotc(&v);
        debug_assert!(z.im.abs() < 1e-10 * z.norm().max(1.0));
        Ok(z.re)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { register: self.register, matrix: m }
    }
}

/// Mixed (or pure) state of the register.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    register: SpinRegister,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wrap and validate: hermitian within 1e-10, unit trace within 1e-8,
    /// eigenvalues >= -1e-8.
    pub fn new(register: SpinRegister, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != register.dim() || matrix.ncols() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                got: matrix.nrows(),
            });
        }
        let dm = Self { register, matrix };
        dm.validate()?;
        Ok(dm)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = crate::linalg::hermiticity_defect(&self.matrix);
        if defect > 1e-10 {
            return Err(Error::BadDensityMatrix(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::BadDensityMatrix(format!("trace {tr} != 1")));
        }
        let eig = crate::linalg::eigh(&self.matrix)?;
        if let Some(min) = eig.values.iter().cloned().reduce(f64::min) {
            if min < -1e-8 {
                return Err(Error::BadDensityMatrix(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn register(&self) -> &SpinRegister {
        &self.register
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix)
            .diagonal()
            .iter()
            .map(|z| z.re)
            .sum()
    }

    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        check_expectation_operand(op, self.matrix.nrows())?;
        let z: C64 = (op * &self.matrix).diagonal().iter().sum();
        debug_assert!(z.im.abs() < 1e-10 * z.norm().max(1.0));
        Ok(z.re)
    }

    pub(crate) fn from_parts_unchecked(register: SpinRegister, matrix: CMatrix) -> Self {
        Self { register, matrix }
    }
}

fn check_expectation_operand(op: &CMatrix, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: op.nrows() });
    }
    let scale = crate::linalg::max_abs(op).max(1.0);
    let defect = crate::linalg::hermiticity_defect(op);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Reduced density matrix on `keep_sites` (ascending site indices).
pub fn partial_trace(rho: &DensityMatrix, keep_sites: &[usize]) -> Result<DensityMatrix> {
    let reg = rho.register();
    let n_sites = reg.site_count();
    if keep_sites.is_empty() {
        return Err(Error::BadDensityMatrix("empty keep-site set".into()));
    }
    let mut keep = keep_sites.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.len() != keep_sites.len() {
        return Err(Error::BadDensityMatrix("duplicate keep-site index".into()));
    }
    for &s in &keep {
        reg.check_site(s)?;
    }
    let traced: Vec<usize> = (0..n_sites).filter(|s| !keep.contains(s)).collect();
    let strides = reg.strides();

    let keep_dims: Vec<usize> = keep.iter().map(|&s| reg.site_dim(s)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| reg.site_dim(s)).collect();
    let dim_keep: usize = keep_dims.iter().product();
    let dim_traced: usize = traced_dims.iter().product();

    // offset of a flat sub-index within the full tensor layout
    let offset = |sites: &[usize], dims: &[usize], mut flat: usize| -> usize {
        let mut off = 0;
        for k in (0..sites.len()).rev() {
            off += (flat % dims[k]) * strides[sites[k]];
            flat /= dims[k];
        }
        off
    };

    let mut out = CMatrix::zeros(dim_keep, dim_keep);
    for a in 0..dim_keep {
        let oa = offset(&keep, &keep_dims, a);
        for b in 0..dim_keep {
            let ob = offset(&keep, &keep_dims, b);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dim_traced {
                let ot = offset(&traced, &traced_dims, t);
                acc += rho.matrix()[(oa + ot, ob + ot)];
            }
            out[(a, b)] = acc;
        }
    }

    let electron_kept = reg.has_electron() && keep.contains(&0);
    let nuclei_kept = keep.len() - usize::from(electron_kept);
    Ok(DensityMatrix::from_parts_unchecked(
        SpinRegister::reduced(electron_kept, nuclei_kept),
        out,
    ))
}
