//! Liouvillian assembly, steady states, time propagation and adjoint rates.
//!
//! Density matrices are vectorized row-major, `vec[i·d + j] = ρ_ij`. When a
//! model has a conserved charge the Liouvillian is assembled only on the
//! pairs `(i, j)` whose charges agree (or agree modulo 2 for a parity
//! symmetry). The steady state of every model here lives in that sector, so
//! the reduced system has the same null vector at a fraction of the size.
//! Assembly verifies that the sector is closed under the Liouvillian and
//! refuses to build otherwise.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{HilbertError, HilbertLayout, OperatorMatrix};
use crate::sparse::CsrMatrix;

/// Tail tolerance on the population of the top two Fock levels.
pub const TAIL_TOL: f64 = 1e-6;
/// Residual bound `‖L(ρ)‖_max` required of a steady state.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Largest Fock truncation the adaptive helper will try.
pub const ADAPTIVE_CAP: usize = 256;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const MIN_EIGEN_TOL: f64 = -1e-8;
const SECTOR_LEAK_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("Hamiltonian is not Hermitian (defect {0:.3e})")]
    NonHermitian(f64),
    #[error("charge vector has length {got}, expected {expected}")]
    ChargeLength { got: usize, expected: usize },
    #[error("symmetry sector is not closed under the Liouvillian (leak {0:.3e})")]
    SectorNotInvariant(f64),
    #[error("sparse LU factorization failed: {0}")]
    Factorization(String),
    #[error("steady-state residual {0:.3e} above tolerance")]
    Residual(f64),
    #[error("state has weight {0:.3e} outside the Liouvillian's symmetry sector")]
    OutsideSector(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("integration unstable: {0}")]
    Unstable(String),
    #[error("invalid time grid: t_final={t_final}, dt={dt}")]
    InvalidTimeGrid { t_final: f64, dt: f64 },
    #[error("truncation still fails at n_max = {n_max} (tail mass {tail_mass:.3e})")]
    TruncationExhausted { n_max: usize, tail_mass: f64 },
}

/// Conserved quantity used to shrink the steady-state problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Symmetry {
    None,
    /// Integer charge per basis state, conserved by `H` and shifted uniformly
    /// by each jump operator.
    U1(Vec<i64>),
    /// Parity per basis state (charge taken modulo 2).
    Parity(Vec<i64>),
}

impl Symmetry {
    fn label(&self, d: usize) -> Result<Option<Vec<i64>>, LindbladError> {
        let (charges, modulus) = match self {
            Symmetry::None => return Ok(None),
            Symmetry::U1(q) => (q, None),
            Symmetry::Parity(q) => (q, Some(2)),
        };
        if charges.len() != d {
            return Err(LindbladError::ChargeLength { got: charges.len(), expected: d });
        }
        Ok(Some(charges.iter().map(|&q| modulus.map_or(q, |m| q.rem_euclid(m))).collect()))
    }
}

/// Index map between the vectorized density matrix and the kept unknowns.
#[derive(Clone, Debug)]
struct Sector {
    d: usize,
    pairs: Vec<(usize, usize)>,
    slot: Vec<usize>,
}

impl Sector {
    const OUTSIDE: usize = usize::MAX;

    fn new(d: usize, labels: Option<&[i64]>) -> Self {
        let mut pairs = Vec::new();
        let mut slot = vec![Self::OUTSIDE; d * d];
        for i in 0..d {
            for j in 0..d {
                if labels.is_none_or(|q| q[i] == q[j]) {
                    slot[i * d + j] = pairs.len();
                    pairs.push((i, j));
                }
            }
        }
        Self { d, pairs, slot }
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let s = self.slot[i * self.d + j];
        (s != Self::OUTSIDE).then_some(s)
    }

    fn gather(&self, rho: &Mat<Complex64>) -> (Vec<Complex64>, f64) {
        let mut outside = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                if self.index(i, j).is_none() {
                    outside = outside.max(rho[(i, j)].norm());
                }
            }
        }
        (self.pairs.iter().map(|&(i, j)| rho[(i, j)]).collect(), outside)
    }

    fn scatter(&self, x: &[Complex64]) -> Mat<Complex64> {
        let mut rho = Mat::<Complex64>::zeros(self.d, self.d);
        for (&(i, j), &v) in self.pairs.iter().zip(x) {
            rho[(i, j)] = v;
        }
        rho
    }
}

/// Vectorized Lindblad generator restricted to a symmetry sector.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    layout: HilbertLayout,
    sector: Sector,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    /// Number of unknowns kept after the symmetry reduction.
    pub fn sector_size(&self) -> usize {
        self.sector.pairs.len()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Applies the generator to a matrix supported in the sector.
    pub fn apply(&self, rho: &Mat<Complex64>) -> Result<Mat<Complex64>, LindbladError> {
        let (x, outside) = self.sector.gather(rho);
        if outside > SECTOR_LEAK_TOL {
            return Err(LindbladError::OutsideSector(outside));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.matrix.mul_vec(&x, &mut y);
        Ok(self.sector.scatter(&y))
    }
}

/// Builds `L(ρ) = −i[H,ρ] + Σ (LρL† − ½{L†L, ρ})` on the full space.
pub fn build_liouvillian(h: &OperatorMatrix, jumps: &[OperatorMatrix]) -> Result<Liouvillian, LindbladError> {
    build_liouvillian_with_symmetry(h, jumps, &Symmetry::None)
}

/// Builds the Liouvillian restricted to the charge-diagonal sector of `symmetry`.
pub fn build_liouvillian_with_symmetry(
    h: &OperatorMatrix,
    jumps: &[OperatorMatrix],
    symmetry: &Symmetry,
) -> Result<Liouvillian, LindbladError> {
    let layout = h.layout().clone();
    for l in jumps {
        if l.layout() != &layout {
            return Err(HilbertError::LayoutMismatch(layout.factors().to_vec(), l.layout().factors().to_vec()).into());
        }
    }
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.max_abs().max(1.0) {
        return Err(LindbladError::NonHermitian(defect));
    }
    let d = layout.total_dim();
    let labels = symmetry.label(d)?;
    let sector = Sector::new(d, labels.as_deref());

    // −i[H,ρ] − ½{K,ρ} = Gρ + ρG† with G = −iH − K/2 and K = Σ L†L.
    let h_csr = h.to_csr();
    let mut k = CsrMatrix::zeros(d, d);
    let jump_csr: Vec<CsrMatrix> = jumps.iter().map(|l| l.to_csr()).collect();
    for l in &jump_csr {
        k = k.add(&l.adjoint().matmul(l));
    }
    let g = h_csr.scale(Complex64::new(0.0, -1.0)).add(&k.scale(Complex64::new(-0.5, 0.0)));
    let g_cols = g.transpose();
    let jump_cols: Vec<CsrMatrix> = jump_csr.iter().map(CsrMatrix::transpose).collect();

    let mut entries = Vec::new();
    let mut column: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut leak = 0.0f64;
    for (col, &(kk, ll)) in sector.pairs.iter().enumerate() {
        column.clear();
        for (i, v) in g_cols.row(kk) {
            column.push((i, ll, v));
        }
        for (j, v) in g_cols.row(ll) {
            column.push((kk, j, v.conj()));
        }
        for lc in &jump_cols {
            for (i, x) in lc.row(kk) {
                for (j, y) in lc.row(ll) {
                    column.push((i, j, x * y.conj()));
                }
            }
        }
        let mut outside: Vec<(usize, usize, Complex64)> = Vec::new();
        for &(i, j, v) in &column {
            match sector.index(i, j) {
                Some(row) => entries.push((row, col, v)),
                None => outside.push((i, j, v)),
            }
        }
        outside.sort_by_key(|&(i, j, _)| (i, j));
        for group in outside.chunk_by(|a, b| (a.0, a.1) == (b.0, b.1)) {
            leak = leak.max(group.iter().map(|e| e.2).sum::<Complex64>().norm());
        }
    }
    if leak > SECTOR_LEAK_TOL {
        return Err(LindbladError::SectorNotInvariant(leak));
    }
    let m = sector.pairs.len();
    Ok(Liouvillian { layout, sector, matrix: CsrMatrix::from_triplets(m, m, entries) })
}

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    data: Mat<Complex64>,
}

impl DensityMatrix {
    /// Validates the state invariants (Hermiticity, trace, spectrum).
    pub fn new(layout: HilbertLayout, data: Mat<Complex64>) -> Result<Self, LindbladError> {
        let d = layout.total_dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(LindbladError::InvalidState(format!("shape {}x{} for dimension {d}", data.nrows(), data.ncols())));
        }
        let herm = hermiticity_defect(&data);
        if herm > HERMITIAN_TOL {
            return Err(LindbladError::InvalidState(format!("Hermiticity defect {herm:.3e}")));
        }
        let tr = trace(&data);
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(LindbladError::InvalidState(format!("trace {tr}")));
        }
        let min_eig = min_eigenvalue(&data);
        if min_eig < MIN_EIGEN_TOL {
            return Err(LindbladError::InvalidState(format!("minimum eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { layout, data })
    }

    /// Pure state `|ψ⟩⟨ψ|` with `ψ` normalized on the way in.
    pub fn from_pure(layout: HilbertLayout, psi: &[Complex64]) -> Result<Self, LindbladError> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let d = psi.len();
        let data = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(layout, data)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += self.data[(i, j)].norm_sqr();
            }
        }
        s
    }

    /// `Tr(ρ O)`.
    pub fn expect(&self, op: &OperatorMatrix) -> Result<Complex64, LindbladError> {
        if op.layout() != &self.layout {
            return Err(HilbertError::LayoutMismatch(self.layout.factors().to_vec(), op.layout().factors().to_vec()).into());
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, j, v) in op.to_csr().triplets() {
            acc += v * self.data[(j, i)];
        }
        Ok(acc)
    }

    /// Half the trace norm of `self − other`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64, LindbladError> {
        if other.layout != self.layout {
            return Err(HilbertError::LayoutMismatch(self.layout.factors().to_vec(), other.layout.factors().to_vec()).into());
        }
        let diff = &self.data - &other.data;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
    }
}

pub(crate) fn trace(m: &Mat<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub(crate) fn hermiticity_defect(m: &Mat<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Vec<f64> {
    let sym = Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let ev = sym.self_adjoint_eigenvalues(Side::Lower).expect("self-adjoint eigensolver converges");
    let mut out: Vec<f64> = ev.into_iter().collect();
    out.sort_by(f64::total_cmp);
    out
}

fn min_eigenvalue(m: &Mat<Complex64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Steady state together with derived observables and truncation diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub rho: DensityMatrix,
    pub nbar: f64,
    /// `None` when the occupation is too small for the ratio to be defined.
    pub g2: Option<f64>,
    pub tail_mass: f64,
    pub truncation_ok: bool,
    pub residual: f64,
}

impl SteadyStateReport {
    pub fn n_max(&self) -> usize {
        self.rho.layout().motional_dim()
    }
}

/// Solves `L(ρ) = 0` with unit trace.
///
/// One row of the linear system is replaced by the trace functional; the
/// solution is then improved by one step of iterative refinement.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateReport, LindbladError> {
    let m = l.sector.pairs.len();
    let d = l.sector.d;
    let anchor = l.sector.index(0, 0).expect("diagonal pairs always belong to the sector");
    let diag: Vec<usize> = (0..d).map(|i| l.sector.index(i, i).expect("diagonal pair")).collect();

    let mut trips = Vec::with_capacity(l.matrix.nnz() + d);
    for (i, j, v) in l.matrix.triplets() {
        if i != anchor {
            trips.push(Triplet::new(i, j, v));
        }
    }
    for &k in &diag {
        trips.push(Triplet::new(anchor, k, Complex64::new(1.0, 0.0)));
    }
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(m, m, &trips)
        .map_err(|e| LindbladError::Factorization(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| LindbladError::Factorization(format!("{e:?}")))?;

    let mut b = Mat::<Complex64>::zeros(m, 1);
    b[(anchor, 0)] = Complex64::new(1.0, 0.0);
    let mut x = b.clone();
    lu.solve_in_place(x.as_mut());

    // One refinement step against the exact system.
    let xs: Vec<Complex64> = (0..m).map(|i| x[(i, 0)]).collect();
    let mut ax = vec![Complex64::new(0.0, 0.0); m];
    l.matrix.mul_vec(&xs, &mut ax);
    ax[anchor] = diag.iter().map(|&k| xs[k]).sum();
    let mut r = Mat::from_fn(m, 1, |i, _| b[(i, 0)] - ax[i]);
    lu.solve_in_place(r.as_mut());
    let xs: Vec<Complex64> = (0..m).map(|i| x[(i, 0)] + r[(i, 0)]).collect();

    let raw = l.sector.scatter(&xs);
    let herm = Mat::from_fn(d, d, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)].conj()));
    let tr = trace(&herm).re;
    let rho = Mat::from_fn(d, d, |i, j| herm[(i, j)] / tr);

    let (xv, _) = l.sector.gather(&rho);
    let mut lx = vec![Complex64::new(0.0, 0.0); m];
    l.matrix.mul_vec(&xv, &mut lx);
    let residual = lx.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if residual > RESIDUAL_TOL || !residual.is_finite() {
        return Err(LindbladError::Residual(residual));
    }
    let rho = DensityMatrix::new(l.layout.clone(), rho)?;
    Ok(report_for(rho, residual))
}

fn report_for(rho: DensityMatrix, residual: f64) -> SteadyStateReport {
    let dist = crate::observables::phonon_distribution(&rho);
    let nbar = dist.mean();
    let g2 = crate::observables::g2_from_rho(&rho).ok();
    let tail_mass = dist.tail_mass(2);
    SteadyStateReport { rho, nbar, g2, tail_mass, truncation_ok: tail_mass < TAIL_TOL, residual }
}

/// Doubles the Fock truncation (up to [`ADAPTIVE_CAP`]) until the steady
/// state passes the tail check.
///
/// `build` maps a truncation to its Liouvillian. When even the cap fails, the
/// last report is returned inside the error's diagnostics.
pub fn steady_state_adaptive<F>(mut build: F, n_start: usize) -> Result<SteadyStateReport, LindbladError>
where
    F: FnMut(usize) -> Result<Liouvillian, LindbladError>,
{
    let mut n = n_start.clamp(4, ADAPTIVE_CAP);
    loop {
        let report = steady_state(&build(n)?)?;
        if report.truncation_ok {
            return Ok(report);
        }
        if n >= ADAPTIVE_CAP {
            return Err(LindbladError::TruncationExhausted { n_max: n, tail_mass: report.tail_mass });
        }
        n = (2 * n).min(ADAPTIVE_CAP);
    }
}

/// Integrates `dρ/dt = L(ρ)` with fixed-step RK4.
pub fn propagate(rho0: &DensityMatrix, l: &Liouvillian, t_final: f64, dt: f64) -> Result<DensityMatrix, LindbladError> {
    if !(dt > 0.0) || !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(LindbladError::InvalidTimeGrid { t_final, dt });
    }
    if rho0.layout() != &l.layout {
        return Err(HilbertError::LayoutMismatch(l.layout.factors().to_vec(), rho0.layout().factors().to_vec()).into());
    }
    let (mut x, outside) = l.sector.gather(rho0.matrix());
    if outside > SECTOR_LEAK_TOL {
        return Err(LindbladError::OutsideSector(outside));
    }
    let diag: Vec<usize> = (0..l.sector.d).map(|i| l.sector.index(i, i).expect("diagonal pair")).collect();
    let trace_of = |v: &[Complex64]| diag.iter().map(|&k| v[k]).sum::<Complex64>();
    let tr0 = trace_of(&x);

    let m = x.len();
    let steps = (t_final / dt).ceil() as usize;
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![Complex64::default(); m], vec![Complex64::default(); m], vec![Complex64::default(); m], vec![Complex64::default(); m]);
    let mut tmp = vec![Complex64::default(); m];
    let mut t = 0.0;
    for _ in 0..steps {
        let h = dt.min(t_final - t);
        if h <= 0.0 {
            break;
        }
        l.matrix.mul_vec(&x, &mut k1);
        axpy_into(&x, &k1, 0.5 * h, &mut tmp);
        l.matrix.mul_vec(&tmp, &mut k2);
        axpy_into(&x, &k2, 0.5 * h, &mut tmp);
        l.matrix.mul_vec(&tmp, &mut k3);
        axpy_into(&x, &k3, h, &mut tmp);
        l.matrix.mul_vec(&tmp, &mut k4);
        for i in 0..m {
            x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LindbladError::Unstable(format!("non-finite state at t={t:.4}")));
        }
    }
    let drift = (trace_of(&x) - tr0).norm();
    let allowed = 1e-8 * (t_final / dt).max(1.0);
    if drift > allowed {
        return Err(LindbladError::Unstable(format!("trace drift {drift:.3e} exceeds {allowed:.3e}")));
    }
    let rho = l.sector.scatter(&x);
    let herm = hermiticity_defect(&rho);
    if herm > allowed.max(HERMITIAN_TOL) {
        return Err(LindbladError::Unstable(format!("Hermiticity drift {herm:.3e}")));
    }
    let d = rho.nrows();
    let tr = trace(&rho);
    let cleaned = Mat::from_fn(d, d, |i, j| 0.5 * (rho[(i, j)] + rho[(j, i)].conj()) / tr.re);
    DensityMatrix::new(l.layout.clone(), cleaned)
}

fn axpy_into(x: &[Complex64], k: &[Complex64], h: f64, out: &mut [Complex64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + h * ki;
    }
}

/// Heisenberg-picture rate `d⟨O⟩/dt = i⟨[H,O]⟩ + Σ⟨L†OL − ½{L†L, O}⟩`.
pub fn adjoint_rate(
    o: &OperatorMatrix,
    h: &OperatorMatrix,
    jumps: &[OperatorMatrix],
    rho: &DensityMatrix,
) -> Result<Complex64, LindbladError> {
    let mut generator = h.commutator(o)?.scale(Complex64::new(0.0, 1.0));
    for l in jumps {
        let ld = l.adjoint();
        let sandwich = ld.matmul(o)?.matmul(l)?;
        let k = ld.matmul(l)?;
        let anti = k.matmul(o)?.add(&o.matmul(&k)?)?;
        generator = generator.add(&sandwich.sub(&anti.scale_real(0.5))?)?;
    }
    rho.expect(&generator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_destroy, identity, tensor, transition};

    #[test]
    fn single_phonon_decay_matrix_element() {
        let n = 4;
        let gamma: f64 = 0.7;
        let a = fock_destroy(n).unwrap();
        let h = OperatorMatrix::zeros(a.layout().clone());
        let l = build_liouvillian(&h, &[a.scale_real(gamma.sqrt())]).unwrap();
        let mut one = Mat::<Complex64>::zeros(n, n);
        one[(1, 1)] = Complex64::new(1.0, 0.0);
        let out = l.apply(&one).unwrap();
        assert!((out[(0, 0)].re - gamma).abs() < 1e-14);
        assert!((out[(1, 1)].re + gamma).abs() < 1e-14);
        for i in 0..n {
            for j in 0..n {
                if (i, j) != (0, 0) && (i, j) != (1, 1) {
                    assert!(out[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pure_damping_relaxes_to_vacuum() {
        let a = fock_destroy(6).unwrap();
        let h = OperatorMatrix::zeros(a.layout().clone());
        let rep = steady_state(&build_liouvillian(&h, &[a.scale_real(0.5)]).unwrap()).unwrap();
        assert!(rep.nbar.abs() < 1e-12);
        assert!(rep.g2.is_none());
        assert!(rep.truncation_ok);
        assert!(rep.residual < RESIDUAL_TOL);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let a = fock_destroy(3).unwrap();
        assert!(matches!(build_liouvillian(&a, &[]), Err(LindbladError::NonHermitian(_))));
    }

    #[test]
    fn broken_symmetry_is_detected() {
        // σx breaks the spin charge, so the U(1) sector is not invariant.
        let sx = transition(2, 1, 0).unwrap().add(&transition(2, 0, 1).unwrap()).unwrap();
        let h = tensor(&[&sx, &identity(3).unwrap()]).unwrap();
        let charges: Vec<i64> = (0..6).map(|k| (k / 3) as i64).collect();
        let err = build_liouvillian_with_symmetry(&h, &[], &Symmetry::U1(charges)).unwrap_err();
        assert!(matches!(err, LindbladError::SectorNotInvariant(_)));
    }
}
