//! Operators on truncated tensor-product Hilbert spaces.
//!
//! Layouts list subsystem dimensions in tensor order. The bosonic (motional)
//! factor is always the last one; the observables and model builders rely on
//! that convention.

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::sparse::CsrMatrix;

/// Total dimension below which operators are stored densely.
pub const DENSE_LIMIT: usize = 256;

/// Default unitarity tolerance of the padded squeeze operator.
pub const SQUEEZE_UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("Fock truncation must keep at least 2 levels, got {0}")]
    TruncationTooSmall(usize),
    #[error("subsystem dimension must be at least 2, got {0}")]
    FactorTooSmall(usize),
    #[error("level {level} out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },
    #[error("layout mismatch: {0:?} vs {1:?}")]
    LayoutMismatch(Vec<usize>, Vec<usize>),
    #[error("tensor product of an empty operator list")]
    EmptyTensor,
    #[error("matrix exponential did not converge after {0} Taylor terms")]
    ExponentialNotConverged(usize),
    #[error("padded squeeze operator deviates from unitarity by {0:.3e}")]
    UnitarityDefect(f64),
}

/// Ordered list of subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    factors: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(factors: Vec<usize>) -> Result<Self, HilbertError> {
        if factors.is_empty() {
            return Err(HilbertError::EmptyTensor);
        }
        if let Some(&bad) = factors.iter().find(|&&d| d < 2) {
            return Err(HilbertError::FactorTooSmall(bad));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().product()
    }

    /// Dimension of the last (motional) factor.
    pub fn motional_dim(&self) -> usize {
        *self.factors.last().expect("layouts are nonempty")
    }

    /// Product of every factor except the motional one.
    pub fn internal_dim(&self) -> usize {
        self.total_dim() / self.motional_dim()
    }

    fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { factors }
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Mat<Complex64>),
    Sparse(CsrMatrix),
}

/// Complex square matrix tagged with the layout it acts on.
///
/// Storage is dense when the total dimension is below [`DENSE_LIMIT`] and
/// compressed sparse otherwise; every operation re-applies that policy to
/// its result.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    layout: HilbertLayout,
    storage: Storage,
}

impl OperatorMatrix {
    pub fn from_csr(layout: HilbertLayout, m: CsrMatrix) -> Self {
        debug_assert_eq!(m.nrows(), layout.total_dim());
        let storage = if layout.total_dim() < DENSE_LIMIT { Storage::Dense(m.to_dense()) } else { Storage::Sparse(m) };
        Self { layout, storage }
    }

    pub fn from_dense(layout: HilbertLayout, m: Mat<Complex64>) -> Self {
        debug_assert_eq!(m.nrows(), layout.total_dim());
        let storage = if layout.total_dim() < DENSE_LIMIT {
            Storage::Dense(m)
        } else {
            Storage::Sparse(CsrMatrix::from_dense(&m))
        };
        Self { layout, storage }
    }

    /// Builds a single-factor operator from `(row, col, value)` entries.
    pub fn from_triplets(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let layout = HilbertLayout { factors: vec![dim] };
        Self::from_csr(layout, CsrMatrix::from_triplets(dim, dim, entries))
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self::from_csr(layout, CsrMatrix::zeros(d, d))
    }

    pub fn identity_on(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self::from_csr(layout, CsrMatrix::identity(d))
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    fn check_layout(&self, other: &Self) -> Result<(), HilbertError> {
        if self.layout != other.layout {
            return Err(HilbertError::LayoutMismatch(self.layout.factors.clone(), other.layout.factors.clone()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        match &self.storage {
            Storage::Dense(m) => Self::from_dense(self.layout.clone(), m.adjoint().to_owned()),
            Storage::Sparse(m) => Self::from_csr(self.layout.clone(), m.adjoint()),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        match &self.storage {
            Storage::Dense(m) => {
                let scaled = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s);
                Self::from_dense(self.layout.clone(), scaled)
            }
            Storage::Sparse(m) => Self::from_csr(self.layout.clone(), m.scale(s)),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_layout(other)?;
        Ok(match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Self::from_dense(self.layout.clone(), a + b),
            _ => Self::from_csr(self.layout.clone(), self.to_csr().add(&other.to_csr())),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, HilbertError> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_layout(other)?;
        Ok(match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Self::from_dense(self.layout.clone(), a * b),
            _ => Self::from_csr(self.layout.clone(), self.to_csr().matmul(&other.to_csr())),
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let mut best = 0.0f64;
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        best = best.max(m[(i, j)].norm());
                    }
                }
                best
            }
            Storage::Sparse(m) => m.max_abs(),
        }
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, HilbertError> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("adjoint shares the layout")
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Re-tags the operator with a layout of the same total dimension.
    pub fn with_layout(self, layout: HilbertLayout) -> Result<Self, HilbertError> {
        if layout.total_dim() != self.dim() {
            return Err(HilbertError::LayoutMismatch(self.layout.factors, layout.factors));
        }
        Ok(Self { layout, storage: self.storage })
    }

    /// Restricts a single-factor operator to its leading `n × n` block.
    pub fn leading_block(&self, n: usize) -> Result<Self, HilbertError> {
        if n < 2 || n > self.dim() {
            return Err(HilbertError::TruncationTooSmall(n));
        }
        let full = self.to_dense();
        Ok(Self::from_dense(HilbertLayout { factors: vec![n] }, full.submatrix(0, 0, n, n).to_owned()))
    }
}

/// Bosonic annihilation operator on `n_max` Fock levels.
pub fn fock_destroy(n_max: usize) -> Result<OperatorMatrix, HilbertError> {
    if n_max < 2 {
        return Err(HilbertError::TruncationTooSmall(n_max));
    }
    Ok(OperatorMatrix::from_triplets(
        n_max,
        (1..n_max).map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))),
    ))
}

/// Bosonic creation operator on `n_max` Fock levels.
pub fn fock_create(n_max: usize) -> Result<OperatorMatrix, HilbertError> {
    Ok(fock_destroy(n_max)?.adjoint())
}

/// Number operator `a†a`, diagonal with entries `0..n_max`.
pub fn number_op(n_max: usize) -> Result<OperatorMatrix, HilbertError> {
    if n_max < 2 {
        return Err(HilbertError::TruncationTooSmall(n_max));
    }
    Ok(OperatorMatrix::from_triplets(n_max, (1..n_max).map(|n| (n, n, Complex64::new(n as f64, 0.0)))))
}

pub fn identity(dim: usize) -> Result<OperatorMatrix, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::FactorTooSmall(dim));
    }
    Ok(OperatorMatrix::from_triplets(dim, (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0)))))
}

/// The projector-like transition `|to⟩⟨from|` on a `dim`-level system.
pub fn transition(dim: usize, to_level: usize, from_level: usize) -> Result<OperatorMatrix, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::FactorTooSmall(dim));
    }
    for level in [to_level, from_level] {
        if level >= dim {
            return Err(HilbertError::LevelOutOfRange { level, dim });
        }
    }
    Ok(OperatorMatrix::from_triplets(dim, [(to_level, from_level, Complex64::new(1.0, 0.0))]))
}

/// Kronecker product in the given order.
pub fn tensor(factors: &[&OperatorMatrix]) -> Result<OperatorMatrix, HilbertError> {
    let (first, rest) = factors.split_first().ok_or(HilbertError::EmptyTensor)?;
    let mut layout = first.layout.clone();
    let mut acc = first.to_csr();
    for op in rest {
        layout = layout.concat(&op.layout);
        acc = acc.kron(&op.to_csr());
    }
    Ok(OperatorMatrix::from_csr(layout, acc))
}

/// Padding used by [`squeeze_matrix`] when the caller has no better estimate.
pub fn default_squeeze_pad(n_max: usize, r: f64) -> usize {
    let sinh2 = r.sinh().powi(2);
    20usize.max((n_max as f64 * sinh2).ceil() as usize)
}

/// Squeeze operator `S(ξ) = exp((ξ* a² − ξ a†²)/2)` on `dim` Fock levels.
///
/// The result is unitary to rounding on the full `dim`-level space; the
/// unitarity defect is checked against [`SQUEEZE_UNITARITY_TOL`].
pub fn squeeze_padded(xi: Complex64, dim: usize) -> Result<OperatorMatrix, HilbertError> {
    let a = fock_destroy(dim)?.to_dense();
    let a2 = &a * &a;
    let generator = Mat::from_fn(dim, dim, |i, j| 0.5 * (xi.conj() * a2[(i, j)] - xi * a2[(j, i)].conj()));
    let s = expm(&generator)?;
    let defect = unitarity_defect(&s);
    if defect > SQUEEZE_UNITARITY_TOL {
        return Err(HilbertError::UnitarityDefect(defect));
    }
    Ok(OperatorMatrix::from_dense(HilbertLayout { factors: vec![dim] }, s))
}

/// Squeeze operator computed on `n_max + pad` levels and projected onto the
/// leading `n_max` levels.
pub fn squeeze_matrix(xi: Complex64, n_max: usize, pad: usize) -> Result<OperatorMatrix, HilbertError> {
    if n_max < 2 {
        return Err(HilbertError::TruncationTooSmall(n_max));
    }
    squeeze_padded(xi, n_max + pad)?.leading_block(n_max)
}

fn unitarity_defect(s: &Mat<Complex64>) -> f64 {
    let p = s.adjoint() * s;
    let mut worst = 0.0f64;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// Matrix exponential by scaling and squaring around a Taylor series.
fn expm(g: &Mat<Complex64>) -> Result<Mat<Complex64>, HilbertError> {
    const MAX_TERMS: usize = 64;
    let n = g.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| g[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let x = Mat::from_fn(n, n, |i, j| g[(i, j)] * scale);

    let mut result = Mat::<Complex64>::identity(n, n);
    let mut term = Mat::<Complex64>::identity(n, n);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        let next = &term * &x;
        let inv_k = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| next[(i, j)] * inv_k);
        result = &result + &term;
        let term_norm = (0..n).map(|j| (0..n).map(|i| term[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
        if term_norm < 1e-18 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(HilbertError::ExponentialNotConverged(MAX_TERMS));
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn destroy_entries() {
        let a = fock_destroy(2).unwrap();
        assert_eq!(a.get(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(a.get(1, 0), Complex64::new(0.0, 0.0));
        let a3 = fock_destroy(3).unwrap();
        assert!((a3.get(1, 2).re - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(matches!(fock_destroy(1), Err(HilbertError::TruncationTooSmall(1))));
    }

    #[test]
    fn truncated_commutator_is_identity_below_cutoff() {
        let n = 7;
        let a = fock_destroy(n).unwrap();
        let c = a.commutator(&a.adjoint()).unwrap();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((c.get(i, j) - Complex64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn transition_bounds_and_placement() {
        let t = transition(3, 0, 2).unwrap();
        assert_eq!(t.get(0, 2), Complex64::new(1.0, 0.0));
        assert_eq!(t.max_abs(), 1.0);
        assert!(matches!(transition(2, 2, 0), Err(HilbertError::LevelOutOfRange { level: 2, dim: 2 })));
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let id = tensor(&[&identity(2).unwrap(), &identity(3).unwrap()]).unwrap();
        assert_eq!(id.layout().factors(), &[2, 3]);
        assert_eq!(id.max_abs_diff(&identity(6).unwrap().with_layout(id.layout().clone()).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn squeeze_zero_is_identity() {
        let s = squeeze_matrix(Complex64::new(0.0, 0.0), 10, 5).unwrap();
        assert!(s.max_abs_diff(&identity(10).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn storage_policy_switches_at_limit() {
        assert!(identity(DENSE_LIMIT - 1).unwrap().is_dense());
        assert!(!identity(DENSE_LIMIT).unwrap().is_dense());
    }
}
