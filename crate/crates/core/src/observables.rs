//! Observables of density matrices: occupation statistics, g²(0), Fano
//! factor and Wigner functions.

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{HilbertError, HilbertLayout};
use crate::lindblad::{DensityMatrix, LindbladError};
use crate::quantum_stats::{PhononDistribution, StatsError};

/// Boundary-to-peak ratio above which a Wigner window is reported as too small.
pub const WIGNER_BOUNDARY_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ObservablesError {
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid Wigner grid: {0}")]
    InvalidGrid(String),
    #[error("Wigner window too small: boundary value is {0:.3e} of the peak")]
    WindowTooSmall(f64),
}

/// Traces out every internal factor, leaving the motional state.
pub fn reduced_motional_state(rho: &DensityMatrix) -> DensityMatrix {
    let layout = rho.layout();
    let n = layout.motional_dim();
    let k = layout.internal_dim();
    if k == 1 {
        return rho.clone();
    }
    let m = rho.matrix();
    let reduced = Mat::from_fn(n, n, |i, j| (0..k).map(|s| m[(s * n + i, s * n + j)]).sum::<Complex64>());
    let motion = HilbertLayout::new(vec![n]).expect("motional factor has dimension at least 2");
    DensityMatrix::new(motion, reduced).expect("partial trace preserves the density-matrix invariants")
}

/// Diagonal of the reduced motional state.
///
/// Validated states may carry negative rounding noise on the diagonal, which
/// is clamped to zero before normalizing.
pub fn phonon_distribution(rho: &DensityMatrix) -> PhononDistribution<f64> {
    let layout = rho.layout();
    let n = layout.motional_dim();
    let k = layout.internal_dim();
    let m = rho.matrix();
    let p: Vec<f64> = (0..n).map(|i| (0..k).map(|s| m[(s * n + i, s * n + i)].re).sum::<f64>().max(0.0)).collect();
    PhononDistribution::from_weights(p).expect("diagonal of a density matrix is a distribution")
}

/// `Tr(ρ a†a)`.
pub fn mean_n(rho: &DensityMatrix) -> f64 {
    phonon_distribution(rho).mean()
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²`.
pub fn g2_from_rho(rho: &DensityMatrix) -> Result<f64, StatsError> {
    phonon_distribution(rho).g2()
}

/// `Var(n) / n̄`.
pub fn fano(p: &PhononDistribution<f64>) -> Result<f64, StatsError> {
    p.fano()
}

/// Rectangular window in the complex α plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Points per axis.
    pub resolution: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, resolution: usize) -> Self {
        Self { re_min: -half_width, re_max: half_width, im_min: -half_width, im_max: half_width, resolution }
    }

    fn validate(&self) -> Result<(), ObservablesError> {
        let ok = self.resolution >= 2
            && self.re_min.is_finite()
            && self.re_max.is_finite()
            && self.im_min.is_finite()
            && self.im_max.is_finite()
            && self.re_max > self.re_min
            && self.im_max > self.im_min;
        if ok {
            Ok(())
        } else {
            Err(ObservablesError::InvalidGrid(format!("{self:?}")))
        }
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }
}

/// Wigner function sampled on a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub spec: GridSpec,
    /// `values[i][j]` is `W(re[i] + i·im[j])`.
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn re_axis(&self) -> Vec<f64> {
        GridSpec::axis(self.spec.re_min, self.spec.re_max, self.spec.resolution)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        GridSpec::axis(self.spec.im_min, self.spec.im_max, self.spec.resolution)
    }

    fn cell_area(&self) -> f64 {
        let n = (self.spec.resolution - 1) as f64;
        (self.spec.re_max - self.spec.re_min) / n * (self.spec.im_max - self.spec.im_min) / n
    }

    /// Riemann-sum integral of `W` over the window.
    pub fn integral(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.cell_area()
    }

    /// Largest `|W|` on the window edge relative to the largest `|W|` inside.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.spec.resolution;
        let peak = self.values.iter().flatten().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut edge = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    edge = edge.max(self.values[i][j].abs());
                }
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    /// Fails when the state visibly extends past the window.
    pub fn check_contained(&self) -> Result<(), ObservablesError> {
        let ratio = self.boundary_ratio();
        if ratio > WIGNER_BOUNDARY_TOL {
            Err(ObservablesError::WindowTooSmall(ratio))
        } else {
            Ok(())
        }
    }

    /// Point of maximal `W`.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let (re, im) = (self.re_axis(), self.im_axis());
        let mut best = (re[0], im[0], f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w > best.2 {
                    best = (re[i], im[j], w);
                }
            }
        }
        best
    }

    /// Variances of `Re α` and `Im α` under the (quasi-)distribution `W`.
    pub fn marginal_variances(&self) -> (f64, f64) {
        let (re, im) = (self.re_axis(), self.im_axis());
        let (mut w0, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                w0 += w;
                sx += w * re[i];
                sy += w * im[j];
                sxx += w * re[i] * re[i];
                syy += w * im[j] * im[j];
            }
        }
        let (mx, my) = (sx / w0, sy / w0);
        (sxx / w0 - mx * mx, syy / w0 - my * my)
    }
}

/// Wigner function `W(α) = (2/π) Tr[ρ D(α) Π D(α)†]` of the motional state.
///
/// Spin factors are traced out first. Each point sums
/// `ρ_{m,m+k} ⟨m+k|D Π D†|m⟩` band by band, with the generalized Laguerre
/// polynomials `L_m^k(4|α|²)` generated by their three-term recurrence in `m`.
/// The recurrence runs on normalized values with a separate log scale, so
/// points far outside the support of `ρ` neither overflow nor lose accuracy.
pub fn wigner(rho: &DensityMatrix, spec: GridSpec) -> Result<WignerGrid, ObservablesError> {
    spec.validate()?;
    let motion = reduced_motional_state(rho);
    let m = motion.matrix();
    let re = GridSpec::axis(spec.re_min, spec.re_max, spec.resolution);
    let im = GridSpec::axis(spec.im_min, spec.im_max, spec.resolution);
    let values = re.iter().map(|&x| im.iter().map(|&y| wigner_point(m, Complex64::new(x, y))).collect()).collect();
    Ok(WignerGrid { spec, values })
}

/// Wigner function at a single point.
pub fn wigner_at(rho: &DensityMatrix, alpha: Complex64) -> f64 {
    let motion = reduced_motional_state(rho);
    wigner_point(motion.matrix(), alpha)
}

/// Magnitude above which the Laguerre recurrence is rescaled.
const RESCALE_AT: f64 = 1e150;

fn wigner_point(rho: &Mat<Complex64>, alpha: Complex64) -> f64 {
    let d = rho.nrows();
    let r = alpha.norm();
    let x = 4.0 * r * r;
    let unit = if r > 0.0 { alpha / r } else { Complex64::new(1.0, 0.0) };
    let mut acc = 0.0;
    let mut ln_fact_k = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..d {
        if k > 0 {
            if r == 0.0 {
                break;
            }
            ln_fact_k += (k as f64).ln();
            phase *= unit;
        }
        // ln of e^{-x/2} (2|α|)^k / sqrt(k!), the m = 0 prefactor of band k.
        let ln_pref = -0.5 * x + if k > 0 { k as f64 * (2.0 * r).ln() } else { 0.0 } - 0.5 * ln_fact_k;
        // g_m = sqrt(m! k! / (m+k)!) L_m^k(x), stored as g · e^{scale}.
        let (mut prev, mut cur, mut scale) = (0.0f64, 1.0f64, 0.0f64);
        let kf = k as f64;
        for m in 0..d - k {
            if cur != 0.0 {
                let sign = if (m % 2 == 0) == (cur > 0.0) { 1.0 } else { -1.0 };
                let term = sign * (ln_pref + scale + cur.abs().ln()).exp();
                acc += if k == 0 { rho[(m, m)].re * term } else { 2.0 * (rho[(m, m + k)] * phase).re * term };
            }
            let mf = m as f64;
            let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf * (mf + kf)).sqrt() * prev) / ((mf + 1.0) * (mf + kf + 1.0)).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_AT {
                prev /= RESCALE_AT;
                cur /= RESCALE_AT;
                scale += RESCALE_AT.ln();
            }
        }
    }
    2.0 / std::f64::consts::PI * acc
}

/// Coherent state `|α⟩` truncated to `n_max` levels and renormalized.
pub fn coherent_state(alpha: Complex64, n_max: usize) -> Result<DensityMatrix, ObservablesError> {
    let mut psi = Vec::with_capacity(n_max);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..n_max {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        psi.push(c);
    }
    Ok(DensityMatrix::from_pure(HilbertLayout::new(vec![n_max])?, &psi)?)
}

/// Thermal state of mean occupation `nbar` truncated to `n_max` levels.
pub fn thermal_state(nbar: f64, n_max: usize) -> Result<DensityMatrix, ObservablesError> {
    let p = PhononDistribution::<f64>::thermal(nbar, n_max)?;
    diagonal_state(&p)
}

/// Fock state `|n⟩` on `n_max` levels.
pub fn fock_state(n: usize, n_max: usize) -> Result<DensityMatrix, ObservablesError> {
    diagonal_state(&PhononDistribution::<f64>::fock(n, n_max)?)
}

/// Diagonal motional state with the given populations.
pub fn diagonal_state(p: &PhononDistribution<f64>) -> Result<DensityMatrix, ObservablesError> {
    let d = p.len();
    let probs = p.probabilities();
    let m = Mat::from_fn(d, d, |i, j| if i == j { Complex64::new(probs[i], 0.0) } else { Complex64::default() });
    Ok(DensityMatrix::new(HilbertLayout::new(vec![d])?, m)?)
}
