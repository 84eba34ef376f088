//! Recurrence-based phonon distributions and second-order coherence.

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::models::ModelParams;
use crate::scalar::{from_usize, lit, rel_close, Real};
use crate::specfun::{hyp2f1, hyp_pfq, SpecFunError};

/// Normalization tolerance of a [`PhononDistribution`].
pub const NORM_TOL: f64 = 1e-10;
/// Entries above `-NEG_TOL` are treated as rounding noise and clamped to zero.
const NEG_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("probability vector is empty")]
    Empty,
    #[error("probability {value:e} at level {level} is negative")]
    Negative { level: usize, value: f64 },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("mean occupation {0:e} is too small for the ratio to be defined")]
    Undefined(f64),
    #[error("distribution is not normalizable (heating regime): {0}")]
    NonNormalizable(String),
    #[error("tail mass {tail:e} still above tolerance at {levels} Fock levels")]
    TruncationFailure { levels: usize, tail: f64 },
    #[error("requires gamma_h = gamma_c, got {gamma_h} and {gamma_c}")]
    GammaMismatch { gamma_h: f64, gamma_c: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("level system is singular (pivot ratio {0:e})")]
    Singular(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Normalized occupation probabilities `p(0..N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhononDistribution<T: Real = f64> {
    p: Vec<T>,
}

impl<T: Real> PhononDistribution<T> {
    /// Validates nonnegativity and unit normalization.
    pub fn new(mut p: Vec<T>) -> Result<Self, StatsError> {
        if p.is_empty() {
            return Err(StatsError::Empty);
        }
        for (level, v) in p.iter_mut().enumerate() {
            if *v < T::zero() {
                if *v < -lit::<T>(NEG_TOL) {
                    return Err(StatsError::Negative { level, value: v.to_f64().unwrap_or(f64::NAN) });
                }
                *v = T::zero();
            }
        }
        let total: T = p.iter().copied().sum();
        let tol = lit::<T>(NORM_TOL).max(lit::<T>(64.0) * T::epsilon());
        if (total - T::one()).abs() > tol {
            return Err(StatsError::NotNormalized(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { p })
    }

    /// Scales nonnegative weights to unit sum.
    pub fn from_weights(w: Vec<T>) -> Result<Self, StatsError> {
        let total: T = w.iter().copied().sum();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(StatsError::NotNormalized(total.to_f64().unwrap_or(f64::NAN)));
        }
        Self::new(w.into_iter().map(|x| x / total).collect())
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    /// Number of Fock levels represented.
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn mean(&self) -> T {
        self.p.iter().enumerate().map(|(n, &p)| from_usize::<T>(n) * p).sum()
    }

    /// `⟨n(n−1)⟩`.
    pub fn factorial_moment2(&self) -> T {
        self.p.iter().enumerate().skip(2).map(|(n, &p)| from_usize::<T>(n * (n - 1)) * p).sum()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.p.iter().enumerate().map(|(n, &p)| (from_usize::<T>(n) - m).powi(2) * p).sum()
    }

    /// Population of the top `levels` Fock states.
    pub fn tail_mass(&self, levels: usize) -> T {
        self.p.iter().rev().take(levels).copied().sum()
    }

    /// `½ Σ |p(n) − q(n)|`, padding the shorter vector with zeros.
    pub fn total_variation(&self, other: &Self) -> T {
        let len = self.len().max(other.len());
        let at = |v: &[T], n: usize| v.get(n).copied().unwrap_or_else(T::zero);
        lit::<T>(0.5) * (0..len).map(|n| (at(&self.p, n) - at(&other.p, n)).abs()).sum::<T>()
    }

    /// `g²(0) = ⟨n(n−1)⟩ / ⟨n⟩²`.
    pub fn g2(&self) -> Result<T, StatsError> {
        let m = self.mean();
        if m < lit(1e-12) {
            return Err(StatsError::Undefined(m.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.factorial_moment2() / (m * m))
    }

    /// `Var(n) / ⟨n⟩`.
    pub fn fano(&self) -> Result<T, StatsError> {
        let m = self.mean();
        if m < lit(1e-12) {
            return Err(StatsError::Undefined(m.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.variance() / m)
    }

    /// Poisson distribution of the given mean on `len` levels, renormalized.
    pub fn poisson(mean: T, len: usize) -> Result<Self, StatsError> {
        let mut w = Vec::with_capacity(len);
        let mut term = (-mean).exp();
        for n in 0..len {
            if n > 0 {
                term = term * mean / from_usize(n);
            }
            w.push(term);
        }
        Self::from_weights(w)
    }

    /// Thermal (geometric) distribution of the given mean on `len` levels, renormalized.
    pub fn thermal(mean: T, len: usize) -> Result<Self, StatsError> {
        let q = mean / (T::one() + mean);
        let mut w = Vec::with_capacity(len);
        let mut term = T::one();
        for _ in 0..len {
            w.push(term);
            term = term * q;
        }
        Self::from_weights(w)
    }

    /// Fock state `|n⟩` on `len` levels.
    pub fn fock(n: usize, len: usize) -> Result<Self, StatsError> {
        if n >= len {
            return Err(StatsError::Empty);
        }
        let mut p = vec![T::zero(); len];
        p[n] = T::one();
        Self::new(p)
    }
}

/// Ratio `Σ n(n−1)p(n) / (Σ n p(n))²`.
pub fn g2_from_distribution<T: Real>(p: &PhononDistribution<T>) -> Result<T, StatsError> {
    p.g2()
}


/// Tail mass allowed on the top two levels of a recurrence distribution.
pub const RECURRENCE_TAIL_TOL: f64 = 1e-15;
/// Consecutive levels with a nondecreasing ratio `≥ 1` that prove divergence.
pub const DIVERGENCE_RUN: usize = 50;
/// Level at which the general single-ion ratio is probed for its limit.
const ASYMPTOTIC_LEVEL: usize = 10_000_000;
/// Largest number of Fock levels a recurrence distribution may be extended to.
pub const MAX_RECURRENCE_LEVELS: usize = 1 << 20;

/// One sample of a detailed-balance recurrence `p(n)·loss(n) = p(n−1)·gain(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecurrenceRates<T> {
    pub gain: T,
    pub loss: T,
}

/// Direction of an assumption bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bound {
    AtLeast,
    AtMost,
}

/// One regime assumption behind an analytic result, with its current value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assumption {
    pub name: &'static str,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
}

impl Assumption {
    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, bound: Bound::AtLeast, limit }
    }

    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, bound: Bound::AtMost, limit }
    }

    pub fn satisfied(&self) -> bool {
        match self.bound {
            Bound::AtLeast => self.value >= self.limit,
            Bound::AtMost => self.value <= self.limit,
        }
    }
}

/// Regime assumptions attached to an analytic result.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Validity {
    pub assumptions: Vec<Assumption>,
}

impl Validity {
    pub fn all_satisfied(&self) -> bool {
        self.assumptions.iter().all(Assumption::satisfied)
    }

    /// Names of the assumptions that do not hold.
    pub fn violations(&self) -> Vec<&'static str> {
        self.assumptions.iter().filter(|a| !a.satisfied()).map(|a| a.name).collect()
    }
}

/// Analytic value with the regime assumptions it was derived under.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotated<V> {
    pub value: V,
    pub validity: Validity,
}

/// Ratio that counts as "much larger" for the two-ion validity domain.
const DOMAIN_RATIO: f64 = 4.0;
/// Ratio that counts as "much larger" for the single-ion limit formulas.
const LIMIT_RATIO: f64 = 30.0;

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn two_ion_validity<T: Real>(p: &ModelParams<T>) -> Validity {
    Validity {
        assumptions: vec![
            Assumption::at_least("g_h/g_c", f(p.g_h / p.g_c), DOMAIN_RATIO),
            Assumption::at_least("gamma_c/gamma_h", f(p.gamma_c / p.gamma_h), DOMAIN_RATIO),
        ],
    }
}

/// Builds a normalized distribution from a detailed-balance recurrence.
///
/// Weights are accumulated in the log domain. The support is extended by
/// doubling (starting from `n_min` levels) until the top two levels hold
/// less than [`RECURRENCE_TAIL_TOL`]. A ratio `gain/loss ≥ 1` that keeps
/// growing for [`DIVERGENCE_RUN`] levels, or a nonpositive loss with
/// positive gain, is reported as non-normalizable.
pub fn distribution_from_recurrence<T, F>(mut rates: F, n_min: usize) -> Result<PhononDistribution<T>, StatsError>
where
    T: Real,
    F: FnMut(usize) -> Result<RecurrenceRates<T>, StatsError>,
{
    let mut log_w: Vec<T> = vec![T::zero()];
    let mut target = n_min.max(4);
    let mut run = 0usize;
    let mut prev_ratio = T::zero();
    let mut terminated = false;
    loop {
        while !terminated && log_w.len() < target {
            let n = log_w.len();
            let r = rates(n)?;
            if r.gain == T::zero() {
                terminated = true;
                break;
            }
            if !(r.loss > T::zero()) || !(r.gain > T::zero()) {
                return Err(StatsError::NonNormalizable(format!(
                    "rates at level {n}: gain {}, loss {}",
                    f(r.gain),
                    f(r.loss)
                )));
            }
            let ratio = r.gain / r.loss;
            run = if ratio >= T::one() && ratio >= prev_ratio { run + 1 } else { 0 };
            if run >= DIVERGENCE_RUN {
                return Err(StatsError::NonNormalizable(format!(
                    "gain/loss ratio {} >= 1 and growing for {DIVERGENCE_RUN} levels up to n = {n}",
                    f(ratio)
                )));
            }
            prev_ratio = ratio;
            let last = *log_w.last().expect("weights start nonempty");
            log_w.push(last + ratio.ln());
        }
        let max = log_w.iter().copied().fold(T::neg_infinity(), T::max);
        let w: Vec<T> = log_w.iter().map(|&l| (l - max).exp()).collect();
        let total: T = w.iter().copied().sum();
        let len = w.len();
        let tail = w[len.saturating_sub(2)..].iter().copied().sum::<T>() / total;
        if terminated {
            let mut w = w;
            w.resize(len.max(n_min), T::zero());
            return PhononDistribution::from_weights(w);
        }
        if tail < lit(RECURRENCE_TAIL_TOL) {
            return PhononDistribution::from_weights(w);
        }
        if target >= MAX_RECURRENCE_LEVELS {
            return Err(StatsError::TruncationFailure { levels: len, tail: f(tail) });
        }
        target = (2 * target).min(MAX_RECURRENCE_LEVELS);
    }
}

/// The two bracketed factors of the two-ion recurrence,
/// `p(n)·f₂(n) = p(n−1)·f₁(n)`:
///
/// `f₁(n) = 4κ_h n/(1 + 8(g_h/γ_h)² n) · (1 − 4g_c² n/(γ_c² + 8g_c² n))`,
/// `f₂(n) = 4g_c² n/(γ_c² + 8g_c² n) · (γ_c − 4κ_h(n+1)/(1 + 8(g_h/γ_h)²(n+1)))`.
pub fn two_ion_rates<T: Real>(n: usize, p: &ModelParams<T>) -> RecurrenceRates<T> {
    let nf = from_usize::<T>(n);
    let four = lit::<T>(4.0);
    let eight = lit::<T>(8.0);
    let h = (p.g_h / p.gamma_h).powi(2);
    let kh = p.kappa_h();
    let gc2 = p.g_c * p.g_c;
    let cool = four * gc2 * nf / (p.gamma_c * p.gamma_c + eight * gc2 * nf);
    let heat = |m: T| four * kh * m / (T::one() + eight * h * m);
    RecurrenceRates { gain: heat(nf) * (T::one() - cool), loss: cool * (p.gamma_c - heat(nf + T::one())) }
}

/// Two-ion steady-state distribution `p(n) = p(0) Π f₁(k)/f₂(k)`.
pub fn pn_two_ion<T: Real>(p: &ModelParams<T>, n_max: usize) -> Result<Annotated<PhononDistribution<T>>, StatsError> {
    if !(p.g_c > T::zero()) || !(p.gamma_c > T::zero()) || !(p.gamma_h > T::zero()) {
        return Err(StatsError::InvalidParams("requires g_c > 0 and positive decay rates".into()));
    }
    if p.gamma_h >= p.gamma_c {
        return Err(StatsError::NonNormalizable(format!(
            "gain/loss ratio tends to gamma_h/(2 gamma_c - gamma_h) >= 1 for gamma_h = {} >= gamma_c = {}",
            f(p.gamma_h),
            f(p.gamma_c)
        )));
    }
    let dist = distribution_from_recurrence(|n| Ok(two_ion_rates(n, p)), n_max)?;
    Ok(Annotated { value: dist, validity: two_ion_validity(p) })
}

/// Lowest-order result
/// `g² = 2 − 8(2g_h²/γ_h² − g_c²/γ_c²) / ((1 + 4g_c²/γ_c²)(1 + 16g_h²/γ_h²))`.
pub fn g2_lowest_order<T: Real>(p: &ModelParams<T>) -> Annotated<T> {
    let h = (p.g_h / p.gamma_h).powi(2);
    let c = (p.g_c / p.gamma_c).powi(2);
    let value = lit::<T>(2.0)
        - lit::<T>(8.0) * (lit::<T>(2.0) * h - c) / ((T::one() + lit::<T>(4.0) * c) * (T::one() + lit::<T>(16.0) * h));
    let validity = Validity {
        assumptions: vec![Assumption::at_least("gamma_c/gamma_h", f(p.gamma_c / p.gamma_h), DOMAIN_RATIO)],
    };
    Annotated { value, validity }
}

/// Heavily damped form `g² ≈ (1 + 1/(1 + 16g_h²/γ_h²))(1 + 4g_c²/γ_c²)`.
pub fn g2_overdamped<T: Real>(p: &ModelParams<T>) -> Annotated<T> {
    let h = (p.g_h / p.gamma_h).powi(2);
    let c = (p.g_c / p.gamma_c).powi(2);
    let value = (T::one() + T::one() / (T::one() + lit::<T>(16.0) * h)) * (T::one() + lit::<T>(4.0) * c);
    let validity = Validity {
        assumptions: vec![
            Assumption::at_least("gamma_c/gamma_h", f(p.gamma_c / p.gamma_h), DOMAIN_RATIO),
            Assumption::at_least("gamma_c/g_c", f(p.gamma_c / p.g_c), DOMAIN_RATIO),
        ],
    };
    Annotated { value, validity }
}

/// Full hypergeometric closed form of the two-ion `g²(0)`.
///
/// All four series share the argument `z = γ_h/(2γ_c − γ_h)`, which lies in
/// the unit disk only for `γ_h < γ_c`; outside that range the recurrence
/// itself is not normalizable and an error is returned.
pub fn g2_two_ion_full<T: Real>(p: &ModelParams<T>) -> Result<Annotated<T>, StatsError> {
    if !(p.g_h > T::zero()) || !(p.g_c > T::zero()) {
        return Err(StatsError::InvalidParams("requires g_h > 0 and g_c > 0".into()));
    }
    if p.gamma_h >= p.gamma_c {
        let z = p.gamma_h / (lit::<T>(2.0) * p.gamma_c - p.gamma_h);
        return Err(SpecFunError::OutOfDomain(f(z)).into());
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let eight = lit::<T>(8.0);
    let (yh, yc) = (p.gamma_h, p.gamma_c);
    let h = (p.g_h / yh).powi(2);
    let c = (p.g_c / yc).powi(2);
    let z = yh / (two * yc - yh);
    let b = one + one / (four * c);
    let cc = two + yc * yh * yh / (four * p.g_h * p.g_h * (two * yc - yh));
    let f1 = hyp2f1(one, b, cc, z)?;
    let f2 = hyp2f1(two, b + one, cc + one, z)?;
    let f3 = hyp2f1(lit(3.0), b + one, cc + one, z)?;
    let f4 = hyp_pfq(&[two, two, b + one], &[one, cc + one], z)?;
    let ratio = yh / yc;
    let first = c * (one + eight * h) * (one + eight * (two - ratio) * h) * f1
        + eight * ratio * (one + four * c) * h * h * f2;
    let second = (one - (h / c + eight * h)) * f3 - f2;
    let gh_over = p.g_h / yh;
    let den = (ratio - one)
        * (one + four * c)
        * (gh_over * (one + eight * h) * f2 + eight * gh_over.powi(3) * f4).powi(2);
    Ok(Annotated { value: two * first * second / den, validity: two_ion_validity(p) })
}

fn equal_gamma<T: Real>(p: &ModelParams<T>) -> Result<T, StatsError> {
    if !rel_close(p.gamma_h, p.gamma_c, lit(1e-12)) {
        return Err(StatsError::GammaMismatch { gamma_h: f(p.gamma_h), gamma_c: f(p.gamma_c) });
    }
    Ok(p.gamma_h)
}

/// Single-ion equal-γ distribution from the detailed balance
/// `κ_h n p(n−1)/D(n−1) = κ_c n p(n)/D(n)`, `D(m) = 1 + 8(g_c²/γ²)m + 8(g_h²/γ²)(m+1)`.
pub fn pn_single_equal_gamma<T: Real>(p: &ModelParams<T>, n_max: usize) -> Result<PhononDistribution<T>, StatsError> {
    let gamma = equal_gamma(p)?;
    if p.g_h >= p.g_c {
        return Err(StatsError::NonNormalizable(format!(
            "g_h = {} >= g_c = {} at equal decay rates",
            f(p.g_h),
            f(p.g_c)
        )));
    }
    let c = (p.g_c / gamma).powi(2);
    let h = (p.g_h / gamma).powi(2);
    let d = |m: T| T::one() + lit::<T>(8.0) * (c * m + h * (m + T::one()));
    let (kh, kc) = (p.kappa_h(), p.kappa_c());
    distribution_from_recurrence(
        |n| {
            let nf = from_usize::<T>(n);
            Ok(RecurrenceRates { gain: kh * nf / d(nf - T::one()), loss: kc * nf / d(nf) })
        },
        n_max,
    )
}

/// Exact single-ion `g²(0)` at `γ_h = γ_c = γ`.
pub fn g2_single_equal_gamma<T: Real>(p: &ModelParams<T>) -> Result<T, StatsError> {
    let gamma = equal_gamma(p)?;
    let y2 = gamma * gamma;
    let (gc2, gh2) = (p.g_c * p.g_c, p.g_h * p.g_h);
    let base = y2 * (gc2 - gh2);
    let a = base + lit::<T>(16.0) * gc2 * gh2;
    let b = base + lit::<T>(16.0) * (gc2 * gc2 + lit::<T>(2.0) * gc2 * gh2);
    let d = base + lit::<T>(8.0) * (gc2 * gc2 + lit::<T>(3.0) * gc2 * gh2);
    Ok(lit::<T>(2.0) * a * b / (d * d))
}

/// Limit regimes of the single-ion equal-γ coherence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SingleIonLimit {
    /// `g_c ≪ γ`: thermal value 2.
    OverdampedCooling,
    /// `g_h ≪ γ`: `2(1 + 16g_c²/γ²)/(1 + 8g_c²/γ²)²`.
    OverdampedHeating,
    /// `γ ≪ g_h, g_c`: `8g_h²(g_c² + 2g_h²)/(g_c² + 3g_h²)²`.
    StrongCoupling,
}

/// Limit formulas of the single-ion equal-γ `g²(0)`, using `γ = γ_h`.
pub fn g2_single_limits<T: Real>(p: &ModelParams<T>, which: SingleIonLimit) -> Annotated<T> {
    let gamma = p.gamma_h;
    let (gc2, gh2) = (p.g_c * p.g_c, p.g_h * p.g_h);
    let two = lit::<T>(2.0);
    let mut assumptions = vec![Assumption::at_most(
        "|gamma_h/gamma_c - 1|",
        f((p.gamma_h / p.gamma_c - T::one()).abs()),
        1e-12,
    )];
    let value = match which {
        SingleIonLimit::OverdampedCooling => {
            assumptions.push(Assumption::at_least("gamma/g_c", f(gamma / p.g_c), LIMIT_RATIO));
            two
        }
        SingleIonLimit::OverdampedHeating => {
            assumptions.push(Assumption::at_least("gamma/g_h", f(gamma / p.g_h), LIMIT_RATIO));
            let c = gc2 / (gamma * gamma);
            two * (T::one() + lit::<T>(16.0) * c) / (T::one() + lit::<T>(8.0) * c).powi(2)
        }
        SingleIonLimit::StrongCoupling => {
            assumptions.push(Assumption::at_least("min(g_h, g_c)/gamma", f(p.g_h.min(p.g_c) / gamma), LIMIT_RATIO));
            lit::<T>(8.0) * gh2 * (gc2 + two * gh2) / (gc2 + lit::<T>(3.0) * gh2).powi(2)
        }
    };
    Annotated { value, validity: Validity { assumptions } }
}

/// Transition rates out of Fock level `n` in the single-ion level system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelTransitions<T> {
    /// Rate `n → n+1` per unit `p(n)`.
    pub up: T,
    /// Rate `n → n−1` per unit `p(n)`.
    pub down: T,
}

/// Solves the nine coupled level/coherence equations of the single-ion model
/// at Fock level `n` (with `ρ_nn = 1`) and extracts the phonon transition rates.
///
/// Unknowns, in order: `ρ00;n,n  ρ01  ρ10  ρ11  ρ02  ρ20  ρ22  ρ12  ρ21`,
/// where internal label 1 is the heating partner level and 2 the cooling
/// partner, each with the motional offset of its sideband. The closure
/// `ρ00 + ρ11 + ρ22 = ρ_nn` supplies the inhomogeneity.
pub fn single_ion_level_transitions<T: Real>(n: usize, p: &ModelParams<T>) -> Result<LevelTransitions<T>, StatsError> {
    let i = Complex::new(T::zero(), T::one());
    let zero = Complex::new(T::zero(), T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    let half = lit::<T>(0.5);
    let (yh, yc) = (p.gamma_h, p.gamma_c);
    let sn1 = from_usize::<T>(n + 1).sqrt();
    let sn = from_usize::<T>(n).sqrt();
    let gh = i * p.g_h * sn1;
    let gc = i * p.g_c * sn;
    let mut m = [[zero; 9]; 9];
    let mut b = [zero; 9];
    let both = (yh + yc) * half;
    m[0][2] = -gh;
    m[0][1] = gh;
    m[0][5] = -gc;
    m[0][4] = gc;
    m[0][0] = re(-both);
    b[0] = re(-both);
    m[1][3] = -gh;
    m[1][0] = gh;
    m[1][8] = -gc;
    m[1][1] = re(-yh * half);
    m[2][0] = -gh;
    m[2][3] = gh;
    m[2][7] = gc;
    m[2][2] = re(-yh * half);
    m[3][1] = -gh;
    m[3][2] = gh;
    m[3][3] = re(-yh);
    m[4][7] = -gh;
    m[4][6] = -gc;
    m[4][0] = gc;
    m[4][4] = re(-yc * half);
    m[5][8] = gh;
    m[5][0] = -gc;
    m[5][6] = gc;
    m[5][5] = re(-yc * half);
    m[6][4] = -gc;
    m[6][5] = gc;
    m[6][6] = re(-yc);
    m[7][4] = -gh;
    m[7][2] = gc;
    m[7][7] = re(-both);
    m[8][5] = gh;
    m[8][1] = -gc;
    m[8][8] = re(-both);
    let x = solve_complex(m, b)?;
    Ok(LevelTransitions { up: (gh * (x[2] - x[1])).re, down: (gc * (x[5] - x[4])).re })
}

/// Recurrence sample `gain(n) = up(n−1)`, `loss(n) = down(n)` of the general
/// single-ion model, for `n ≥ 1`.
pub fn single_ion_level_rates<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Annotated<RecurrenceRates<T>>, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidParams("recurrence samples start at n = 1".into()));
    }
    let gain = single_ion_level_transitions(n - 1, p)?.up;
    let loss = single_ion_level_transitions(n, p)?.down;
    Ok(Annotated { value: RecurrenceRates { gain, loss }, validity: single_general_validity(p) })
}

fn single_general_validity<T: Real>(p: &ModelParams<T>) -> Validity {
    let r = f(p.gamma_h.max(p.gamma_c) / p.gamma_h.min(p.gamma_c));
    Validity { assumptions: vec![Assumption::at_most("max/min(gamma_h, gamma_c)", r, 2.0)] }
}

/// General single-ion distribution from per-level linear solves.
pub fn pn_single_general<T: Real>(p: &ModelParams<T>, n_max: usize) -> Result<Annotated<PhononDistribution<T>>, StatsError> {
    if !(p.g_c > T::zero()) {
        return Err(StatsError::InvalidParams("requires g_c > 0".into()));
    }
    let far = ASYMPTOTIC_LEVEL;
    let limit = single_ion_level_transitions(far - 1, p)?.up / single_ion_level_transitions(far, p)?.down;
    if limit > T::one() {
        return Err(StatsError::NonNormalizable(format!(
            "gain/loss ratio {} > 1 at n = {far}",
            f(limit)
        )));
    }
    let mut prev_up = single_ion_level_transitions(0, p)?.up;
    let dist = distribution_from_recurrence(
        |n| {
            let t = single_ion_level_transitions(n, p)?;
            let rates = RecurrenceRates { gain: prev_up, loss: t.down };
            prev_up = t.up;
            Ok(rates)
        },
        n_max,
    )?;
    Ok(Annotated { value: dist, validity: single_general_validity(p) })
}

/// Heating-spin levels and coherences
/// `[ρ00;n,n′  ρ01;n,n′+1  ρ10;n+1,n′  ρ11;n+1,n′+1]` per unit `ρ_nn′`,
/// the solution of `M R = A` with `A = (γ_h ρ_nn′, 0, 0, 0)`.
pub fn two_ion_heating_levels<T: Real>(n: usize, n_prime: usize, p: &ModelParams<T>) -> [Complex<T>; 4] {
    let (g, y) = (p.g_h, p.gamma_h);
    let (nf, mf) = (from_usize::<T>(n), from_usize::<T>(n_prime));
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let g2 = g * g;
    let s = two + nf + mf;
    let den = y.powi(4) + four * g2 * g2 * (nf - mf).powi(2) + four * y * y * g2 * s;
    let scale = y / den;
    let sn = (T::one() + nf).sqrt();
    let sm = (T::one() + mf).sqrt();
    [
        Complex::new((y.powi(3) + two * y * g2 * s) * scale, T::zero()),
        Complex::new(T::zero(), two * g * sm * (y * y + two * g2 * (mf - nf)) * scale),
        Complex::new(T::zero(), -two * g * sn * (y * y + two * g2 * (nf - mf)) * scale),
        Complex::new(four * y * g2 * sn * sm * scale, T::zero()),
    ]
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_complex<T: Real, const N: usize>(
    mut a: [[Complex<T>; N]; N],
    mut b: [Complex<T>; N],
) -> Result<[Complex<T>; N], StatsError> {
    let mut max_pivot = T::zero();
    let mut min_pivot = T::infinity();
    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&r1, &r2| a[r1][col].norm().partial_cmp(&a[r2][col].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty pivot range");
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        let mag = pivot.norm();
        max_pivot = max_pivot.max(mag);
        min_pivot = min_pivot.min(mag);
        if mag == T::zero() {
            return Err(StatsError::Singular(f64::INFINITY));
        }
        for row in (col + 1)..N {
            let factor = a[row][col] / pivot;
            if factor.norm() == T::zero() {
                continue;
            }
            for k in col..N {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            let v = b[col];
            b[row] = b[row] - factor * v;
        }
    }
    if min_pivot <= max_pivot * T::epsilon() * lit(16.0) {
        return Err(StatsError::Singular(f(max_pivot / min_pivot)));
    }
    let mut x = b;
    for row in (0..N).rev() {
        let mut acc = x[row];
        for k in (row + 1)..N {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}
