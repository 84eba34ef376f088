//! Mean-field analytics: steady intensities, effective rates, equations of
//! motion and phase classification.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelParams;
use crate::scalar::{lit, rel_close, Real};

/// Relative tolerance for detecting the boundary manifolds of the phase diagram.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;
/// Relative tolerance below which a closed-form denominator counts as zero.
const SINGULAR_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanFieldError {
    #[error("closed form is singular on the manifold {0}")]
    Singular(&'static str),
    #[error("no stable rate crossing found below I = {0:e}")]
    NoCrossing(f64),
    #[error("integration left the physical region: |<sigma_z>| = {0}")]
    Unphysical(f64),
}

/// Closed-form steady-state intensity, tagged when negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyIntensity<T> {
    pub value: T,
    /// `false` for negative values, which signal a runaway or dark phase
    /// rather than an actual intensity.
    pub physical: bool,
}

impl<T: Real> SteadyIntensity<T> {
    fn new(value: T) -> Self {
        Self { value, physical: value >= T::zero() }
    }
}

/// Mean-field variables `⟨a⟩, ⟨σ+h⟩, ⟨σ+c⟩, ⟨σzh⟩, ⟨σzc⟩, ⟨σ21⟩`.
///
/// `s21` is only used by the single-ion equations and stays zero otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldState<T> {
    pub a: Complex<T>,
    pub sp_h: Complex<T>,
    pub sp_c: Complex<T>,
    pub sz_h: T,
    pub sz_c: T,
    pub s21: Complex<T>,
}

impl<T: Real> MeanFieldState<T> {
    /// Both spins in the ground state with a small motional seed.
    pub fn ground_with_seed(seed: T) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self { a: Complex::new(seed, T::zero()), sp_h: zero, sp_c: zero, sz_h: -T::one(), sz_c: -T::one(), s21: zero }
    }

    /// Intensity `I = ⟨a†⟩⟨a⟩`.
    pub fn intensity(&self) -> T {
        self.a.norm_sqr()
    }

    fn axpy(&self, h: T, d: &Self) -> Self {
        Self {
            a: self.a + d.a * h,
            sp_h: self.sp_h + d.sp_h * h,
            sp_c: self.sp_c + d.sp_c * h,
            sz_h: self.sz_h + d.sz_h * h,
            sz_c: self.sz_c + d.sz_c * h,
            s21: self.s21 + d.s21 * h,
        }
    }
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Right-hand side of the two-ion mean-field equations under the
/// first-order cumulant factorization.
pub fn two_ion_rhs<T: Real>(s: &MeanFieldState<T>, p: &ModelParams<T>) -> MeanFieldState<T> {
    let i = i_unit::<T>();
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (a, ac) = (s.a, s.a.conj());
    let (sph, smh) = (s.sp_h, s.sp_h.conj());
    let (spc, smc) = (s.sp_c, s.sp_c.conj());
    let da = -i * p.g_c * smc - i * p.g_h * sph;
    let dsph = -sph * (p.gamma_h * half) - i * p.g_h * a * s.sz_h;
    let dspc = -spc * (p.gamma_c * half) - i * p.g_c * ac * s.sz_c;
    let dszh = (i * two * p.g_h * (a * smh - ac * sph)).re - p.gamma_h * (s.sz_h + T::one());
    let dszc = (i * two * p.g_c * (ac * smc - a * spc)).re - p.gamma_c * (s.sz_c + T::one());
    MeanFieldState { a: da, sp_h: dsph, sp_c: dspc, sz_h: dszh, sz_c: dszc, s21: Complex::new(T::zero(), T::zero()) }
}

/// Right-hand side of the single-ion mean-field equations, including the
/// `σ21` coherence and the shared-ground-state relaxation terms.
pub fn single_ion_rhs<T: Real>(s: &MeanFieldState<T>, p: &ModelParams<T>) -> MeanFieldState<T> {
    let i = i_unit::<T>();
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (yh, yc) = (p.gamma_h, p.gamma_c);
    let (a, ac) = (s.a, s.a.conj());
    let (sph, smh) = (s.sp_h, s.sp_h.conj());
    let (spc, smc) = (s.sp_c, s.sp_c.conj());
    let (s21, s12) = (s.s21, s.s21.conj());
    let relax_h = s.sz_h + half * (T::one() - s.sz_c);
    let relax_c = s.sz_c + half * (T::one() - s.sz_h);
    let four_thirds = lit::<T>(4.0 / 3.0);
    let two_thirds = lit::<T>(2.0 / 3.0);
    let exch_h = i * p.g_h * (a * smh - ac * sph);
    let exch_c = i * p.g_c * (ac * smc - a * spc);

    let da = -i * p.g_c * smc - i * p.g_h * sph;
    let dsph = -i * p.g_h * a * s.sz_h - i * p.g_c * ac * s21 - sph * (yh * half);
    let dspc = -i * p.g_c * ac * s.sz_c - i * p.g_h * a * s12 - spc * (yc * half);
    let dszh = (exch_h * two + exch_c).re - four_thirds * yh * relax_h - two_thirds * yc * relax_c;
    let dszc = (exch_c * two + exch_h).re - four_thirds * yc * relax_c - two_thirds * yh * relax_h;
    let ds21 = i * p.g_h * smc * a - i * p.g_c * sph * a - s21 * ((yh + yc) * half);
    MeanFieldState { a: da, sp_h: dsph, sp_c: dspc, sz_h: dszh, sz_c: dszc, s21: ds21 }
}

/// Result of a fixed-step mean-field integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldRun<T> {
    pub state: MeanFieldState<T>,
    pub steps: usize,
    /// Largest `|⟨σz⟩|` encountered along the trajectory.
    pub max_abs_sz: T,
}

/// Default step `0.01 / max(γ_h, γ_c, g_h, g_c)`.
pub fn default_step<T: Real>(p: &ModelParams<T>) -> T {
    lit::<T>(0.01) / p.gamma_h.max(p.gamma_c).max(p.g_h).max(p.g_c)
}

/// Default horizon `200 / min(γ_h, γ_c)`.
pub fn default_horizon<T: Real>(p: &ModelParams<T>) -> T {
    lit::<T>(200.0) / p.gamma_h.min(p.gamma_c)
}

/// Fixed-step RK4 integration of `rhs` from `s0` over `[0, t_final]`.
///
/// Fails when a spin inversion leaves `[−1 − 1e−6, 1 + 1e−6]`.
pub fn integrate<T, F>(rhs: F, s0: MeanFieldState<T>, p: &ModelParams<T>, dt: T, t_final: T) -> Result<MeanFieldRun<T>, MeanFieldError>
where
    T: Real,
    F: Fn(&MeanFieldState<T>, &ModelParams<T>) -> MeanFieldState<T>,
{
    let steps = (t_final / dt).ceil().to_usize().unwrap_or(0);
    let half = lit::<T>(0.5);
    let sixth = dt / lit::<T>(6.0);
    let bound = T::one() + lit::<T>(1e-6);
    let mut s = s0;
    let mut max_abs_sz = s.sz_h.abs().max(s.sz_c.abs());
    for _ in 0..steps {
        let k1 = rhs(&s, p);
        let k2 = rhs(&s.axpy(dt * half, &k1), p);
        let k3 = rhs(&s.axpy(dt * half, &k2), p);
        let k4 = rhs(&s.axpy(dt, &k3), p);
        let two = lit::<T>(2.0);
        s = MeanFieldState {
            a: s.a + (k1.a + k2.a * two + k3.a * two + k4.a) * sixth,
            sp_h: s.sp_h + (k1.sp_h + k2.sp_h * two + k3.sp_h * two + k4.sp_h) * sixth,
            sp_c: s.sp_c + (k1.sp_c + k2.sp_c * two + k3.sp_c * two + k4.sp_c) * sixth,
            sz_h: s.sz_h + (k1.sz_h + k2.sz_h * two + k3.sz_h * two + k4.sz_h) * sixth,
            sz_c: s.sz_c + (k1.sz_c + k2.sz_c * two + k3.sz_c * two + k4.sz_c) * sixth,
            s21: s.s21 + (k1.s21 + k2.s21 * two + k3.s21 * two + k4.s21) * sixth,
        };
        let sz = s.sz_h.abs().max(s.sz_c.abs());
        max_abs_sz = max_abs_sz.max(sz);
        if !(sz <= bound) {
            return Err(MeanFieldError::Unphysical(sz.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok(MeanFieldRun { state: s, steps, max_abs_sz })
}

/// `I_ss = γ_h²γ_c²(κ_h − κ_c) / (8 g_h² g_c² (γ_c − γ_h))`.
pub fn iss_two_ion<T: Real>(p: &ModelParams<T>) -> Result<SteadyIntensity<T>, MeanFieldError> {
    if rel_close(p.gamma_c, p.gamma_h, lit(SINGULAR_REL_TOL)) {
        return Err(MeanFieldError::Singular("gamma_h = gamma_c"));
    }
    let den = lit::<T>(8.0) * p.g_h.powi(2) * p.g_c.powi(2) * (p.gamma_c - p.gamma_h);
    if den == T::zero() {
        return Err(MeanFieldError::Singular("g_h g_c = 0"));
    }
    let num = p.gamma_h.powi(2) * p.gamma_c.powi(2) * (p.kappa_h() - p.kappa_c());
    Ok(SteadyIntensity::new(num / den))
}

fn single_ion_nonlinear<T: Real>(p: &ModelParams<T>) -> T {
    p.g_c.powi(2) / p.gamma_h - p.g_h.powi(2) / p.gamma_c
}

/// `I_ss = (γ_c + γ_h)(κ_h − κ_c) / (4 (g_c²/γ_h − g_h²/γ_c)(κ_h + κ_c))`.
pub fn iss_single_ion<T: Real>(p: &ModelParams<T>) -> Result<SteadyIntensity<T>, MeanFieldError> {
    let (x, y) = (p.g_c.powi(2) / p.gamma_h, p.g_h.powi(2) / p.gamma_c);
    if rel_close(x, y, lit(SINGULAR_REL_TOL)) {
        return Err(MeanFieldError::Singular("g_c^2/gamma_h = g_h^2/gamma_c"));
    }
    let den = lit::<T>(4.0) * single_ion_nonlinear(p) * (p.kappa_h() + p.kappa_c());
    let num = (p.gamma_c + p.gamma_h) * (p.kappa_h() - p.kappa_c());
    Ok(SteadyIntensity::new(num / den))
}

/// Single-ion steady intensity with third-order Lamb-Dicke corrections:
/// `(γ_c+γ_h)(κ_h−κ_c) / [4(g_c²/γ_h − g_h²/γ_c)(κ_h+κ_c) + (γ_c+γ_h)(κ_hη_h² − κ_cη_c²)]`.
pub fn iss_single_ion_ld3<T: Real>(p: &ModelParams<T>) -> Result<SteadyIntensity<T>, MeanFieldError> {
    let sum_gamma = p.gamma_c + p.gamma_h;
    let first = lit::<T>(4.0) * single_ion_nonlinear(p) * (p.kappa_h() + p.kappa_c());
    let ld = sum_gamma * (p.kappa_h() * p.eta_h.powi(2) - p.kappa_c() * p.eta_c.powi(2));
    let den = first + ld;
    let scale = first.abs().max(ld.abs());
    if den.abs() <= lit::<T>(SINGULAR_REL_TOL) * scale || den == T::zero() {
        return Err(MeanFieldError::Singular("third-order single-ion denominator"));
    }
    Ok(SteadyIntensity::new(sum_gamma * (p.kappa_h() - p.kappa_c()) / den))
}

/// Effective heating and cooling rates `(R_h, R_c)` at intensity `I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates<T> {
    pub heating: T,
    pub cooling: T,
}

impl<T: Real> Rates<T> {
    pub fn net(&self) -> T {
        self.heating - self.cooling
    }
}

fn first_order_rate<T: Real>(g: T, gamma: T, intensity: T) -> T {
    lit::<T>(2.0) * g * g / gamma / (T::one() + lit::<T>(8.0) * (g / gamma).powi(2) * intensity)
}

/// `R = 2κ / (1 + 8(g/γ)² I)` for both ions.
pub fn rates_first_order<T: Real>(p: &ModelParams<T>, intensity: T) -> Rates<T> {
    Rates {
        heating: first_order_rate(p.g_h, p.gamma_h, intensity),
        cooling: first_order_rate(p.g_c, p.gamma_c, intensity),
    }
}

fn ld3_printed_rate<T: Real>(g: T, gamma: T, eta: T, intensity: T) -> T {
    let x = lit::<T>(2.0) - intensity * eta * eta;
    (g * g / gamma) * x / (T::one() + lit::<T>(2.0) * (g / gamma).powi(2) * intensity * x * x)
}

fn ld3_effective_rate<T: Real>(g: T, gamma: T, eta: T, intensity: T) -> T {
    let x = T::one() - eta * eta * intensity / lit::<T>(2.0);
    first_order_rate(g * x, gamma, intensity)
}

/// Third-order rates in the printed form
/// `R = κ(2 − Iη²) / (1 + 2(g/γ)² I (2 − Iη²)²)`.
pub fn rates_ld3<T: Real>(p: &ModelParams<T>, intensity: T) -> Rates<T> {
    Rates {
        heating: ld3_printed_rate(p.g_h, p.gamma_h, p.eta_h, intensity),
        cooling: ld3_printed_rate(p.g_c, p.gamma_c, p.eta_c, intensity),
    }
}

/// Third-order rates obtained by replacing each coupling `g` with the
/// intensity-dependent coupling `g(1 − η²I/2)` in the first-order rate:
/// `R = 2κx² / (1 + 8(g/γ)² I x²)` with `x = 1 − η²I/2`.
///
/// This differs from [`rates_ld3`] by one power of `x` in the numerator and
/// tracks the third-order Liouvillian steady state much more closely.
pub fn rates_ld3_effective<T: Real>(p: &ModelParams<T>, intensity: T) -> Rates<T> {
    Rates {
        heating: ld3_effective_rate(p.g_h, p.gamma_h, p.eta_h, intensity),
        cooling: ld3_effective_rate(p.g_c, p.gamma_c, p.eta_c, intensity),
    }
}

/// Selects a rate family for [`rate_crossing`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateForm {
    FirstOrder,
    Ld3Printed,
    Ld3Effective,
}

/// Evaluates the selected rate family.
pub fn rates<T: Real>(form: RateForm, p: &ModelParams<T>, intensity: T) -> Rates<T> {
    match form {
        RateForm::FirstOrder => rates_first_order(p, intensity),
        RateForm::Ld3Printed => rates_ld3(p, intensity),
        RateForm::Ld3Effective => rates_ld3_effective(p, intensity),
    }
}

/// Smallest positive intensity where `R_h − R_c` changes sign from positive
/// to negative, i.e. the first stable mean-field fixed point.
///
/// The net rate is scanned on a logarithmic grid up to `i_max` and the
/// bracketing interval refined by bisection to full precision.
pub fn rate_crossing<T: Real>(form: RateForm, p: &ModelParams<T>, i_max: T) -> Result<T, MeanFieldError> {
    let net = |i: T| rates(form, p, i).net();
    let points = 4000usize;
    let lo_exp = lit::<T>(-8.0);
    let hi_exp = i_max.log10();
    let at = |k: usize| -> T {
        let f = crate::scalar::from_usize::<T>(k) / crate::scalar::from_usize::<T>(points);
        lit::<T>(10.0).powf(lo_exp + (hi_exp - lo_exp) * f)
    };
    let mut prev_i = T::zero();
    let mut prev = net(prev_i);
    for k in 0..=points {
        let i = at(k);
        let cur = net(i);
        if prev > T::zero() && cur <= T::zero() {
            let (mut lo, mut hi) = (prev_i, i);
            for _ in 0..200 {
                let mid = (lo + hi) * lit::<T>(0.5);
                if mid <= lo || mid >= hi {
                    break;
                }
                if net(mid) > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok((lo + hi) * lit::<T>(0.5));
        }
        prev_i = i;
        prev = cur;
    }
    Err(MeanFieldError::NoCrossing(i_max.to_f64().unwrap_or(f64::NAN)))
}

/// `dI/dt = 2I(R_h − R_c)` for the first-order two-ion model.
pub fn intensity_rate_two_ion<T: Real>(p: &ModelParams<T>, intensity: T) -> T {
    lit::<T>(2.0) * intensity * rates_first_order(p, intensity).net()
}

/// Numerator of the two-ion intensity equation,
/// `32 I² (γ_h − γ_c) + 4 I γ_h²γ_c²/(g_h²g_c²) (κ_h − κ_c)`; its sign is the
/// sign of `dI/dt`.
pub fn stability_polynomial_two_ion<T: Real>(p: &ModelParams<T>, intensity: T) -> T {
    let lin = lit::<T>(4.0) * p.gamma_h.powi(2) * p.gamma_c.powi(2) / (p.g_h.powi(2) * p.g_c.powi(2));
    lit::<T>(32.0) * intensity * intensity * (p.gamma_h - p.gamma_c) + lin * intensity * (p.kappa_h() - p.kappa_c())
}

/// Numerator of the single-ion intensity equation,
/// `8I²γ_h²γ_c²(κ_h+κ_c)(g_h²/γ_c − g_c²/γ_h) + 2Iγ_h²γ_c²(γ_h+γ_c)(κ_h−κ_c)`.
pub fn stability_polynomial_single_ion<T: Real>(p: &ModelParams<T>, intensity: T) -> T {
    let gg = p.gamma_h.powi(2) * p.gamma_c.powi(2);
    lit::<T>(8.0) * intensity * intensity * gg * (p.kappa_h() + p.kappa_c()) * -single_ion_nonlinear(p)
        + lit::<T>(2.0) * intensity * gg * (p.gamma_h + p.gamma_c) * (p.kappa_h() - p.kappa_c())
}

/// Mean-field phase label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Dark,
    Lasing,
    Heating,
    UnstableDark,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Dark => "Dark",
            Phase::Lasing => "Lasing",
            Phase::Heating => "Heating",
            Phase::UnstableDark => "UnstableDark",
        };
        f.write_str(s)
    }
}

/// Boundary manifold of the phase diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// `κ_h = κ_c`.
    Threshold,
    /// `γ_h = γ_c` (two-ion nonlinear term).
    DecayBalance,
    /// `g_h²/γ_c = g_c²/γ_h` (single-ion nonlinear term).
    CouplingBalance,
}

/// Phase label, or the boundary manifolds the parameters sit on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Phase(Phase),
    Boundary(Vec<Boundary>),
}

impl Classification {
    pub fn phase(&self) -> Option<Phase> {
        match self {
            Classification::Phase(p) => Some(*p),
            Classification::Boundary(_) => None,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Phase(p) => p.fmt(f),
            Classification::Boundary(b) => {
                let names: Vec<&str> = b
                    .iter()
                    .map(|x| match x {
                        Boundary::Threshold => "threshold",
                        Boundary::DecayBalance => "decay-balance",
                        Boundary::CouplingBalance => "coupling-balance",
                    })
                    .collect();
                write!(f, "Boundary({})", names.join("+"))
            }
        }
    }
}

fn classify<T: Real>(above_threshold: (T, T), stable_nonlinear: (T, T), nonlinear: Boundary) -> Classification {
    let tol = lit::<T>(BOUNDARY_REL_TOL);
    let mut boundaries = Vec::new();
    if rel_close(above_threshold.0, above_threshold.1, tol) {
        boundaries.push(Boundary::Threshold);
    }
    if rel_close(stable_nonlinear.0, stable_nonlinear.1, tol) {
        boundaries.push(nonlinear);
    }
    if !boundaries.is_empty() {
        return Classification::Boundary(boundaries);
    }
    let lasing = above_threshold.0 > above_threshold.1;
    let stable = stable_nonlinear.0 < stable_nonlinear.1;
    Classification::Phase(match (lasing, stable) {
        (false, true) => Phase::Dark,
        (true, true) => Phase::Lasing,
        (true, false) => Phase::Heating,
        (false, false) => Phase::UnstableDark,
    })
}

/// Two-ion phase from the signs of `κ_h − κ_c` and `γ_h − γ_c`.
pub fn classify_two_ion<T: Real>(p: &ModelParams<T>) -> Classification {
    classify((p.kappa_h(), p.kappa_c()), (p.gamma_h, p.gamma_c), Boundary::DecayBalance)
}

/// Single-ion phase from the signs of `κ_h − κ_c` and `g_h²/γ_c − g_c²/γ_h`.
pub fn classify_single_ion<T: Real>(p: &ModelParams<T>) -> Classification {
    classify(
        (p.kappa_h(), p.kappa_c()),
        (p.g_h.powi(2) / p.gamma_c, p.g_c.powi(2) / p.gamma_h),
        Boundary::CouplingBalance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(gh: f64, gc: f64, yh: f64, yc: f64) -> ModelParams<f64> {
        ModelParams::new(gh, gc, yh, yc)
    }

    #[test]
    fn closed_forms_at_reference_point() {
        let q = p(1.0, 1.0, 1.5, 3.0);
        assert!((iss_two_ion(&q).unwrap().value - 0.5625).abs() < 1e-15);
        assert!((iss_single_ion(&q).unwrap().value - 1.125).abs() < 1e-15);
        assert_eq!(classify_single_ion(&q), Classification::Phase(Phase::Lasing));
        assert_eq!(classify_two_ion(&q), Classification::Phase(Phase::Lasing));
    }

    #[test]
    fn negative_intensity_is_tagged() {
        let q = p(2.0, 1.0, 3.0, 1.5);
        let iss = iss_two_ion(&q).unwrap();
        assert!(iss.value < 0.0 && !iss.physical);
        assert_eq!(classify_two_ion(&q), Classification::Phase(Phase::Heating));
        let dark = p(0.5, 1.0, 1.5, 3.0);
        assert!(!iss_two_ion(&dark).unwrap().physical);
        assert_eq!(classify_two_ion(&dark), Classification::Phase(Phase::Dark));
        // Below threshold with γ_h > γ_c the positive root is the unstable fixed point.
        let q = p(0.5, 1.0, 3.0, 1.5);
        assert!(iss_two_ion(&q).unwrap().physical);
        assert_eq!(classify_two_ion(&q), Classification::Phase(Phase::UnstableDark));
    }

    #[test]
    fn singular_manifolds_are_errors() {
        assert!(iss_two_ion(&p(1.0, 1.0, 2.0, 2.0)).is_err());
        assert!(iss_single_ion(&p(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn first_order_rates_cross_at_closed_form() {
        let q = p(1.0, 0.5, 1.5, 10.0);
        let iss = iss_two_ion(&q).unwrap().value;
        let r = rates_first_order(&q, iss);
        assert!((r.heating - r.cooling).abs() < 1e-12);
        let found = rate_crossing(RateForm::FirstOrder, &q, 1e6).unwrap();
        assert!((found - iss).abs() < 1e-9 * iss);
        let r0 = rates_first_order(&q, 0.0);
        assert_eq!((r0.heating, r0.cooling), (2.0 * q.kappa_h(), 2.0 * q.kappa_c()));
    }

    #[test]
    fn ld3_rate_limits() {
        let q = p(1.0, 0.5, 1.5, 10.0);
        for i in [0.0, 0.5, 3.0, 40.0] {
            let a = rates_ld3(&q, i);
            let b = rates_first_order(&q, i);
            let c = rates_ld3_effective(&q, i);
            assert!((a.heating - b.heating).abs() < 1e-15 && (c.heating - b.heating).abs() < 1e-15);
        }
        let q = q.with_eta(0.2, 0.05);
        assert!(rates_ld3(&q, 2.0 / 0.04).heating.abs() < 1e-15);
        assert!(rates_ld3_effective(&q, 2.0 / 0.04).heating.abs() < 1e-15);
    }

    #[test]
    fn ld3_single_ion_reduces_and_shifts() {
        let q = p(1.0, 1.0, 1.5, 3.0);
        assert_eq!(iss_single_ion_ld3(&q).unwrap(), iss_single_ion(&q).unwrap());
        let shifted = iss_single_ion_ld3(&q.with_eta(0.1, 0.05)).unwrap().value;
        assert!(shifted < iss_single_ion(&q).unwrap().value);
    }

    #[test]
    fn classification_labels_and_boundaries() {
        // γ_h/γ_c = 0.5, g_h²/g_c² = 0.125.
        assert_eq!(classify_two_ion(&p(0.125f64.sqrt(), 1.0, 1.0, 2.0)).phase(), Some(Phase::Dark));
        assert_eq!(classify_two_ion(&p(2.0, 1.0, 2.0, 1.0)).phase(), Some(Phase::Heating));
        assert_eq!(classify_two_ion(&p(1.0, 1.0, 2.0, 2.0)), Classification::Boundary(vec![Boundary::Threshold, Boundary::DecayBalance]));
        assert_eq!(classify_single_ion(&p(2.0, 1.0, 1.0, 4.0)), Classification::Boundary(vec![Boundary::CouplingBalance]));
    }

    #[test]
    fn ground_state_is_fixed_point() {
        let q = p(0.7, 0.9, 1.5, 3.0);
        let s = MeanFieldState::ground_with_seed(0.0);
        let d = two_ion_rhs(&s, &q);
        assert_eq!((d.a.norm(), d.sz_h, d.sz_c), (0.0, 0.0, 0.0));
        let d = single_ion_rhs(&s, &q);
        assert_eq!((d.a.norm(), d.s21.norm()), (0.0, 0.0));
    }
}
