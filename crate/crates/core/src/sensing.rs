//! Squeezed-lasing sensing analytics: effective signal, quasi-probability
//! steady state, W-factor, quantum Fisher information and heating penalty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meanfield::{iss_two_ion, MeanFieldError};
use crate::models::ModelParams;
use crate::scalar::{from_usize, lit, Real};

/// Squeezing parameter at which the Lamb-Dicke criterion is reached for `η = 0.05`.
pub const LD_ANCHOR_R: f64 = 2.9;
/// Lamb-Dicke parameter of the calibration anchor.
pub const LD_ANCHOR_ETA: f64 = 0.05;
/// Exponent drop below the peak at which the normalizer integration stops.
const NORMALIZER_DEPTH: f64 = 60.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("exponent {0:e} overflows; use the log-domain value")]
    Overflow(f64),
    #[error("steady intensity {0:e} is not physical")]
    UnphysicalIntensity(f64),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
}

/// Complex signal amplitude `ε = |ε| e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalParams<T> {
    pub amplitude: T,
    pub phase: T,
}

impl<T: Real> SignalParams<T> {
    pub fn new(amplitude: T, phase: T) -> Result<Self, SensingError> {
        if !(amplitude >= T::zero()) || !amplitude.is_finite() || !phase.is_finite() {
            return Err(SensingError::InvalidParam(format!(
                "signal amplitude must be finite and nonnegative, got {}",
                amplitude.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { amplitude, phase })
    }
}

/// Sensing figures of merit at one operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensingReport<T> {
    pub w: T,
    pub fisher: T,
    pub enhancement_vs_unsqueezed: T,
    pub heating_penalty: T,
    pub delta_magnitude: T,
    pub delta_phase: T,
    /// Intensity used for the Fisher information.
    pub intensity: T,
}

/// Quasi-probability exponent constants `A = 2g_h²/γ_h`, `B = 16g_h⁴/γ_h³`, `C = κ_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiProbConstants<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> QuasiProbConstants<T> {
    pub fn new(p: &ModelParams<T>) -> Result<Self, SensingError> {
        let a = lit::<T>(2.0) * p.g_h * p.g_h / p.gamma_h;
        if !(a > T::zero()) || !a.is_finite() {
            return Err(SensingError::InvalidParam("requires A = 2 g_h^2 / gamma_h > 0".into()));
        }
        let b = lit::<T>(16.0) * p.g_h.powi(4) / p.gamma_h.powi(3);
        Ok(Self { a, b, c: p.kappa_c() })
    }

    /// Radial maximum `I² = (A − C)/B` of the signal-free exponent, if above threshold.
    pub fn radial_maximum(&self) -> Option<T> {
        (self.a > self.c).then(|| ((self.a - self.c) / self.b).sqrt())
    }
}

/// Effective signal `δ = cosh(r) ε − e^{iβ} sinh(r) ε*` in polar form.
pub fn delta_eff<T: Real>(signal: &SignalParams<T>, r: T, beta: T) -> (T, T) {
    let eps = num_complex::Complex::from_polar(signal.amplitude, signal.phase);
    let delta = eps * r.cosh() - num_complex::Complex::from_polar(r.sinh(), beta) * eps.conj();
    if signal.amplitude == T::zero() {
        return (T::zero(), signal.phase);
    }
    (delta.norm(), delta.arg())
}

/// Exponent of `P(I, θ) ∝ exp[−(B/2A)I⁴ + ((A−C)/A)I² − (2|δ|/A) I sin(θ − γ)]`.
pub fn log_quasi_prob<T: Real>(
    intensity: T,
    theta: T,
    p: &ModelParams<T>,
    signal: &SignalParams<T>,
    r: T,
    beta: T,
) -> Result<T, SensingError> {
    let k = QuasiProbConstants::new(p)?;
    let (mag, gamma) = delta_eff(signal, r, beta);
    Ok(exponent(&k, intensity, theta, mag, gamma))
}

fn exponent<T: Real>(k: &QuasiProbConstants<T>, i: T, theta: T, mag: T, gamma: T) -> T {
    let two = lit::<T>(2.0);
    -(k.b / (two * k.a)) * i.powi(4) + (k.a - k.c) / k.a * i * i - two * mag / k.a * i * (theta - gamma).sin()
}

/// Unnormalized quasi-probability `P(I, θ)`.
pub fn quasi_prob<T: Real>(
    intensity: T,
    theta: T,
    p: &ModelParams<T>,
    signal: &SignalParams<T>,
    r: T,
    beta: T,
) -> Result<T, SensingError> {
    let e = log_quasi_prob(intensity, theta, p, signal, r, beta)?;
    let v = e.exp();
    if !v.is_finite() {
        return Err(SensingError::Overflow(e.to_f64().unwrap_or(f64::INFINITY)));
    }
    Ok(v)
}

/// Log of `∫₀^∞ dI ∫₀^{2π} dθ P(I, θ)` by the midpoint rule on a
/// `resolution × resolution` grid.
pub fn log_quasi_prob_normalizer<T: Real>(
    p: &ModelParams<T>,
    signal: &SignalParams<T>,
    r: T,
    beta: T,
    resolution: usize,
) -> Result<T, SensingError> {
    if resolution < 2 {
        return Err(SensingError::InvalidParam("resolution must be at least 2".into()));
    }
    let k = QuasiProbConstants::new(p)?;
    let (mag, gamma) = delta_eff(signal, r, beta);
    let two = lit::<T>(2.0);
    // Upper envelope of the exponent over θ; integrate until it falls far below its peak.
    let envelope = |i: T| -(k.b / (two * k.a)) * i.powi(4) + (k.a - k.c) / k.a * i * i + two * mag / k.a * i;
    let peak_guess = k.radial_maximum().unwrap_or_else(T::zero);
    let peak = envelope(peak_guess).max(T::zero());
    let mut i_max = peak_guess.max(T::one());
    while envelope(i_max) > peak - lit(NORMALIZER_DEPTH) {
        i_max = i_max * two;
    }
    let n = from_usize::<T>(resolution);
    let di = i_max / n;
    let dtheta = two * T::PI() / n;
    let half = lit::<T>(0.5);
    let mut values = Vec::with_capacity(resolution * resolution);
    for a in 0..resolution {
        let i = (from_usize::<T>(a) + half) * di;
        for b in 0..resolution {
            let theta = (from_usize::<T>(b) + half) * dtheta;
            values.push(exponent(&k, i, theta, mag, gamma));
        }
    }
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    Ok(max + (sum * di * dtheta).ln())
}

/// `W = cosh(2r) − cosh(r) sinh(r) cos(β − 2φ)`.
pub fn w_factor<T: Real>(r: T, beta: T, phi: T) -> T {
    (lit::<T>(2.0) * r).cosh() - r.cosh() * r.sinh() * (beta - lit::<T>(2.0) * phi).cos()
}

/// Fisher-information enhancement `cosh(2r)²`, taken at the orthogonal phase `cos(β − 2φ) = 0`.
pub fn enhancement<T: Real>(r: T) -> T {
    (lit::<T>(2.0) * r).cosh().powi(2)
}

/// Ground-state heating-rate factor `cosh(2r)/2` from the squeezed sideband drive.
pub fn heating_penalty<T: Real>(r: T) -> T {
    (lit::<T>(2.0) * r).cosh() / lit(2.0)
}

/// Quantum Fisher information `F_Q = 2I²W²/A²` with the enhancement and penalty at `r`.
///
/// Without an explicit `intensity` the unsqueezed two-ion steady intensity is used.
pub fn fisher_info<T: Real>(
    p: &ModelParams<T>,
    signal: &SignalParams<T>,
    r: T,
    beta: T,
    intensity: Option<T>,
) -> Result<SensingReport<T>, SensingError> {
    let k = QuasiProbConstants::new(p)?;
    let intensity = match intensity {
        Some(i) => i,
        None => {
            let iss = iss_two_ion(p)?;
            if !iss.physical {
                return Err(SensingError::UnphysicalIntensity(iss.value.to_f64().unwrap_or(f64::NAN)));
            }
            iss.value
        }
    };
    if !(intensity >= T::zero()) {
        return Err(SensingError::UnphysicalIntensity(intensity.to_f64().unwrap_or(f64::NAN)));
    }
    let w = w_factor(r, beta, signal.phase);
    let (delta_magnitude, delta_phase) = delta_eff(signal, r, beta);
    Ok(SensingReport {
        w,
        fisher: lit::<T>(2.0) * intensity * intensity * w * w / (k.a * k.a),
        enhancement_vs_unsqueezed: enhancement(r),
        heating_penalty: heating_penalty(r),
        delta_magnitude,
        delta_phase,
        intensity,
    })
}

/// Squeezing at which the Lamb-Dicke criterion `η e^r ≤ 0.05 e^{2.9}` is
/// reached, clamped at zero.
pub fn ld_limit_squeeze<T: Real>(eta: T) -> Result<T, SensingError> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(SensingError::InvalidParam(format!(
            "Lamb-Dicke parameter must lie in (0, 1), got {}",
            eta.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok((lit::<T>(LD_ANCHOR_R) + (lit::<T>(LD_ANCHOR_ETA) / eta).ln()).max(T::zero()))
}
