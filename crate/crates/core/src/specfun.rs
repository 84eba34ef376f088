//! Gauss and generalized hypergeometric series for real arguments.
//!
//! Only the convergent series inside the unit disk is implemented; arguments
//! on or outside `|z| = 1` are rejected rather than continued analytically.

use thiserror::Error;

use crate::scalar::{from_usize, lit, Real};

/// Largest number of series terms before giving up.
pub const MAX_TERMS: usize = 1_000_000;
/// Relative size of the estimated remainder at which summation stops.
pub const REL_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("argument z = {0} lies outside the open unit disk")]
    OutOfDomain(f64),
    #[error("lower parameter {0} is a nonpositive integer")]
    PoleParameter(f64),
    #[error("series with {upper} upper and {lower} lower parameters is not of the convergent pFq type")]
    ParameterCount { upper: usize, lower: usize },
    #[error("series did not converge within {0} terms")]
    NotConverged(usize),
    #[error("non-finite parameter or argument")]
    NonFinite,
}

/// Upper parameters, lower parameters and argument of a `pFq` series.
#[derive(Clone, Debug, PartialEq)]
pub struct HypergeometricArgs<T> {
    pub upper: Vec<T>,
    pub lower: Vec<T>,
    pub z: T,
}

/// Converged series value together with the number of terms summed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    pub terms: usize,
}

impl<T: Real> HypergeometricArgs<T> {
    pub fn new(upper: Vec<T>, lower: Vec<T>, z: T) -> Self {
        Self { upper, lower, z }
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !self.z.is_finite() || self.upper.iter().chain(&self.lower).any(|x| !x.is_finite()) {
            return Err(SpecFunError::NonFinite);
        }
        if self.upper.len() > self.lower.len() + 1 {
            return Err(SpecFunError::ParameterCount { upper: self.upper.len(), lower: self.lower.len() });
        }
        if let Some(&bad) = self.lower.iter().find(|&&b| is_nonpositive_integer(b)) {
            return Err(SpecFunError::PoleParameter(bad.to_f64().unwrap_or(f64::NAN)));
        }
        let terminates = self.upper.iter().any(|&a| is_nonpositive_integer(a));
        if self.upper.len() == self.lower.len() + 1 && !terminates && self.z.abs() >= T::one() {
            return Err(SpecFunError::OutOfDomain(self.z.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    /// Sums the series with Kahan compensation.
    ///
    /// Stops once the geometric estimate of the remainder, built from the
    /// current term ratio, falls below [`REL_TOL`] (or the type's epsilon,
    /// whichever is larger) relative to the partial sum.
    pub fn evaluate(&self) -> Result<SeriesValue<T>, SpecFunError> {
        self.validate()?;
        let tol = lit::<T>(REL_TOL).max(T::epsilon());
        let mut sum = T::one();
        let mut comp = T::zero();
        let mut term = T::one();
        if self.z == T::zero() {
            return Ok(SeriesValue { value: sum, terms: 1 });
        }
        for n in 0..MAX_TERMS {
            let nf = from_usize::<T>(n);
            let num = self.upper.iter().fold(T::one(), |acc, &a| acc * (a + nf));
            let den = self.lower.iter().fold(from_usize::<T>(n + 1), |acc, &b| acc * (b + nf));
            let ratio = num / den * self.z;
            term = term * ratio;
            if term == T::zero() {
                return Ok(SeriesValue { value: sum, terms: n + 1 });
            }
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            if !sum.is_finite() {
                return Err(SpecFunError::NotConverged(n + 1));
            }
            let r = ratio.abs();
            if r < T::one() {
                let remainder = term.abs() * r / (T::one() - r);
                if remainder <= tol * sum.abs() {
                    return Ok(SeriesValue { value: sum, terms: n + 2 });
                }
            }
        }
        Err(SpecFunError::NotConverged(MAX_TERMS))
    }
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `|z| < 1`.
pub fn hyp2f1<T: Real>(a: T, b: T, c: T, z: T) -> Result<T, SpecFunError> {
    Ok(HypergeometricArgs::new(vec![a, b], vec![c], z).evaluate()?.value)
}

/// Generalized hypergeometric function `pFq(upper; lower; z)`.
pub fn hyp_pfq<T: Real>(upper: &[T], lower: &[T], z: T) -> Result<T, SpecFunError> {
    Ok(HypergeometricArgs::new(upper.to_vec(), lower.to_vec(), z).evaluate()?.value)
}
