//! Hamiltonians and jump operators for every laser variant.
//!
//! Two-ion layout is `[2, 2, N]` (heating spin, cooling spin, motion) and the
//! single-ion layout is `[3, N]` (internal level, motion). Spin index 0 is the
//! ground state and `σ+ = |1⟩⟨0|`. All Hamiltonians are interaction-picture
//! sideband forms without free evolution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{fock_create, fock_destroy, identity, number_op, tensor, transition, HilbertError, OperatorMatrix};
use crate::lindblad::{
    build_liouvillian_with_symmetry, steady_state, steady_state_adaptive, Liouvillian, LindbladError,
    SteadyStateReport, Symmetry,
};
use crate::scalar::{lit, Real};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam { name: &'static str, value: f64, reason: &'static str },
    #[error("Fock truncation {0} is below the minimum of 4")]
    TruncationTooSmall(usize),
    #[error("third-order Lamb-Dicke coupling cannot be combined with squeezing")]
    Ld3Squeezed,
    #[error("squeezed_model called for an unsqueezed spec")]
    NotSqueezed,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
}

/// Physical rates and dimensionless knobs of one laser configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub struct ModelParams<T> {
    pub g_h: T,
    pub g_c: T,
    pub gamma_h: T,
    pub gamma_c: T,
    #[serde(default)]
    pub eta_h: T,
    #[serde(default)]
    pub eta_c: T,
    #[serde(default)]
    pub r: T,
    #[serde(default)]
    pub beta: T,
}

impl<T: Real> ModelParams<T> {
    /// First-order parameters with no squeezing and vanishing Lamb-Dicke corrections.
    pub fn new(g_h: T, g_c: T, gamma_h: T, gamma_c: T) -> Self {
        Self { g_h, g_c, gamma_h, gamma_c, eta_h: T::zero(), eta_c: T::zero(), r: T::zero(), beta: T::zero() }
    }

    pub fn with_eta(self, eta_h: T, eta_c: T) -> Self {
        Self { eta_h, eta_c, ..self }
    }

    pub fn with_squeezing(self, r: T, beta: T) -> Self {
        Self { r, beta, ..self }
    }

    /// `κ_h = g_h²/γ_h`.
    pub fn kappa_h(&self) -> T {
        self.g_h * self.g_h / self.gamma_h
    }

    /// `κ_c = g_c²/γ_c`.
    pub fn kappa_c(&self) -> T {
        self.g_c * self.g_c / self.gamma_c
    }

    /// Cooperativity `κ_h/κ_c`.
    pub fn cooperativity(&self) -> T {
        self.kappa_h() / self.kappa_c()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let check = |name, v: T, ok: bool, reason| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParam { name, value: f(v), reason })
            }
        };
        check("g_h", self.g_h, self.g_h >= T::zero(), "must be nonnegative")?;
        check("g_c", self.g_c, self.g_c >= T::zero(), "must be nonnegative")?;
        check("gamma_h", self.gamma_h, self.gamma_h > T::zero(), "must be positive")?;
        check("gamma_c", self.gamma_c, self.gamma_c > T::zero(), "must be positive")?;
        let in_unit = |e: T| e >= T::zero() && e < T::one();
        check("eta_h", self.eta_h, in_unit(self.eta_h), "must lie in [0, 1)")?;
        check("eta_c", self.eta_c, in_unit(self.eta_c), "must lie in [0, 1)")?;
        check("r", self.r, self.r >= T::zero(), "must be nonnegative")?;
        check("beta", self.beta, true, "must be finite")?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    TwoIon,
    SingleIon,
}

/// Order of the Lamb-Dicke expansion of the sideband couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LdOrder {
    First,
    Third,
}

/// Selects one laser variant and its Fock truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub ld_order: LdOrder,
    pub squeezed: bool,
    pub n_max: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n_max: usize) -> Self {
        Self { kind, ld_order: LdOrder::First, squeezed: false, n_max }
    }

    pub fn with_ld_order(self, ld_order: LdOrder) -> Self {
        Self { ld_order, ..self }
    }

    pub fn with_squeezing(self, squeezed: bool) -> Self {
        Self { squeezed, ..self }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_max < 4 {
            return Err(ModelError::TruncationTooSmall(self.n_max));
        }
        if self.squeezed && self.ld_order == LdOrder::Third {
            return Err(ModelError::Ld3Squeezed);
        }
        Ok(())
    }
}

/// Hamiltonian, jump operators and the conserved charge of one model.
#[derive(Clone, Debug)]
pub struct Model {
    pub h: OperatorMatrix,
    pub jumps: Vec<OperatorMatrix>,
    pub symmetry: Symmetry,
    /// Non-fatal diagnostics raised while building the model.
    pub warnings: Vec<String>,
}

impl Model {
    pub fn liouvillian(&self) -> Result<Liouvillian, LindbladError> {
        build_liouvillian_with_symmetry(&self.h, &self.jumps, &self.symmetry)
    }

    pub fn steady_state(&self) -> Result<SteadyStateReport, LindbladError> {
        steady_state(&self.liouvillian()?)
    }
}

/// Sideband coupling `η Ω e^{−η²/2}`.
pub fn effective_coupling<T: Real>(eta: T, omega: T) -> T {
    eta * omega * (-eta * eta / lit(2.0)).exp()
}

/// Bogoliubov sideband couplings `(g cosh r, g sinh r)`.
pub fn squeezed_mode_couplings<T: Real>(g: T, r: T) -> (T, T) {
    (g * r.cosh(), g * r.sinh())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn spin_plus() -> Result<OperatorMatrix, HilbertError> {
    transition(2, 1, 0)
}

fn spin_minus() -> Result<OperatorMatrix, HilbertError> {
    transition(2, 0, 1)
}

/// `a†(1 − η²/2 · a†a)` on `n_max` levels.
fn ld3_raise(eta: f64, n_max: usize) -> Result<OperatorMatrix, HilbertError> {
    let n = number_op(n_max)?;
    let factor = identity(n_max)?.sub(&n.scale_real(0.5 * eta * eta))?;
    fock_create(n_max)?.matmul(&factor)
}

fn ld3_warning(name: &str, eta: f64, n_max: usize) -> Option<String> {
    let level = 2.0 / (eta * eta);
    (eta > 0.0 && level <= (n_max - 1) as f64).then(|| {
        format!(
            "{name} = {eta}: coupling factor 1 - {name}^2 n/2 vanishes at n = {level:.2} inside the truncation n_max = {n_max}"
        )
    })
}

fn two_ion_charges(n_max: usize) -> Vec<i64> {
    let mut q = Vec::with_capacity(4 * n_max);
    for m_h in 0..2i64 {
        for m_c in 0..2i64 {
            for n in 0..n_max as i64 {
                q.push(n - m_h + m_c);
            }
        }
    }
    q
}

fn single_ion_charges(n_max: usize) -> Vec<i64> {
    let mut q = Vec::with_capacity(3 * n_max);
    for level in 0..3i64 {
        for n in 0..n_max as i64 {
            q.push(n - i64::from(level == 2) + i64::from(level == 1));
        }
    }
    q
}

fn prepare(p: &ModelParams<f64>, n_max: usize) -> Result<(), ModelError> {
    p.validate()?;
    if n_max < 4 {
        return Err(ModelError::TruncationTooSmall(n_max));
    }
    Ok(())
}

/// Two-ion couplings from explicit raising operators on the motion:
/// `g_h(σ+h R_h + h.c.) + g_c(σ−c R_c + h.c.)`.
fn two_ion_from_raising(
    p: &ModelParams<f64>,
    raise_h: &OperatorMatrix,
    raise_c: &OperatorMatrix,
    n_max: usize,
) -> Result<(OperatorMatrix, Vec<OperatorMatrix>), ModelError> {
    let i2 = identity(2)?;
    let im = identity(n_max)?;
    let heat = tensor(&[&spin_plus()?, &i2, raise_h])?.scale_real(p.g_h);
    let cool = tensor(&[&i2, &spin_minus()?, raise_c])?.scale_real(p.g_c);
    let h = heat.add(&heat.adjoint())?.add(&cool)?.add(&cool.adjoint())?;
    let jumps = vec![
        tensor(&[&spin_minus()?, &i2, &im])?.scale_real(p.gamma_h.sqrt()),
        tensor(&[&i2, &spin_minus()?, &im])?.scale_real(p.gamma_c.sqrt()),
    ];
    Ok((h, jumps))
}

/// Single-ion couplings: `g_h(|2⟩⟨0| R_h + h.c.) + g_c(|1⟩⟨0| R_c† + h.c.)`.
fn single_ion_from_raising(
    p: &ModelParams<f64>,
    raise_h: &OperatorMatrix,
    raise_c: &OperatorMatrix,
    n_max: usize,
) -> Result<(OperatorMatrix, Vec<OperatorMatrix>), ModelError> {
    let im = identity(n_max)?;
    let heat = tensor(&[&transition(3, 2, 0)?, raise_h])?.scale_real(p.g_h);
    let cool = tensor(&[&transition(3, 1, 0)?, &raise_c.adjoint()])?.scale_real(p.g_c);
    let h = heat.add(&heat.adjoint())?.add(&cool)?.add(&cool.adjoint())?;
    let jumps = vec![
        tensor(&[&transition(3, 0, 2)?, &im])?.scale_real(p.gamma_h.sqrt()),
        tensor(&[&transition(3, 0, 1)?, &im])?.scale_real(p.gamma_c.sqrt()),
    ];
    Ok((h, jumps))
}

/// `H = g_h(a†σ+h + aσ−h) + g_c(a†σ−c + aσ+c)`, jumps `√γ_h σ−h`, `√γ_c σ−c`.
pub fn two_ion_model(p: &ModelParams<f64>, n_max: usize) -> Result<Model, ModelError> {
    prepare(p, n_max)?;
    let ad = fock_create(n_max)?;
    let (h, jumps) = two_ion_from_raising(p, &ad, &ad, n_max)?;
    Ok(Model { h, jumps, symmetry: Symmetry::U1(two_ion_charges(n_max)), warnings: Vec::new() })
}

/// `H = g_h(|2⟩⟨0|a† + |0⟩⟨2|a) + g_c(|1⟩⟨0|a + |0⟩⟨1|a†)`, jumps
/// `√γ_h |0⟩⟨2|`, `√γ_c |0⟩⟨1|`.
pub fn single_ion_model(p: &ModelParams<f64>, n_max: usize) -> Result<Model, ModelError> {
    prepare(p, n_max)?;
    let ad = fock_create(n_max)?;
    let (h, jumps) = single_ion_from_raising(p, &ad, &ad, n_max)?;
    Ok(Model { h, jumps, symmetry: Symmetry::U1(single_ion_charges(n_max)), warnings: Vec::new() })
}

/// Two-ion model with `a†` replaced by `a†(1 − η²/2 · a†a)` in both sidebands.
pub fn ld3_two_ion_model(p: &ModelParams<f64>, n_max: usize) -> Result<Model, ModelError> {
    prepare(p, n_max)?;
    let (h, jumps) = two_ion_from_raising(p, &ld3_raise(p.eta_h, n_max)?, &ld3_raise(p.eta_c, n_max)?, n_max)?;
    let warnings = [ld3_warning("eta_h", p.eta_h, n_max), ld3_warning("eta_c", p.eta_c, n_max)].into_iter().flatten().collect();
    Ok(Model { h, jumps, symmetry: Symmetry::U1(two_ion_charges(n_max)), warnings })
}

/// Single-ion model with `a†` replaced by `a†(1 − η²/2 · a†a)` in both sidebands.
pub fn ld3_single_ion_model(p: &ModelParams<f64>, n_max: usize) -> Result<Model, ModelError> {
    prepare(p, n_max)?;
    let (h, jumps) = single_ion_from_raising(p, &ld3_raise(p.eta_h, n_max)?, &ld3_raise(p.eta_c, n_max)?, n_max)?;
    let warnings = [ld3_warning("eta_h", p.eta_h, n_max), ld3_warning("eta_c", p.eta_c, n_max)].into_iter().flatten().collect();
    Ok(Model { h, jumps, symmetry: Symmetry::U1(single_ion_charges(n_max)), warnings })
}

/// First-order model in the Bogoliubov mode `A = cosh(r) a + e^{iβ} sinh(r) a†`.
///
/// Written out in sidebands, every `a†` coupling of strength `g` becomes a
/// blue sideband of strength `g cosh r` plus a red sideband of strength
/// `g sinh r` with phase `e^{−iβ}`. The charge is only conserved modulo 2.
pub fn squeezed_model(spec: &ModelSpec, p: &ModelParams<f64>, n_max: usize) -> Result<Model, ModelError> {
    if !spec.squeezed {
        return Err(ModelError::NotSqueezed);
    }
    if spec.ld_order == LdOrder::Third {
        return Err(ModelError::Ld3Squeezed);
    }
    prepare(p, n_max)?;
    let a_dag = squeezed_mode_creation(p.r, p.beta, n_max)?;
    let (h, jumps, charges) = match spec.kind {
        ModelKind::TwoIon => {
            let (h, j) = two_ion_from_raising(p, &a_dag, &a_dag, n_max)?;
            (h, j, two_ion_charges(n_max))
        }
        ModelKind::SingleIon => {
            let (h, j) = single_ion_from_raising(p, &a_dag, &a_dag, n_max)?;
            (h, j, single_ion_charges(n_max))
        }
    };
    let symmetry = if p.r == 0.0 { Symmetry::U1(charges) } else { Symmetry::Parity(charges) };
    Ok(Model { h, jumps, symmetry, warnings: Vec::new() })
}

/// `A† = g_bsb a† + g_rsb e^{−iβ} a` with unit overall coupling.
fn squeezed_mode_creation(r: f64, beta: f64, n_max: usize) -> Result<OperatorMatrix, ModelError> {
    let (bsb, rsb) = squeezed_mode_couplings(1.0, r);
    let red = fock_destroy(n_max)?.scale(Complex64::from_polar(rsb, -beta));
    Ok(fock_create(n_max)?.scale(c(bsb)).add(&red)?)
}

/// Builds the model selected by `spec`.
pub fn build_model(spec: &ModelSpec, p: &ModelParams<f64>) -> Result<Model, ModelError> {
    spec.validate()?;
    match (spec.kind, spec.ld_order, spec.squeezed) {
        (_, _, true) => squeezed_model(spec, p, spec.n_max),
        (ModelKind::TwoIon, LdOrder::First, false) => two_ion_model(p, spec.n_max),
        (ModelKind::SingleIon, LdOrder::First, false) => single_ion_model(p, spec.n_max),
        (ModelKind::TwoIon, LdOrder::Third, false) => ld3_two_ion_model(p, spec.n_max),
        (ModelKind::SingleIon, LdOrder::Third, false) => ld3_single_ion_model(p, spec.n_max),
    }
}

/// Steady state at the truncation given by `spec`.
pub fn solve_steady(spec: &ModelSpec, p: &ModelParams<f64>) -> Result<SteadyStateReport, ModelError> {
    Ok(build_model(spec, p)?.steady_state()?)
}

/// Steady state with the Fock truncation doubled from `spec.n_max` until the
/// tail check passes.
pub fn solve_steady_adaptive(spec: &ModelSpec, p: &ModelParams<f64>) -> Result<SteadyStateReport, ModelError> {
    spec.validate()?;
    let mut build_err = None;
    let result = steady_state_adaptive(
        |n| match build_model(&spec.with_n_max(n), p) {
            Ok(m) => m.liouvillian(),
            Err(ModelError::Lindblad(e)) => Err(e),
            Err(e) => {
                let msg = e.to_string();
                build_err = Some(e);
                Err(LindbladError::InvalidState(msg))
            }
        },
        spec.n_max,
    );
    match (result, build_err) {
        (_, Some(e)) => Err(e),
        (r, None) => Ok(r?),
    }
}
