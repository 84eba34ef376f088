//! Property tests for the oracle identities of the numerical and analytic paths.

use faer::Mat;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use phonon_laser::hilbert::{default_squeeze_pad, squeeze_padded, OperatorMatrix};
use phonon_laser::lindblad::{adjoint_rate, build_liouvillian, propagate, steady_state, DensityMatrix};
use phonon_laser::models::{single_ion_model, two_ion_model, Model};
use phonon_laser::quantum_stats::{
    pn_single_equal_gamma, pn_single_general, pn_two_ion, single_ion_level_rates, two_ion_rates, PhononDistribution,
};
use phonon_laser::sensing::{fisher_info, log_quasi_prob, w_factor};
use phonon_laser::specfun::hyp2f1;
use phonon_laser::{Params, Signal};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

const SEED: u64 = 0x5eed_0f_1a5e5;

fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, rng_seed: RngSeed::Fixed(SEED), ..Config::default() }
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

/// Rank-two mixture of two random pure states.
fn mixed_state(model: &Model, a: &[(f64, f64)], b: &[(f64, f64)], w: f64) -> DensityMatrix {
    let layout = model.h.layout().clone();
    let d = layout.total_dim();
    let psi = |v: &[(f64, f64)]| -> Vec<Complex64> {
        let raw: Vec<Complex64> = v.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let n = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        raw.iter().map(|c| c / n).collect()
    };
    let (pa, pb) = (psi(a), psi(b));
    let m = Mat::from_fn(d, d, |i, j| w * pa[i] * pa[j].conj() + (1.0 - w) * pb[i] * pb[j].conj());
    let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
    DensityMatrix::new(layout, Mat::from_fn(d, d, |i, j| m[(i, j)] / tr.re)).unwrap()
}

fn trace(m: &Mat<Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

fn rates() -> impl Strategy<Value = Params> {
    (0.1f64..1.5, 0.1f64..1.5, 0.5f64..2.0, 0.5f64..4.0).prop_map(|(gh, gc, yh, yc)| Params::new(gh, gc, yh, yc))
}

const N_SMALL: usize = 5;
const DIM_SMALL: usize = 4 * N_SMALL;

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn liouvillian_preserves_trace(
        p in rates(),
        a in complex_vec(DIM_SMALL),
        b in complex_vec(DIM_SMALL),
        w in 0.0f64..1.0,
    ) {
        let model = two_ion_model(&p, N_SMALL).unwrap();
        let rho = mixed_state(&model, &a, &b, w);
        let l = build_liouvillian(&model.h, &model.jumps).unwrap();
        let out = l.apply(rho.matrix()).unwrap();
        prop_assert!(trace(&out).norm() < 1e-12);
        let herm = (0..DIM_SMALL)
            .flat_map(|i| (0..DIM_SMALL).map(move |j| (i, j)))
            .map(|(i, j)| (out[(i, j)] - out[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        prop_assert!(herm < 1e-12);
    }

    #[test]
    fn adjoint_rate_is_dual_to_liouvillian(
        p in rates(),
        a in complex_vec(DIM_SMALL),
        b in complex_vec(DIM_SMALL),
        w in 0.0f64..1.0,
        o in prop::collection::vec(-1.0f64..1.0, DIM_SMALL * DIM_SMALL),
    ) {
        let model = two_ion_model(&p, N_SMALL).unwrap();
        let rho = mixed_state(&model, &a, &b, w);
        let layout = model.h.layout().clone();
        let dense = Mat::from_fn(DIM_SMALL, DIM_SMALL, |i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            let re = o[lo * DIM_SMALL + hi];
            let im = if i == j { 0.0 } else { o[hi * DIM_SMALL + lo] };
            if i <= j { Complex64::new(re, im) } else { Complex64::new(re, -im) }
        });
        let op = OperatorMatrix::from_dense(layout, dense.clone());
        let l = build_liouvillian(&model.h, &model.jumps).unwrap();
        let lr = l.apply(rho.matrix()).unwrap();
        let schrodinger = trace(&(&dense * &lr));
        let heisenberg = adjoint_rate(&op, &model.h, &model.jumps, &rho).unwrap();
        prop_assert!((schrodinger - heisenberg).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn steady_state_is_stationary_under_propagation(p in rates()) {
        let model = single_ion_model(&p, 8).unwrap();
        let l = model.liouvillian().unwrap();
        let ss = steady_state(&l).unwrap();
        let later = propagate(&ss.rho, &l, 2.0, 0.005).unwrap();
        prop_assert!(ss.rho.trace_distance(&later).unwrap() < 1e-6);
    }
}

#[test]
fn propagation_relaxes_to_the_steady_state() {
    let p = Params::new(0.3, 1.0, 1.0, 2.0);
    let model = two_ion_model(&p, 8).unwrap();
    let l = model.liouvillian().unwrap();
    let ss = steady_state(&l).unwrap();
    let d = model.h.dim();
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[3] = Complex64::new(1.0, 0.0);
    let start = DensityMatrix::from_pure(model.h.layout().clone(), &psi).unwrap();
    let end = propagate(&start, &l, 150.0, 0.01).unwrap();
    let dist = ss.rho.trace_distance(&end).unwrap();
    assert!(dist < 1e-6, "trace distance {dist:e}");
}

fn exact(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Partial sum of `₂F₁(a, b; c; z)` in exact rational arithmetic.
fn hyp2f1_exact(a: &BigRational, b: &BigRational, c: &BigRational, z: &BigRational, terms: usize) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for k in 0..terms {
        sum += &term;
        let kk = BigRational::from_integer(BigInt::from(k as i64));
        let k1 = BigRational::from_integer(BigInt::from(k as i64 + 1));
        term = term * (a + &kk) * (b + &kk) / ((c + &kk) * k1) * z;
        if term.is_zero() {
            break;
        }
    }
    sum
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn hypergeometric_matches_exact_partial_sums(
        a in -16i64..24,
        b in -16i64..24,
        c in 1i64..40,
        z in -32i64..33,
    ) {
        let (qa, qb, qc, qz) = (exact(a, 8), exact(b, 8), exact(c, 8), exact(z, 64));
        // |z| ≤ 1/2: after 160 terms the remainder is far below double precision.
        let reference = hyp2f1_exact(&qa, &qb, &qc, &qz, 160).to_f64().unwrap();
        let value = hyp2f1(a as f64 / 8.0, b as f64 / 8.0, c as f64 / 8.0, z as f64 / 64.0).unwrap();
        prop_assert!((value - reference).abs() <= 1e-12 * reference.abs().max(1e-3), "{value} vs {reference}");
    }

    #[test]
    fn two_ion_recurrence_detailed_balance(
        gh in 0.3f64..4.0,
        gc in 0.2f64..2.0,
        yh in 0.5f64..2.0,
        ratio in 1.2f64..10.0,
    ) {
        let p = Params::new(gh, gc, yh, yh * ratio);
        if let Ok(d) = pn_two_ion(&p, 8) {
            let pr = d.value.probabilities().to_vec();
            for n in 1..pr.len() {
                let r = two_ion_rates(n, &p);
                let (lhs, rhs) = (pr[n] * r.loss, pr[n - 1] * r.gain);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn single_ion_recurrences_detailed_balance(
        gh in 0.05f64..1.0,
        frac in 0.1f64..0.95,
        y in 0.3f64..3.0,
        skew in 0.6f64..1.6,
    ) {
        let equal = Params::new(gh, gh / frac, y, y);
        let d = pn_single_equal_gamma(&equal, 8).unwrap();
        let pr = d.probabilities();
        let c = (equal.g_c / y).powi(2);
        let h = (equal.g_h / y).powi(2);
        for n in 1..pr.len() {
            let nf = n as f64;
            let dm = |m: f64| 1.0 + 8.0 * (c * m + h * (m + 1.0));
            let (lhs, rhs) = (pr[n] * equal.kappa_c() * nf / dm(nf), pr[n - 1] * equal.kappa_h() * nf / dm(nf - 1.0));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
        }
        let general = Params::new(gh, gh / frac, y, y * skew);
        if let Ok(d) = pn_single_general(&general, 8) {
            let pr = d.value.probabilities();
            for n in 1..pr.len().min(40) {
                let r = single_ion_level_rates(n, &general).unwrap().value;
                let (lhs, rhs) = (pr[n] * r.loss, pr[n - 1] * r.gain);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn distribution_moments_are_consistent(weights in prop::collection::vec(0.0f64..1.0, 2..30)) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let d = PhononDistribution::from_weights(weights).unwrap();
        let total: f64 = d.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(d.variance() >= -1e-12);
        prop_assert!(d.total_variation(&d) == 0.0);
    }

    #[test]
    fn w_factor_stays_in_its_band(r in 0.0f64..3.0, beta in -7.0f64..7.0, phi in -7.0f64..7.0) {
        let w = w_factor(r, beta, phi);
        let (c2, s2) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        prop_assert!(w >= c2 - s2 / 2.0 - 1e-12 * c2 && w <= c2 + s2 / 2.0 + 1e-12 * c2);
    }

    #[test]
    fn fisher_information_is_quadratic_in_intensity(
        i in 0.1f64..50.0,
        scale in 0.1f64..10.0,
        r in 0.0f64..2.0,
        beta in -3.0f64..3.0,
    ) {
        let p = Params::new(1.0, 0.5, 1.5, 10.0);
        let s = Signal::new(0.1, 0.2).unwrap();
        let f1 = fisher_info(&p, &s, r, beta, Some(i)).unwrap().fisher;
        let f2 = fisher_info(&p, &s, r, beta, Some(i * scale)).unwrap().fisher;
        prop_assert!((f2 - f1 * scale * scale).abs() <= 1e-12 * f2.abs());
    }

    #[test]
    fn quasi_probability_is_periodic(i in 0.0f64..5.0, theta in -4.0f64..4.0, k in -3i32..4) {
        let p = Params::new(1.0, 0.5, 1.5, 10.0);
        let s = Signal::new(0.3, 0.7).unwrap();
        let e0 = log_quasi_prob(i, theta, &p, &s, 0.5, 0.1).unwrap();
        let e1 = log_quasi_prob(i, theta + 2.0 * std::f64::consts::PI * k as f64, &p, &s, 0.5, 0.1).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0.abs()));
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn padded_squeeze_is_unitary(r in 0.0f64..1.2, beta in -3.0f64..3.0) {
        let dim = 20 + default_squeeze_pad(20, r);
        let s = squeeze_padded(Complex64::from_polar(r, beta), dim).unwrap();
        let sts = s.adjoint().matmul(&s).unwrap();
        let id = OperatorMatrix::identity_on(s.layout().clone());
        prop_assert!(sts.max_abs_diff(&id).unwrap() < 1e-8);
    }
}
