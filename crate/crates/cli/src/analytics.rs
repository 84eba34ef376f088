//! Analytic companions of a simulated point: mean-field intensity and theory g².

use phonon_laser::meanfield::{
    iss_single_ion, iss_single_ion_ld3, iss_two_ion, rate_crossing, MeanFieldError, Phase, RateForm, SteadyIntensity,
};
use phonon_laser::models::{LdOrder, ModelKind, ModelSpec};
use phonon_laser::quantum_stats::{
    g2_single_equal_gamma, g2_two_ion_full, pn_single_general, Annotated, StatsError, Validity,
};
use phonon_laser::scalar::rel_close;
use phonon_laser::Params;

/// Upper end of the intensity search for the LD3 rate crossing.
const CROSSING_SEARCH_MAX: f64 = 1e6;
/// Minimum support of recurrence distributions used for theory values.
const RECURRENCE_LEVELS: usize = 16;

/// Closed-form mean-field intensity of the selected model, before clamping.
pub fn steady_intensity(spec: &ModelSpec, p: &Params) -> Result<SteadyIntensity<f64>, MeanFieldError> {
    match (spec.kind, spec.ld_order) {
        (ModelKind::TwoIon, LdOrder::First) => iss_two_ion(p),
        (ModelKind::SingleIon, LdOrder::First) => iss_single_ion(p),
        (ModelKind::SingleIon, LdOrder::Third) => iss_single_ion_ld3(p),
        (ModelKind::TwoIon, LdOrder::Third) => {
            rate_crossing(RateForm::Ld3Effective, p, CROSSING_SEARCH_MAX).map(|v| SteadyIntensity { value: v, physical: true })
        }
    }
}

/// Mean-field phonon number: `I_ss` in the lasing phase, zero in the dark
/// phase and undefined where the mean field runs away.
pub fn mean_field_intensity(spec: &ModelSpec, p: &Params, phase: Option<Phase>) -> Option<f64> {
    match phase {
        Some(Phase::Dark) => Some(0.0),
        Some(Phase::Heating) | Some(Phase::UnstableDark) if spec.ld_order == LdOrder::First => None,
        _ => steady_intensity(spec, p).ok().filter(|s| s.physical).map(|s| s.value),
    }
}

/// Analytic `g²(0)` for first-order, unsqueezed models.
///
/// Two-ion points use the hypergeometric closed form; single-ion points use
/// the exact equal-γ expression or, otherwise, the level-resolved recurrence.
pub fn theory_g2(spec: &ModelSpec, p: &Params) -> Option<Result<Annotated<f64>, StatsError>> {
    if spec.squeezed || spec.ld_order == LdOrder::Third {
        return None;
    }
    Some(match spec.kind {
        ModelKind::TwoIon => g2_two_ion_full(p),
        ModelKind::SingleIon if rel_close(p.gamma_h, p.gamma_c, 1e-12) => {
            g2_single_equal_gamma(p).map(|value| Annotated { value, validity: Validity::default() })
        }
        ModelKind::SingleIon => pn_single_general(p, RECURRENCE_LEVELS)
            .and_then(|d| Ok(Annotated { value: d.value.g2()?, validity: d.validity })),
    })
}
