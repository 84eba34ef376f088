//! Two-dimensional parameter sweeps with order-preserving parallel evaluation.

use std::fmt;
use std::str::FromStr;

use phonon_laser::meanfield::{classify_single_ion, classify_two_ion, Classification, Phase};
use phonon_laser::models::{solve_steady, ModelKind, ModelSpec};
use phonon_laser::Params;
use rayon::prelude::*;

use crate::analytics::{theory_g2, mean_field_intensity};
use crate::output::fmt_sig;
use crate::CliError;

/// Model parameter that a sweep axis can scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisParam {
    Gh,
    Gc,
    GammaH,
    GammaC,
    EtaH,
    EtaC,
    R,
    Beta,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Gh => "gh",
            AxisParam::Gc => "gc",
            AxisParam::GammaH => "gamma-h",
            AxisParam::GammaC => "gamma-c",
            AxisParam::EtaH => "eta-h",
            AxisParam::EtaC => "eta-c",
            AxisParam::R => "r",
            AxisParam::Beta => "beta",
        }
    }

    /// Couplings and decay rates default to logarithmic spacing.
    fn default_scale(self) -> Scale {
        match self {
            AxisParam::Gh | AxisParam::Gc | AxisParam::GammaH | AxisParam::GammaC => Scale::Log,
            _ => Scale::Linear,
        }
    }

    pub fn set(self, p: &mut Params, v: f64) {
        match self {
            AxisParam::Gh => p.g_h = v,
            AxisParam::Gc => p.g_c = v,
            AxisParam::GammaH => p.gamma_h = v,
            AxisParam::GammaC => p.gamma_c = v,
            AxisParam::EtaH => p.eta_h = v,
            AxisParam::EtaC => p.eta_c = v,
            AxisParam::R => p.r = v,
            AxisParam::Beta => p.beta = v,
        }
    }
}

impl FromStr for AxisParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s.replace('_', "-").as_str() {
            "gh" | "g-h" => AxisParam::Gh,
            "gc" | "g-c" => AxisParam::Gc,
            "gamma-h" => AxisParam::GammaH,
            "gamma-c" => AxisParam::GammaC,
            "eta-h" => AxisParam::EtaH,
            "eta-c" => AxisParam::EtaC,
            "r" => AxisParam::R,
            "beta" => AxisParam::Beta,
            other => return Err(CliError::Usage(format!("unknown sweep parameter {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One sweep axis: parameter, range, point count and spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = CliError;

    /// Parses `name:min:max:count[:lin|log]`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Usage(format!("axis {s:?}: {why}; expected name:min:max:count[:lin|log]"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(bad("wrong number of fields"));
        }
        let param: AxisParam = parts[0].parse()?;
        let min: f64 = parts[1].parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = parts[2].parse().map_err(|_| bad("max is not a number"))?;
        let count: usize = parts[3].parse().map_err(|_| bad("count is not an integer"))?;
        let scale = match parts.get(4).copied() {
            None => param.default_scale(),
            Some("lin") | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(_) => return Err(bad("scale must be lin or log")),
        };
        if count == 0 || !min.is_finite() || !max.is_finite() {
            return Err(bad("range must be finite with at least one point"));
        }
        if scale == Scale::Log && !(min > 0.0 && max > 0.0) {
            return Err(bad("log spacing needs positive bounds"));
        }
        Ok(Axis { param, min, max, count, scale })
    }
}

/// Columns a sweep can emit per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepOutput {
    NbarSim,
    NbarMf,
    G2Sim,
    G2Theory,
    Phase,
    TruncationOk,
}

impl SweepOutput {
    pub const ALL: [SweepOutput; 6] = [
        SweepOutput::NbarSim,
        SweepOutput::NbarMf,
        SweepOutput::G2Sim,
        SweepOutput::G2Theory,
        SweepOutput::Phase,
        SweepOutput::TruncationOk,
    ];

    fn needs_simulation(self) -> bool {
        matches!(self, SweepOutput::NbarSim | SweepOutput::G2Sim | SweepOutput::TruncationOk)
    }
}

impl fmt::Display for SweepOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepOutput::NbarSim => "nbar_sim",
            SweepOutput::NbarMf => "nbar_mf",
            SweepOutput::G2Sim => "g2_sim",
            SweepOutput::G2Theory => "g2_theory",
            SweepOutput::Phase => "phase",
            SweepOutput::TruncationOk => "truncation_ok",
        })
    }
}

impl FromStr for SweepOutput {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SweepOutput::ALL
            .into_iter()
            .find(|o| o.to_string() == s.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown sweep output {s:?}")))
    }
}

/// Complete description of a sweep.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub model: ModelSpec,
    pub fixed: Params,
    pub axis1: Axis,
    pub axis2: Axis,
    pub outputs: Vec<SweepOutput>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.axis1.param == self.axis2.param {
            return Err(CliError::Usage(format!("both axes scan {}", self.axis1.param.name())));
        }
        if self.outputs.is_empty() {
            return Err(CliError::Usage("no sweep outputs selected".into()));
        }
        Ok(())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.axis1.param.name().to_string(), self.axis2.param.name().to_string()];
        h.extend(self.outputs.iter().map(ToString::to_string));
        h.push("status".into());
        h
    }
}

/// Values computed at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub x1: f64,
    pub x2: f64,
    pub nbar_sim: f64,
    pub nbar_mf: f64,
    pub g2_sim: f64,
    pub g2_theory: f64,
    pub phase: String,
    pub truncation_ok: Option<bool>,
    /// `ok`, or `;`-joined failure codes.
    pub status: String,
}

impl SweepPoint {
    fn cells(&self, outputs: &[SweepOutput]) -> Vec<String> {
        let mut row = vec![fmt_sig(self.x1), fmt_sig(self.x2)];
        for o in outputs {
            row.push(match o {
                SweepOutput::NbarSim => fmt_sig(self.nbar_sim),
                SweepOutput::NbarMf => fmt_sig(self.nbar_mf),
                SweepOutput::G2Sim => fmt_sig(self.g2_sim),
                SweepOutput::G2Theory => fmt_sig(self.g2_theory),
                SweepOutput::Phase => self.phase.clone(),
                SweepOutput::TruncationOk => self.truncation_ok.map_or("NaN".into(), |b| b.to_string()),
            });
        }
        row.push(self.status.clone());
        row
    }
}

/// Mean-field phase label of a parameter point.
pub fn classify(kind: ModelKind, p: &Params) -> Classification {
    match kind {
        ModelKind::TwoIon => classify_two_ion(p),
        ModelKind::SingleIon => classify_single_ion(p),
    }
}

/// Evaluates one grid point. Failures are recorded in the status column.
pub fn evaluate_point(spec: &SweepSpec, x1: f64, x2: f64) -> SweepPoint {
    let mut p = spec.fixed;
    spec.axis1.param.set(&mut p, x1);
    spec.axis2.param.set(&mut p, x2);
    let mut status = Vec::new();
    let class = classify(spec.model.kind, &p);
    let mut point = SweepPoint {
        x1,
        x2,
        nbar_sim: f64::NAN,
        nbar_mf: f64::NAN,
        g2_sim: f64::NAN,
        g2_theory: f64::NAN,
        phase: class.to_string(),
        truncation_ok: None,
        status: String::new(),
    };
    if let Err(e) = p.validate() {
        point.status = format!("invalid_params:{}", sanitize(&e.to_string()));
        return point;
    }
    if spec.outputs.contains(&SweepOutput::NbarMf) {
        match mean_field_intensity(&spec.model, &p, class.phase()) {
            Some(v) => point.nbar_mf = v,
            None => status.push("mf_undefined".to_string()),
        }
    }
    if spec.outputs.contains(&SweepOutput::G2Theory) {
        match theory_g2(&spec.model, &p) {
            Some(Ok(v)) => point.g2_theory = v.value,
            Some(Err(_)) | None => status.push("theory_undefined".to_string()),
        }
    }
    if spec.outputs.iter().any(|o| o.needs_simulation()) {
        match solve_steady(&spec.model, &p) {
            Ok(report) => {
                point.truncation_ok = Some(report.truncation_ok);
                if report.truncation_ok {
                    point.nbar_sim = report.nbar;
                    point.g2_sim = report.g2.unwrap_or(f64::NAN);
                } else {
                    status.push("truncation".to_string());
                }
            }
            Err(e) => status.push(format!("solver:{}", sanitize(&e.to_string()))),
        }
    }
    point.status = if status.is_empty() { "ok".into() } else { status.join(";") };
    point
}

fn sanitize(s: &str) -> String {
    s.replace([',', ';', '\n'], " ")
}

/// Runs every grid point on a pool of `jobs` workers and returns the points
/// in row-major order (`axis1` outer, `axis2` inner).
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepPoint>, CliError> {
    spec.validate()?;
    let xs1 = spec.axis1.values();
    let xs2 = spec.axis2.values();
    let grid: Vec<(f64, f64)> = xs1.iter().flat_map(|&a| xs2.iter().map(move |&b| (a, b))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|&(a, b)| evaluate_point(spec, a, b)).collect()))
}

/// CSV rows of a finished sweep.
pub fn rows(spec: &SweepSpec, points: &[SweepPoint]) -> Vec<Vec<String>> {
    points.iter().map(|p| p.cells(&spec.outputs)).collect()
}

/// Whether a phase label is one where Fock truncation is expected to fail.
pub fn runaway_phase(phase: Option<Phase>) -> bool {
    matches!(phase, Some(Phase::Heating) | Some(Phase::UnstableDark))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_spacing() {
        let a: Axis = "gc:0.1:10:3".parse().unwrap();
        assert_eq!(a.scale, Scale::Log);
        let v = a.values();
        assert!((v[1] - 1.0).abs() < 1e-12);
        let b: Axis = "r:0:1:3".parse().unwrap();
        assert_eq!(b.values(), vec![0.0, 0.5, 1.0]);
        assert!("gc:0:1:3:log".parse::<Axis>().is_err());
        assert!("foo:0:1:3".parse::<Axis>().is_err());
    }

    #[test]
    fn outputs_round_trip() {
        for o in SweepOutput::ALL {
            assert_eq!(o.to_string().parse::<SweepOutput>().unwrap(), o);
        }
    }
}
