//! The five subcommands.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufWriter, Write};

use phonon_laser::hilbert::fock_destroy;
use phonon_laser::lindblad::DensityMatrix;
use phonon_laser::meanfield::{rates, RateForm};
use phonon_laser::models::{build_model, LdOrder, ModelError, ModelKind, ModelSpec};
use phonon_laser::observables::{reduced_motional_state, wigner, GridSpec, WIGNER_BOUNDARY_TOL};
use phonon_laser::sensing::{enhancement, fisher_info, heating_penalty, ld_limit_squeeze, w_factor};
use phonon_laser::{Params, Signal};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::analytics::{steady_intensity, theory_g2};
use crate::args::{CommonArgs, Format, MeanfieldArgs, SensingArgs, SteadyArgs, SweepArgs, WignerArgs};
use crate::output::{fmt_sig, num, opt_num, write_csv, write_json, write_report, SCHEMA_VERSION};
use crate::sweep::{classify, rows, run_sweep, Axis, AxisParam, SweepOutput, SweepSpec};
use crate::CliError;

/// Squeezing of the reference sensing enhancement of about 80.
const REFERENCE_ENHANCEMENT_R: f64 = 1.45;
/// Default Wigner grid points per axis.
const DEFAULT_RESOLUTION: usize = 101;
/// Wigner half-width in units of the quadrature standard deviation.
const WINDOW_SIGMAS: f64 = 5.0;
/// Smallest automatic Wigner half-width.
const MIN_HALF_WIDTH: f64 = 3.0;

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::TwoIon => "two-ion",
        ModelKind::SingleIon => "single-ion",
    }
}

fn model_json(spec: &ModelSpec) -> Value {
    json!({
        "kind": kind_name(spec.kind),
        "ld_order": if spec.ld_order == LdOrder::Third { 3 } else { 1 },
        "squeezed": spec.squeezed,
        "n_max": spec.n_max,
    })
}

fn params_json(p: &Params) -> Value {
    json!({
        "gh": num(p.g_h), "gc": num(p.g_c), "gamma_h": num(p.gamma_h), "gamma_c": num(p.gamma_c),
        "eta_h": num(p.eta_h), "eta_c": num(p.eta_c), "r": num(p.r), "beta": num(p.beta),
    })
}

fn header(command: &str, spec: &ModelSpec, p: &Params) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("model".into(), model_json(spec));
    m.insert("params".into(), params_json(p));
    m
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Lindblad(inner) => CliError::Convergence(inner.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

/// Runs `body` against the `--out` file or the given stdout.
fn with_output(
    common: &CommonArgs,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn truncation_message(spec: &ModelSpec, tail: f64) -> String {
    format!(
        "Fock truncation n_max = {} holds tail mass {tail:.3e}; the state does not fit, most likely because \
         the parameters lie in the Heating (runaway) phase. Raise --nmax if the phase is Lasing.",
        spec.n_max
    )
}

pub fn steady(args: SteadyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let c = &args.common;
    let spec = c.spec()?;
    let p = c.params()?;
    let model = build_model(&spec, &p).map_err(model_error)?;
    for w in &model.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    let report = model.steady_state().map_err(|e| CliError::Convergence(e.to_string()))?;
    let dist = phonon_laser::observables::phonon_distribution(&report.rho);

    let mut out = header("steady", &spec, &p);
    out.insert("nbar".into(), num(report.nbar));
    out.insert("g2".into(), opt_num(report.g2));
    out.insert("fano".into(), opt_num(dist.fano().ok()));
    out.insert("phase".into(), json!(classify(spec.kind, &p).to_string()));
    out.insert(
        "mean_field".into(),
        match steady_intensity(&spec, &p) {
            Ok(s) => json!({"i_ss": num(s.value), "physical": s.physical}),
            Err(e) => json!({"i_ss": Value::Null, "physical": false, "error": e.to_string()}),
        },
    );
    out.insert(
        "truncation".into(),
        json!({
            "ok": report.truncation_ok,
            "tail_mass": num(report.tail_mass),
            "residual": num(report.residual),
            "n_max": report.n_max(),
        }),
    );
    out.insert(
        "theory".into(),
        match theory_g2(&spec, &p) {
            Some(Ok(a)) => json!({"g2": num(a.value), "assumption_violations": a.validity.violations()}),
            Some(Err(e)) => json!({"g2": Value::Null, "error": e.to_string()}),
            None => json!({"g2": Value::Null, "error": "no closed form for this model variant"}),
        },
    );
    out.insert("warnings".into(), json!(model.warnings));
    let csv = c.format_or(Format::Json) == Format::Csv;
    with_output(c, stdout, |w| write_report(w, out, csv))?;
    if !report.truncation_ok {
        return Err(CliError::Truncation(truncation_message(&spec, report.tail_mass)));
    }
    Ok(())
}

pub fn meanfield(args: MeanfieldArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let c = &args.common;
    let spec = c.spec()?;
    let p = c.params()?;
    let mut out = header("meanfield", &spec, &p);
    out.insert("phase".into(), json!(classify(spec.kind, &p).to_string()));
    let form = if spec.ld_order == LdOrder::Third { RateForm::Ld3Effective } else { RateForm::FirstOrder };
    match steady_intensity(&spec, &p) {
        Ok(s) => {
            out.insert("i_ss".into(), num(s.value));
            out.insert("physical".into(), json!(s.physical));
            let r = rates(form, &p, s.value.max(0.0));
            out.insert("rates".into(), json!({"heating": num(r.heating), "cooling": num(r.cooling)}));
        }
        Err(e) => {
            out.insert("i_ss".into(), Value::Null);
            out.insert("physical".into(), json!(false));
            out.insert("error".into(), json!(e.to_string()));
        }
    }
    let csv = c.format_or(Format::Json) == Format::Csv;
    with_output(c, stdout, |w| write_report(w, out, csv))
}

/// Parses the sweep flags into a [`SweepSpec`].
pub fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let c = &args.common;
    fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
        v.as_deref().ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
    }
    let axis1: Axis = need(&args.axis1, "axis1")?.parse()?;
    let axis2: Axis = need(&args.axis2, "axis2")?.parse()?;
    let outputs = match &args.outputs {
        Some(list) => list.split(',').map(str::parse).collect::<Result<Vec<SweepOutput>, _>>()?,
        None => SweepOutput::ALL.to_vec(),
    };
    // Axis parameters may stand in for missing fixed rates.
    let mut filled = c.clone();
    for (axis, v) in [(axis1, axis1.min), (axis2, axis2.min)] {
        let slot = match axis.param {
            AxisParam::Gh => &mut filled.gh,
            AxisParam::Gc => &mut filled.gc,
            AxisParam::GammaH => &mut filled.gamma_h,
            AxisParam::GammaC => &mut filled.gamma_c,
            _ => continue,
        };
        slot.get_or_insert(v);
    }
    let spec = SweepSpec { model: c.spec()?, fixed: filled.params()?, axis1, axis2, outputs };
    spec.validate()?;
    Ok(spec)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn sweep(args: SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = sweep_spec(&args)?;
    let c = &args.common;
    let points = run_sweep(&spec, c.jobs.unwrap_or_else(default_jobs))?;
    let header = spec.header();
    let table = rows(&spec, &points);
    match c.format_or(Format::Csv) {
        Format::Csv => with_output(c, stdout, |w| write_csv(w, &header, &table)),
        Format::Json => {
            let mut out = Map::new();
            out.insert("schema_version".into(), json!(SCHEMA_VERSION));
            out.insert("command".into(), json!("sweep"));
            out.insert("model".into(), model_json(&spec.model));
            out.insert("params".into(), params_json(&spec.fixed));
            out.insert("columns".into(), json!(header));
            out.insert("rows".into(), json!(table));
            with_output(c, stdout, |w| write_json(w, &Value::Object(out)))
        }
    }
}

/// Variance of the quadrature `(a + e^{iθ}a†)/2` rotated to `Re α` (θ = 0) or `Im α` (θ = π).
fn quadrature_variances(rho: &DensityMatrix) -> Result<(f64, f64), CliError> {
    let motion = reduced_motional_state(rho);
    let n = motion.dim();
    let a = fock_destroy(n).map_err(|e| CliError::Convergence(e.to_string()))?;
    let ad = a.adjoint();
    let err = |e: phonon_laser::hilbert::HilbertError| CliError::Convergence(e.to_string());
    let x = a.add(&ad).map_err(err)?.scale_real(0.5);
    let y = a.sub(&ad).map_err(err)?.scale(num_i(-0.5));
    let moment = |op: &phonon_laser::hilbert::OperatorMatrix| -> Result<f64, CliError> {
        let sq = op.matmul(op).map_err(err)?;
        let second = motion.expect(&sq).map_err(|e| CliError::Convergence(e.to_string()))?.re;
        let first = motion.expect(op).map_err(|e| CliError::Convergence(e.to_string()))?.re;
        Ok(second - first * first)
    };
    Ok((moment(&x)?, moment(&y)?))
}

fn num_i(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

pub fn wigner_cmd(args: WignerArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let c = &args.common;
    let spec = c.spec()?;
    let p = c.params()?;
    let model = build_model(&spec, &p).map_err(model_error)?;
    for w in &model.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    let report = model.steady_state().map_err(|e| CliError::Convergence(e.to_string()))?;
    if !report.truncation_ok {
        return Err(CliError::Truncation(truncation_message(&spec, report.tail_mass)));
    }
    let (vx, vy) = quadrature_variances(&report.rho)?;
    let half = |v: f64| (WINDOW_SIGMAS * v.max(0.0).sqrt()).max(MIN_HALF_WIDTH);
    let grid = GridSpec {
        re_min: args.re_min.unwrap_or(-half(vx)),
        re_max: args.re_max.unwrap_or(half(vx)),
        im_min: args.im_min.unwrap_or(-half(vy)),
        im_max: args.im_max.unwrap_or(half(vy)),
        resolution: args.resolution.unwrap_or(DEFAULT_RESOLUTION),
    };
    let w = wigner(&report.rho, grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let ratio = w.boundary_ratio();
    if ratio > WIGNER_BOUNDARY_TOL {
        writeln!(
            stderr,
            "warning: Wigner function at the window edge reaches {ratio:.3e} of its peak; widen the grid"
        )?;
    }
    let (re, im) = (w.re_axis(), w.im_axis());
    match c.format_or(Format::Csv) {
        Format::Csv => {
            let mut rows = Vec::with_capacity(re.len() * im.len());
            for (i, x) in re.iter().enumerate() {
                for (j, y) in im.iter().enumerate() {
                    rows.push(vec![fmt_sig(*x), fmt_sig(*y), fmt_sig(w.values[i][j])]);
                }
            }
            let header = ["re", "im", "w"].map(String::from);
            with_output(c, stdout, |out| write_csv(out, &header, &rows))
        }
        Format::Json => {
            let mut out = header("wigner", &spec, &p);
            out.insert("re".into(), Value::Array(re.iter().map(|&x| num(x)).collect()));
            out.insert("im".into(), Value::Array(im.iter().map(|&x| num(x)).collect()));
            out.insert(
                "w".into(),
                Value::Array(w.values.iter().map(|row| Value::Array(row.iter().map(|&v| num(v)).collect())).collect()),
            );
            out.insert("boundary_ratio".into(), num(ratio));
            with_output(c, stdout, |o| write_json(o, &Value::Object(out)))
        }
    }
}

/// One row of the sensing table.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingRow {
    pub r: f64,
    pub w: f64,
    pub fisher: f64,
    pub enhancement: f64,
    pub heating_penalty: f64,
    pub ld_limit_reached: bool,
    pub note: String,
}

/// Tabulates the sensing figures over the requested squeezing values.
///
/// `β` defaults to the orthogonal phase `2φ + π/2`, where `W = cosh 2r`.
/// The Fisher information needs either `--intensity` or all four rates.
pub fn sensing_rows(args: &SensingArgs) -> Result<(f64, Vec<SensingRow>), CliError> {
    let c = &args.common;
    let eta = args.eta.unwrap_or(0.05);
    let ld_limit = ld_limit_squeeze(eta).map_err(|e| CliError::Usage(e.to_string()))?;
    let phase = args.phase.unwrap_or(0.0);
    let beta = c.beta.unwrap_or(2.0 * phase + FRAC_PI_2);
    let signal = Signal::new(args.amplitude.unwrap_or(1.0), phase).map_err(|e| CliError::Usage(e.to_string()))?;
    let rs: Vec<f64> = match c.r {
        Some(r) => vec![r],
        None => {
            let (lo, hi) = (args.r_min.unwrap_or(0.0), args.r_max.unwrap_or(2.9));
            let n = args.r_count.unwrap_or(59);
            if n == 0 || !(hi >= lo) || lo < 0.0 {
                return Err(CliError::Usage("need r-count >= 1 and 0 <= r-min <= r-max".into()));
            }
            if n == 1 {
                vec![lo]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
        }
    };
    let params = if c.has_rates() { Some(c.params()?) } else { None };
    let mut out = Vec::with_capacity(rs.len());
    for r in rs {
        let fisher = match (&params, args.intensity) {
            (Some(p), i) => fisher_info(p, &signal, r, beta, i).map_or(f64::NAN, |rep| rep.fisher),
            (None, _) => f64::NAN,
        };
        let note = if (r - REFERENCE_ENHANCEMENT_R).abs() < 1e-9 { "expected ~80" } else { "" };
        out.push(SensingRow {
            r,
            w: w_factor(r, beta, phase),
            fisher,
            enhancement: enhancement(r),
            heating_penalty: heating_penalty(r),
            ld_limit_reached: r >= ld_limit - 1e-9,
            note: note.to_string(),
        });
    }
    Ok((ld_limit, out))
}

pub fn sensing(args: SensingArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (ld_limit, table) = sensing_rows(&args)?;
    let c = &args.common;
    match c.format_or(Format::Csv) {
        Format::Csv => {
            let header = ["r", "w", "fisher", "enhancement", "heating_penalty", "ld_limit_reached", "note"]
                .map(String::from);
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|s| {
                    vec![
                        fmt_sig(s.r),
                        fmt_sig(s.w),
                        fmt_sig(s.fisher),
                        fmt_sig(s.enhancement),
                        fmt_sig(s.heating_penalty),
                        s.ld_limit_reached.to_string(),
                        s.note.clone(),
                    ]
                })
                .collect();
            with_output(c, stdout, |w| write_csv(w, &header, &rows))
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .iter()
                .map(|s| {
                    json!({
                        "r": num(s.r), "w": num(s.w), "fisher": num(s.fisher),
                        "enhancement": num(s.enhancement), "heating_penalty": num(s.heating_penalty),
                        "ld_limit_reached": s.ld_limit_reached, "note": s.note,
                    })
                })
                .collect();
            let out = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "sensing",
                "eta": num(args.eta.unwrap_or(0.05)),
                "ld_limit": num(ld_limit),
                "rows": rows,
            });
            with_output(c, stdout, |w| write_json(w, &out))
        }
    }
}
