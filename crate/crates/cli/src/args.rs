//! Command-line arguments and their merge with a JSON config file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use phonon_laser::models::{LdOrder, ModelKind, ModelSpec};
use phonon_laser::Params;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Fock truncation used when `--nmax` is not given.
pub const DEFAULT_NMAX: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "phonon-laser", version, about = "Trapped-ion phonon laser simulation and analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state of one parameter point with analytic comparisons (JSON).
    Steady(SteadyArgs),
    /// Two-dimensional parameter sweep (CSV).
    Sweep(SweepArgs),
    /// Wigner function of the motional steady state on a grid (CSV `re,im,w`).
    Wigner(WignerArgs),
    /// Squeezed-sensing figures of merit over the squeezing parameter.
    Sensing(SensingArgs),
    /// Mean-field intensity, rates and phase (no Liouvillian solve).
    Meanfield(MeanfieldArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    TwoIon,
    SingleIon,
}

impl From<ModelChoice> for ModelKind {
    fn from(m: ModelChoice) -> Self {
        match m {
            ModelChoice::TwoIon => ModelKind::TwoIon,
            ModelChoice::SingleIon => ModelKind::SingleIon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    #[arg(long)]
    pub gh: Option<f64>,
    #[arg(long)]
    pub gc: Option<f64>,
    #[arg(long = "gamma-h")]
    pub gamma_h: Option<f64>,
    #[arg(long = "gamma-c")]
    pub gamma_c: Option<f64>,
    #[arg(long = "eta-h")]
    pub eta_h: Option<f64>,
    #[arg(long = "eta-c")]
    pub eta_c: Option<f64>,
    /// Squeezing parameter of the Bogoliubov mode.
    #[arg(long)]
    pub r: Option<f64>,
    /// Squeezing phase.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fock truncation (number of motional levels).
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Lamb-Dicke expansion order, 1 or 3.
    #[arg(long = "ld-order")]
    pub ld_order: Option<u8>,
    /// Lase in the squeezed mode.
    #[arg(long, action = ArgAction::SetTrue)]
    pub squeezed: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON file supplying any flag; explicit flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SteadyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MeanfieldArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Outer axis as `name:min:max:count[:lin|log]`.
    #[arg(long)]
    pub axis1: Option<String>,
    /// Inner axis as `name:min:max:count[:lin|log]`.
    #[arg(long)]
    pub axis2: Option<String>,
    /// Comma-separated subset of nbar_sim,nbar_mf,g2_sim,g2_theory,phase,truncation_ok.
    #[arg(long)]
    pub outputs: Option<String>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct WignerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long = "re-min", allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long = "re-max", allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    #[arg(long = "im-min", allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long = "im-max", allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SensingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long = "r-min")]
    pub r_min: Option<f64>,
    #[arg(long = "r-max")]
    pub r_max: Option<f64>,
    /// Number of squeezing values between `r-min` and `r-max`.
    #[arg(long = "r-count")]
    pub r_count: Option<usize>,
    /// Lamb-Dicke parameter for the LD-limit flag.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Signal amplitude |ε|.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Signal phase φ.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Laser intensity for the Fisher information (defaults to the two-ion I_ss).
    #[arg(long)]
    pub intensity: Option<f64>,
}

/// Access to the shared flags of a subcommand.
pub trait HasCommon {
    fn common(&self) -> &CommonArgs;
}

macro_rules! has_common {
    ($($t:ty),*) => {
        $(impl HasCommon for $t {
            fn common(&self) -> &CommonArgs {
                &self.common
            }
        })*
    };
}

has_common!(SteadyArgs, MeanfieldArgs, SweepArgs, WignerArgs, SensingArgs);

/// Overlays explicit flags on the config file named by `--config`.
///
/// Unset flags (`None` and unset switches) fall through to the file; keys in
/// the file that no flag of this subcommand accepts are rejected.
pub fn merge_config<A>(args: A) -> Result<A, CliError>
where
    A: HasCommon + Serialize + DeserializeOwned + Default,
{
    let Some(path) = args.common().config.clone() else {
        return Ok(args);
    };
    let file = read_config(&path)?;
    let known = object(&A::default())?;
    if let Some(key) = file.keys().find(|k| !known.contains_key(k.as_str())) {
        return Err(CliError::Usage(format!("unknown key {key:?} in config {}", path.display())));
    }
    let mut merged = object(&args)?;
    for (k, v) in file {
        let slot = merged.entry(k).or_insert(Value::Null);
        if matches!(slot, Value::Null | Value::Bool(false)) {
            *slot = v;
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        // Keys follow the long flag names; `gamma_h` is accepted for `gamma-h`.
        Ok(Value::Object(map)) => Ok(map.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect()),
        Ok(_) => Err(CliError::Usage(format!("config {} must hold a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("invalid config {}: {e}", path.display()))),
    }
}

fn object<A: Serialize>(a: &A) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(a) {
        Ok(Value::Object(map)) => Ok(map),
        _ => Err(CliError::Usage("arguments do not serialize to an object".into())),
    }
}

impl CommonArgs {
    pub fn model_kind(&self) -> ModelKind {
        self.model.unwrap_or(ModelChoice::TwoIon).into()
    }

    pub fn ld_order(&self) -> Result<LdOrder, CliError> {
        match self.ld_order.unwrap_or(1) {
            1 => Ok(LdOrder::First),
            3 => Ok(LdOrder::Third),
            other => Err(CliError::Usage(format!("--ld-order must be 1 or 3, got {other}"))),
        }
    }

    pub fn spec(&self) -> Result<ModelSpec, CliError> {
        let spec = ModelSpec::new(self.model_kind(), self.nmax.unwrap_or(DEFAULT_NMAX))
            .with_ld_order(self.ld_order()?)
            .with_squeezing(self.squeezed);
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }

    /// Whether all four rates were supplied.
    pub fn has_rates(&self) -> bool {
        self.gh.is_some() && self.gc.is_some() && self.gamma_h.is_some() && self.gamma_c.is_some()
    }

    /// Model parameters; the four rates are required.
    pub fn params(&self) -> Result<Params, CliError> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")));
        let p = Params::new(
            need(self.gh, "gh")?,
            need(self.gc, "gc")?,
            need(self.gamma_h, "gamma-h")?,
            need(self.gamma_c, "gamma-c")?,
        )
        .with_eta(self.eta_h.unwrap_or(0.0), self.eta_c.unwrap_or(0.0))
        .with_squeezing(self.r.unwrap_or(0.0), self.beta.unwrap_or(0.0));
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
