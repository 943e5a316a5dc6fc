//! Command-line definitions. Every flag of a subcommand doubles as a key of
//! the `--config` file and of the manifest's `config` object.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EULERLAB_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "eulerlab",
    version,
    about = "Numerical laboratory for Euler, dashed-line and NLS hyperbolicity"
)]
#[command(arg_required_else_help = true, args_override_self = true)]
pub struct Cli {
    /// Output directory [default: $EULERLAB_OUT, else the working directory]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every random draw of the run
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Flat `key = value` file (or an emitted manifest.json) supplying flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Truncated class spectrum with optional continued-fraction refinement
    Spectrum(SpectrumArgs),
    /// Galerkin-truncated 2D Euler run with invariant history
    EulerSim(EulerSimArgs),
    /// Dashed-line model trajectory and heteroclinic residuals
    DashedLine(DashedLineArgs),
    /// Perturbed discrete NLS run with center/wing encoding
    NlsSim(NlsSimArgs),
    /// Continuum and discrete NLS saddle data with Silnikov flags
    NlsSaddle(NlsSaddleArgs),
    /// Lax pair verification batteries
    LaxCheck(LaxCheckArgs),
    /// Darboux transformation of the shear-power steady state
    Darboux(DarbouxArgs),
    /// Pseudo-orbit shadowing and hyperbolicity estimate
    Shadow(ShadowArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::EulerSim(_) => "euler-sim",
            Command::DashedLine(_) => "dashed-line",
            Command::NlsSim(_) => "nls-sim",
            Command::NlsSaddle(_) => "nls-saddle",
            Command::LaxCheck(_) => "lax-check",
            Command::Darboux(_) => "darboux",
            Command::Shadow(_) => "shadow",
        }
    }
}

/// Comma-separated pair such as `-3,-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair<T>(pub T, pub T);

impl<T: FromStr> FromStr for Pair<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected a pair `a,b`, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse `{v}` in `{s}`"))
        };
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

impl<T: fmt::Display> fmt::Display for Pair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl<T: fmt::Display> Serialize for Pair<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Class base k̂
    #[arg(long, allow_hyphen_values = true, default_value = "-3,-2")]
    pub khat: Pair<i64>,
    /// Class direction p
    #[arg(long, allow_hyphen_values = true, default_value = "1,1")]
    pub p: Pair<i64>,
    /// Complex amplitude Γ as `re,im`
    #[arg(long, allow_hyphen_values = true, default_value = "2,0")]
    pub gamma: Pair<f64>,
    #[arg(long, default_value_t = 50)]
    pub trunc: usize,
    /// Refine the non-imaginary eigenvalues by continued fractions
    #[arg(long)]
    pub refine: bool,
    /// Threshold on |Re λ̃| for counting non-imaginary eigenvalues
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EulerInit {
    Random,
    File,
}

#[derive(Debug, Args, Serialize)]
pub struct EulerSimArgs {
    /// Truncation half-width B
    #[arg(long, default_value_t = 8)]
    pub b: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,
    #[arg(long, value_enum, default_value_t = EulerInit::Random)]
    pub init: EulerInit,
    /// Coefficient-field JSON for `--init file`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Enstrophy of the random initial state
    #[arg(long, default_value_t = 1.0)]
    pub enstrophy: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DashedInit {
    Heteroclinic,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Args, Serialize)]
pub struct DashedLineArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10)]
    pub trunc: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    #[arg(long, value_enum, default_value_t = DashedInit::Heteroclinic)]
    pub init: DashedInit,
    #[arg(long, value_enum, default_value_t = Sign::Positive)]
    pub kappa_sign: Sign,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub tau0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta0: f64,
    /// Start time on the heteroclinic orbit
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    pub t_start: f64,
    /// Random kick added to every mode of the initial state
    #[arg(long, default_value_t = 0.0)]
    pub perturbation: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct NlsSimArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 3.4)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 3e-4)]
    pub epsilon: f64,
    /// Time step [default: the stability bound 0.1 h²]
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,
    /// Relative cosine perturbation of the saddle
    #[arg(long, default_value_t = 0.1)]
    pub perturbation: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Regular,
    Singular,
}

#[derive(Debug, Args, Serialize)]
pub struct NlsSaddleArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 0.8)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Variant::Regular)]
    pub variant: Variant,
    /// Cutoff of the regular ξ variant
    #[arg(long, default_value_t = 10)]
    pub n_cut: usize,
    /// Largest continuum mode reported
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Evaluate the second-measurement formula at this Δγ
    #[arg(long)]
    pub delta_gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaxCase {
    Jacobi,
    Compatibility,
    Control,
    Isospectral,
    Beltrami,
}

#[derive(Debug, Args, Serialize)]
pub struct LaxCheckArgs {
    #[arg(long, value_enum, default_value_t = LaxCase::Jacobi)]
    pub case: LaxCase,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Largest wavenumber component of the random fields
    #[arg(long, default_value_t = 4)]
    pub bandlimit: i64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Integration time of the isospectrality check
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Box half-width of the bracket matrix
    #[arg(long, default_value_t = 4)]
    pub b: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DarbouxArgs {
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Amplitude c of the potential F = c cos(x+y)
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.3)]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowMap {
    LinearTest,
    Duffing,
    DashedLine,
    NlsPoincare,
}

#[derive(Debug, Args, Serialize)]
pub struct ShadowArgs {
    #[arg(long, value_enum, default_value_t = ShadowMap::LinearTest)]
    pub map: ShadowMap,
    /// Size of the kicks building the pseudo-orbit
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Number of pseudo-orbit points
    #[arg(long, default_value_t = 16)]
    pub length: usize,
    /// Binary word for the Duffing Palmer assembly
    #[arg(long, default_value = "11")]
    pub word: String,
    /// Half-length m of each Duffing homoclinic segment
    #[arg(long, default_value_t = 6)]
    pub segment: usize,
    /// Flow time of one map iterate [default: 1 for Duffing and dashed-line, 0.05 for NLS]
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub substeps: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 6)]
    pub trunc: usize,
    #[arg(long, default_value_t = 7)]
    pub n: usize,
    #[arg(long, default_value_t = 5.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}
