//! TOML experiment configuration: distribution + oracle + algorithm +
//! schedule parameters + assertions, validated against the library's
//! preconditions at load time.

use serde::{Deserialize, Serialize};
use tron_core::adversary::{BetaFn, OracleConfig, Perturbation};
use tron_core::distributions::InputDistribution;
use tron_core::error::{Result, TronError};
use tron_core::RealVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    GlmTron,
    ReluTron,
    Neurotron,
    VerifyRecursion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    UniformBox { low: Vec<f64>, high: Vec<f64> },
    IsotropicGaussian { n: usize, sigma: f64 },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<InputDistribution> {
        match self {
            DistributionSpec::UniformBox { low, high } => InputDistribution::uniform_box(
                RealVector::new(low.clone())?,
                RealVector::new(high.clone())?,
            ),
            DistributionSpec::IsotropicGaussian { n, sigma } => {
                InputDistribution::isotropic_gaussian(*n, *sigma)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSpec {
    Constant { p: f64 },
    IndicatorHalfspace { v: Vec<f64>, p: f64 },
}

impl BetaSpec {
    pub fn build(&self) -> Result<BetaFn> {
        Ok(match self {
            BetaSpec::Constant { p } => BetaFn::Constant { p: *p },
            BetaSpec::IndicatorHalfspace { v, p } => BetaFn::IndicatorHalfspace {
                v: RealVector::new(v.clone())?,
                p: *p,
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum PerturbationSpec {
    Uniform,
    SignedMax,
    Realization { w_adv: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSpec {
    pub w_star: Vec<f64>,
    #[serde(default)]
    pub theta_star: f64,
    pub beta: BetaSpec,
    #[serde(default = "default_perturbation")]
    pub perturbation: PerturbationSpec,
}

fn default_perturbation() -> PerturbationSpec {
    PerturbationSpec::Uniform
}

impl OracleSpec {
    pub fn build(&self) -> Result<OracleConfig> {
        let perturbation = match &self.perturbation {
            PerturbationSpec::Uniform => Perturbation::Uniform,
            PerturbationSpec::SignedMax => Perturbation::SignedMax,
            PerturbationSpec::Realization { w_adv } => Perturbation::Realization {
                w_adv: RealVector::new(w_adv.clone())?,
            },
        };
        OracleConfig::new(
            RealVector::new(self.w_star.clone())?,
            self.theta_star,
            self.beta.build()?,
            perturbation,
        )
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleCase {
    Case1,
    Case2,
    /// Case 1 when `theta_star == 0`, Case 2 otherwise.
    #[default]
    Auto,
}

fn default_mc_samples() -> usize {
    1_000_000
}

fn default_max_iters() -> usize {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReluTronSection {
    pub batch_size: usize,
    #[serde(default)]
    pub case: ScheduleCase,
    /// Case 1 slack parameter.
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    /// Case 2 truncation constant; default `2/lambda1(theta*)`.
    pub k_const: Option<f64>,
    /// Case 2 step tuning; default twice the lower bound.
    pub gamma: Option<f64>,
    pub w_init: Vec<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Monte-Carlo sample count for the moment constants.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_delta0() -> f64 {
    tron_core::relu_tron::DEFAULT_DELTA0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlmTronSection {
    #[serde(default = "default_activation")]
    pub activation: String,
    #[serde(default)]
    pub leaky_alpha: f64,
    /// Synthesized dataset size when no CSV is given; inputs come from the
    /// distribution (must lie in the unit ball) and labels from the oracle.
    #[serde(default = "default_glm_samples")]
    pub n_samples: usize,
    /// Optional dataset CSV (columns `x0..x{n-1},y`) overriding synthesis.
    pub dataset_csv: Option<String>,
    pub epsilon: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_activation() -> String {
    "relu".into()
}

fn default_glm_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeurotronSection {
    pub filter_dim: usize,
    pub half_width: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_wishart_dof")]
    pub wishart_dof: usize,
    /// Scale of the patch offset matrix C (entries uniform in ±scale/2).
    #[serde(default = "default_c_scale")]
    pub c_scale: f64,
    /// Base points drawn before symmetrization when no CSV is given.
    #[serde(default = "default_neuro_samples")]
    pub n_samples: usize,
    pub dataset_csv: Option<String>,
    /// Reference filter generating labels for synthesized data.
    pub w_ref: Vec<f64>,
    pub w_init: Vec<f64>,
    pub eps: f64,
    /// Multiplier applied to the schedule's gamma lower bound (must exceed 1).
    #[serde(default = "default_neuro_gamma")]
    pub gamma_factor: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_wishart_dof() -> usize {
    30
}

fn default_c_scale() -> f64 {
    0.05
}

fn default_neuro_samples() -> usize {
    10
}

fn default_neuro_gamma() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRecursionSection {
    pub lemma: String,
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_draws() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assertion {
    /// Fraction of repeats with terminal squared error <= eps^2.
    SuccessRateAtLeast { value: f64 },
    /// Mean terminal squared error (vs the relevant reference weight).
    TerminalMeanBelow { value: f64 },
    /// Empirical convergence step <= value * predicted_t.
    EmpiricalTWithinFactor { value: f64 },
    /// All randomized recursion draws certified.
    AllCertified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    pub distribution: Option<DistributionSpec>,
    pub oracle: Option<OracleSpec>,
    pub relu_tron: Option<ReluTronSection>,
    pub glm_tron: Option<GlmTronSection>,
    pub neurotron: Option<NeurotronSection>,
    pub verify_recursion: Option<VerifyRecursionSection>,
    #[serde(default, rename = "assert")]
    pub assertions: Vec<Assertion>,
}

fn default_seed() -> u64 {
    0
}

fn default_repeats() -> usize {
    50
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| TronError::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn section_error(name: &'static str) -> TronError {
        TronError::InvalidParameter {
            name,
            detail: "section required for the selected algorithm".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::ReluTron => {
                let sec = self.relu_tron.as_ref().ok_or(Self::section_error("relu_tron"))?;
                let dist = self
                    .distribution
                    .as_ref()
                    .ok_or(Self::section_error("distribution"))?
                    .build()?;
                let oracle = self
                    .oracle
                    .as_ref()
                    .ok_or(Self::section_error("oracle"))?
                    .build()?;
                if dist.dim() != oracle.dim() || sec.w_init.len() != oracle.dim() {
                    return Err(TronError::DimensionMismatch {
                        context: "config: relu_tron dims",
                        expected: oracle.dim(),
                        got: dist.dim().max(sec.w_init.len()),
                    });
                }
                if self.eps.is_none() || self.delta.is_none() {
                    return Err(TronError::InvalidParameter {
                        name: "eps/delta",
                        detail: "relu_tron experiments need top-level eps and delta".into(),
                    });
                }
            }
            Algorithm::GlmTron => {
                let _ = self.glm_tron.as_ref().ok_or(Self::section_error("glm_tron"))?;
                if self.oracle.is_none() {
                    return Err(Self::section_error("oracle"));
                }
            }
            Algorithm::Neurotron => {
                let sec = self.neurotron.as_ref().ok_or(Self::section_error("neurotron"))?;
                if sec.w_ref.len() != sec.filter_dim || sec.w_init.len() != sec.filter_dim {
                    return Err(TronError::DimensionMismatch {
                        context: "config: neurotron filter dims",
                        expected: sec.filter_dim,
                        got: sec.w_ref.len().max(sec.w_init.len()),
                    });
                }
            }
            Algorithm::VerifyRecursion => {
                let sec = self
                    .verify_recursion
                    .as_ref()
                    .ok_or(Self::section_error("verify_recursion"))?;
                tron_core::recursion::LemmaId::parse(&sec.lemma)?;
            }
        }
        Ok(())
    }
}
