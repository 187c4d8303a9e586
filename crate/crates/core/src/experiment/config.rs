use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::multiscale::{admissible_alpha, Regime};
use crate::{Error, Result};

/// A parsed experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Replicate count; the experiment's default when `None`.
    pub replicates: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Overrides of named pass thresholds.
    pub tolerance: BTreeMap<String, f64>,
}

/// The experiment to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentKind {
    BiasSweep(BiasSweep),
    ConsistencyRate(ConsistencyRate),
    Clt(Clt),
    ScoreConsistency(ScoreConsistency),
    ExpansionResidual(ExpansionResidual),
    HurstSweep(HurstSweep),
    ConjectureScan(ConjectureScanConfig),
    CalibrationConvergence(CalibrationConvergence),
    SignatureCheck(SignatureCheck),
    TfeSweep(TfeSweep),
}

pub(crate) const NAMES: [&str; 10] = [
    "bias-sweep",
    "consistency-rate",
    "clt",
    "score-consistency",
    "expansion-residual",
    "hurst-sweep",
    "conjecture-scan",
    "calibration-convergence",
    "signature-check",
    "tfe-sweep",
];

/// Mean of `σ̂²` for physical fBM data at explicit `(ε, δ)` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasSweep {
    pub hurst: f64,
    pub sigma: f64,
    pub horizon: f64,
    /// `[ε, δ]` pairs.
    pub cells: Vec<[f64; 2]>,
}

impl Default for BiasSweep {
    fn default() -> Self {
        Self {
            hurst: 0.5,
            sigma: 1.0,
            horizon: 10.0,
            cells: vec![[0.001, 0.01], [0.01, 0.01], [0.1, 0.01]],
        }
    }
}

/// L² error of `σ̂²` along `δ = ε^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsistencyRate {
    pub hurst: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub epsilons: Vec<f64>,
}

impl Default for ConsistencyRate {
    fn default() -> Self {
        Self {
            hurst: 0.7,
            sigma: 1.0,
            alpha: 0.5,
            horizon: 4.0,
            epsilons: (4..=10).map(|j| 2f64.powi(-j)).collect(),
        }
    }
}

/// Fluctuations `(σ̂² − σ²)/√δ` at `N` cells over `[0, T]`, `ε = δ^{1/α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Clt {
    pub hurst: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub cells: usize,
}

impl Default for Clt {
    fn default() -> Self {
        Self {
            hurst: 0.7,
            sigma: 1.0,
            alpha: 0.4,
            horizon: 10.0,
            cells: 2000,
        }
    }
}

/// Scores of `δℓ` at the truth for data of the piecewise-linear-driven model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConsistency {
    pub hursts: Vec<f64>,
    pub theta: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub deltas: Vec<f64>,
    /// Time run before `t = 0` to reach the invariant law.
    pub burn_in: f64,
}

impl Default for ScoreConsistency {
    fn default() -> Self {
        Self {
            hursts: vec![0.3, 0.7],
            theta: 1.0,
            sigma: 1.0,
            horizon: 10.0,
            deltas: vec![0.1, 0.05, 0.025, 0.0125],
            burn_in: 20.0,
        }
    }
}

/// `|ℓ − ℓ₀/δ − ℓ₁|` at the truth across `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionResidual {
    pub hursts: Vec<f64>,
    pub theta: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub deltas: Vec<f64>,
    pub burn_in: f64,
}

impl Default for ExpansionResidual {
    fn default() -> Self {
        Self {
            hursts: vec![0.3, 0.5, 0.7],
            theta: 1.0,
            sigma: 1.0,
            horizon: 10.0,
            deltas: vec![0.1, 0.05, 0.025, 0.0125],
            burn_in: 20.0,
        }
    }
}

/// `Ĥ` from `2N` cells of step `δ/2` with `ε = ratio · δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HurstSweep {
    pub hursts: Vec<f64>,
    pub sigma: f64,
    pub ratio: f64,
    pub delta: f64,
    pub cells: usize,
}

impl Default for HurstSweep {
    fn default() -> Self {
        Self {
            hursts: vec![0.3, 0.7],
            sigma: 1.0,
            ratio: 0.01,
            delta: 0.01,
            cells: 4096,
        }
    }
}

/// Trace maxima of shifted Gram matrices over a grid of `(H, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjectureScanConfig {
    pub hursts: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Largest tolerated growth of a maximum per step of `sizes`.
    pub growth_limit: f64,
}

impl Default for ConjectureScanConfig {
    fn default() -> Self {
        Self {
            hursts: vec![0.3, 0.55, 0.7],
            sizes: vec![32, 64, 128, 256],
            growth_limit: 1.5,
        }
    }
}

/// Calibrated versus interpolated drivers on dyadic levels, one seed per
/// replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConvergence {
    pub hurst: f64,
    pub theta: f64,
    pub sigma: f64,
    pub p: f64,
    pub levels: usize,
    pub delta0: f64,
    pub horizon: f64,
    pub substeps: usize,
}

impl Default for CalibrationConvergence {
    fn default() -> Self {
        let d = crate::inverse::DiagnosticSettings::default();
        Self {
            hurst: 0.7,
            theta: 1.0,
            sigma: 1.0,
            p: d.p,
            levels: d.levels,
            delta0: d.delta0,
            horizon: d.horizon,
            substeps: d.substeps,
        }
    }
}

/// Chen, shuffle and p-variation checks on random piecewise-linear paths,
/// one path per replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignatureCheck {
    pub dim: usize,
    pub segments: usize,
    /// p-variation is checked against enumeration for `2..=max_nodes` nodes.
    pub max_nodes: usize,
    pub p: f64,
}

impl Default for SignatureCheck {
    fn default() -> Self {
        Self {
            dim: 3,
            segments: 8,
            max_nodes: 10,
            p: 2.5,
        }
    }
}

/// Trajectory fitting on the slow/fast system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfeSweep {
    pub hurst: f64,
    pub theta: f64,
    pub x0: f64,
    pub horizon: f64,
    pub delta: f64,
    pub refinement: usize,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// `[ε, η]` pairs tending to zero.
    pub schedule: Vec<[f64; 2]>,
    /// Noise levels for the fluctuation study at `small_epsilon`.
    pub etas: Vec<f64>,
    pub small_epsilon: f64,
    /// `ε` values of the averaging study at `η = 0`.
    pub averaging_epsilons: Vec<f64>,
}

impl Default for TfeSweep {
    fn default() -> Self {
        Self {
            hurst: 0.7,
            theta: 1.0,
            x0: 1.0,
            horizon: 1.0,
            delta: 0.01,
            refinement: 16,
            theta_lo: 0.01,
            theta_hi: 10.0,
            schedule: vec![[1e-2, 1e-2], [1e-3, 1e-3], [1e-4, 1e-4]],
            etas: vec![1e-2, 1e-3, 1e-4],
            small_epsilon: 1e-8,
            averaging_epsilons: vec![1e-2, 1e-3, 1e-4, 1e-5],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawConfig {
    experiment: String,
    #[serde(default)]
    seed: u64,
    replicates: Option<usize>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    tolerance: BTreeMap<String, f64>,
    bias_sweep: Option<BiasSweep>,
    consistency_rate: Option<ConsistencyRate>,
    clt: Option<Clt>,
    score_consistency: Option<ScoreConsistency>,
    expansion_residual: Option<ExpansionResidual>,
    hurst_sweep: Option<HurstSweep>,
    conjecture_scan: Option<ConjectureScanConfig>,
    calibration_convergence: Option<CalibrationConvergence>,
    signature_check: Option<SignatureCheck>,
    tfe_sweep: Option<TfeSweep>,
}

impl RawConfig {
    fn present_sections(&self) -> Vec<&'static str> {
        let flags = [
            self.bias_sweep.is_some(),
            self.consistency_rate.is_some(),
            self.clt.is_some(),
            self.score_consistency.is_some(),
            self.expansion_residual.is_some(),
            self.hurst_sweep.is_some(),
            self.conjecture_scan.is_some(),
            self.calibration_convergence.is_some(),
            self.signature_check.is_some(),
            self.tfe_sweep.is_some(),
        ];
        NAMES.iter().zip(flags).filter(|(_, f)| *f).map(|(n, _)| *n).collect()
    }
}

fn toml_error(e: toml::de::Error) -> Error {
    let message = e.message().to_string();
    // serde names the offending key in backticks
    let key = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field") || message.starts_with("missing field"))
        .unwrap_or("<config>")
        .to_string();
    Error::Config { key, message }
}

impl ExperimentConfig {
    /// Default parameters for the named experiment.
    pub fn named(name: &str) -> Result<Self> {
        let kind = match name {
            "bias-sweep" => ExperimentKind::BiasSweep(Default::default()),
            "consistency-rate" => ExperimentKind::ConsistencyRate(Default::default()),
            "clt" => ExperimentKind::Clt(Default::default()),
            "score-consistency" => ExperimentKind::ScoreConsistency(Default::default()),
            "expansion-residual" => ExperimentKind::ExpansionResidual(Default::default()),
            "hurst-sweep" => ExperimentKind::HurstSweep(Default::default()),
            "conjecture-scan" => ExperimentKind::ConjectureScan(Default::default()),
            "calibration-convergence" => ExperimentKind::CalibrationConvergence(Default::default()),
            "signature-check" => ExperimentKind::SignatureCheck(Default::default()),
            "tfe-sweep" => ExperimentKind::TfeSweep(Default::default()),
            other => {
                return Err(Error::config(
                    "experiment",
                    format!("unknown experiment `{other}`; expected one of {}", NAMES.join(", ")),
                ))
            }
        };
        Ok(Self {
            kind,
            seed: 0,
            replicates: None,
            output: None,
            threads: None,
            tolerance: BTreeMap::new(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(toml_error)?;
        let mut config = Self::named(&raw.experiment)?;
        for section in raw.present_sections() {
            if section != raw.experiment {
                return Err(Error::config(
                    section,
                    format!("section does not belong to experiment `{}`", raw.experiment),
                ));
            }
        }
        macro_rules! take {
            ($field:ident, $variant:ident) => {
                if let Some(p) = raw.$field {
                    config.kind = ExperimentKind::$variant(p);
                }
            };
        }
        take!(bias_sweep, BiasSweep);
        take!(consistency_rate, ConsistencyRate);
        take!(clt, Clt);
        take!(score_consistency, ScoreConsistency);
        take!(expansion_residual, ExpansionResidual);
        take!(hurst_sweep, HurstSweep);
        take!(conjecture_scan, ConjectureScan);
        take!(calibration_convergence, CalibrationConvergence);
        take!(signature_check, SignatureCheck);
        take!(tfe_sweep, TfeSweep);
        config.seed = raw.seed;
        config.replicates = raw.replicates;
        config.output = raw.output;
        config.threads = raw.threads;
        config.tolerance = raw.tolerance;
        config.validate()?;
        Ok(config)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::BiasSweep(_) => NAMES[0],
            ExperimentKind::ConsistencyRate(_) => NAMES[1],
            ExperimentKind::Clt(_) => NAMES[2],
            ExperimentKind::ScoreConsistency(_) => NAMES[3],
            ExperimentKind::ExpansionResidual(_) => NAMES[4],
            ExperimentKind::HurstSweep(_) => NAMES[5],
            ExperimentKind::ConjectureScan(_) => NAMES[6],
            ExperimentKind::CalibrationConvergence(_) => NAMES[7],
            ExperimentKind::SignatureCheck(_) => NAMES[8],
            ExperimentKind::TfeSweep(_) => NAMES[9],
        }
    }

    /// The replicate count in effect.
    pub fn replicate_count(&self) -> usize {
        self.replicates.unwrap_or(match self.kind {
            ExperimentKind::BiasSweep(_) | ExperimentKind::Clt(_) => 2000,
            ExperimentKind::ConsistencyRate(_) => 500,
            ExperimentKind::ScoreConsistency(_) | ExperimentKind::SignatureCheck(_) => 100,
            ExperimentKind::ExpansionResidual(_) => 50,
            ExperimentKind::HurstSweep(_) | ExperimentKind::TfeSweep(_) => 200,
            ExperimentKind::ConjectureScan(_) => 1,
            ExperimentKind::CalibrationConvergence(_) => 20,
        })
    }

    /// Named thresholds of this experiment and their defaults.
    pub fn default_tolerances(&self) -> &'static [(&'static str, f64)] {
        match self.kind {
            ExperimentKind::BiasSweep(_) => &[("z_max", 3.0)],
            ExperimentKind::ConsistencyRate(_) => &[("slope", 0.15)],
            ExperimentKind::Clt(_) => &[("level", 0.01), ("variance_rel", 0.15)],
            ExperimentKind::ScoreConsistency(_) => &[],
            ExperimentKind::ExpansionResidual(_) => &[("slope", 0.3)],
            ExperimentKind::HurstSweep(_) => &[("abs_error", 0.05)],
            ExperimentKind::ConjectureScan(_) => &[("trace_rel", 1e-6)],
            ExperimentKind::CalibrationConvergence(_) => &[("ratio_max", 0.5), ("order", 0.2)],
            ExperimentKind::SignatureCheck(_) => &[("identity", 1e-12), ("pvar", 1e-12)],
            ExperimentKind::TfeSweep(_) => &[("recovery", 1e-7), ("sd_spread", 0.25), ("slope", 0.15)],
        }
    }

    /// Override or default of a named threshold.
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerance.get(key).copied().unwrap_or_else(|| {
            self.default_tolerances()
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .expect("tolerance keys are fixed per experiment")
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (key, value) in &self.tolerance {
            if !self.default_tolerances().iter().any(|(k, _)| k == key) {
                return Err(Error::config(
                    format!("tolerance.{key}"),
                    format!("not a tolerance of `{}`", self.name()),
                ));
            }
            if !(value.is_finite() && *value >= 0.0) {
                return Err(Error::config(format!("tolerance.{key}"), "must be finite and >= 0"));
            }
        }
        if self.replicates == Some(0) {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        let v = Validator(self.name());
        match &self.kind {
            ExperimentKind::BiasSweep(p) => {
                v.hurst("hurst", p.hurst)?;
                v.positive("sigma", p.sigma)?;
                v.positive("horizon", p.horizon)?;
                v.nonempty("cells", p.cells.len())?;
                for c in &p.cells {
                    v.positive("cells", c[0].min(c[1]))?;
                    v.check("cells", c[1] <= p.horizon, "delta must not exceed the horizon")?;
                }
            }
            ExperimentKind::ConsistencyRate(p) => {
                v.hurst("hurst", p.hurst)?;
                v.positive("sigma", p.sigma)?;
                v.positive("alpha", p.alpha)?;
                v.positive("horizon", p.horizon)?;
                v.check("epsilons", p.epsilons.len() >= 2, "need at least two values")?;
                for e in &p.epsilons {
                    v.check("epsilons", *e > 0.0 && *e < 1.0, "values must lie in (0, 1)")?;
                }
            }
            ExperimentKind::Clt(p) => {
                v.hurst("hurst", p.hurst)?;
                v.positive("sigma", p.sigma)?;
                v.positive("horizon", p.horizon)?;
                v.check("cells", p.cells >= 2, "need at least two cells")?;
                let (_, upper) = admissible_alpha(p.hurst, Regime::Clt)?;
                v.check(
                    "alpha",
                    p.alpha > 0.0 && p.alpha < upper,
                    &format!("must lie in (0, {upper}) for H = {}", p.hurst),
                )?;
            }
            ExperimentKind::ScoreConsistency(ScoreConsistency {
                hursts,
                theta,
                sigma,
                horizon,
                deltas,
                burn_in,
            })
            | ExperimentKind::ExpansionResidual(ExpansionResidual {
                hursts,
                theta,
                sigma,
                horizon,
                deltas,
                burn_in,
            }) => {
                v.nonempty("hursts", hursts.len())?;
                for h in hursts {
                    v.hurst("hursts", *h)?;
                }
                v.positive("theta", *theta)?;
                v.positive("sigma", *sigma)?;
                v.positive("horizon", *horizon)?;
                v.check("deltas", deltas.len() >= 2, "need at least two values")?;
                for d in deltas {
                    v.check("deltas", *d > 0.0 && *d < *horizon, "values must lie in (0, horizon)")?;
                }
                v.check("burn_in", *burn_in >= 0.0 && burn_in.is_finite(), "must be >= 0")?;
            }
            ExperimentKind::HurstSweep(p) => {
                v.nonempty("hursts", p.hursts.len())?;
                for h in &p.hursts {
                    v.hurst("hursts", *h)?;
                }
                v.positive("sigma", p.sigma)?;
                v.positive("ratio", p.ratio)?;
                v.positive("delta", p.delta)?;
                v.check("cells", p.cells >= 2, "need at least two cells")?;
            }
            ExperimentKind::ConjectureScan(p) => {
                v.nonempty("hursts", p.hursts.len())?;
                for h in &p.hursts {
                    v.hurst("hursts", *h)?;
                }
                v.nonempty("sizes", p.sizes.len())?;
                v.check("sizes", p.sizes.iter().all(|n| *n >= 1), "sizes must be >= 1")?;
                v.check("growth_limit", p.growth_limit >= 1.0, "must be >= 1")?;
            }
            ExperimentKind::CalibrationConvergence(p) => {
                v.hurst("hurst", p.hurst)?;
                v.check("hurst", p.hurst > 0.25, "must exceed 1/4")?;
                v.positive("sigma", p.sigma)?;
                v.check("theta", p.theta >= 0.0 && p.theta.is_finite(), "must be >= 0")?;
                v.check("p", p.p * p.hurst > 1.0 && p.p < 3.0, "need 1/H < p < 3")?;
                v.check("levels", p.levels >= 1 && p.levels <= 12, "must lie in 1..=12")?;
                v.positive("delta0", p.delta0)?;
                v.positive("horizon", p.horizon)?;
                v.check("substeps", p.substeps >= 1, "must be >= 1")?;
            }
            ExperimentKind::SignatureCheck(p) => {
                v.check("dim", (1..=8).contains(&p.dim), "must lie in 1..=8")?;
                v.check("segments", p.segments >= 2, "must be >= 2")?;
                v.check("max_nodes", (2..=16).contains(&p.max_nodes), "must lie in 2..=16")?;
                v.check("p", p.p >= 1.0 && p.p.is_finite(), "must be >= 1")?;
            }
            ExperimentKind::TfeSweep(p) => {
                v.check("hurst", p.hurst > 0.5 && p.hurst < 1.0, "must lie in (1/2, 1)")?;
                v.positive("theta", p.theta)?;
                v.check("x0", p.x0 != 0.0 && p.x0.is_finite(), "must be finite and nonzero")?;
                v.positive("horizon", p.horizon)?;
                v.positive("delta", p.delta)?;
                v.check("refinement", p.refinement >= 1, "must be >= 1")?;
                v.check(
                    "theta_lo",
                    p.theta_lo > 0.0 && p.theta_lo < p.theta && p.theta < p.theta_hi,
                    "need 0 < theta_lo < theta < theta_hi",
                )?;
                v.check("schedule", p.schedule.len() >= 2, "need at least two pairs")?;
                for [e, n] in &p.schedule {
                    v.check("schedule", *e > 0.0 && *n >= 0.0, "need epsilon > 0 and eta >= 0")?;
                }
                v.check("etas", p.etas.len() >= 2, "need at least two values")?;
                v.check("etas", p.etas.iter().all(|e| *e > 0.0), "values must be > 0")?;
                v.positive("small_epsilon", p.small_epsilon)?;
                v.check("averaging_epsilons", p.averaging_epsilons.len() >= 2, "need at least two values")?;
                v.check(
                    "averaging_epsilons",
                    p.averaging_epsilons.iter().all(|e| *e > 0.0),
                    "values must be > 0",
                )?;
            }
        }
        Ok(())
    }
}

struct Validator(&'static str);

impl Validator {
    fn check(&self, key: &str, ok: bool, message: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("{}.{key}", self.0), message))
        }
    }

    fn positive(&self, key: &str, v: f64) -> Result<()> {
        self.check(key, v > 0.0 && v.is_finite(), &format!("must be > 0, got {v}"))
    }

    fn hurst(&self, key: &str, h: f64) -> Result<()> {
        self.check(key, h > 0.0 && h < 1.0, &format!("must lie in (0, 1), got {h}"))
    }

    fn nonempty(&self, key: &str, len: usize) -> Result<()> {
        self.check(key, len > 0, "must not be empty")
    }
}
