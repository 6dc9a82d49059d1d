//! Run configuration: a flat TOML document, overridden by environment
//! variables and then by command-line flags.

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use layoff_sir::inference::{McmcConfig, MleConfig, NelderMeadOptions, PipelineConfig, DIM};
use layoff_sir::sir::DEFAULT_DELTA;
use layoff_sir::{PriorBox, RateVariant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Prefix for environment overrides, e.g. `LAYOFF_SIR_SEED=7`.
pub const ENV_PREFIX: &str = "LAYOFF_SIR_";

/// Weekly baseline used when neither the config nor an aggregate summary
/// supplies one.
pub const DEFAULT_BASELINE: f64 = 0.846;

/// Inclusive range of cutoffs written `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CutoffRange {
    pub first: usize,
    pub last: usize,
}

impl CutoffRange {
    pub fn iter(&self) -> RangeInclusive<usize> {
        self.first..=self.last
    }
}

impl FromStr for CutoffRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("cutoffs must look like A..B, got {s:?}"))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad cutoff {v:?}: {e}"))
        };
        let (first, last) = (parse(a)?, parse(b)?);
        if first > last {
            return Err(format!("empty cutoff range {first}..{last}"));
        }
        Ok(Self { first, last })
    }
}

impl TryFrom<String> for CutoffRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CutoffRange> for String {
    fn from(r: CutoffRange) -> String {
        format!("{}..{}", r.first, r.last)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Independent chains for `sample`; chain `c` uses seed `seed + c`.
    pub chains: usize,
    pub dt: f64,
    /// Horizon for the end-week scan, in weeks.
    pub horizon: f64,
    pub delta: f64,
    pub variant: RateVariant,
    pub baseline: Option<f64>,
    pub level: f64,
    pub n_sims: usize,
    /// Length of simulated series.
    pub weeks: Option<usize>,
    pub proposal_scale: f64,
    pub adapt: bool,
    pub max_evals: usize,
    pub restarts: usize,
    pub min_weeks: usize,
    pub no_optimize: bool,
    pub dedup: bool,
    pub from_week: Option<i64>,
    pub to_week: Option<i64>,
    pub cutoffs: Option<CutoffRange>,

    pub prior_j0_min: f64,
    pub prior_j0_max: f64,
    pub prior_k_min: f64,
    pub prior_k_max: f64,
    pub prior_n_min: f64,
    pub prior_n_max: f64,
    pub prior_alpha_min: f64,
    pub prior_alpha_max: f64,
    pub prior_beta_min: f64,
    pub prior_beta_max: f64,

    pub init_j0: Option<f64>,
    pub init_k: Option<f64>,
    pub init_n: Option<f64>,
    pub init_alpha: Option<f64>,
    pub init_beta: Option<f64>,

    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub series: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub chain: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prior = PriorBox::default();
        let mcmc = McmcConfig::default();
        let mle = MleConfig::default();
        Self {
            seed: 1,
            iterations: mcmc.iterations,
            burn_in: mcmc.burn_in,
            chains: 1,
            dt: mcmc.dt,
            horizon: mcmc.t_end_horizon,
            delta: DEFAULT_DELTA,
            variant: RateVariant::Snapshot,
            baseline: None,
            level: 0.95,
            n_sims: 2000,
            weeks: None,
            proposal_scale: mcmc.proposal_scales[0],
            adapt: mcmc.adapt,
            max_evals: mle.optimizer.max_evals,
            restarts: mle.optimizer.restarts,
            min_weeks: mle.min_weeks,
            no_optimize: false,
            dedup: false,
            from_week: None,
            to_week: None,
            cutoffs: None,
            prior_j0_min: prior.j0.0,
            prior_j0_max: prior.j0.1,
            prior_k_min: prior.k.0,
            prior_k_max: prior.k.1,
            prior_n_min: prior.n_pop.0,
            prior_n_max: prior.n_pop.1,
            prior_alpha_min: prior.alpha.0,
            prior_alpha_max: prior.alpha.1,
            prior_beta_min: prior.beta.0,
            prior_beta_max: prior.beta.1,
            init_j0: None,
            init_k: None,
            init_n: None,
            init_alpha: None,
            init_beta: None,
            input: None,
            out: PathBuf::from("."),
            series: None,
            params: None,
            chain: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed must be below 2^63, got {}", self.seed));
        }
        for (name, v) in [
            ("iterations", self.iterations),
            ("chains", self.chains),
            ("n_sims", self.n_sims),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("dt", self.dt),
            ("horizon", self.horizon),
            ("delta", self.delta),
            ("proposal_scale", self.proposal_scale),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a positive number, got {v}"));
            }
        }
        if let Some(b) = self.baseline {
            if !(b > 0.0) || !b.is_finite() {
                return bad(format!("baseline must be positive, got {b}"));
            }
        }
        if !(0.0..=1.0).contains(&self.level) {
            return bad(format!("level must lie in [0, 1], got {}", self.level));
        }
        if let (Some(a), Some(b)) = (self.from_week, self.to_week) {
            if a > b {
                return bad(format!("from_week {a} after to_week {b}"));
            }
        }
        self.prior()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn prior(&self) -> PriorBox {
        PriorBox {
            j0: (self.prior_j0_min, self.prior_j0_max),
            k: (self.prior_k_min, self.prior_k_max),
            n_pop: (self.prior_n_min, self.prior_n_max),
            alpha: (self.prior_alpha_min, self.prior_alpha_max),
            beta: (self.prior_beta_min, self.prior_beta_max),
        }
    }

    pub fn mle(&self) -> MleConfig {
        MleConfig {
            variant: self.variant,
            dt: self.dt,
            prior: self.prior(),
            optimizer: NelderMeadOptions {
                max_evals: self.max_evals,
                restarts: self.restarts,
                ..NelderMeadOptions::default()
            },
            min_weeks: self.min_weeks,
        }
    }

    pub fn mcmc(&self, baseline: f64) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            seed: self.seed,
            baseline,
            t_end_horizon: self.horizon,
            proposal_scales: [self.proposal_scale; DIM],
            adapt: self.adapt,
            variant: self.variant,
            dt: self.dt,
            prior: self.prior(),
        }
    }

    pub fn pipeline(&self, baseline: f64) -> PipelineConfig {
        PipelineConfig {
            mle: self.mle(),
            mcmc: self.mcmc(baseline),
            level: self.level,
            delta: self.delta,
        }
    }

    /// All five initial values, if every one is set.
    pub fn init_values(&self) -> Option<[f64; 5]> {
        Some([
            self.init_j0?,
            self.init_k?,
            self.init_n?,
            self.init_alpha?,
            self.init_beta?,
        ])
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Flag and environment overrides. Every field is optional; unset fields
/// leave the file value alone.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Flat TOML config file.
    #[arg(long, env = "LAYOFF_SIR_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "LAYOFF_SIR_SEED", global = true)]
    pub seed: Option<u64>,
    /// Primary input: events CSV for `aggregate`, series CSV for fitting
    /// commands, parameter file for `simulate`.
    #[arg(long, env = "LAYOFF_SIR_INPUT", global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, env = "LAYOFF_SIR_OUT", global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "LAYOFF_SIR_VARIANT", global = true)]
    pub variant: Option<RateVariant>,
    /// Weekly expected count that marks the end of the wave.
    #[arg(long, env = "LAYOFF_SIR_BASELINE", global = true)]
    pub baseline: Option<f64>,
    #[arg(long, env = "LAYOFF_SIR_ITERATIONS", global = true)]
    pub iterations: Option<usize>,
    #[arg(long, env = "LAYOFF_SIR_BURN_IN", global = true)]
    pub burn_in: Option<usize>,
    /// Inclusive cutoff range, e.g. `50..64`.
    #[arg(long, env = "LAYOFF_SIR_CUTOFFS", global = true)]
    pub cutoffs: Option<CutoffRange>,
    #[arg(long, env = "LAYOFF_SIR_CHAINS", global = true)]
    pub chains: Option<usize>,
    #[arg(long, env = "LAYOFF_SIR_DT", global = true)]
    pub dt: Option<f64>,
    #[arg(long, env = "LAYOFF_SIR_HORIZON", global = true)]
    pub horizon: Option<f64>,
    #[arg(long, env = "LAYOFF_SIR_DELTA", global = true)]
    pub delta: Option<f64>,
    #[arg(long, env = "LAYOFF_SIR_LEVEL", global = true)]
    pub level: Option<f64>,
    #[arg(long, env = "LAYOFF_SIR_N_SIMS", global = true)]
    pub n_sims: Option<usize>,
    #[arg(long, env = "LAYOFF_SIR_WEEKS", global = true)]
    pub weeks: Option<usize>,
    #[arg(
        long,
        env = "LAYOFF_SIR_FROM_WEEK",
        global = true,
        allow_hyphen_values = true
    )]
    pub from_week: Option<i64>,
    #[arg(
        long,
        env = "LAYOFF_SIR_TO_WEEK",
        global = true,
        allow_hyphen_values = true
    )]
    pub to_week: Option<i64>,
    #[arg(long, env = "LAYOFF_SIR_SERIES", global = true)]
    pub series: Option<PathBuf>,
    #[arg(long, env = "LAYOFF_SIR_PARAMS", global = true)]
    pub params: Option<PathBuf>,
    #[arg(long, env = "LAYOFF_SIR_CHAIN", global = true)]
    pub chain: Option<PathBuf>,
    /// Count at most one event per company and week.
    #[arg(long, env = "LAYOFF_SIR_DEDUP", global = true)]
    pub dedup: bool,
    /// Skip optimization in `fit` and echo the configured initial values.
    #[arg(long, env = "LAYOFF_SIR_NO_OPTIMIZE", global = true)]
    pub no_optimize: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    config.$field = v.clone().into();
                }
            )*};
        }
        set!(
            seed, input, out, variant, baseline, iterations, burn_in, cutoffs, chains, dt, horizon,
            delta, level
        );
        set!(n_sims, weeks, from_week, to_week, series, params, chain);
        config.dedup |= self.dedup;
        config.no_optimize |= self.no_optimize;
    }

    /// Config file (if any) with these overrides applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut config);
        config.validate()?;
        Ok(config)
    }
}
