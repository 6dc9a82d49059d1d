//! Full fit-then-sample pipeline and its rolling-cutoff repetition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::WeeklySeries;
use crate::parallel;
use crate::sir::DEFAULT_DELTA;

use super::{
    credible_interval, initial_guess, mh_sample, mle_fit_with, CredibleInterval, McmcConfig,
    MleConfig, MleFit, PosteriorChain,
};

/// Shortest truncated series a scan will fit.
pub const MIN_CUTOFF: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mle: MleConfig,
    /// Sampler settings; `seed` is the run seed for a single pipeline and
    /// the base seed for a scan.
    pub mcmc: McmcConfig,
    pub level: f64,
    pub delta: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mle: MleConfig::default(),
            mcmc: McmcConfig::default(),
            level: 0.95,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub fit: MleFit,
    /// False if the optimizer hit its evaluation budget; the fit is then
    /// the best point seen.
    pub fit_converged: bool,
    pub chain: PosteriorChain,
    pub interval: CredibleInterval,
}

/// Fit from a data-driven start, sample from the fit, summarize the end week.
pub fn run_pipeline(series: &WeeklySeries, config: &PipelineConfig) -> Result<PipelineResult> {
    let mut mcmc = config.mcmc.clone();
    mcmc.variant = config.mle.variant;
    mcmc.dt = config.mle.dt;
    let init = initial_guess(series, config.mle.variant, config.delta)?;
    let (fit, fit_converged) = match mle_fit_with(series, &init, &config.mle) {
        Ok(fit) => (fit, true),
        Err(Error::Convergence {
            best,
            best_log_likelihood,
            evaluations,
        }) => (
            MleFit {
                params: *best,
                log_likelihood: best_log_likelihood,
                evaluations,
            },
            false,
        ),
        Err(e) => return Err(e),
    };
    let chain = mh_sample(series, &fit.params, &mcmc)?;
    let interval = credible_interval(&chain, config.level)?;
    Ok(PipelineResult {
        fit,
        fit_converged,
        chain,
        interval,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub cutoff: usize,
    pub seed: u64,
    pub result: std::result::Result<ScanSummary, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub interval: CredibleInterval,
    pub acceptance_rate: f64,
    pub censored_fraction: f64,
    pub fit_converged: bool,
}

/// Refit on the first `cutoff` weeks for each cutoff. Each run is seeded
/// with `config.mcmc.seed + cutoff`; failures are recorded per entry.
pub fn sensitivity_scan(
    series: &WeeklySeries,
    cutoffs: &[usize],
    config: &PipelineConfig,
) -> Vec<ScanEntry> {
    parallel::map_slice(cutoffs, |&cutoff| {
        let seed = config.mcmc.seed.wrapping_add(cutoff as u64);
        let result = scan_one(series, cutoff, seed, config).map_err(|e| e.to_string());
        ScanEntry {
            cutoff,
            seed,
            result,
        }
    })
}

fn scan_one(
    series: &WeeklySeries,
    cutoff: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<ScanSummary> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::Precondition(format!(
            "cutoff {cutoff} below minimum {MIN_CUTOFF}"
        )));
    }
    if cutoff > series.len() {
        return Err(Error::Precondition(format!(
            "cutoff {cutoff} beyond series length {}",
            series.len()
        )));
    }
    let mut run = config.clone();
    run.mcmc.seed = seed;
    let out = run_pipeline(&series.truncate(cutoff), &run)?;
    Ok(ScanSummary {
        interval: out.interval,
        acceptance_rate: out.chain.acceptance_rate,
        censored_fraction: out.chain.censored_fraction(),
        fit_converged: out.fit_converged,
    })
}
