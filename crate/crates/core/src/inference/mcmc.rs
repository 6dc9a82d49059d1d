//! Component-wise random-walk Metropolis on the unconstrained coordinates.
//!
//! The target is the likelihood times uniform priors on the original
//! parameters, so each log-density carries the log-Jacobian of the
//! transform. Proposal scales adapt during burn-in only; retained draws
//! come from a fixed kernel.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::WeeklySeries;
use crate::rng::seeded;
use crate::sir::{crossing_on_curve, integrate_sir, EpidemicCurve, RateVariant, DEFAULT_DT};

use super::{FullParams, PriorBox, DIM};

/// Horizon for the per-draw end-week scan, in weeks.
pub const DEFAULT_T_END_HORIZON: f64 = 300.0;

const ADAPT_BATCH: usize = 50;
const TARGET_ACCEPTANCE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Retained sweeps after burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Weekly expected count defining the end of the epidemic.
    pub baseline: f64,
    pub t_end_horizon: f64,
    /// Initial proposal standard deviations on the unconstrained coordinates.
    pub proposal_scales: [f64; DIM],
    /// Adapt proposal scales during burn-in.
    pub adapt: bool,
    pub variant: RateVariant,
    /// ODE integration step, in weeks.
    pub dt: f64,
    pub prior: PriorBox,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            burn_in: 1000,
            seed: 0,
            baseline: 0.846,
            t_end_horizon: DEFAULT_T_END_HORIZON,
            proposal_scales: [0.05; DIM],
            adapt: true,
            variant: RateVariant::Snapshot,
            dt: DEFAULT_DT,
            prior: PriorBox::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub draws: Vec<FullParams>,
    pub log_likelihoods: Vec<f64>,
    /// End week per draw; censored draws hold the horizon.
    pub t_end_draws: Vec<u32>,
    /// Draws whose expected count never fell below baseline within the horizon.
    pub censored: Vec<bool>,
    /// Accepted fraction of component proposals over the retained sweeps.
    pub acceptance_rate: f64,
    pub seed: u64,
    pub burn_in: usize,
    pub baseline: f64,
    /// Proposal scales in force for the retained sweeps.
    pub proposal_scales: [f64; DIM],
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.censored.is_empty() {
            return 0.0;
        }
        self.censored.iter().filter(|&&c| c).count() as f64 / self.censored.len() as f64
    }
}

struct Target<'a> {
    series: &'a WeeklySeries,
    variant: RateVariant,
    prior: PriorBox,
    delta: f64,
    dt: f64,
}

impl Target<'_> {
    /// `(log posterior on θ, log-likelihood)`, or `None` outside the support.
    fn evaluate(&self, theta: &[f64; DIM]) -> Option<(f64, f64)> {
        let p = FullParams::from_unconstrained(theta, self.delta);
        if !self.prior.contains(&p) {
            return None;
        }
        let ll = p
            .log_likelihood_dt(self.series, self.variant, self.dt)
            .ok()?;
        if ll == f64::NEG_INFINITY || ll.is_nan() {
            return None;
        }
        Some((ll + p.log_jacobian(), ll))
    }
}

/// Draw `config.iterations` retained sweeps from the posterior, starting at
/// `init` (normally the maximum-likelihood fit).
pub fn mh_sample(
    series: &WeeklySeries,
    init: &FullParams,
    config: &McmcConfig,
) -> Result<PosteriorChain> {
    if series.is_empty() {
        return Err(Error::EmptyInput("weekly series"));
    }
    if config.iterations == 0 {
        return Err(Error::Precondition("iterations must be >= 1".into()));
    }
    if !(config.baseline > 0.0) {
        return Err(Error::Domain(format!(
            "baseline must be > 0, got {}",
            config.baseline
        )));
    }
    if config
        .proposal_scales
        .iter()
        .any(|s| !(*s >= 0.0) || !s.is_finite())
    {
        return Err(Error::Domain(
            "proposal scales must be finite and >= 0".into(),
        ));
    }
    config.prior.check(init).map_err(|_| Error::InvalidStart)?;

    let target = Target {
        series,
        variant: config.variant,
        prior: config.prior,
        delta: init.epidemic.delta,
        dt: config.dt,
    };
    let mut theta = init.to_unconstrained();
    let (mut log_post, mut log_lik) = target.evaluate(&theta).ok_or(Error::InvalidStart)?;
    let mut current = *init;

    let mut rng = seeded(config.seed);
    let mut scales = config.proposal_scales;
    let mut batch_accepts = [0usize; DIM];
    let mut accepted = 0usize;
    let mut proposed = 0usize;

    let mut chain = PosteriorChain {
        draws: Vec::with_capacity(config.iterations),
        log_likelihoods: Vec::with_capacity(config.iterations),
        t_end_draws: Vec::with_capacity(config.iterations),
        censored: Vec::with_capacity(config.iterations),
        acceptance_rate: 0.0,
        seed: config.seed,
        burn_in: config.burn_in,
        baseline: config.baseline,
        proposal_scales: scales,
    };
    let mut last_t_end: Option<(FullParams, u32, bool)> = None;
    let mut horizon_curve: Option<EpidemicCurve> = None;

    for sweep in 0..config.burn_in + config.iterations {
        let retained = sweep >= config.burn_in;
        let mut moved = false;
        for c in 0..DIM {
            let z: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            let mut proposal = theta;
            proposal[c] += scales[c] * z;
            let accept = if proposal == theta {
                Some((log_post, log_lik))
            } else {
                match target.evaluate(&proposal) {
                    Some((lp, ll)) if u.ln() < lp - log_post => Some((lp, ll)),
                    _ => None,
                }
            };
            if let Some((lp, ll)) = accept {
                if proposal != theta {
                    moved = true;
                }
                theta = proposal;
                log_post = lp;
                log_lik = ll;
                batch_accepts[c] += 1;
                if retained {
                    accepted += 1;
                }
            }
            if retained {
                proposed += 1;
            }
        }
        if moved {
            current = FullParams::from_unconstrained(&theta, target.delta);
        }

        if !retained {
            if config.adapt && (sweep + 1) % ADAPT_BATCH == 0 {
                for c in 0..DIM {
                    let rate = batch_accepts[c] as f64 / ADAPT_BATCH as f64;
                    scales[c] *= (2.0 * (rate - TARGET_ACCEPTANCE)).exp();
                }
                batch_accepts = [0; DIM];
            }
            continue;
        }

        let (t_end, censored) = match last_t_end {
            Some((p, t, cens)) if p == current => (t, cens),
            _ => {
                let (t, cens) = end_week(&current, config, &mut horizon_curve)?;
                last_t_end = Some((current, t, cens));
                (t, cens)
            }
        };
        chain.draws.push(current);
        chain.log_likelihoods.push(log_lik);
        chain.t_end_draws.push(t_end);
        chain.censored.push(censored);
    }

    chain.acceptance_rate = accepted as f64 / proposed as f64;
    chain.proposal_scales = scales;
    Ok(chain)
}

fn end_week(
    p: &FullParams,
    config: &McmcConfig,
    cache: &mut Option<EpidemicCurve>,
) -> Result<(u32, bool)> {
    if cache.as_ref().is_none_or(|c| c.params != p.epidemic) {
        *cache = Some(integrate_sir(&p.epidemic, config.t_end_horizon, config.dt)?);
    }
    let curve = cache.as_ref().expect("curve cached above");
    match crossing_on_curve(curve, &p.obs, config.baseline, config.variant) {
        Ok(c) => Ok((c.t_end, false)),
        Err(Error::HorizonExceeded { horizon }) => Ok((horizon, true)),
        Err(e) => Err(e),
    }
}
