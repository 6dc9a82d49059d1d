//! Maximum-likelihood fitting.

use crate::error::{Error, Result};
use crate::obs::{log_likelihood_on_curve, WeeklySeries};
use crate::sir::{integrate_sir, EpidemicParams, RateVariant, DEFAULT_DT};

use super::nelder_mead::{minimize, NelderMeadOptions};
use super::{FullParams, PriorBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub variant: RateVariant,
    /// ODE integration step, in weeks.
    pub dt: f64,
    pub prior: PriorBox,
    pub optimizer: NelderMeadOptions,
    /// Shortest series accepted for fitting.
    pub min_weeks: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            variant: RateVariant::Snapshot,
            dt: DEFAULT_DT,
            prior: PriorBox::default(),
            optimizer: NelderMeadOptions::default(),
            min_weeks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub params: FullParams,
    pub log_likelihood: f64,
    pub evaluations: usize,
}

/// Fit by maximum likelihood with the default configuration.
pub fn mle_fit(series: &WeeklySeries, init: &FullParams, variant: RateVariant) -> Result<MleFit> {
    mle_fit_with(
        series,
        init,
        &MleConfig {
            variant,
            ..MleConfig::default()
        },
    )
}

fn check_series(series: &WeeklySeries, min_weeks: usize) -> Result<()> {
    if series.is_empty() {
        return Err(Error::EmptyInput("weekly series"));
    }
    if series.len() < min_weeks {
        return Err(Error::Precondition(format!(
            "series has {} weeks, need at least {min_weeks}",
            series.len()
        )));
    }
    if series.total() == 0 {
        return Err(Error::DegenerateFit(
            "all weekly counts are zero; the epidemic is not identifiable".into(),
        ));
    }
    Ok(())
}

/// Box-constrained Nelder-Mead ascent of the log-likelihood from `init`.
///
/// The result never has a lower log-likelihood than `init`; if no vertex
/// improves on it, `init` is returned unchanged.
pub fn mle_fit_with(
    series: &WeeklySeries,
    init: &FullParams,
    config: &MleConfig,
) -> Result<MleFit> {
    check_series(series, config.min_weeks)?;
    config.prior.check(init)?;
    let delta = init.epidemic.delta;
    let prior = config.prior;
    let variant = config.variant;
    let dt = config.dt;
    let objective = |theta: &[f64; 5]| {
        let p = FullParams::from_unconstrained(theta, delta);
        if !prior.contains(&p) {
            return f64::INFINITY;
        }
        match p.log_likelihood_dt(series, variant, dt) {
            Ok(ll) => -ll,
            Err(_) => f64::INFINITY,
        }
    };
    let init_ll = init.log_likelihood_dt(series, variant, dt)?;
    let result = minimize(objective, init.to_unconstrained(), &config.optimizer);

    let (params, ll) = if result.improved && -result.fx > init_ll {
        (FullParams::from_unconstrained(&result.x, delta), -result.fx)
    } else {
        (*init, init_ll)
    };
    if !result.converged {
        return Err(Error::Convergence {
            best: Box::new(params),
            best_log_likelihood: ll,
            evaluations: result.evaluations,
        });
    }
    Ok(MleFit {
        params,
        log_likelihood: ll,
        evaluations: result.evaluations,
    })
}

/// Data-driven starting point: a coarse grid over `(J0, k)`, with `N` set so
/// the modelled peak matches the largest observed count at `α = β = 2`.
pub fn initial_guess(
    series: &WeeklySeries,
    variant: RateVariant,
    delta: f64,
) -> Result<FullParams> {
    check_series(series, 1)?;
    let peak_count = *series.counts.iter().max().expect("non-empty") as f64;
    let horizon = ((series.len() - 1) as f64).max(1.0);
    let prior = PriorBox::default();
    let mut best: Option<(FullParams, f64)> = None;
    for &j0 in &[1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2] {
        for &k in &[0.3, 0.5, 0.7, 0.8, 0.85, 0.9, 0.95] {
            let shape = EpidemicParams::with_delta(j0, k, 1.0, delta)?;
            let curve = integrate_sir(&shape, horizon, DEFAULT_DT)?;
            let max_rate = (variant.first_week()..series.len() as u32)
                .filter_map(|t| curve.rate(t as f64, variant).ok())
                .fold(0.0, f64::max);
            if !(max_rate > 0.0) {
                continue;
            }
            let n_pop = (2.0 * (peak_count + 1.0) / max_rate).clamp(1.0, prior.n_pop.1);
            let candidate = FullParams {
                epidemic: EpidemicParams { n_pop, ..shape },
                obs: crate::obs::ObservationParams {
                    alpha: 2.0,
                    beta: 2.0,
                },
            };
            let mut scaled = curve.clone();
            scaled.params = candidate.epidemic;
            let ll = log_likelihood_on_curve(&scaled, &candidate.obs, series, variant)?;
            if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((candidate, ll));
            }
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::DegenerateFit("no finite-likelihood starting point found".into()))
}
