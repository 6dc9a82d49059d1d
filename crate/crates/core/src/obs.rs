//! Beta-binomial reporting layer.
//!
//! Each week's true event count `n = N·j(t)` is thinned by a reporting
//! probability drawn afresh from `Beta(α, β)`. Because `n` is real-valued
//! the binomial coefficient is evaluated through the gamma function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sir::{integrate_sir, EpidemicCurve, EpidemicParams, RateVariant, DEFAULT_DT};
use crate::special::{ln_beta, ln_beta_unchecked, ln_choose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ObservationParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let o = Self { alpha, beta };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0)
            || !self.alpha.is_finite()
            || !self.beta.is_finite()
        {
            return Err(Error::Domain(format!(
                "alpha and beta must be > 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Mean reporting probability `α/(α+β)`.
    pub fn mean_fraction(&self) -> Result<f64> {
        let total = self.alpha + self.beta;
        if total == 0.0 || !total.is_finite() {
            return Err(Error::Domain(
                "alpha + beta must be positive and finite".into(),
            ));
        }
        Ok(self.alpha / total)
    }
}

/// Observed counts per week, `counts[t]` for `t = 0..T` relative to
/// `start_week`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklySeries {
    /// Week index of `counts[0]` (weeks since the Sunday 2022-01-02).
    pub start_week: i64,
    pub counts: Vec<u64>,
}

impl WeeklySeries {
    pub fn new(start_week: i64, counts: Vec<u64>) -> Self {
        Self { start_week, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// The first `weeks` weeks of the series.
    pub fn truncate(&self, weeks: usize) -> WeeklySeries {
        WeeklySeries {
            start_week: self.start_week,
            counts: self.counts[..weeks.min(self.counts.len())].to_vec(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `ln P(X = x)` for `X ~ BetaBinomial(n, α, β)` with real `n ≥ 0`.
///
/// Returns `-∞` when `x > n`.
pub fn log_betabinom_pmf(x: u64, n: f64, obs: &ObservationParams) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain(format!("trial count must be >= 0, got {n}")));
    }
    obs.validate()?;
    let xf = x as f64;
    if xf > n {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(
        ln_choose(n, xf) + ln_beta_unchecked(xf + obs.alpha, n - xf + obs.beta)
            - ln_beta(obs.alpha, obs.beta)?,
    )
}

/// Sum of per-week log-pmf terms given a solved curve covering the series.
pub fn log_likelihood_on_curve(
    curve: &EpidemicCurve,
    obs: &ObservationParams,
    series: &WeeklySeries,
    variant: RateVariant,
) -> Result<f64> {
    let n_pop = curve.params.n_pop;
    let mut total = 0.0;
    for (t, &x) in series
        .counts
        .iter()
        .enumerate()
        .skip(variant.first_week() as usize)
    {
        let n = n_pop * curve.rate(t as f64, variant)?;
        let term = log_betabinom_pmf(x, n, obs)?;
        if term == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += term;
    }
    Ok(total)
}

/// Log-likelihood of `series` under the SIR curve for `params` and the
/// beta-binomial reporting layer.
pub fn log_likelihood(
    params: &EpidemicParams,
    obs: &ObservationParams,
    series: &WeeklySeries,
    variant: RateVariant,
) -> Result<f64> {
    log_likelihood_dt(params, obs, series, variant, DEFAULT_DT)
}

/// [`log_likelihood`] with an explicit integration step.
pub fn log_likelihood_dt(
    params: &EpidemicParams,
    obs: &ObservationParams,
    series: &WeeklySeries,
    variant: RateVariant,
    dt: f64,
) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptyInput("weekly series"));
    }
    obs.validate()?;
    let horizon = ((series.len() - 1) as f64).max(1.0);
    let curve = integrate_sir(params, horizon, dt)?;
    log_likelihood_on_curve(&curve, obs, series, variant)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn obs(a: f64, b: f64) -> ObservationParams {
        ObservationParams::new(a, b).unwrap()
    }

    #[test]
    fn uniform_mixing_gives_discrete_uniform() {
        let v = log_betabinom_pmf(0, 5.0, &obs(1.0, 1.0)).unwrap();
        assert!((v - (1.0f64 / 6.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn support_violation_is_log_zero() {
        assert_eq!(
            log_betabinom_pmf(7, 5.4, &obs(2.0, 3.0)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn reference_value() {
        // 50-digit reference: ln[C(5,2) B(4.15, 5.92) / B(2.15, 2.92)]
        let v = log_betabinom_pmf(2, 5.0, &obs(2.15, 2.92)).unwrap();
        assert!((v - -1.4292464604339456371).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(log_betabinom_pmf(0, -1.0, &obs(1.0, 1.0)).is_err());
        assert!(log_betabinom_pmf(
            0,
            1.0,
            &ObservationParams {
                alpha: 0.0,
                beta: 1.0
            }
        )
        .is_err());
        let zero = ObservationParams {
            alpha: 0.0,
            beta: 0.0,
        };
        assert!(zero.mean_fraction().is_err());
    }

    #[test]
    fn x_equal_n_boundary() {
        // P(X = n) = B(n + α, β) / B(α, β)
        let o = obs(2.0, 3.0);
        let v = log_betabinom_pmf(4, 4.0, &o).unwrap();
        let want = ln_beta(6.0, 3.0).unwrap() - ln_beta(2.0, 3.0).unwrap();
        assert!((v - want).abs() < 1e-13);
    }

    #[test]
    fn single_week_likelihood_is_single_term() {
        let p = EpidemicParams::new(0.01, 0.5, 1000.0).unwrap();
        let o = obs(2.0, 2.0);
        let series = WeeklySeries::new(0, vec![0]);
        let ll = log_likelihood(&p, &o, &series, RateVariant::Snapshot).unwrap();
        let n = p.n_pop * p.delta * p.j0 * (1.0 - p.j0);
        assert!((ll - log_betabinom_pmf(0, n, &o).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn likelihood_support_violation() {
        let p = EpidemicParams::new(0.01, 0.5, 1000.0).unwrap();
        let o = obs(2.0, 2.0);
        let series = WeeklySeries::new(0, vec![3, 4, 500, 2]);
        assert_eq!(
            log_likelihood(&p, &o, &series, RateVariant::Snapshot).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn empty_series_rejected() {
        let p = EpidemicParams::new(0.01, 0.5, 1000.0).unwrap();
        let series = WeeklySeries::new(0, vec![]);
        assert!(log_likelihood(&p, &obs(1.0, 1.0), &series, RateVariant::Snapshot).is_err());
    }
}
