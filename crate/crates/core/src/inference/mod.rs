//! Parameter estimation: maximum likelihood, posterior sampling, credible
//! intervals for the end week, and rolling-cutoff sensitivity scans.
//!
//! Both the optimizer and the sampler work on unconstrained coordinates
//! `(ln J0, logit k, ln N, ln α, ln β)`.

mod interval;
mod mcmc;
mod mle;
mod nelder_mead;
mod sensitivity;

pub use interval::{credible_interval, equal_tailed, CredibleInterval};
pub use mcmc::{mh_sample, McmcConfig, PosteriorChain, DEFAULT_T_END_HORIZON};
pub use mle::{initial_guess, mle_fit, mle_fit_with, MleConfig, MleFit};
pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};
pub use sensitivity::{
    run_pipeline, sensitivity_scan, PipelineConfig, PipelineResult, ScanEntry, ScanSummary,
    MIN_CUTOFF,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::{log_likelihood_dt, ObservationParams, WeeklySeries};
use crate::sir::{EpidemicParams, RateVariant, DEFAULT_DT};

/// Number of free parameters.
pub const DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullParams {
    pub epidemic: EpidemicParams,
    pub obs: ObservationParams,
}

impl FullParams {
    pub fn new(j0: f64, k: f64, n_pop: f64, alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self {
            epidemic: EpidemicParams::new(j0, k, n_pop)?,
            obs: ObservationParams::new(alpha, beta)?,
        })
    }

    pub fn log_likelihood(&self, series: &WeeklySeries, variant: RateVariant) -> Result<f64> {
        self.log_likelihood_dt(series, variant, DEFAULT_DT)
    }

    pub fn log_likelihood_dt(
        &self,
        series: &WeeklySeries,
        variant: RateVariant,
        dt: f64,
    ) -> Result<f64> {
        log_likelihood_dt(&self.epidemic, &self.obs, series, variant, dt)
    }

    /// Map to `(ln J0, logit k, ln N, ln α, ln β)`. Requires `0 < k < 1`.
    pub fn to_unconstrained(&self) -> [f64; DIM] {
        let e = &self.epidemic;
        [
            e.j0.ln(),
            (e.k / (1.0 - e.k)).ln(),
            e.n_pop.ln(),
            self.obs.alpha.ln(),
            self.obs.beta.ln(),
        ]
    }

    /// Inverse of [`to_unconstrained`](Self::to_unconstrained); `delta` is carried over.
    pub fn from_unconstrained(theta: &[f64; DIM], delta: f64) -> FullParams {
        FullParams {
            epidemic: EpidemicParams {
                j0: theta[0].exp(),
                k: 1.0 / (1.0 + (-theta[1]).exp()),
                n_pop: theta[2].exp(),
                delta,
            },
            obs: ObservationParams {
                alpha: theta[3].exp(),
                beta: theta[4].exp(),
            },
        }
    }

    /// `ln |∂(J0, k, N, α, β)/∂θ|` at these parameters.
    pub fn log_jacobian(&self) -> f64 {
        let e = &self.epidemic;
        e.j0.ln()
            + e.k.ln()
            + (1.0 - e.k).ln()
            + e.n_pop.ln()
            + self.obs.alpha.ln()
            + self.obs.beta.ln()
    }
}

/// Uniform prior support. Upper and lower bounds are inclusive, except
/// that the model itself needs `J0 < 1` and `N, α, β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorBox {
    pub j0: (f64, f64),
    pub k: (f64, f64),
    pub n_pop: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for PriorBox {
    fn default() -> Self {
        Self {
            j0: (1e-6, 1.0),
            k: (0.0, 1.0),
            n_pop: (0.0, 1e10),
            alpha: (0.0, 1000.0),
            beta: (0.0, 1000.0),
        }
    }
}

impl PriorBox {
    pub fn contains(&self, p: &FullParams) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| v.is_finite() && v >= lo && v <= hi;
        let e = &p.epidemic;
        within(e.j0, self.j0)
            && e.j0 < 1.0
            && within(e.k, self.k)
            && within(e.n_pop, self.n_pop)
            && e.n_pop > 0.0
            && within(p.obs.alpha, self.alpha)
            && p.obs.alpha > 0.0
            && within(p.obs.beta, self.beta)
            && p.obs.beta > 0.0
    }

    pub fn check(&self, p: &FullParams) -> Result<()> {
        if self.contains(p) && p.epidemic.k > 0.0 && p.epidemic.k < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "parameters outside prior box: {p:?}"
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("j0", self.j0),
            ("k", self.k),
            ("n_pop", self.n_pop),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !(lo < hi) || lo < 0.0 {
                return Err(Error::Domain(format!(
                    "prior bounds for {name} invalid: [{lo}, {hi}]"
                )));
            }
        }
        if self.k.1 > 1.0 {
            return Err(Error::Domain("k upper bound must not exceed 1".into()));
        }
        Ok(())
    }
}
