//! Synthetic reported-count series and posterior-predictive envelopes.

use std::io::Write;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::FullParams;
use crate::obs::WeeklySeries;
use crate::parallel;
use crate::rng::{derive_seed, seeded, Rng};
use crate::sir::{integrate_sir, EpidemicCurve, DEFAULT_DT};

pub const DEFAULT_SIMULATIONS: usize = 2000;
pub const MIN_SIMULATIONS: usize = 100;

/// Pointwise predictive band over weeks `0..lo.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub level: f64,
    pub lo: Vec<u64>,
    pub hi: Vec<u64>,
}

/// Draws one reported-count series per call, sharing a solved curve.
pub struct Simulator {
    params: FullParams,
    trials: Vec<u64>,
    alpha: Gamma<f64>,
    beta: Gamma<f64>,
}

impl Simulator {
    pub fn new(params: &FullParams, weeks: usize) -> Result<Self> {
        params.obs.validate()?;
        if weeks == 0 {
            return Err(Error::Precondition(
                "simulation needs at least one week".into(),
            ));
        }
        let curve = integrate_sir(&params.epidemic, ((weeks - 1) as f64).max(1.0), DEFAULT_DT)?;
        Ok(Self {
            params: *params,
            trials: trial_counts(&curve, weeks)?,
            alpha: Gamma::new(params.obs.alpha, 1.0).map_err(|e| Error::Domain(e.to_string()))?,
            beta: Gamma::new(params.obs.beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?,
        })
    }

    pub fn params(&self) -> &FullParams {
        &self.params
    }

    /// Binomial trial count `round(N·j(t))` per week.
    pub fn trials(&self) -> &[u64] {
        &self.trials
    }

    fn reporting_probability(&self, rng: &mut Rng) -> f64 {
        let a = self.alpha.sample(rng);
        let b = self.beta.sample(rng);
        let total = a + b;
        if total > 0.0 {
            a / total
        } else {
            // Both gamma draws underflowed; only possible for tiny shapes.
            if rng.random::<bool>() {
                1.0
            } else {
                0.0
            }
        }
    }

    pub fn draw(&self, rng: &mut Rng) -> Vec<u64> {
        self.trials
            .iter()
            .map(|&n| {
                let p = self.reporting_probability(rng);
                if n == 0 {
                    return 0;
                }
                Binomial::new(n, p).expect("p in [0, 1]").sample(rng)
            })
            .collect()
    }
}

fn trial_counts(curve: &EpidemicCurve, weeks: usize) -> Result<Vec<u64>> {
    (0..weeks)
        .map(|t| Ok((curve.params.n_pop * curve.j_at(t as f64)?).round() as u64))
        .collect()
}

/// One synthetic series over weeks `0..weeks`: `p(t) ~ Beta(α, β)` then
/// `x(t) ~ Binomial(round(N·j(t)), p(t))`.
pub fn simulate_series(params: &FullParams, weeks: usize, seed: u64) -> Result<WeeklySeries> {
    let sim = Simulator::new(params, weeks)?;
    Ok(WeeklySeries::new(0, sim.draw(&mut seeded(seed))))
}

/// Order-statistic index for quantile `q` of `n` sorted values, rounded
/// down (`outward = false`) or up.
pub(crate) fn quantile_index(n: usize, q: f64, round_up: bool) -> usize {
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    // Guard against representation error pushing an exact index across.
    let snapped = if (pos - pos.round()).abs() < 1e-9 {
        pos.round()
    } else {
        pos
    };
    let idx = if round_up {
        snapped.ceil()
    } else {
        snapped.floor()
    };
    (idx as usize).min(n - 1)
}

/// Per-week equal-tailed quantile band across `n_sims` simulated series.
pub fn predictive_envelope(
    params: &FullParams,
    weeks: usize,
    n_sims: usize,
    level: f64,
    seed: u64,
) -> Result<Envelope> {
    if n_sims < MIN_SIMULATIONS {
        return Err(Error::Precondition(format!(
            "need at least {MIN_SIMULATIONS} simulations, got {n_sims}"
        )));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Domain(format!(
            "level must lie in [0, 1], got {level}"
        )));
    }
    let sim = Simulator::new(params, weeks)?;
    let runs = parallel::map_indexed(n_sims, |r| {
        sim.draw(&mut seeded(derive_seed(seed, r as u64)))
    });
    Ok(envelope_from_runs(&runs, weeks, level))
}

pub(crate) fn envelope_from_runs(runs: &[Vec<u64>], weeks: usize, level: f64) -> Envelope {
    let tail = (1.0 - level) / 2.0;
    let mut lo = Vec::with_capacity(weeks);
    let mut hi = Vec::with_capacity(weeks);
    let mut column = Vec::with_capacity(runs.len());
    for t in 0..weeks {
        column.clear();
        column.extend(runs.iter().map(|r| r[t]));
        column.sort_unstable();
        lo.push(column[quantile_index(column.len(), tail, false)]);
        hi.push(column[quantile_index(column.len(), 1.0 - tail, true)]);
    }
    Envelope { level, lo, hi }
}

/// Write `week_index,lo,hi`.
pub fn write_envelope_csv<W: Write>(envelope: &Envelope, start_week: i64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["week_index", "lo", "hi"])?;
    for (t, (lo, hi)) in envelope.lo.iter().zip(&envelope.hi).enumerate() {
        w.write_record([
            (start_week + t as i64).to_string(),
            lo.to_string(),
            hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
