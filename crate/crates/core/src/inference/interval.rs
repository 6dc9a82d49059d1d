use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::quantile_index;

use super::PosteriorChain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub lo: u32,
    pub hi: u32,
    pub level: f64,
}

impl CredibleInterval {
    pub fn contains(&self, t: u32) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn overlaps(&self, other: &CredibleInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Equal-tailed interval over integer draws. The lower endpoint is the
/// order statistic at or below the `(1 − level)/2` quantile position and
/// the upper endpoint the one at or above `1 − (1 − level)/2`, so both are
/// attained values.
pub fn equal_tailed(values: &[u32], level: f64) -> Result<CredibleInterval> {
    if values.is_empty() {
        return Err(Error::EmptyInput("posterior draws"));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Domain(format!(
            "level must lie in [0, 1], got {level}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let tail = (1.0 - level) / 2.0;
    Ok(CredibleInterval {
        lo: sorted[quantile_index(sorted.len(), tail, false)],
        hi: sorted[quantile_index(sorted.len(), 1.0 - tail, true)],
        level,
    })
}

/// Equal-tailed credible interval for the end week.
pub fn credible_interval(chain: &PosteriorChain, level: f64) -> Result<CredibleInterval> {
    equal_tailed(&chain.t_end_draws, level)
}
