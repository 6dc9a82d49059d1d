//! Deterministic SIR dynamics and the quantities derived from them.
//!
//! Time is measured in weeks. The infection rate `delta` fixes the time
//! scale; with `delta = 1` the removal ratio `k` equals the removal rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::ObservationParams;

/// Default integration step, in weeks.
pub const DEFAULT_DT: f64 = 0.01;
/// Default integration horizon, in weeks.
pub const DEFAULT_HORIZON: f64 = 200.0;
/// Default infection rate per week.
pub const DEFAULT_DELTA: f64 = 1.0;

/// Grid positions closer than this to an integer are treated as on-grid.
const GRID_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Initial cumulative infected fraction `J(0)`.
    pub j0: f64,
    /// Ratio of removal rate to infection rate.
    pub k: f64,
    /// Population size (number of companies).
    pub n_pop: f64,
    /// Infection rate per week.
    pub delta: f64,
}

impl EpidemicParams {
    pub fn new(j0: f64, k: f64, n_pop: f64) -> Result<Self> {
        Self::with_delta(j0, k, n_pop, DEFAULT_DELTA)
    }

    pub fn with_delta(j0: f64, k: f64, n_pop: f64, delta: f64) -> Result<Self> {
        let p = Self {
            j0,
            k,
            n_pop,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j0 > 0.0 && self.j0 < 1.0) {
            return Err(Error::Domain(format!(
                "j0 must lie in (0, 1), got {}",
                self.j0
            )));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(Error::Domain(format!("k must be >= 0, got {}", self.k)));
        }
        if !(self.n_pop > 0.0) || !self.n_pop.is_finite() {
            return Err(Error::Domain(format!(
                "n_pop must be > 0, got {}",
                self.n_pop
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::Domain(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Removal rate `γ = k·δ`.
    pub fn gamma(&self) -> f64 {
        self.k * self.delta
    }
}

/// Which per-week rate the observation layer sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateVariant {
    /// `j(t)` sampled at the week boundary.
    #[default]
    Snapshot,
    /// `∫_{t-1}^{t} j(u) du`.
    Windowed,
}

impl RateVariant {
    /// First week index at which the rate is defined.
    pub fn first_week(self) -> u32 {
        match self {
            RateVariant::Snapshot => 0,
            RateVariant::Windowed => 1,
        }
    }
}

impl std::str::FromStr for RateVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snapshot" => Ok(RateVariant::Snapshot),
            "windowed" => Ok(RateVariant::Windowed),
            other => Err(Error::Format(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for RateVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateVariant::Snapshot => "snapshot",
            RateVariant::Windowed => "windowed",
        })
    }
}

/// Dense solution of the SIR system on a uniform grid `t_m = m·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicCurve {
    pub params: EpidemicParams,
    pub dt: f64,
    pub horizon: f64,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    /// New-infection rate as a fraction of the population, `δ·I·S/N²`.
    pub j: Vec<f64>,
    /// Cumulative infected fraction `1 − S/N`.
    pub cum_j: Vec<f64>,
}

#[derive(Clone, Copy)]
struct State {
    s: f64,
    i: f64,
    r: f64,
}

impl State {
    fn deriv(self, delta: f64, gamma: f64, n: f64) -> State {
        let infection = delta * self.i * self.s / n;
        let removal = gamma * self.i;
        State {
            s: -infection,
            i: infection - removal,
            r: removal,
        }
    }

    fn axpy(self, h: f64, d: State) -> State {
        State {
            s: self.s + h * d.s,
            i: self.i + h * d.i,
            r: self.r + h * d.r,
        }
    }
}

fn rk4_step(y: State, h: f64, delta: f64, gamma: f64, n: f64) -> State {
    let k1 = y.deriv(delta, gamma, n);
    let k2 = y.axpy(0.5 * h, k1).deriv(delta, gamma, n);
    let k3 = y.axpy(0.5 * h, k2).deriv(delta, gamma, n);
    let k4 = y.axpy(h, k3).deriv(delta, gamma, n);
    let sixth = h / 6.0;
    State {
        s: y.s + sixth * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
        i: y.i + sixth * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i),
        r: y.r + sixth * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
    }
}

/// Integrate the SIR equations from `S = N(1 − J0)`, `I = N·J0`, `R = 0`
/// with classical fourth-order Runge-Kutta.
///
/// The step is shrunk slightly if needed so that the grid ends exactly at
/// `horizon`.
pub fn integrate_sir(params: &EpidemicParams, horizon: f64, dt: f64) -> Result<EpidemicCurve> {
    params.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Domain(format!("horizon must be > 0, got {horizon}")));
    }
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Domain(format!("dt must lie in (0, 0.1], got {dt}")));
    }
    let steps = (horizon / dt - GRID_SNAP).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;

    let n = params.n_pop;
    let delta = params.delta;
    let gamma = params.gamma();
    let mut curve = EpidemicCurve {
        params: *params,
        dt: h,
        horizon,
        s: Vec::with_capacity(steps + 1),
        i: Vec::with_capacity(steps + 1),
        r: Vec::with_capacity(steps + 1),
        j: Vec::with_capacity(steps + 1),
        cum_j: Vec::with_capacity(steps + 1),
    };

    let mut y = State {
        s: n * (1.0 - params.j0),
        i: n * params.j0,
        r: 0.0,
    };
    for m in 0..=steps {
        curve.s.push(y.s);
        curve.i.push(y.i);
        curve.r.push(y.r);
        curve.j.push((delta * y.i * y.s / (n * n)).max(0.0));
        curve
            .cum_j
            .push(if m == 0 { params.j0 } else { 1.0 - y.s / n });
        if m < steps {
            y = rk4_step(y, h, delta, gamma, n);
        }
    }
    Ok(curve)
}

impl EpidemicCurve {
    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    fn check_range(&self, t: f64, lo: f64) -> Result<()> {
        if !(t >= lo - GRID_SNAP && t <= self.horizon + GRID_SNAP) {
            return Err(Error::Range {
                t,
                lo,
                hi: self.horizon,
            });
        }
        Ok(())
    }

    /// Linear interpolation of `values` at time `t` (exact at grid points).
    fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let pos = (t / self.dt).clamp(0.0, (values.len() - 1) as f64);
        let nearest = pos.round();
        if (pos - nearest).abs() < GRID_SNAP {
            return values[nearest as usize];
        }
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        values[lo] + frac * (values[lo + 1] - values[lo])
    }

    /// `j(t)` by linear interpolation between grid points.
    pub fn j_at(&self, t: f64) -> Result<f64> {
        self.check_range(t, 0.0)?;
        Ok(self.interpolate(&self.j, t))
    }

    /// `∫_{t-1}^{t} j(u) du`, composite Simpson over the grid cells inside
    /// the window and the exact integral of the interpolant on partial cells.
    pub fn windowed_rate(&self, t: f64) -> Result<f64> {
        self.check_range(t, 1.0)?;
        let t = t.min(self.horizon);
        let a = (t - 1.0).max(0.0);
        Ok(self.integrate_j(a, t))
    }

    fn integrate_j(&self, a: f64, b: f64) -> f64 {
        let snap_up = |x: f64| {
            let pos = x / self.dt;
            let r = pos.round();
            if (pos - r).abs() < GRID_SNAP {
                r as usize
            } else {
                pos.ceil() as usize
            }
        };
        let snap_down = |x: f64| {
            let pos = x / self.dt;
            let r = pos.round();
            if (pos - r).abs() < GRID_SNAP {
                r as usize
            } else {
                pos.floor() as usize
            }
        };
        let first = snap_up(a);
        let last = snap_down(b).min(self.j.len() - 1);
        if first >= last {
            let ja = self.interpolate(&self.j, a);
            let jb = self.interpolate(&self.j, b);
            return 0.5 * (ja + jb) * (b - a);
        }
        let mut total = simpson(&self.j[first..=last], self.dt);
        let ta = first as f64 * self.dt;
        if ta - a > GRID_SNAP * self.dt {
            total += 0.5 * (self.interpolate(&self.j, a) + self.j[first]) * (ta - a);
        }
        let tb = last as f64 * self.dt;
        if b - tb > GRID_SNAP * self.dt {
            total += 0.5 * (self.interpolate(&self.j, b) + self.j[last]) * (b - tb);
        }
        total
    }

    /// Per-week rate under the chosen variant.
    pub fn rate(&self, t: f64, variant: RateVariant) -> Result<f64> {
        match variant {
            RateVariant::Snapshot => self.j_at(t),
            RateVariant::Windowed => self.windowed_rate(t),
        }
    }

    /// Expected reported count `N·rate(t)·α/(α+β)`.
    pub fn expected_reported(
        &self,
        obs: &ObservationParams,
        t: f64,
        variant: RateVariant,
    ) -> Result<f64> {
        Ok(self.params.n_pop * self.rate(t, variant)? * obs.mean_fraction()?)
    }

    /// Expected reported counts at integer weeks `first_week..=floor(horizon)`.
    pub fn weekly_expected(
        &self,
        obs: &ObservationParams,
        variant: RateVariant,
    ) -> Result<Vec<f64>> {
        let last = (self.horizon + GRID_SNAP).floor() as u32;
        (variant.first_week()..=last)
            .map(|w| self.expected_reported(obs, w as f64, variant))
            .collect()
    }
}

/// Simpson's rule on uniformly spaced samples; an odd interval count closes
/// with the 3/8 rule, a single interval falls back to the trapezoid.
fn simpson(y: &[f64], h: f64) -> f64 {
    let m = y.len() - 1;
    match m {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        _ => {
            let even_end = if m.is_multiple_of(2) { m } else { m - 3 };
            let mut acc = 0.0;
            if even_end > 0 {
                let mut odd = 0.0;
                let mut even = 0.0;
                for (idx, v) in y[1..even_end].iter().enumerate() {
                    if idx % 2 == 0 {
                        odd += v
                    } else {
                        even += v
                    }
                }
                acc += h / 3.0 * (y[0] + 4.0 * odd + 2.0 * even + y[even_end]);
            }
            if even_end < m {
                let s = &y[even_end..=m];
                acc += 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3]);
            }
            acc
        }
    }
}

/// Expected reported count at time `t` on a curve produced from `params`.
pub fn expected_reported(
    params: &EpidemicParams,
    obs: &ObservationParams,
    t: f64,
    curve: &EpidemicCurve,
) -> Result<f64> {
    Ok(params.n_pop * curve.j_at(t)? * obs.mean_fraction()?)
}

/// Location of the downward baseline crossing on the integer-week grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    /// Week of maximal expected reported count (earliest on ties).
    pub t_peak: u32,
    /// First week at or after the peak with expected count below baseline.
    pub t_end: u32,
}

/// Scan the expected weekly counts of `curve` for the falling-branch
/// crossing of `baseline`.
pub fn crossing_on_curve(
    curve: &EpidemicCurve,
    obs: &ObservationParams,
    baseline: f64,
    variant: RateVariant,
) -> Result<Crossing> {
    if !(baseline > 0.0) {
        return Err(Error::Domain(format!(
            "baseline must be > 0, got {baseline}"
        )));
    }
    let weekly = curve.weekly_expected(obs, variant)?;
    let offset = variant.first_week();
    let (peak_idx, _) =
        weekly
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (idx, &v)| {
                if v > best.1 {
                    (idx, v)
                } else {
                    best
                }
            });
    let end_idx = weekly[peak_idx..]
        .iter()
        .position(|&v| v < baseline)
        .map(|p| p + peak_idx)
        .ok_or(Error::HorizonExceeded {
            horizon: curve.horizon as u32,
        })?;
    Ok(Crossing {
        t_peak: peak_idx as u32 + offset,
        t_end: end_idx as u32 + offset,
    })
}

pub fn crossing(
    params: &EpidemicParams,
    obs: &ObservationParams,
    baseline: f64,
    horizon: f64,
    variant: RateVariant,
    dt: f64,
) -> Result<Crossing> {
    obs.validate()?;
    let curve = integrate_sir(params, horizon, dt)?;
    crossing_on_curve(&curve, obs, baseline, variant)
}

/// First integer week on the falling branch where the expected reported
/// count drops below `baseline`.
pub fn t_end(
    params: &EpidemicParams,
    obs: &ObservationParams,
    baseline: f64,
    horizon: f64,
) -> Result<u32> {
    crossing(
        params,
        obs,
        baseline,
        horizon,
        RateVariant::Snapshot,
        DEFAULT_DT,
    )
    .map(|c| c.t_end)
}
