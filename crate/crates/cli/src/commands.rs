//! One function per subcommand. Each reads its inputs, computes everything,
//! and only then writes its outputs.

use std::path::{Path, PathBuf};

use layoff_sir::dataio::{
    aggregate_weekly_with, baseline_2021, parse_events, week_to_date, write_series_csv, CountMode,
    WeekIndex,
};
use layoff_sir::inference::{
    equal_tailed, initial_guess, mh_sample, mle_fit_with, sensitivity_scan, CredibleInterval,
    PosteriorChain,
};
use layoff_sir::parallel;
use layoff_sir::simulate::{predictive_envelope, simulate_series, write_envelope_csv, Simulator};
use layoff_sir::sir::{crossing, integrate_sir, Crossing};
use layoff_sir::{Error as CoreError, FullParams, RateVariant, WeeklySeries};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, DEFAULT_BASELINE};
use crate::error::CliError;
use crate::files::{
    self, build_params, chain_rows, csv_bytes, read_chain, read_params, read_series, ChainRow,
    ChainSummary, Outputs, ParamsFile,
};

pub const SERIES_FILE: &str = "series.csv";
pub const AGGREGATE_SUMMARY_FILE: &str = "aggregate_summary.toml";
pub const PARAMS_FILE: &str = "params.toml";
pub const CHAIN_FILE: &str = "chain.csv";
pub const CHAIN_SUMMARY_FILE: &str = "chain_summary.toml";
pub const FORECAST_FILE: &str = "forecast.toml";
pub const HISTOGRAM_FILE: &str = "forecast_histogram.csv";
pub const ENVELOPE_FILE: &str = "envelope.csv";
pub const SIMULATED_FILE: &str = "simulated_series.csv";
pub const EXPECTED_FILE: &str = "expected.csv";
pub const SENSITIVITY_FILE: &str = "sensitivity.csv";

/// Share of censored draws above which the forecast carries a warning.
pub const CENSORED_WARNING_FRACTION: f64 = 0.10;

const DEFAULT_SIM_WEEKS: usize = 80;
const SKIP_REPORT_LIMIT: usize = 10;

fn series_path(config: &RunConfig) -> PathBuf {
    config
        .series
        .clone()
        .or_else(|| config.input.clone())
        .unwrap_or_else(|| config.out_path(SERIES_FILE))
}

fn params_path(config: &RunConfig) -> PathBuf {
    config
        .params
        .clone()
        .unwrap_or_else(|| config.out_path(PARAMS_FILE))
}

fn chain_path(config: &RunConfig) -> PathBuf {
    config
        .chain
        .clone()
        .unwrap_or_else(|| config.out_path(CHAIN_FILE))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub total_events: usize,
    pub events_in_range: u64,
    pub skipped_rows: usize,
    pub first_week: i64,
    pub last_week: i64,
    pub first_week_start: String,
    pub baseline_2021: f64,
    pub dedup: bool,
}

/// Baseline from the config, else the 2021 average recorded next to the
/// series, else the default.
pub fn resolve_baseline(config: &RunConfig, series: &Path) -> Result<f64, CliError> {
    if let Some(b) = config.baseline {
        return Ok(b);
    }
    let summary = series
        .parent()
        .unwrap_or(Path::new("."))
        .join(AGGREGATE_SUMMARY_FILE);
    if summary.exists() {
        let s: AggregateSummary = files::read_toml(&summary)?;
        if s.baseline_2021 > 0.0 {
            return Ok(s.baseline_2021);
        }
    }
    Ok(DEFAULT_BASELINE)
}

pub fn aggregate(config: &RunConfig) -> Result<Outputs, CliError> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("aggregate needs --input".into()))?;
    let parsed = parse_events(files::open(input)?).map_err(|e| match CliError::from(e) {
        CliError::Format(msg) => CliError::format_in(input, msg),
        CliError::Io { source, .. } => CliError::io(input, source),
        other => other,
    })?;
    for row in parsed.skipped.iter().take(SKIP_REPORT_LIMIT) {
        eprintln!(
            "warning: {}:{}: skipped ({})",
            input.display(),
            row.line,
            row.reason
        );
    }
    if parsed.skipped.len() > SKIP_REPORT_LIMIT {
        eprintln!(
            "warning: {} more rows skipped",
            parsed.skipped.len() - SKIP_REPORT_LIMIT
        );
    }

    let from = config.from_week.unwrap_or(0);
    let latest = parsed
        .events
        .iter()
        .map(|e| WeekIndex::of_date(e.date).0)
        .max();
    let to = config
        .to_week
        .unwrap_or_else(|| latest.unwrap_or(from).max(from));
    if to < from {
        return Err(CliError::Usage(format!(
            "to_week {to} before from_week {from}"
        )));
    }
    let mode = if config.dedup {
        CountMode::DedupCompanyWeek
    } else {
        CountMode::PerEvent
    };
    let series = aggregate_weekly_with(&parsed.events, WeekIndex(from), WeekIndex(to), mode)?;
    let summary = AggregateSummary {
        total_events: parsed.events.len(),
        events_in_range: series.total(),
        skipped_rows: parsed.skipped.len(),
        first_week: from,
        last_week: to,
        first_week_start: week_to_date(from).to_string(),
        baseline_2021: baseline_2021(&parsed.events),
        dedup: config.dedup,
    };

    let mut out = Outputs::default();
    let mut csv = Vec::new();
    write_series_csv(&series, &mut csv)?;
    out.add(config.out_path(SERIES_FILE), csv);
    out.add_toml(config.out_path(AGGREGATE_SUMMARY_FILE), &summary)?;
    Ok(out)
}

pub fn fit(config: &RunConfig) -> Result<Outputs, CliError> {
    let path = series_path(config);
    let series = read_series(&path)?;
    let given = config
        .init_values()
        .map(|v| build_params(v, config.delta))
        .transpose()?;

    let mut file = if config.no_optimize {
        let init = given.ok_or_else(|| {
            CliError::Usage(
                "--no-optimize needs init_j0, init_k, init_n, init_alpha and init_beta".into(),
            )
        })?;
        let mut file = ParamsFile::from_params(&init);
        file.log_likelihood = Some(init.log_likelihood_dt(&series, config.variant, config.dt)?);
        file.evaluations = Some(0);
        file.optimized = Some(false);
        file
    } else {
        let init = match given {
            Some(p) => p,
            None => initial_guess(&series, config.variant, config.delta)?,
        };
        let fit = mle_fit_with(&series, &init, &config.mle())?;
        let mut file = ParamsFile::from_params(&fit.params);
        file.log_likelihood = Some(fit.log_likelihood);
        file.evaluations = Some(fit.evaluations);
        file.optimized = Some(true);
        file
    };
    file.variant = Some(config.variant);
    file.weeks = Some(series.len());

    let mut out = Outputs::default();
    out.add_toml(params_path(config), &file)?;
    Ok(out)
}

pub fn sample(config: &RunConfig) -> Result<Outputs, CliError> {
    let path = series_path(config);
    let series = read_series(&path)?;
    let (_, init) = read_params(&params_path(config))?;
    let baseline = resolve_baseline(config, &path)?;
    let base = config.mcmc(baseline);

    let chains: Vec<Result<PosteriorChain, CoreError>> =
        parallel::map_indexed(config.chains, |c| {
            let mut mcmc = base.clone();
            mcmc.seed = config.seed.wrapping_add(c as u64);
            mh_sample(&series, &init, &mcmc)
        });
    let chains = chains.into_iter().collect::<Result<Vec<_>, _>>()?;

    let total: usize = chains.iter().map(|c| c.len()).sum();
    let censored: usize = chains
        .iter()
        .map(|c| c.censored.iter().filter(|&&x| x).count())
        .sum();
    let summary = ChainSummary {
        chains: config.chains,
        iterations: config.iterations,
        burn_in: config.burn_in,
        seed: config.seed,
        baseline,
        horizon: config.horizon,
        dt: config.dt,
        variant: config.variant,
        acceptance_rate: chains.iter().map(|c| c.acceptance_rate).collect(),
        censored_fraction: censored as f64 / total as f64,
        proposal_scales: chains.iter().map(|c| c.proposal_scales.to_vec()).collect(),
    };
    let rows = chains
        .iter()
        .enumerate()
        .flat_map(|(i, c)| chain_rows(i, c));

    let mut out = Outputs::default();
    out.add(chain_path(config), csv_bytes(rows)?);
    out.add_toml(config.out_path(CHAIN_SUMMARY_FILE), &summary)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub baseline: f64,
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_peak: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_peak_date: Option<String>,
    /// End week of the point estimate, absent when it never crosses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end_date: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_date: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi_date: Option<String>,
    pub draws: usize,
    pub censored_fraction: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct HistogramRow {
    t_end: u32,
    week_start_date: String,
    count: usize,
    censored: bool,
}

fn date(t: u32) -> String {
    week_to_date(i64::from(t)).to_string()
}

fn end_week(p: &FullParams, baseline: f64, config: &RunConfig) -> Result<(u32, bool), CliError> {
    match crossing(
        &p.epidemic,
        &p.obs,
        baseline,
        config.horizon,
        config.variant,
        config.dt,
    ) {
        Ok(c) => Ok((c.t_end, false)),
        Err(CoreError::HorizonExceeded { horizon }) => Ok((horizon, true)),
        Err(e) => Err(e.into()),
    }
}

/// End weeks of the chain, reusing the stored values when they were
/// computed under the same settings.
fn chain_end_weeks(
    rows: &[ChainRow],
    stored: Option<&ChainSummary>,
    baseline: f64,
    config: &RunConfig,
) -> Result<Vec<(u32, bool)>, CliError> {
    let reusable = stored.is_some_and(|s| {
        s.baseline == baseline
            && s.horizon == config.horizon
            && s.dt == config.dt
            && s.variant == config.variant
    });
    if reusable {
        return Ok(rows.iter().map(|r| (r.t_end, r.censored)).collect());
    }
    let draws = rows
        .iter()
        .map(ChainRow::params)
        .collect::<Result<Vec<_>, _>>()?;
    parallel::map_slice(&draws, |d| end_week(d, baseline, config))
        .into_iter()
        .collect()
}

pub fn forecast(config: &RunConfig) -> Result<Outputs, CliError> {
    let series = series_path(config);
    let baseline = resolve_baseline(config, &series)?;
    let chain_file = chain_path(config);
    let params_file = params_path(config);
    let have_chain = chain_file.exists() || config.chain.is_some();
    let have_params = params_file.exists() || config.params.is_some();
    if !have_chain && !have_params {
        return Err(CliError::io(
            &chain_file,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no chain or parameter file to forecast from",
            ),
        ));
    }

    let mut fc = Forecast {
        baseline,
        variant: config.variant.to_string(),
        t_peak: None,
        t_peak_date: None,
        t_end: None,
        t_end_date: None,
        level: None,
        lo: None,
        hi: None,
        lo_date: None,
        hi_date: None,
        draws: 0,
        censored_fraction: 0.0,
        warnings: Vec::new(),
        notes: Vec::new(),
    };

    if have_params {
        let (_, point) = read_params(&params_file)?;
        match crossing(
            &point.epidemic,
            &point.obs,
            baseline,
            config.horizon,
            config.variant,
            config.dt,
        ) {
            Ok(Crossing { t_peak, t_end }) => {
                fc.t_peak = Some(t_peak);
                fc.t_peak_date = Some(date(t_peak));
                fc.t_end = Some(t_end);
                fc.t_end_date = Some(date(t_end));
                if t_end == t_peak {
                    fc.notes.push(format!(
                        "expected weekly count is already below baseline {baseline} at the peak week"
                    ));
                }
            }
            Err(CoreError::HorizonExceeded { horizon }) => fc.warnings.push(format!(
                "point estimate stays above baseline through week {horizon}"
            )),
            Err(e) => return Err(e.into()),
        }
    }

    let mut histogram = Vec::new();
    if have_chain {
        let rows = read_chain(&chain_file)?;
        let summary_file = chain_file
            .parent()
            .unwrap_or(Path::new("."))
            .join(CHAIN_SUMMARY_FILE);
        let stored: Option<ChainSummary> = if summary_file.exists() {
            Some(files::read_toml(&summary_file)?)
        } else {
            None
        };
        let ends = chain_end_weeks(&rows, stored.as_ref(), baseline, config)?;
        let values: Vec<u32> = ends.iter().map(|e| e.0).collect();
        let censored = ends.iter().filter(|e| e.1).count();
        let interval = equal_tailed(&values, config.level)?;
        fc.level = Some(interval.level);
        fc.lo = Some(interval.lo);
        fc.hi = Some(interval.hi);
        fc.lo_date = Some(date(interval.lo));
        fc.hi_date = Some(date(interval.hi));
        fc.draws = values.len();
        fc.censored_fraction = censored as f64 / values.len() as f64;
        if fc.censored_fraction > CENSORED_WARNING_FRACTION {
            fc.warnings.push(format!(
                "{:.1}% of draws never drop below baseline within {} weeks; the upper end is a lower bound",
                100.0 * fc.censored_fraction,
                config.horizon
            ));
        }
        if !have_params {
            let mut sorted = values.clone();
            sorted.sort_unstable();
            let median = sorted[(sorted.len() - 1) / 2];
            fc.t_end = Some(median);
            fc.t_end_date = Some(date(median));
            fc.notes
                .push("point estimate is the posterior median end week".into());
        }
        let mut sorted = ends;
        sorted.sort_unstable();
        for chunk in sorted.chunk_by(|a, b| a == b) {
            let (t, cens) = chunk[0];
            histogram.push(HistogramRow {
                t_end: t,
                week_start_date: date(t),
                count: chunk.len(),
                censored: cens,
            });
        }
    }

    let mut out = Outputs::default();
    out.add_toml(config.out_path(FORECAST_FILE), &fc)?;
    if have_chain {
        out.add(config.out_path(HISTOGRAM_FILE), csv_bytes(histogram)?);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ExpectedRow {
    week_index: i64,
    week_start_date: String,
    trials: u64,
    expected: f64,
}

pub fn simulate(config: &RunConfig) -> Result<Outputs, CliError> {
    let params_file = config
        .params
        .clone()
        .or_else(|| config.input.clone())
        .unwrap_or_else(|| config.out_path(PARAMS_FILE));
    let (stored, params) = read_params(&params_file)?;
    let series_file = config
        .series
        .clone()
        .unwrap_or_else(|| config.out_path(SERIES_FILE));
    let observed = if config.series.is_some() || series_file.exists() {
        Some(read_series(&series_file)?)
    } else {
        None
    };
    let weeks = config
        .weeks
        .or(observed.as_ref().map(WeeklySeries::len))
        .or(stored.weeks)
        .unwrap_or(DEFAULT_SIM_WEEKS);
    let start = observed
        .as_ref()
        .map(|s| s.start_week)
        .or(config.from_week)
        .unwrap_or(0);

    let envelope = predictive_envelope(&params, weeks, config.n_sims, config.level, config.seed)?;
    let mut sample = simulate_series(&params, weeks, config.seed)?;
    sample.start_week = start;
    let sim = Simulator::new(&params, weeks)?;
    let curve = integrate_sir(&params.epidemic, (weeks.max(2) - 1) as f64, config.dt)?;
    let expected = sim
        .trials()
        .iter()
        .enumerate()
        .map(|(t, &n)| {
            Ok(ExpectedRow {
                week_index: start + t as i64,
                week_start_date: week_to_date(start + t as i64).to_string(),
                trials: n,
                expected: curve.expected_reported(&params.obs, t as f64, RateVariant::Snapshot)?,
            })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;

    let mut out = Outputs::default();
    let mut env_csv = Vec::new();
    write_envelope_csv(&envelope, start, &mut env_csv)?;
    out.add(config.out_path(ENVELOPE_FILE), env_csv);
    let mut sim_csv = Vec::new();
    write_series_csv(&sample, &mut sim_csv)?;
    out.add(config.out_path(SIMULATED_FILE), sim_csv);
    out.add(config.out_path(EXPECTED_FILE), csv_bytes(expected)?);
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SensitivityRow {
    cutoff: usize,
    seed: u64,
    lo: Option<u32>,
    hi: Option<u32>,
    lo_date: Option<String>,
    hi_date: Option<String>,
    acceptance_rate: Option<f64>,
    censored_fraction: Option<f64>,
    fit_converged: Option<bool>,
    error: Option<String>,
}

pub fn sensitivity(config: &RunConfig) -> Result<Outputs, CliError> {
    let path = series_path(config);
    let series = read_series(&path)?;
    let range = config
        .cutoffs
        .ok_or_else(|| CliError::Usage("sensitivity needs --cutoffs A..B".into()))?;
    let baseline = resolve_baseline(config, &path)?;
    let cutoffs: Vec<usize> = range.iter().collect();
    let scan = sensitivity_scan(&series, &cutoffs, &config.pipeline(baseline));

    let rows = scan.into_iter().map(|entry| {
        let blank = SensitivityRow {
            cutoff: entry.cutoff,
            seed: entry.seed,
            lo: None,
            hi: None,
            lo_date: None,
            hi_date: None,
            acceptance_rate: None,
            censored_fraction: None,
            fit_converged: None,
            error: None,
        };
        match entry.result {
            Ok(s) => {
                let CredibleInterval { lo, hi, .. } = s.interval;
                SensitivityRow {
                    lo: Some(lo),
                    hi: Some(hi),
                    lo_date: Some(date(lo)),
                    hi_date: Some(date(hi)),
                    acceptance_rate: Some(s.acceptance_rate),
                    censored_fraction: Some(s.censored_fraction),
                    fit_converged: Some(s.fit_converged),
                    ..blank
                }
            }
            Err(e) => SensitivityRow {
                error: Some(e),
                ..blank
            },
        }
    });

    let mut out = Outputs::default();
    out.add(config.out_path(SENSITIVITY_FILE), csv_bytes(rows)?);
    Ok(out)
}
