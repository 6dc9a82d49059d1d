//! File formats owned by the CLI and atomic output.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use layoff_sir::dataio::read_series_csv;
use layoff_sir::inference::{PosteriorChain, DIM};
use layoff_sir::{EpidemicParams, FullParams, ObservationParams, RateVariant, WeeklySeries};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Output files of one command, written only after all of them are ready.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn add_toml<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), CliError> {
        let text = toml::to_string(value).map_err(|e| CliError::Format(e.to_string()))?;
        self.add(path, text.into_bytes());
        Ok(())
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn with_path(path: &Path, err: layoff_sir::Error) -> CliError {
    match CliError::from(err) {
        CliError::Io { source, .. } => CliError::io(path, source),
        CliError::Format(msg) => CliError::format_in(path, msg),
        other => other,
    }
}

pub fn read_series(path: &Path) -> Result<WeeklySeries, CliError> {
    read_series_csv(open(path)?).map_err(|e| with_path(path, e))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::format_in(path, e))
}

/// Fitted or user-supplied parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub j0: f64,
    pub k: f64,
    pub n_pop: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<RateVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weeks: Option<usize>,
}

fn default_delta() -> f64 {
    layoff_sir::sir::DEFAULT_DELTA
}

impl ParamsFile {
    pub fn from_params(p: &FullParams) -> Self {
        let e = &p.epidemic;
        Self {
            j0: e.j0,
            k: e.k,
            n_pop: e.n_pop,
            alpha: p.obs.alpha,
            beta: p.obs.beta,
            delta: e.delta,
            log_likelihood: None,
            evaluations: None,
            optimized: None,
            variant: None,
            weeks: None,
        }
    }

    pub fn params(&self) -> Result<FullParams, CliError> {
        build_params(
            [self.j0, self.k, self.n_pop, self.alpha, self.beta],
            self.delta,
        )
    }
}

pub fn build_params(v: [f64; DIM], delta: f64) -> Result<FullParams, CliError> {
    Ok(FullParams {
        epidemic: EpidemicParams::with_delta(v[0], v[1], v[2], delta)?,
        obs: ObservationParams::new(v[3], v[4])?,
    })
}

pub fn read_params(path: &Path) -> Result<(ParamsFile, FullParams), CliError> {
    let file: ParamsFile = read_toml(path)?;
    let params = file.params().map_err(|e| CliError::format_in(path, e))?;
    Ok((file, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub chain: usize,
    pub iteration: usize,
    pub j0: f64,
    pub k: f64,
    pub n_pop: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub log_likelihood: f64,
    pub t_end: u32,
    pub censored: bool,
}

impl ChainRow {
    pub fn params(&self) -> Result<FullParams, CliError> {
        build_params(
            [self.j0, self.k, self.n_pop, self.alpha, self.beta],
            self.delta,
        )
    }
}

pub fn chain_rows(index: usize, chain: &PosteriorChain) -> impl Iterator<Item = ChainRow> + '_ {
    chain.draws.iter().enumerate().map(move |(i, d)| ChainRow {
        chain: index,
        iteration: i,
        j0: d.epidemic.j0,
        k: d.epidemic.k,
        n_pop: d.epidemic.n_pop,
        alpha: d.obs.alpha,
        beta: d.obs.beta,
        delta: d.epidemic.delta,
        log_likelihood: chain.log_likelihoods[i],
        t_end: chain.t_end_draws[i],
        censored: chain.censored[i],
    })
}

pub fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Format(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Format(e.to_string()))
}

pub fn read_chain(path: &Path) -> Result<Vec<ChainRow>, CliError> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let rows = reader
        .deserialize()
        .collect::<Result<Vec<ChainRow>, _>>()
        .map_err(|e| CliError::format_in(path, e))?;
    if rows.is_empty() {
        return Err(CliError::format_in(path, "chain has no draws"));
    }
    Ok(rows)
}

/// Settings a chain's stored end weeks depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub baseline: f64,
    pub horizon: f64,
    pub dt: f64,
    pub variant: RateVariant,
    pub acceptance_rate: Vec<f64>,
    pub censored_fraction: f64,
    pub proposal_scales: Vec<Vec<f64>>,
}
