//! Resample experiments: every classifier on every dataset and resample,
//! appended to a results CSV and resumable after interruption.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use tsdict::data::{find_split_files, read_ucr_split, stratified_resample};
use tsdict::eval::{mean_and_stderr, ResultRow, ResultTable};
use tsdict::Dataset;

use crate::classifier::{describe, fit, ClassifierKind, GridOverrides};

/// Declarative experiment description, read from TOML.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentFile {
    pub datasets: Vec<PathBuf>,
    pub classifiers: Vec<String>,
    pub resamples: Option<u64>,
    pub seed_base: Option<u64>,
    pub results: Option<PathBuf>,
    pub timings: Option<bool>,
    pub grid: GridOverrides,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub datasets: Vec<PathBuf>,
    pub classifiers: Vec<ClassifierKind>,
    pub resamples: u64,
    pub seed_base: u64,
    pub results: PathBuf,
    pub timings: bool,
    pub grid: GridOverrides,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resamples == 0 {
            bail!("resamples must be at least 1");
        }
        if self.datasets.is_empty() {
            bail!("no datasets given");
        }
        if self.classifiers.is_empty() {
            bail!("no classifiers given");
        }
        Ok(())
    }
}

fn load_dataset(dir: &Path) -> Result<(Dataset, Dataset)> {
    let (train, test) = find_split_files(dir)?;
    read_ucr_split(&train, &test).with_context(|| format!("loading {}", dir.display()))
}

/// Runs every missing cell. Failed cells are logged and skipped; the
/// returned error reports how many failed.
pub fn run(spec: &ExperimentSpec) -> Result<()> {
    spec.validate()?;
    let datasets = spec
        .datasets
        .iter()
        .map(|d| load_dataset(d))
        .collect::<Result<Vec<_>>>()?;

    let mut done: HashSet<(String, String, u64)> = HashSet::new();
    if spec.results.exists() {
        for r in ResultTable::read_csv(&spec.results)?.rows {
            done.insert((r.classifier, r.dataset, r.resample));
        }
    }

    let mut failures = 0usize;
    for (train, test) in &datasets {
        let name = train.name().to_string();
        for r in 0..spec.resamples {
            let seed = spec.seed_base + r;
            let pending: Vec<ClassifierKind> = spec
                .classifiers
                .iter()
                .copied()
                .filter(|k| !done.contains(&(k.to_string(), name.clone(), r)))
                .collect();
            if pending.is_empty() {
                continue;
            }
            let (tr, te) = stratified_resample(train, test, seed)?;
            for kind in pending {
                log::info!("{kind} on {name}, resample {r} (seed {seed})");
                let start = Instant::now();
                let outcome = fit(kind, &tr, &spec.grid, seed).and_then(|model| {
                    let elapsed = start.elapsed().as_secs_f64();
                    let acc = model.accuracy(&te)?;
                    Ok((acc, elapsed, describe(&model)))
                });
                match outcome {
                    Ok((accuracy, elapsed, params)) => {
                        log::info!("{kind} on {name}, resample {r}: accuracy {accuracy:.4}");
                        let row = ResultRow {
                            classifier: kind.to_string(),
                            dataset: name.clone(),
                            resample: r,
                            accuracy,
                            train_time_s: if spec.timings { elapsed } else { 0.0 },
                            params,
                        };
                        ResultTable::append_csv(&spec.results, &[row])?;
                        done.insert((kind.to_string(), name.clone(), r));
                    }
                    Err(e) => {
                        log::error!("{kind} on {name}, resample {r} failed: {e:#}");
                        failures += 1;
                    }
                }
            }
        }
        summarise(&spec.results, &name, &spec.classifiers)?;
    }
    if failures > 0 {
        bail!("{failures} experiment cell(s) failed");
    }
    Ok(())
}

/// One stdout line per classifier: dataset, classifier, mean, standard
/// error and number of resamples.
fn summarise(results: &Path, dataset: &str, classifiers: &[ClassifierKind]) -> Result<()> {
    if !results.exists() {
        return Ok(());
    }
    let table = ResultTable::read_csv(results)?;
    for kind in classifiers {
        let name = kind.to_string();
        let accs: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| r.classifier == name && r.dataset == dataset)
            .map(|r| r.accuracy)
            .collect();
        if let Ok((mean, se)) = mean_and_stderr(&accs) {
            println!("{dataset}\t{name}\t{mean:.4}\t{se:.4}\t{}", accs.len());
        }
    }
    Ok(())
}
