//! Saving trained classifiers to a directory and loading them back.
//!
//! A model directory holds `manifest.json` plus one training-bag file per
//! member and, where the member needs one, its breakpoint table or codebook.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bagging::{bags_from_text, bags_to_text, BagConfig};
use crate::botsw::{BotswClassifier, BotswConfig, BotswMember, BotswParams, Codebook};
use crate::classifiers::{accuracy_of, DictionaryClassifier, DictionaryConfig, EnsembleMember, MemberParams};
use crate::data::LabeledDataset;
use crate::distances::{Measure, WeightedVector};
use crate::error::{Error, Result};
use crate::pyramid::{PyramidHistogram, SpClassifier, SpMember};
use crate::scalar::Scalar;
use crate::symbolic::BreakpointTable;

const MANIFEST: &str = "manifest.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Settings {
    Dictionary { config: DictionaryConfig },
    Pyramid { measure: Measure },
    Botsw { config: BotswConfig },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MemberEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<MemberParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bag_config: Option<BagConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    botsw: Option<BotswParams>,
    train_acc: f64,
    train_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model_file: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Manifest {
    format: u32,
    class_names: Vec<String>,
    settings: Settings,
    members: Vec<MemberEntry>,
}

/// Any trained classifier that can be written to disk.
#[derive(Clone, Debug)]
pub enum Model<T> {
    Dictionary(DictionaryClassifier<T>),
    Pyramid(SpClassifier<T>),
    Botsw(BotswClassifier<T>),
}

impl<T: Scalar> Model<T> {
    pub fn class_names(&self) -> &[String] {
        match self {
            Model::Dictionary(c) => &c.class_names,
            Model::Pyramid(c) => &c.class_names,
            Model::Botsw(c) => &c.class_names,
        }
    }

    pub fn n_members(&self) -> usize {
        match self {
            Model::Dictionary(c) => c.members.len(),
            Model::Pyramid(c) => c.members.len(),
            Model::Botsw(c) => c.members.len(),
        }
    }

    pub fn predict(&self, series: &[T]) -> Result<usize> {
        match self {
            Model::Dictionary(c) => c.predict(series),
            Model::Pyramid(c) => c.predict(series),
            Model::Botsw(c) => c.predict(series),
        }
    }

    pub fn predict_dataset(&self, data: &LabeledDataset<T>) -> Result<Vec<usize>> {
        data.series().par_iter().map(|s| self.predict(s.values())).collect()
    }

    pub fn accuracy(&self, data: &LabeledDataset<T>) -> Result<f64> {
        accuracy_of(&self.predict_dataset(data)?, data.labels())
    }

    /// Writes the model into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        let mut members = Vec::new();
        let settings = match self {
            Model::Dictionary(c) => {
                for (i, m) in c.members.iter().enumerate() {
                    let train_file = format!("member_{i}.bags");
                    write(&train_file, bags_to_text(&m.train_bags))?;
                    let model_file = match &m.disc_model {
                        Some(t) => {
                            let f = format!("member_{i}.breakpoints");
                            write(&f, t.to_text())?;
                            Some(f)
                        }
                        None => None,
                    };
                    members.push(MemberEntry {
                        params: Some(m.params),
                        bag_config: Some(m.bag_config),
                        levels: None,
                        botsw: None,
                        train_acc: m.train_acc,
                        train_file,
                        model_file,
                    });
                }
                Settings::Dictionary {
                    config: c.config.clone(),
                }
            }
            Model::Pyramid(c) => {
                for (i, m) in c.members.iter().enumerate() {
                    let train_file = format!("member_{i}.pyramids");
                    let mut body = String::new();
                    for (p, label) in &m.train {
                        let _ = writeln!(body, "{label} {}", p.to_text());
                    }
                    write(&train_file, body)?;
                    let model_file = match &m.disc_model {
                        Some(t) => {
                            let f = format!("member_{i}.breakpoints");
                            write(&f, t.to_text())?;
                            Some(f)
                        }
                        None => None,
                    };
                    members.push(MemberEntry {
                        params: Some(m.params),
                        bag_config: Some(m.bag_config),
                        levels: Some(m.levels),
                        botsw: None,
                        train_acc: m.train_acc,
                        train_file,
                        model_file,
                    });
                }
                Settings::Pyramid { measure: c.measure }
            }
            Model::Botsw(c) => {
                for (i, m) in c.members.iter().enumerate() {
                    let train_file = format!("member_{i}.vectors");
                    write(&train_file, weighted_to_text(&m.train_bags))?;
                    let model_file = format!("member_{i}.codebook");
                    write(&model_file, m.codebook.to_text())?;
                    members.push(MemberEntry {
                        params: None,
                        bag_config: None,
                        levels: None,
                        botsw: Some(m.params),
                        train_acc: m.train_acc,
                        train_file,
                        model_file: Some(model_file),
                    });
                }
                Settings::Botsw {
                    config: c.config.clone(),
                }
            }
        };
        let manifest = Manifest {
            format: FORMAT_VERSION,
            class_names: self.class_names().to_vec(),
            settings,
            members,
        };
        write(MANIFEST, serde_json::to_string_pretty(&manifest)?)
    }

    /// Reads a model written by [`Model::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format != FORMAT_VERSION {
            return Err(Error::config(format!(
                "model format {} is not supported (expected {FORMAT_VERSION})",
                manifest.format
            )));
        }
        if manifest.members.is_empty() {
            return Err(Error::config("model has no members"));
        }
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        let table = |entry: &MemberEntry| -> Result<Option<BreakpointTable<T>>> {
            entry
                .model_file
                .as_deref()
                .map(|f| BreakpointTable::from_text(&read(f)?))
                .transpose()
        };
        let missing = |what: &str| Error::config(format!("model member is missing its {what}"));
        let class_names = manifest.class_names;
        Ok(match manifest.settings {
            Settings::Dictionary { config } => {
                let members = manifest
                    .members
                    .iter()
                    .map(|e| {
                        Ok(EnsembleMember {
                            params: e.params.ok_or_else(|| missing("params"))?,
                            bag_config: e.bag_config.ok_or_else(|| missing("bag_config"))?,
                            train_bags: bags_from_text(&read(&e.train_file)?)?,
                            disc_model: table(e)?,
                            train_acc: e.train_acc,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Model::Dictionary(DictionaryClassifier {
                    config,
                    members,
                    class_names,
                })
            }
            Settings::Pyramid { measure } => {
                let members = manifest
                    .members
                    .iter()
                    .map(|e| {
                        let train = read(&e.train_file)?
                            .lines()
                            .filter(|l| !l.trim().is_empty())
                            .map(|line| {
                                let (label, rest) = split_label(line)?;
                                Ok((PyramidHistogram::from_text(rest)?, label))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(SpMember {
                            params: e.params.ok_or_else(|| missing("params"))?,
                            levels: e.levels.ok_or_else(|| missing("levels"))?,
                            bag_config: e.bag_config.ok_or_else(|| missing("bag_config"))?,
                            train,
                            disc_model: table(e)?,
                            train_acc: e.train_acc,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Model::Pyramid(SpClassifier {
                    measure,
                    members,
                    class_names,
                })
            }
            Settings::Botsw { config } => {
                let members = manifest
                    .members
                    .iter()
                    .map(|e| {
                        let file = e.model_file.as_deref().ok_or_else(|| missing("codebook"))?;
                        Ok(BotswMember {
                            params: e.botsw.ok_or_else(|| missing("params"))?,
                            codebook: Codebook::from_text(&read(file)?)?,
                            train_bags: weighted_from_text(&read(&e.train_file)?)?,
                            train_acc: e.train_acc,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Model::Botsw(BotswClassifier {
                    config,
                    members,
                    class_names,
                })
            }
        })
    }
}

fn split_label(line: &str) -> Result<(usize, &str)> {
    let line = line.trim();
    let (label, rest) = line
        .split_once(' ')
        .ok_or_else(|| Error::input(format!("bad training line {line:?}")))?;
    let label = label
        .parse()
        .map_err(|_| Error::input(format!("bad label {label:?}")))?;
    Ok((label, rest))
}

/// `label n key:value ...` lines with values in full precision.
fn weighted_to_text(bags: &[(WeightedVector, usize)]) -> String {
    let mut s = String::new();
    for (v, label) in bags {
        let _ = write!(s, "{label} {}", v.entries().len());
        for &(k, x) in v.entries() {
            let _ = write!(s, " {k}:{x:e}");
        }
        s.push('\n');
    }
    s
}

fn weighted_from_text(text: &str) -> Result<Vec<(WeightedVector, usize)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let (label, rest) = split_label(line)?;
            let mut fields = rest.split_whitespace();
            let n: usize = fields
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::input(format!("bad vector line {line:?}")))?;
            let entries = fields
                .map(|f| {
                    let bad = || Error::input(format!("bad vector entry {f:?}"));
                    let (k, x) = f.split_once(':').ok_or_else(bad)?;
                    Ok((k.parse().map_err(|_| bad())?, x.parse().map_err(|_| bad())?))
                })
                .collect::<Result<Vec<(u64, f64)>>>()?;
            if entries.len() != n {
                return Err(Error::input(format!("vector declares {n} entries but lists {}", entries.len())));
            }
            Ok((WeightedVector::new(entries)?, label))
        })
        .collect()
}
