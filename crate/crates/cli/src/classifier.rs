//! Classifier names accepted on the command line and how each is trained.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tsdict::botsw::{BotswClassifier, BotswConfig};
use tsdict::classifiers::persist::Model;
use tsdict::classifiers::{DictionaryClassifier, ParameterGrid, Variant};
use tsdict::pyramid::SpClassifier;
use tsdict::{Dataset, Measure};

/// A trainable classifier family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassifierKind {
    Dictionary(Variant),
    Pyramid(Measure),
    Botsw(Measure),
}

impl FromStr for ClassifierKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let measure = |suffix: &str| -> Result<Measure> {
            match suffix {
                "HI" => Ok(Measure::HistogramIntersection),
                "BD" => Ok(Measure::BossDistance),
                other => bail!("unsupported measure {other:?} in {s:?}; use HI or BD"),
            }
        };
        if let Some(m) = upper.strip_prefix("SP-") {
            return Ok(ClassifierKind::Pyramid(measure(m)?));
        }
        if let Some(m) = upper.strip_prefix("BOTSW-") {
            return Ok(ClassifierKind::Botsw(measure(m)?));
        }
        s.parse::<Variant>().map(ClassifierKind::Dictionary).map_err(|e| {
            anyhow::anyhow!("{e}; SP-HI, SP-BD, BOTSW-HI and BOTSW-BD are also accepted")
        })
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = |m: &Measure| if *m == Measure::HistogramIntersection { "HI" } else { "BD" };
        match self {
            ClassifierKind::Dictionary(v) => write!(f, "{v}"),
            ClassifierKind::Pyramid(m) => write!(f, "SP-{}", short(m)),
            ClassifierKind::Botsw(m) => write!(f, "BOTSW-{}", short(m)),
        }
    }
}

/// Integer list written as `a,b,c`, `lo:hi` or `lo:hi:step`, or a mix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ListSource", into = "String")]
pub struct NumList(pub Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum ListSource {
    Text(String),
    Values(Vec<usize>),
}

impl TryFrom<ListSource> for NumList {
    type Error = anyhow::Error;

    fn try_from(src: ListSource) -> Result<Self> {
        match src {
            ListSource::Text(s) => s.parse(),
            ListSource::Values(v) if v.is_empty() => bail!("empty list"),
            ListSource::Values(v) => Ok(NumList(v)),
        }
    }
}

impl From<NumList> for String {
    fn from(l: NumList) -> String {
        l.0.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    }
}

impl FromStr for NumList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let nums = part
                .split(':')
                .map(|n| n.trim().parse::<usize>().with_context(|| format!("bad number in {part:?}")))
                .collect::<Result<Vec<_>>>()?;
            match nums[..] {
                [v] => out.push(v),
                [lo, hi] => out.extend(lo..=hi),
                [lo, hi, step] if step > 0 => out.extend((lo..=hi).step_by(step)),
                _ => bail!("bad range {part:?}; expected lo:hi or lo:hi:step"),
            }
        }
        if out.is_empty() {
            bail!("empty list {s:?}");
        }
        Ok(NumList(out))
    }
}

/// Optional replacements for the default search spaces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    /// Window lengths for BOP/BOSS/SP, e.g. `10:50` or `12,24,36`
    #[arg(long)]
    pub windows: Option<NumList>,
    /// Word lengths for BOP/BOSS/SP
    #[arg(long)]
    pub word_lengths: Option<NumList>,
    /// Alphabet sizes for BOP/BOSS/SP
    #[arg(long)]
    pub alphas: Option<NumList>,
    /// Restrict the mean-drop flag to one value
    #[arg(long)]
    pub p: Option<bool>,
    /// BOTSW blocks per descriptor
    #[arg(long)]
    pub blocks: Option<NumList>,
    /// BOTSW points per block
    #[arg(long)]
    pub block_size: Option<NumList>,
    /// BOTSW codebook sizes
    #[arg(long)]
    pub codebook_sizes: Option<NumList>,
}

impl GridOverrides {
    /// Fields set in `self` win over those in `base`.
    pub fn over(&self, base: &GridOverrides) -> GridOverrides {
        GridOverrides {
            windows: self.windows.clone().or_else(|| base.windows.clone()),
            word_lengths: self.word_lengths.clone().or_else(|| base.word_lengths.clone()),
            alphas: self.alphas.clone().or_else(|| base.alphas.clone()),
            p: self.p.or(base.p),
            blocks: self.blocks.clone().or_else(|| base.blocks.clone()),
            block_size: self.block_size.clone().or_else(|| base.block_size.clone()),
            codebook_sizes: self.codebook_sizes.clone().or_else(|| base.codebook_sizes.clone()),
        }
    }

    pub fn dictionary_grid(&self, m: usize) -> Result<ParameterGrid> {
        let mut grid = ParameterGrid::boss(m);
        if let Some(w) = &self.windows {
            grid.windows = w.0.clone();
        }
        if let Some(l) = &self.word_lengths {
            grid.word_lengths = l.0.clone();
        }
        if let Some(a) = &self.alphas {
            grid.alphas = a.0.clone();
        }
        if let Some(p) = self.p {
            grid.p_values = vec![p];
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn botsw_config(&self, measure: Measure, seed: u64) -> BotswConfig {
        let mut cfg = BotswConfig::new(measure);
        cfg.seed = seed;
        if let Some(v) = &self.blocks {
            cfg.grid.n_b = v.0.clone();
        }
        if let Some(v) = &self.block_size {
            cfg.grid.a = v.0.clone();
        }
        if let Some(v) = &self.codebook_sizes {
            cfg.grid.k = v.0.clone();
        }
        cfg
    }
}

/// Trains `kind` on `train`. `seed` drives the BOTSW codebooks.
pub fn fit(kind: ClassifierKind, train: &Dataset, grid: &GridOverrides, seed: u64) -> Result<Model<f64>> {
    let m = train.series_length();
    Ok(match kind {
        ClassifierKind::Dictionary(v) => {
            let cfg = v.config().with_grid(grid.dictionary_grid(m)?);
            Model::Dictionary(DictionaryClassifier::fit(train, &cfg)?)
        }
        ClassifierKind::Pyramid(measure) => {
            Model::Pyramid(SpClassifier::fit(train, Some(&grid.dictionary_grid(m)?), measure)?)
        }
        ClassifierKind::Botsw(measure) => {
            Model::Botsw(BotswClassifier::fit(train, &grid.botsw_config(measure, seed))?)
        }
    })
}

/// Short description of a trained model for the results table.
pub fn describe(model: &Model<f64>) -> String {
    let members = model.n_members();
    let best = match model {
        Model::Dictionary(c) => c
            .members
            .first()
            .map(|m| format!("w{}/l{}/a{}/p{}", m.params.w, m.params.l, m.params.alpha, u8::from(m.params.p))),
        Model::Pyramid(c) => c.members.first().map(|m| {
            format!("w{}/l{}/a{}/p{}/L{}", m.params.w, m.params.l, m.params.alpha, u8::from(m.params.p), m.levels)
        }),
        Model::Botsw(c) => c
            .members
            .first()
            .map(|m| format!("nb{}/a{}/k{}", m.params.n_b, m.params.a, m.params.k)),
    };
    format!("members={members} best={}", best.unwrap_or_default())
}
