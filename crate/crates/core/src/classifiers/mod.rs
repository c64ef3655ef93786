//! Nearest-neighbour dictionary classifiers: BOP, BOSS, the component-swap
//! variants between them, and SAX-VSM.

mod ensemble;
mod grid;
mod nn;
pub mod persist;
mod saxvsm;

pub use ensemble::{
    ensemble_classify, majority_vote, retain_ensemble, retained_len, DictionaryClassifier, EnsembleMember, RETENTION,
};
pub(crate) use ensemble::accuracy_of;
pub use grid::{grid_search, CellScore, MemberParams, ParameterGrid};
pub use nn::{loocv_accuracy, nn_classify};
pub(crate) use nn::{loocv_correct, nearest_index};
pub use saxvsm::{tfidf_weight, SaxVsm};

use serde::{Deserialize, Serialize};

use crate::bagging::Discretisation;
use crate::distances::Measure;
use crate::error::{Error, Result};
use crate::symbolic::Approximation;

/// The four swappable components plus the parameter search space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryConfig {
    pub approx: Approximation,
    pub disc: Discretisation,
    pub measure: Measure,
    pub ensemble: bool,
    pub numerosity: bool,
    /// `None` searches [`ParameterGrid::boss`] for the training series length.
    pub grid: Option<ParameterGrid>,
}

impl DictionaryConfig {
    /// Bag of patterns: PAA, Gaussian breakpoints, Euclidean, single best cell.
    pub fn bop() -> Self {
        Variant::Bop.config()
    }

    /// BOSS: truncated DFT, MCB, BOSS distance, 92% ensemble.
    pub fn boss() -> Self {
        Variant::Boss.config()
    }

    pub fn with_grid(mut self, grid: ParameterGrid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn grid_for(&self, m: usize) -> ParameterGrid {
        self.grid.clone().unwrap_or_else(|| ParameterGrid::boss(m))
    }
}

/// The ten BOP/BOSS component-swap variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Bop,
    BopFt,
    BopMcb,
    BopBd,
    BopEns,
    Boss,
    BossFt,
    BossMcb,
    BossBd,
    BossEns,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Bop,
        Variant::BopFt,
        Variant::BopMcb,
        Variant::BopBd,
        Variant::BopEns,
        Variant::Boss,
        Variant::BossFt,
        Variant::BossMcb,
        Variant::BossBd,
        Variant::BossEns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Bop => "BOP",
            Variant::BopFt => "BOP+FT",
            Variant::BopMcb => "BOP+MCB",
            Variant::BopBd => "BOP+BD",
            Variant::BopEns => "BOP+Ens",
            Variant::Boss => "BOSS",
            Variant::BossFt => "BOSS-FT",
            Variant::BossMcb => "BOSS-MCB",
            Variant::BossBd => "BOSS-BD",
            Variant::BossEns => "BOSS-Ens",
        }
    }

    pub fn config(self) -> DictionaryConfig {
        use Approximation::*;
        use Discretisation::*;
        use Measure::*;
        let (approx, disc, measure, ensemble) = match self {
            Variant::Bop => (Paa, Gaussian, Euclidean, false),
            Variant::BopFt => (Dft, Gaussian, Euclidean, false),
            Variant::BopMcb => (Paa, Mcb, Euclidean, false),
            Variant::BopBd => (Paa, Gaussian, BossDistance, false),
            Variant::BopEns => (Paa, Gaussian, Euclidean, true),
            Variant::Boss => (Dft, Mcb, BossDistance, true),
            Variant::BossFt => (Paa, Mcb, BossDistance, true),
            Variant::BossMcb => (Dft, Gaussian, BossDistance, true),
            Variant::BossBd => (Dft, Mcb, Euclidean, true),
            Variant::BossEns => (Dft, Mcb, BossDistance, false),
        };
        DictionaryConfig {
            approx,
            disc,
            measure,
            ensemble,
            numerosity: true,
            grid: None,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    /// Accepts the names above, case-insensitively, with `-` or `\u{2212}`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('\u{2212}', "-").to_ascii_uppercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name().to_ascii_uppercase() == norm)
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                Error::param(format!("unknown variant {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_axes() {
        let bd = "BOP+BD".parse::<Variant>().unwrap().config();
        assert_eq!(
            (bd.approx, bd.disc, bd.measure, bd.ensemble),
            (Approximation::Paa, Discretisation::Gaussian, Measure::BossDistance, false)
        );
        let single = "BOSS\u{2212}Ens".parse::<Variant>().unwrap().config();
        assert_eq!(
            (single.approx, single.disc, single.measure, single.ensemble),
            (Approximation::Dft, Discretisation::Mcb, Measure::BossDistance, false)
        );
        assert!("BOP+SVM".parse::<Variant>().is_err());
    }

    #[test]
    fn every_variant_differs_from_its_base_in_one_axis() {
        let axes = |v: Variant| {
            let c = v.config();
            [
                c.approx == Approximation::Dft,
                c.disc == Discretisation::Mcb,
                c.measure == Measure::BossDistance,
                c.ensemble,
            ]
        };
        for v in Variant::ALL {
            let base = if v.name().starts_with("BOSS") { Variant::Boss } else { Variant::Bop };
            let diff = axes(v).iter().zip(axes(base)).filter(|(a, b)| *a != b).count();
            assert_eq!(diff, usize::from(v != base), "{v}");
        }
        let names: std::collections::HashSet<_> = Variant::ALL.iter().map(|v| v.name()).collect();
        assert_eq!(names.len(), 10);
    }
}
