use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{YearRange, DEFAULT_EARLY, DEFAULT_LATE};
use crate::corpus::{FilterConfig, LengthBuckets};
use crate::embedding::{ExpansionConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::induction::InductionThresholds;
use crate::taxonomy::{default_level2_map, Tier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityInput {
    pub name: String,
    pub reviews: PathBuf,
    pub listings: Option<PathBuf>,
    /// GeoJSON polygons (`.geojson` / `.json`) or a `listing_id,district_id` CSV.
    pub districts: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub cities: Vec<CityInput>,
    pub labeled: Option<PathBuf>,
    /// Dictionary used by `analyze` and `validate-dictionary` instead of the
    /// one built by `cluster`.
    pub dictionary: Option<PathBuf>,
    /// Pre-trained vectors loaded by `embed` instead of training.
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InductionConfig {
    pub tf_min: f64,
    pub tf_max: f64,
    pub gain_min: f64,
    /// Also emit the threshold-grid walk over the published grid.
    pub grid: bool,
}

impl Default for InductionConfig {
    fn default() -> Self {
        let t = InductionThresholds::default();
        InductionConfig {
            tf_min: t.tf_min,
            tf_max: t.tf_max,
            gain_min: t.gain_min,
            grid: false,
        }
    }
}

impl InductionConfig {
    pub fn thresholds(&self) -> Result<InductionThresholds> {
        InductionThresholds::new(self.tf_min, self.tf_max, self.gain_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    /// Default cluster name (`theme-kK#i`) to category label.
    pub names: BTreeMap<String, String>,
    /// Level-2 theme to level-1 category.
    pub level2: BTreeMap<String, String>,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            k_min: 1,
            k_max: 8,
            restarts: 5,
            names: BTreeMap::new(),
            level2: default_level2_map(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Temporal,
    Nullmodel,
    Confounds,
    Roomtype,
    Segments,
    Neighbourhoods,
    Tfgain,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Temporal,
        Task::Nullmodel,
        Task::Confounds,
        Task::Roomtype,
        Task::Segments,
        Task::Neighbourhoods,
        Task::Tfgain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Temporal => "temporal",
            Task::Nullmodel => "nullmodel",
            Task::Confounds => "confounds",
            Task::Roomtype => "roomtype",
            Task::Segments => "segments",
            Task::Neighbourhoods => "neighbourhoods",
            Task::Tfgain => "tfgain",
        }
    }

    fn needs_listings(self) -> bool {
        matches!(self, Task::Roomtype | Task::Segments | Task::Neighbourhoods)
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::config(format!("unknown analysis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub tasks: Vec<Task>,
    pub early: YearRange,
    pub late: YearRange,
    /// Inclusive word-count ranges; must tile `[filter.min_words, filter.max_words]`.
    pub length_buckets: Vec<(usize, usize)>,
    /// Score host segments within each city instead of pooling cities.
    pub segments_by_city: bool,
    pub tfgain_top_k: usize,
    /// GeoJSON property holding the district id.
    pub district_property: String,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tasks: Task::ALL.to_vec(),
            early: DEFAULT_EARLY,
            late: DEFAULT_LATE,
            length_buckets: vec![(5, 25), (26, 50), (51, 100), (101, 175)],
            segments_by_city: false,
            tfgain_top_k: 10,
            district_property: "district_id".into(),
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run needs. Relative paths resolve against the config file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub induction: InductionConfig,
    /// Its `seed` is replaced by the run seed.
    #[serde(default)]
    pub embedding: TrainConfig,
    #[serde(default)]
    pub expansion: ExpansionConfig,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: default_out(),
            inputs: Inputs::default(),
            filter: FilterConfig::default(),
            induction: InductionConfig::default(),
            embedding: TrainConfig::default(),
            expansion: ExpansionConfig::default(),
            clustering: ClusteringConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Read a config file and resolve its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.out);
        let i = &mut self.inputs;
        for c in &mut i.cities {
            resolve(base, &mut c.reviews);
            for p in [&mut c.listings, &mut c.districts].into_iter().flatten() {
                resolve(base, p);
            }
        }
        for p in [&mut i.labeled, &mut i.dictionary, &mut i.embeddings].into_iter().flatten() {
            resolve(base, p);
        }
    }

    pub fn tier_list() -> [Tier; 3] {
        [Tier::Level1, Tier::Level2, Tier::Level3]
    }

    pub fn length_buckets(&self) -> Result<LengthBuckets> {
        let hi = if self.filter.max_words == usize::MAX {
            self.analysis.length_buckets.iter().map(|b| b.1).max().unwrap_or(0)
        } else {
            self.filter.max_words
        };
        LengthBuckets::new(self.analysis.length_buckets.clone(), self.filter.min_words, hi)
    }

    fn check_file(p: &Path, what: &str) -> Result<()> {
        if p.is_file() {
            Ok(())
        } else {
            Err(Error::config(format!("{what} `{}` does not exist", p.display())))
        }
    }

    /// Settings and inputs every stage relies on.
    pub fn validate_common(&self) -> Result<()> {
        self.filter.validate()?;
        self.induction.thresholds()?;
        self.expansion.validate()?;
        let mut names = std::collections::BTreeSet::new();
        for c in &self.inputs.cities {
            if !names.insert(&c.name) {
                return Err(Error::config(format!("city `{}` listed twice", c.name)));
            }
            Self::check_file(&c.reviews, "reviews file")?;
            for (p, what) in [(&c.listings, "listings file"), (&c.districts, "districts file")] {
                if let Some(p) = p {
                    Self::check_file(p, what)?;
                }
            }
        }
        for (p, what) in [
            (&self.inputs.labeled, "labeled sentences"),
            (&self.inputs.dictionary, "dictionary"),
            (&self.inputs.embeddings, "embeddings"),
        ] {
            if let Some(p) = p {
                Self::check_file(p, what)?;
            }
        }
        let c = &self.clustering;
        if c.k_min == 0 || c.k_min > c.k_max || c.restarts == 0 {
            return Err(Error::config("clustering needs 1 <= k_min <= k_max and restarts >= 1"));
        }
        Ok(())
    }

    pub fn require_cities(&self) -> Result<()> {
        if self.inputs.cities.is_empty() {
            return Err(Error::config("no [[inputs.cities]] configured"));
        }
        Ok(())
    }

    pub fn require_labeled(&self) -> Result<&Path> {
        self.inputs
            .labeled
            .as_deref()
            .ok_or_else(|| Error::config("inputs.labeled is not set"))
    }

    pub fn validate_analysis(&self, tasks: &[Task]) -> Result<()> {
        self.require_cities()?;
        if tasks.contains(&Task::Confounds) {
            self.length_buckets()?;
        }
        let a = &self.analysis;
        if a.early.from > a.early.to || a.late.from > a.late.to {
            return Err(Error::config("year ranges must run forwards"));
        }
        for t in tasks {
            if t.needs_listings() {
                if let Some(c) = self.inputs.cities.iter().find(|c| c.listings.is_none()) {
                    return Err(Error::config(format!(
                        "analysis `{}` needs listings, city `{}` has none",
                        t.name(),
                        c.name
                    )));
                }
            }
            if *t == Task::Neighbourhoods {
                if let Some(c) = self.inputs.cities.iter().find(|c| c.districts.is_none()) {
                    return Err(Error::config(format!("city `{}` has no districts file", c.name)));
                }
            }
        }
        Ok(())
    }
}
