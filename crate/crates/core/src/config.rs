//! TOML run configuration shared by every command.
//!
//! Relative paths resolve against the directory of the config file. The
//! seed is mandatory. Command-line flags override keys after loading.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::WindowSpec;
use crate::forest::ForestConfig;
use crate::lasso::{LassoConfig, ObjectiveScaling};
use crate::ranking::YoungSpec;
use crate::schema::PositionCode;
use crate::tree::TreeConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub matches: PathBuf,
    pub valuations: PathBuf,
    pub profiles: PathBuf,
    pub top20_clubs: PathBuf,
    pub league_tiers: PathBuf,
    /// Built-in alias table when absent.
    #[serde(default)]
    pub position_aliases: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lasso,
    Forest,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lasso => "lasso",
            ModelKind::Forest => "forest",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(ModelKind::Lasso),
            "forest" => Ok(ModelKind::Forest),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoSection {
    /// Fixed penalty. When absent the penalty is chosen so that between
    /// `active_min` and `active_max` features stay active.
    pub lambda: Option<f64>,
    pub active_min: usize,
    pub active_max: usize,
    pub scaling: ObjectiveScaling,
    pub max_sweeps: usize,
    pub tol: f64,
    /// Penalty of the fit behind the age curve.
    pub age_curve_lambda: f64,
}

impl Default for LassoSection {
    fn default() -> Self {
        let base = LassoConfig::default();
        Self {
            lambda: None,
            active_min: 10,
            active_max: 15,
            scaling: base.objective_scaling,
            max_sweeps: base.max_sweeps,
            tol: base.tol,
            age_curve_lambda: 1e-4,
        }
    }
}

impl LassoSection {
    pub fn config(&self, lambda: f64) -> LassoConfig {
        LassoConfig {
            lambda,
            max_sweeps: self.max_sweeps,
            tol: self.tol,
            objective_scaling: self.scaling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub feature_subset_size: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestSection {
    fn default() -> Self {
        let base = ForestConfig::default();
        Self {
            n_trees: base.n_trees,
            max_depth: base.tree.max_depth,
            min_samples_leaf: base.tree.min_samples_leaf,
            min_samples_split: base.tree.min_samples_split,
            feature_subset_size: base.feature_subset_size,
            bootstrap: base.bootstrap,
        }
    }
}

impl ForestSection {
    pub fn config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            tree: TreeConfig {
                max_depth: self.max_depth,
                min_samples_leaf: self.min_samples_leaf,
                min_samples_split: self.min_samples_split,
                feature_subset_size: None,
            },
            feature_subset_size: self.feature_subset_size,
            bootstrap: self.bootstrap,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankSection {
    #[serde(flatten)]
    pub young: YoungSpec,
    /// Date at which candidates are ranked; defaults to the last match date
    /// in the corpus.
    pub as_of: Option<NaiveDate>,
    /// Candidates must be younger than this at `as_of`.
    pub max_age_years: u32,
    pub model: ModelKind,
    /// Reference ranking file (`rank,player_id`).
    pub reference: Option<PathBuf>,
    /// Compare only against the reference's first `reference_top_k` players.
    pub reference_top_k: Option<usize>,
    /// Rows of the text report.
    pub top: usize,
}

impl Default for RankSection {
    fn default() -> Self {
        Self {
            young: YoungSpec::default(),
            as_of: None,
            max_age_years: 21,
            model: ModelKind::Lasso,
            reference: None,
            reference_top_k: None,
            top: 13,
        }
    }
}

fn default_k() -> usize {
    5
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Restricts per-position commands; all positions when absent.
    #[serde(default)]
    pub position: Option<PositionCode>,
    /// Restricts `train`, `evaluate` and `importance`; both when absent.
    #[serde(default)]
    pub model: Option<ModelKind>,
    /// Drops the league-average column from training tables.
    #[serde(default)]
    pub no_league_feature: bool,
    pub data: DataPaths,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub lasso: LassoSection,
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub rank: RankSection,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub position: Option<PositionCode>,
    pub model: Option<ModelKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_league_feature: bool,
    pub reference: Option<PathBuf>,
}

impl RunConfig {
    /// Parses TOML text; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
        Self::from_toml_str(&text, &base)
    }

    /// Applies command-line overrides. Paths given on the command line
    /// stay relative to the working directory.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
        let absolute = |p: &PathBuf| if p.is_absolute() { p.clone() } else { cwd.join(p) };
        if o.position.is_some() {
            self.position = o.position;
        }
        if o.model.is_some() {
            self.model = o.model;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output_dir = absolute(out);
        }
        if o.no_league_feature {
            self.no_league_feature = true;
        }
        if let Some(r) = &o.reference {
            self.rank.reference = Some(absolute(r));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self, name: &str) -> PathBuf {
        self.resolve(&self.output_dir).join(name)
    }

    fn input_paths(&self) -> Vec<&Path> {
        let d = &self.data;
        let mut paths = vec![
            d.matches.as_path(),
            d.valuations.as_path(),
            d.profiles.as_path(),
            d.top20_clubs.as_path(),
            d.league_tiers.as_path(),
        ];
        paths.extend(d.position_aliases.as_deref());
        paths.extend(self.rank.reference.as_deref());
        paths
    }

    /// Checks that every referenced file exists and that the model
    /// settings are usable.
    pub fn validate(&self) -> Result<()> {
        for p in self.input_paths() {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(Error::io(
                    full,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file does not exist"),
                ));
            }
        }
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("k must be >= 2, got {}", self.k)));
        }
        self.window.validate()?;
        if let Some(l) = self.lasso.lambda {
            self.lasso.config(l).validate()?;
        }
        self.lasso.config(self.lasso.age_curve_lambda).validate()?;
        if self.lasso.active_min > self.lasso.active_max {
            return Err(Error::InvalidConfig("lasso.active_min exceeds lasso.active_max".into()));
        }
        self.forest.config(self.seed).tree.validate()?;
        if self.forest.n_trees == 0 {
            return Err(Error::InvalidConfig("forest.n_trees must be >= 1".into()));
        }
        let y = &self.rank.young;
        if y.horizon_days <= 0 || y.window_days <= 0 || y.tolerance_days < 0 {
            return Err(Error::InvalidConfig(format!("invalid young-player windows: {y:?}")));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the effective configuration.
    /// The output directory does not take part, so identical runs into
    /// different directories produce identical files.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output_dir = PathBuf::new();
        let canonical = serde_json::to_string(&cfg).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))[..16].to_string()
    }

    /// Comment line that opens every output file.
    pub fn header(&self) -> String {
        format!("# valuecast config_hash={} seed={}", self.hash(), self.seed)
    }

    pub fn positions(&self) -> Vec<PositionCode> {
        match self.position {
            Some(p) => vec![p],
            None => PositionCode::ALL.to_vec(),
        }
    }

    pub fn models(&self) -> Vec<ModelKind> {
        match self.model {
            Some(m) => vec![m],
            None => vec![ModelKind::Lasso, ModelKind::Forest],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
[data]
matches = "m.csv"
valuations = "v.csv"
profiles = "p.csv"
top20_clubs = "top.txt"
league_tiers = "tiers.csv"
"#;

    #[test]
    fn defaults_and_resolution() {
        let cfg = RunConfig::from_toml_str(MINIMAL, Path::new("/data/run")).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.window, WindowSpec::default());
        assert_eq!(cfg.lasso.active_min, 10);
        assert_eq!(cfg.forest.n_trees, 100);
        assert_eq!(cfg.resolve(&cfg.data.matches), PathBuf::from("/data/run/m.csv"));
        assert_eq!(cfg.output_path("x.csv"), PathBuf::from("/data/run/out/x.csv"));
        assert_eq!(cfg.models(), vec![ModelKind::Lasso, ModelKind::Forest]);
        assert_eq!(cfg.positions().len(), 8);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 3", "");
        assert!(matches!(RunConfig::from_toml_str(&text, Path::new(".")), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\n[forest]\ntrees = 4\n");
        assert!(RunConfig::from_toml_str(&text, Path::new(".")).is_err());
    }

    #[test]
    fn missing_files_fail_validation() {
        let cfg = RunConfig::from_toml_str(MINIMAL, Path::new("/nonexistent")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Io { .. })));
    }

    #[test]
    fn hash_tracks_overrides() {
        let mut cfg = RunConfig::from_toml_str(MINIMAL, Path::new(".")).unwrap();
        let before = cfg.hash();
        assert_eq!(before, cfg.clone().hash());
        cfg.apply(&Overrides {
            seed: Some(4),
            ..Overrides::default()
        })
        .unwrap();
        assert_ne!(before, cfg.hash());
        assert!(cfg.header().ends_with("seed=4"));
    }

    #[test]
    fn rank_section_flattens_young_spec() {
        let text = format!("{MINIMAL}\n[rank]\nhorizon_days = 200\nas_of = \"2022-06-30\"\nreference_top_k = 10\n");
        let cfg = RunConfig::from_toml_str(&text, Path::new(".")).unwrap();
        assert_eq!(cfg.rank.young.horizon_days, 200);
        assert_eq!(cfg.rank.young.tolerance_days, 90);
        assert_eq!(cfg.rank.reference_top_k, Some(10));
    }
}
