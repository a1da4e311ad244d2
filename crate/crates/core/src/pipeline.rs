//! End-to-end commands behind the binary: each reads a [`RunConfig`],
//! runs one stage and writes its artifacts into the output directory.
//!
//! CSV and text outputs open with the line from [`RunConfig::header`];
//! JSON outputs carry the same information in a `meta` object.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use crate::config::{ModelKind, RunConfig};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, CvReport, ModelSpec};
use crate::features::{build_position_tables, normalize, FeatureContext, FeatureTable, AGE_FEATURE, AGE_SQ_FEATURE, LEAGUE_FEATURE};
use crate::forest::fit_forest;
use crate::ingest::{load_corpus, read_club_list, read_league_tiers, Corpus, DatasetPaths, JoinReport, PlayerId};
use crate::lasso::{fit_lasso, select_lambda_for_sparsity, LassoModel, SparsityChoice};
use crate::model::{FittedModel, Regressor};
use crate::ranking::{attach_reference, build_candidate_table, build_young_table, rank_players, read_reference_ranking};
use crate::schema::{PositionAliases, PositionCode};
use crate::synth::{generate_synthetic_corpus, SynthSpec};

/// Ages at which the age curve is sampled.
pub const AGE_CURVE_AGES: std::ops::RangeInclusive<u32> = 16..=40;

/// Sweeps allowed for the nearly unpenalized fit behind the age curve.
const AGE_CURVE_SWEEPS: usize = 100_000;

/// Files written by a command and a short human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Joined corpus and the lookups loaded next to it.
pub struct Inputs {
    pub corpus: Corpus,
    pub join: JoinReport,
    pub top20_clubs: BTreeSet<String>,
    pub league_tiers: BTreeMap<String, u32>,
}

impl Inputs {
    pub fn first_division(&self) -> BTreeSet<String> {
        crate::ingest::first_division_leagues(&self.league_tiers)
    }

    pub fn context(&self) -> FeatureContext {
        FeatureContext::new(&self.corpus, self.top20_clubs.clone())
    }
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let d = &cfg.data;
    let aliases = match &d.position_aliases {
        Some(p) => PositionAliases::from_path(&cfg.resolve(p))?,
        None => PositionAliases::default(),
    };
    let (matches, valuations, profiles) = (cfg.resolve(&d.matches), cfg.resolve(&d.valuations), cfg.resolve(&d.profiles));
    let (corpus, join) = load_corpus(
        &DatasetPaths {
            matches: &matches,
            valuations: &valuations,
            profiles: &profiles,
        },
        &aliases,
    )?;
    Ok(Inputs {
        corpus,
        join,
        top20_clubs: read_club_list(&cfg.resolve(&d.top20_clubs))?,
        league_tiers: read_league_tiers(&cfg.resolve(&d.league_tiers))?,
    })
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        let dir = cfg.resolve(&cfg.output_dir);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            cfg,
            dir,
            files: Vec::new(),
        })
    }

    fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    /// Header comment line followed by `body`.
    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        self.raw(name, &format!("{}\n{body}", self.cfg.header()))
    }

    fn json(&mut self, name: &str, mut doc: serde_json::Value) -> Result<()> {
        doc["meta"] = meta(self.cfg);
        let mut body = serde_json::to_string_pretty(&doc)?;
        body.push('\n');
        self.raw(name, &body)
    }

    fn finish(self, summary: String) -> CommandOutput {
        CommandOutput {
            files: self.files,
            summary,
        }
    }
}

fn meta(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "tool": "valuecast",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
    })
}

fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Counts of the joined corpus and of the rows dropped while joining.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let corpus = &inputs.corpus;
    let mut w = Writer::new(cfg)?;
    let doc = serde_json::json!({
        "players": corpus.n_players(),
        "matches": corpus.matches().count(),
        "valuations": corpus.valuations().count(),
        "join": inputs.join,
        "leagues": inputs.league_tiers.len(),
        "first_division_leagues": inputs.first_division().len(),
        "top20_clubs": inputs.top20_clubs.len(),
    });
    let summary = format!(
        "{} players, {} matches, {} valuations",
        corpus.n_players(),
        corpus.matches().count(),
        corpus.valuations().count()
    );
    w.json("ingest_summary.json", doc)?;
    Ok(w.finish(summary))
}

/// Raw per-position tables, without the league column when configured.
pub fn position_tables(cfg: &RunConfig, inputs: &Inputs) -> Result<BTreeMap<PositionCode, FeatureTable>> {
    let all = build_position_tables(&inputs.corpus, &cfg.window, &inputs.context())?;
    Ok(all
        .tables
        .into_iter()
        .filter(|(code, _)| cfg.positions().contains(code))
        .map(|(code, t)| {
            let t = if cfg.no_league_feature {
                t.without_column(LEAGUE_FEATURE)
            } else {
                t
            };
            (code, t)
        })
        .collect())
}

/// Writes `features_<POS>.csv` for every selected position.
pub fn cmd_features(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let tables = position_tables(cfg, &inputs)?;
    let mut w = Writer::new(cfg)?;
    let mut summary = String::new();
    for (code, table) in &tables {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        w.text(&format!("features_{code}.csv"), &String::from_utf8(buf).expect("utf-8"))?;
        let _ = writeln!(summary, "{code}: {} rows x {} columns", table.n_rows(), table.n_cols());
    }
    Ok(w.finish(summary))
}

/// Penalty for a normalized table: the configured one, or the largest one
/// leaving `active_min..=active_max` features active.
pub fn choose_lambda(cfg: &RunConfig, normalized: &FeatureTable) -> Result<(f64, Option<SparsityChoice>)> {
    match cfg.lasso.lambda {
        Some(l) => Ok((l, None)),
        None => {
            let choice = select_lambda_for_sparsity(
                normalized,
                (cfg.lasso.active_min, cfg.lasso.active_max),
                cfg.lasso.scaling,
            )?;
            Ok((choice.lambda, Some(choice)))
        }
    }
}

/// Fits one model family on a raw table.
pub fn train_model(cfg: &RunConfig, table: &FeatureTable, kind: ModelKind) -> Result<FittedModel> {
    let normalized = normalize(table)?;
    Ok(match kind {
        ModelKind::Lasso => {
            let (lambda, _) = choose_lambda(cfg, &normalized)?;
            FittedModel::Lasso(fit_lasso(&normalized, &cfg.lasso.config(lambda))?)
        }
        ModelKind::Forest => FittedModel::Forest(fit_forest(&normalized, &cfg.forest.config(cfg.seed))?),
    })
}

/// Writes `model_<POS>_<kind>.json` per position and model plus a fit log.
pub fn cmd_train(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let tables = position_tables(cfg, &inputs)?;
    let mut w = Writer::new(cfg)?;
    let mut log = Vec::new();
    for (code, table) in &tables {
        for kind in cfg.models() {
            let model = train_model(cfg, table, kind)?;
            let fitted = model.predict_raw(table)?;
            let train_mse = crate::evaluation::mse(&table.y, &fitted);
            let (lambda, n_active, converged) = match &model {
                FittedModel::Lasso(m) => (Some(m.lambda), m.n_active().to_string(), m.converged.to_string()),
                FittedModel::Forest(_) => (None, String::new(), String::new()),
            };
            log.push(vec![
                code.to_string(),
                kind.as_str().to_string(),
                table.n_rows().to_string(),
                opt_num(lambda),
                n_active,
                converged,
                train_mse.to_string(),
            ]);
            w.json(&format!("model_{code}_{}.json", kind.as_str()), model.to_json())?;
        }
    }
    let body = csv_body(
        &["position", "model", "n_samples", "lambda", "n_active", "converged", "train_mse"],
        log,
    )?;
    let summary = format!("trained {} models", w.files.len());
    w.text("train_log.csv", &body)?;
    Ok(w.finish(summary))
}

fn model_spec(cfg: &RunConfig, kind: ModelKind) -> ModelSpec {
    match (kind, cfg.lasso.lambda) {
        (ModelKind::Lasso, Some(l)) => ModelSpec::Lasso(cfg.lasso.config(l)),
        (ModelKind::Lasso, None) => ModelSpec::LassoSparsity {
            lo: cfg.lasso.active_min,
            hi: cfg.lasso.active_max,
            scaling: cfg.lasso.scaling,
        },
        (ModelKind::Forest, _) => ModelSpec::Forest(cfg.forest.config(cfg.seed)),
    }
}

fn cv_rows(reports: &[CvReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.position.clone(),
                r.model_kind.clone(),
                opt_num(r.lambda),
                r.mse_cv.to_string(),
                r.r2_cv.to_string(),
            ]
        })
        .collect()
}

/// Cross-validated MSE and R² per position and model, once with all
/// features and once without the league-average column.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let mut with_league = cfg.clone();
    with_league.no_league_feature = false;
    let tables = position_tables(&with_league, &inputs)?;
    let mut w = Writer::new(cfg)?;
    let (mut full, mut reduced) = (Vec::new(), Vec::new());
    for table in tables.values() {
        let without = table.without_column(LEAGUE_FEATURE);
        for kind in cfg.models() {
            let spec = model_spec(cfg, kind);
            full.push(cross_validate(table, &spec, cfg.k, cfg.seed)?);
            reduced.push(cross_validate(&without, &spec, cfg.k, cfg.seed)?);
        }
    }
    let header = ["position", "model", "lambda", "mse", "r2"];
    w.text("cv_report.csv", &csv_body(&header, cv_rows(&full))?)?;
    w.text("cv_report_no_league.csv", &csv_body(&header, cv_rows(&reduced))?)?;
    w.json(
        "cv_report.json",
        serde_json::json!({ "k": cfg.k, "with_league": full, "without_league": reduced }),
    )?;
    let mut summary = String::new();
    for r in &full {
        let _ = writeln!(summary, "{:<4} {:<7} mse {:.4} r2 {:.4}", r.position, r.model_kind, r.mse_cv, r.r2_cv);
    }
    Ok(w.finish(summary))
}

/// Log value against age with every other standardized feature at zero.
pub fn age_curve(model: &LassoModel, ages: impl IntoIterator<Item = u32>) -> Result<Vec<(u32, f64)>> {
    let idx = |name: &str| {
        model
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (age, age_sq) = (idx(AGE_FEATURE)?, idx(AGE_SQ_FEATURE)?);
    // A raw row at the column means standardizes to all zeros.
    let base: Vec<f64> = match &model.norm_stats {
        Some(stats) => stats.columns.iter().map(|c| c.mean).collect(),
        None => vec![0.0; model.columns.len()],
    };
    ages.into_iter()
        .map(|a| {
            let mut row = base.clone();
            row[age] = f64::from(a);
            row[age_sq] = f64::from(a * a);
            let row = match &model.norm_stats {
                Some(stats) => stats.apply_row(&row)?,
                None => row,
            };
            Ok((a, model.predict_row(&row)?))
        })
        .collect()
}

/// Lasso fit behind the age curve, at the configured small penalty.
pub fn fit_age_curve_model(cfg: &RunConfig, table: &FeatureTable) -> Result<LassoModel> {
    let mut lasso = cfg.lasso.config(cfg.lasso.age_curve_lambda);
    lasso.max_sweeps = lasso.max_sweeps.max(AGE_CURVE_SWEEPS);
    fit_lasso(&normalize(table)?, &lasso)
}

/// Lasso active-set coefficients, forest importances and the age curve
/// for every selected position.
pub fn cmd_importance(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let tables = position_tables(cfg, &inputs)?;
    let mut w = Writer::new(cfg)?;
    let mut summary = String::new();
    for (code, table) in &tables {
        for kind in cfg.models() {
            match train_model(cfg, table, kind)? {
                FittedModel::Lasso(m) => {
                    let rows = m
                        .columns
                        .iter()
                        .zip(&m.coefficients)
                        .filter(|(_, b)| **b != 0.0)
                        .map(|(c, b)| vec![c.clone(), b.to_string()]);
                    w.text(&format!("lasso_coefficients_{code}.csv"), &csv_body(&["feature", "coefficient"], rows)?)?;
                    let _ = writeln!(summary, "{code} lasso: {} active at lambda {}", m.n_active(), m.lambda);
                }
                FittedModel::Forest(m) => {
                    let rows = m.ranked_importance().into_iter().map(|(c, v)| vec![c, v.to_string()]);
                    w.text(&format!("forest_importance_{code}.csv"), &csv_body(&["feature", "importance"], rows)?)?;
                    if let Some((top, v)) = m.ranked_importance().first() {
                        let _ = writeln!(summary, "{code} forest: top feature {top} ({v:.4})");
                    }
                }
            }
        }
        let curve_model = fit_age_curve_model(cfg, table)?;
        let curve = age_curve(&curve_model, AGE_CURVE_AGES)?;
        let rows = curve.into_iter().map(|(a, v)| vec![a.to_string(), v.to_string()]);
        w.text(&format!("age_curve_{code}.csv"), &csv_body(&["age", "log_value"], rows)?)?;
    }
    Ok(w.finish(summary))
}

/// Last match date in the corpus.
fn last_match_date(corpus: &Corpus) -> Option<NaiveDate> {
    corpus.matches().map(|m| m.match_date).max()
}

#[derive(Serialize)]
struct RankDoc<'a> {
    model: &'a str,
    as_of: NaiveDate,
    training_rows: usize,
    candidates: usize,
    #[serde(flatten)]
    report: &'a crate::ranking::RankingReport,
}

/// Trains on the young-player table, ranks current young players by
/// predicted value and optionally compares with a reference ranking.
pub fn cmd_rank(cfg: &RunConfig) -> Result<CommandOutput> {
    let inputs = load_inputs(cfg)?;
    let ctx = inputs.context();
    let first = inputs.first_division();
    let rank = &cfg.rank;
    let drop_league = |t: FeatureTable| {
        if cfg.no_league_feature {
            t.without_column(LEAGUE_FEATURE)
        } else {
            t
        }
    };
    let young = drop_league(build_young_table(&inputs.corpus, &first, &rank.young, &ctx)?);
    let model = train_model(cfg, &young, rank.model)?;
    let as_of = match rank.as_of.or_else(|| last_match_date(&inputs.corpus)) {
        Some(d) => d,
        None => return Err(Error::EmptyTable("candidates".into())),
    };
    let candidates = drop_league(build_candidate_table(
        &inputs.corpus,
        &first,
        as_of,
        rank.max_age_years,
        &rank.young,
        &ctx,
    )?);
    let names: BTreeMap<PlayerId, String> =
        inputs.corpus.profiles().iter().map(|(id, p)| (*id, p.name.clone())).collect();
    let mut report = rank_players(&model, &candidates, &names)?;
    if let Some(path) = &rank.reference {
        let reference = read_reference_ranking(&cfg.resolve(path))?;
        attach_reference(&mut report, &reference, rank.reference_top_k)?;
    }
    let mut w = Writer::new(cfg)?;
    let doc = RankDoc {
        model: model.kind(),
        as_of,
        training_rows: young.n_rows(),
        candidates: candidates.n_rows(),
        report: &report,
    };
    w.json("ranking.json", serde_json::to_value(&doc)?)?;
    let text = report.to_text(rank.top);
    w.text("ranking.txt", &text)?;
    Ok(w.finish(text))
}

/// Reads a synthetic-corpus spec (TOML) and writes the corpus, its lookup
/// files, a `synth_truth.json` and a ready-to-use `valuecast.toml`.
pub fn cmd_synth(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<CommandOutput> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let mut spec: SynthSpec = toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_string()))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    write_synth(&spec, out)
}

/// Generates a corpus from `spec` into `out`; see [`cmd_synth`].
pub fn write_synth(spec: &SynthSpec, out: &Path) -> Result<CommandOutput> {
    let synth = generate_synthetic_corpus(spec)?;
    synth.write_dir(out)?;
    let config = format!(
        "seed = {seed}\noutput_dir = \"out\"\n\n[data]\nmatches = \"matches.csv\"\nvaluations = \"values.csv\"\n\
         profiles = \"profiles.csv\"\ntop20_clubs = \"top20_clubs.txt\"\nleague_tiers = \"league_tiers.csv\"\n\
         position_aliases = \"position_aliases.csv\"\n\n[rank]\nas_of = \"{as_of}\"\n",
        seed = spec.seed,
        as_of = spec.reference_date,
    );
    let config_path = out.join("valuecast.toml");
    std::fs::write(&config_path, config).map_err(|e| Error::io(&config_path, e))?;
    let truth = serde_json::json!({
        "meta": { "tool": "valuecast", "version": env!("CARGO_PKG_VERSION"), "seed": spec.seed },
        "spec": spec,
        "noise_sd": synth.noise_sd,
        "achieved_signal_fraction": synth.achieved_signal_fraction,
        "league_offsets": synth.league_offsets,
    });
    let truth_path = out.join("synth_truth.json");
    let mut body = serde_json::to_string_pretty(&truth)?;
    body.push('\n');
    std::fs::write(&truth_path, body).map_err(|e| Error::io(&truth_path, e))?;
    let files = ["matches.csv", "values.csv", "profiles.csv", "league_tiers.csv", "top20_clubs.txt", "position_aliases.csv"]
        .iter()
        .map(|f| out.join(f))
        .chain([config_path, truth_path])
        .collect();
    Ok(CommandOutput {
        files,
        summary: format!(
            "{} players, signal fraction {:.3}",
            synth.corpus.n_players(),
            synth.achieved_signal_fraction
        ),
    })
}
