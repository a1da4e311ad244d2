//! Feature engineering: window aggregation of match statistics, per-minute
//! rates, success ratios, the augmented non-linear and contextual features,
//! normalization, and the per-position feature tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use chrono::{Duration, NaiveDate};
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Corpus, MatchRecord, PlayerId, PlayerProfile};
use crate::schema::{
    rate_column, resolve_operand, PositionCode, ASSISTS, GOALS, MATCHES, MINUTES, N_STATS,
    RATIO_FEATURES, SHOTS, STAT_NAMES,
};

pub const LEAGUE_FEATURE: &str = "log_league_avg_value";
pub const AGE_FEATURE: &str = "age";
pub const AGE_SQ_FEATURE: &str = "age_sq";
pub const TOP20_FEATURE: &str = "is_top_20";

const DAYS_PER_YEAR: f64 = 365.25;

/// Aggregation window relative to a target valuation date `t`:
/// `[t - horizon - length, t - horizon)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub horizon_days: i64,
    pub window_length_days: i64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            horizon_days: 730,
            window_length_days: 730,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_days <= 0 || self.window_length_days <= 0 {
            return Err(Error::InvalidConfig(format!(
                "window lengths must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Half-open `[start, end)` bounds for target date `t`.
    pub fn bounds(&self, t: NaiveDate) -> (NaiveDate, NaiveDate) {
        let end = t - Duration::days(self.horizon_days);
        (end - Duration::days(self.window_length_days), end)
    }
}

/// Summed statistics over a set of matches.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAggregate {
    sums: Vec<f64>,
}

impl Default for WindowAggregate {
    fn default() -> Self {
        Self {
            sums: vec![0.0; N_STATS],
        }
    }
}

impl WindowAggregate {
    pub fn from_matches<'a>(matches: impl IntoIterator<Item = &'a MatchRecord>) -> Self {
        let mut agg = Self::default();
        for m in matches {
            for (s, v) in agg.sums.iter_mut().zip(&m.stats) {
                *s += v;
            }
        }
        agg
    }

    pub fn merge(&mut self, other: &WindowAggregate) {
        for (s, v) in self.sums.iter_mut().zip(&other.sums) {
            *s += v;
        }
    }

    /// Window sums, indexed like [`STAT_NAMES`].
    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn total_minutes(&self) -> f64 {
        self.sums[MINUTES]
    }

    /// Sum divided by total minutes. Undefined (NaN) without playing time.
    pub fn rate(&self, stat: usize) -> f64 {
        self.sums[stat] / self.total_minutes()
    }

    /// Totals for matches and minutes followed by per-minute rates of
    /// every other statistic, in [`base_columns`] order.
    pub fn base_features(&self) -> Vec<f64> {
        (0..N_STATS)
            .map(|i| match i {
                MATCHES | MINUTES => self.sums[i],
                _ => self.rate(i),
            })
            .collect()
    }
}

/// Sums matches dated in `[start, end)`, optionally restricted to a set of
/// leagues.
pub fn aggregate_range(
    matches: &[MatchRecord],
    start: NaiveDate,
    end: NaiveDate,
    leagues: Option<&BTreeSet<String>>,
) -> WindowAggregate {
    let lo = matches.partition_point(|m| m.match_date < start);
    let hi = matches.partition_point(|m| m.match_date < end);
    WindowAggregate::from_matches(
        matches[lo..hi.max(lo)]
            .iter()
            .filter(|m| leagues.is_none_or(|set| set.contains(&m.league_id))),
    )
}

/// Aggregates one player's matches over the window preceding `t`.
pub fn aggregate_window(
    corpus: &Corpus,
    player: PlayerId,
    t: NaiveDate,
    spec: &WindowSpec,
) -> Result<WindowAggregate> {
    let (start, end) = spec.bounds(t);
    let agg = aggregate_range(corpus.matches_of(player), start, end, None);
    if agg.total_minutes() > 0.0 {
        Ok(agg)
    } else {
        Err(Error::NoPlayingTime(player))
    }
}

/// Engineered ratios from window sums, in [`RATIO_FEATURES`] order. A zero
/// denominator yields 0.
pub fn ratio_features(agg: &WindowAggregate) -> Vec<f64> {
    RATIO_FEATURES
        .iter()
        .map(|r| {
            let den = resolve_operand(r.denominator, agg.sums());
            if den == 0.0 {
                0.0
            } else {
                resolve_operand(r.numerator, agg.sums()) / den
            }
        })
        .collect()
}

/// How [`normalize`] treats a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// `(x - mean) / max`
    Continuous,
    /// `x - mean`
    Centered,
    /// untouched 0/1 indicator
    Boolean,
}

pub fn base_columns() -> Vec<String> {
    STAT_NAMES
        .iter()
        .enumerate()
        .map(|(i, s)| match i {
            MATCHES | MINUTES => s.to_string(),
            _ => rate_column(s),
        })
        .collect()
}

const AUGMENTED: [(&str, ColumnKind); 9] = [
    (AGE_FEATURE, ColumnKind::Continuous),
    (AGE_SQ_FEATURE, ColumnKind::Continuous),
    ("height", ColumnKind::Continuous),
    ("height_sq", ColumnKind::Continuous),
    ("goals_per_minute_sq", ColumnKind::Continuous),
    ("assists_per_minute_sq", ColumnKind::Continuous),
    ("shots_per_minute_sq", ColumnKind::Continuous),
    (TOP20_FEATURE, ColumnKind::Boolean),
    (LEAGUE_FEATURE, ColumnKind::Centered),
];

/// Names and kinds of every engineered feature column.
pub fn feature_columns() -> (Vec<String>, Vec<ColumnKind>) {
    let mut names = base_columns();
    names.extend(RATIO_FEATURES.iter().map(|r| r.name.to_string()));
    let mut kinds = vec![ColumnKind::Continuous; names.len()];
    for (name, kind) in AUGMENTED {
        names.push(name.to_string());
        kinds.push(kind);
    }
    (names, kinds)
}

/// Average market value per league through time: for each league a step
/// function over dates giving the mean of members' latest valuations.
#[derive(Debug, Clone, Default)]
pub struct LeagueValueIndex {
    steps: BTreeMap<String, Vec<(NaiveDate, f64)>>,
}

impl LeagueValueIndex {
    /// League membership is the profile's current league.
    pub fn new(corpus: &Corpus) -> Self {
        let mut events: BTreeMap<&str, Vec<(NaiveDate, PlayerId, f64)>> = BTreeMap::new();
        for (id, profile) in corpus.profiles() {
            let list = events.entry(profile.league_id.as_str()).or_default();
            list.extend(
                corpus
                    .valuations_of(*id)
                    .iter()
                    .map(|v| (v.value_date, *id, v.market_value)),
            );
        }
        let mut steps = BTreeMap::new();
        for (league, mut list) in events {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut current: BTreeMap<PlayerId, f64> = BTreeMap::new();
            let mut sum = 0.0;
            let mut out: Vec<(NaiveDate, f64)> = Vec::new();
            for (date, id, value) in list {
                sum += value - current.insert(id, value).unwrap_or(0.0);
                let mean = sum / current.len() as f64;
                match out.last_mut() {
                    Some(last) if last.0 == date => last.1 = mean,
                    _ => out.push((date, mean)),
                }
            }
            steps.insert(league.to_string(), out);
        }
        Self { steps }
    }

    /// Mean of the league members' latest valuations on or before `t`.
    pub fn mean_value(&self, league: &str, t: NaiveDate) -> Option<f64> {
        let steps = self.steps.get(league)?;
        let end = steps.partition_point(|(d, _)| *d <= t);
        end.checked_sub(1).map(|i| steps[i].1)
    }
}

/// Lookups needed beyond the match window itself.
#[derive(Debug, Clone, Default)]
pub struct FeatureContext {
    pub top20_clubs: BTreeSet<String>,
    pub league_values: LeagueValueIndex,
}

impl FeatureContext {
    pub fn new(corpus: &Corpus, top20_clubs: BTreeSet<String>) -> Self {
        Self {
            top20_clubs,
            league_values: LeagueValueIndex::new(corpus),
        }
    }
}

/// Augmented features in column order: age, age², height, height²,
/// squared goal/assist/shot rates, top-20 youth flag, and the log league
/// average value before centering. Missing height or league value is NaN
/// and gets imputed when the table is assembled.
pub fn augment_features(
    agg: &WindowAggregate,
    profile: &PlayerProfile,
    t: NaiveDate,
    ctx: &FeatureContext,
) -> Vec<f64> {
    let age = (t - profile.birth_date).num_days() as f64 / DAYS_PER_YEAR;
    let height = profile.height_cm.unwrap_or(f64::NAN);
    let top20 = f64::from(u8::from(ctx.top20_clubs.contains(&profile.youth_club)));
    let league = ctx
        .league_values
        .mean_value(&profile.league_id, t)
        .map_or(f64::NAN, f64::ln);
    vec![
        age,
        age * age,
        height,
        height * height,
        agg.rate(GOALS).powi(2),
        agg.rate(ASSISTS).powi(2),
        agg.rate(SHOTS).powi(2),
        top20,
        league,
    ]
}

/// Full raw feature row from an aggregate that has playing time.
pub(crate) fn feature_row(
    agg: &WindowAggregate,
    profile: &PlayerProfile,
    t: NaiveDate,
    ctx: &FeatureContext,
) -> Vec<f64> {
    let mut row = agg.base_features();
    row.extend(ratio_features(agg));
    row.extend(augment_features(agg, profile, t, ctx));
    row
}

/// Per-column normalization parameters, reusable at inference time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnNorm {
    pub name: String,
    pub kind: ColumnKind,
    pub mean: f64,
    /// Raw column maximum for continuous columns, 1 otherwise. Zero marks
    /// a degenerate column that maps to all zeros.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub columns: Vec<ColumnNorm>,
}

impl NormStats {
    /// Fits statistics on a raw matrix; also returns degenerate columns.
    pub fn fit(x: ArrayView2<'_, f64>, names: &[String], kinds: &[ColumnKind]) -> (Self, Vec<String>) {
        let n = x.nrows() as f64;
        let mut degenerate = Vec::new();
        let columns = x
            .axis_iter(Axis(1))
            .zip(names.iter().zip(kinds))
            .map(|(col, (name, &kind))| {
                let (mean, scale) = match kind {
                    ColumnKind::Boolean => (0.0, 1.0),
                    ColumnKind::Centered => (col.sum() / n, 1.0),
                    ColumnKind::Continuous => {
                        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        if max == 0.0 {
                            degenerate.push(name.clone());
                        }
                        (col.sum() / n, max)
                    }
                };
                ColumnNorm {
                    name: name.clone(),
                    kind,
                    mean,
                    scale,
                }
            })
            .collect();
        (Self { columns }, degenerate)
    }

    fn transform(c: &ColumnNorm, v: f64) -> f64 {
        match c.kind {
            ColumnKind::Boolean => v,
            ColumnKind::Centered => v - c.mean,
            ColumnKind::Continuous if c.scale == 0.0 => 0.0,
            ColumnKind::Continuous => (v - c.mean) / c.scale,
        }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (mut col, c) in out.axis_iter_mut(Axis(1)).zip(&self.columns) {
            col.mapv_inplace(|v| Self::transform(c, v));
        }
        Ok(out)
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.columns)
            .map(|(&v, c)| Self::transform(c, v))
            .collect())
    }
}

/// Design matrix and log-value targets for one position dataset, or for
/// the pooled young-player dataset when `position` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub position: Option<PositionCode>,
    pub columns: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub player_ids: Vec<PlayerId>,
    /// Present once the table has been normalized.
    pub norm_stats: Option<NormStats>,
    pub degenerate_columns: Vec<String>,
}

impl FeatureTable {
    pub fn label(&self) -> String {
        self.position
            .map_or_else(|| "ALL".to_string(), |p| p.to_string())
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn is_normalized(&self) -> bool {
        self.norm_stats.is_some()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            player_ids: rows.iter().map(|&i| self.player_ids[i]).collect(),
            ..self.clone_header()
        }
    }

    /// Copy of the table without one column; unchanged if absent.
    pub fn without_column(&self, name: &str) -> FeatureTable {
        let Some(drop) = self.column_index(name) else {
            return self.clone();
        };
        let keep: Vec<usize> = (0..self.n_cols()).filter(|&j| j != drop).collect();
        let mut out = self.clone();
        out.x = self.x.select(Axis(1), &keep);
        out.columns.remove(drop);
        out.kinds.remove(drop);
        if let Some(stats) = &mut out.norm_stats {
            stats.columns.remove(drop);
        }
        out.degenerate_columns.retain(|c| c != name);
        out
    }

    fn clone_header(&self) -> FeatureTable {
        FeatureTable {
            position: self.position,
            columns: self.columns.clone(),
            kinds: self.kinds.clone(),
            x: Array2::zeros((0, self.n_cols())),
            y: Vec::new(),
            player_ids: Vec::new(),
            norm_stats: self.norm_stats.clone(),
            degenerate_columns: self.degenerate_columns.clone(),
        }
    }

    /// Writes the columns, then `y`, then `player_id`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.columns.clone();
        header.push("y".into());
        header.push("player_id".into());
        w.write_record(&header)?;
        for (i, row) in self.x.outer_iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            rec.push(self.y[i].to_string());
            rec.push(self.player_ids[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<features>", e))
    }
}

/// Normalizes a raw table. Continuous columns map to
/// `(x - mean) / max` with the max of the raw column, the league column is
/// only centered and indicator columns are left as they are.
pub fn normalize(table: &FeatureTable) -> Result<FeatureTable> {
    if table.n_rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: table.n_rows(),
        });
    }
    if table.x.iter().chain(&table.y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let (stats, degenerate) = NormStats::fit(table.x.view(), &table.columns, &table.kinds);
    let x = stats.apply(table.x.view())?;
    Ok(FeatureTable {
        x,
        norm_stats: Some(stats),
        degenerate_columns: degenerate,
        ..table.clone()
    })
}

/// Replaces NaN cells (missing height, unknown league value) with the mean
/// of the column's present values, or 0 when none is present.
pub(crate) fn impute_column_means(x: &mut Array2<f64>) {
    for mut col in x.axis_iter_mut(Axis(1)) {
        let (sum, count) = col
            .iter()
            .filter(|v| !v.is_nan())
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        let fill = if count == 0 { 0.0 } else { sum / count as f64 };
        col.mapv_inplace(|v| if v.is_nan() { fill } else { v });
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], d: usize) -> Array2<f64> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), d), flat).expect("rows have equal length")
}

/// Tables for all eight positions plus players dropped for lack of
/// playing time.
#[derive(Debug, Clone)]
pub struct PositionTables {
    pub tables: BTreeMap<PositionCode, FeatureTable>,
    pub dropped: Vec<PlayerId>,
}

struct PlayerSample {
    id: PlayerId,
    codes: Vec<PositionCode>,
    row: Vec<f64>,
    y: f64,
}

fn player_samples(
    corpus: &Corpus,
    spec: &WindowSpec,
    ctx: &FeatureContext,
) -> (Vec<PlayerSample>, Vec<PlayerId>) {
    let mut samples = Vec::new();
    let mut dropped = Vec::new();
    for (id, profile) in corpus.profiles() {
        let Some(target) = corpus.last_valuation(*id) else {
            dropped.push(*id);
            continue;
        };
        let t = target.value_date;
        match aggregate_window(corpus, *id, t, spec) {
            Ok(agg) => samples.push(PlayerSample {
                id: *id,
                codes: profile.codes.iter().copied().collect(),
                row: feature_row(&agg, profile, t, ctx),
                y: target.market_value.ln(),
            }),
            Err(_) => dropped.push(*id),
        }
    }
    // Corpus-wide centering of the league feature; tables re-center later.
    let (names, _) = feature_columns();
    let league = names.iter().position(|c| c == LEAGUE_FEATURE).expect("league column");
    let present: Vec<f64> = samples
        .iter()
        .map(|s| s.row[league])
        .filter(|v| !v.is_nan())
        .collect();
    if !present.is_empty() {
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        for s in &mut samples {
            s.row[league] -= mean;
        }
    }
    (samples, dropped)
}

/// Builds the raw (unnormalized) table of every position. Each player's
/// target is the log of their last valuation; a player with several position
/// codes appears once in each corresponding table.
pub fn build_position_tables(
    corpus: &Corpus,
    spec: &WindowSpec,
    ctx: &FeatureContext,
) -> Result<PositionTables> {
    spec.validate()?;
    let (samples, dropped) = player_samples(corpus, spec, ctx);
    let (columns, kinds) = feature_columns();
    let mut tables = BTreeMap::new();
    for code in PositionCode::ALL {
        let members: Vec<&PlayerSample> =
            samples.iter().filter(|s| s.codes.contains(&code)).collect();
        if members.is_empty() {
            return Err(Error::EmptyTable(code.to_string()));
        }
        let rows: Vec<Vec<f64>> = members.iter().map(|s| s.row.clone()).collect();
        let mut x = rows_to_matrix(&rows, columns.len());
        impute_column_means(&mut x);
        tables.insert(
            code,
            FeatureTable {
                position: Some(code),
                columns: columns.clone(),
                kinds: kinds.clone(),
                x,
                y: members.iter().map(|s| s.y).collect(),
                player_ids: members.iter().map(|s| s.id).collect(),
                norm_stats: None,
                degenerate_columns: Vec::new(),
            },
        );
    }
    Ok(PositionTables { tables, dropped })
}
