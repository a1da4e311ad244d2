//! Young-player value forecasts, value-based rankings and Kendall's tau.
//!
//! A player's reference date `t` is the last first-division game with
//! minutes played before their 22nd birthday. Features come from
//! first-division games in `(t - window, t]` plus one indicator per
//! position, and the target is the log of the valuation closest to
//! `t + horizon` (within a tolerance, earlier date on ties).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    aggregate_range, feature_columns, feature_row, impute_column_means, rows_to_matrix, ColumnKind, FeatureContext,
    FeatureTable,
};
use crate::ingest::{Corpus, PlayerId, PlayerProfile};
use crate::model::FittedModel;
use crate::schema::PositionCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct YoungSpec {
    pub horizon_days: i64,
    pub window_days: i64,
    /// Largest distance between `t + horizon` and the target valuation.
    pub tolerance_days: i64,
    /// Matches on or after this birthday are ignored.
    pub age_limit_years: u32,
}

impl Default for YoungSpec {
    fn default() -> Self {
        Self {
            horizon_days: 365,
            window_days: 365,
            tolerance_days: 90,
            age_limit_years: 22,
        }
    }
}

/// Name of the indicator column of a position.
pub fn position_column(code: PositionCode) -> String {
    format!("pos_{code}")
}

/// Engineered columns followed by the eight position indicators.
pub fn young_columns() -> (Vec<String>, Vec<ColumnKind>) {
    let (mut names, mut kinds) = feature_columns();
    for code in PositionCode::ALL {
        names.push(position_column(code));
        kinds.push(ColumnKind::Boolean);
    }
    (names, kinds)
}

fn birthday(profile: &PlayerProfile, years: u32) -> NaiveDate {
    profile
        .birth_date
        .checked_add_months(Months::new(12 * years))
        .unwrap_or(NaiveDate::MAX)
}

/// Reference date of a player: last first-division game with minutes
/// before the age limit.
pub fn young_reference_date(
    corpus: &Corpus,
    id: PlayerId,
    first_division: &BTreeSet<String>,
    spec: &YoungSpec,
) -> Option<NaiveDate> {
    let profile = corpus.profile(id)?;
    let limit = birthday(profile, spec.age_limit_years);
    corpus
        .matches_of(id)
        .iter()
        .rev()
        .find(|m| m.match_date < limit && m.minutes() > 0.0 && first_division.contains(&m.league_id))
        .map(|m| m.match_date)
}

fn window_row(
    corpus: &Corpus,
    profile: &PlayerProfile,
    t: NaiveDate,
    first_division: &BTreeSet<String>,
    window_days: i64,
    ctx: &FeatureContext,
) -> Option<Vec<f64>> {
    let start = t - Duration::days(window_days - 1);
    let end = t + Duration::days(1);
    let agg = aggregate_range(corpus.matches_of(profile.player_id), start, end, Some(first_division));
    if agg.total_minutes() <= 0.0 {
        return None;
    }
    let mut row = feature_row(&agg, profile, t, ctx);
    row.extend(PositionCode::ALL.iter().map(|c| f64::from(u8::from(profile.codes.contains(c)))));
    Some(row)
}

fn assemble(rows: Vec<Vec<f64>>, y: Vec<f64>, ids: Vec<PlayerId>, label: &str) -> Result<FeatureTable> {
    if rows.is_empty() {
        return Err(Error::EmptyTable(label.to_string()));
    }
    let (columns, kinds) = young_columns();
    let mut x = rows_to_matrix(&rows, columns.len());
    impute_column_means(&mut x);
    Ok(FeatureTable {
        position: None,
        columns,
        kinds,
        x,
        y,
        player_ids: ids,
        norm_stats: None,
        degenerate_columns: Vec::new(),
    })
}

/// One row per qualifying player, all positions pooled.
pub fn build_young_table(
    corpus: &Corpus,
    first_division: &BTreeSet<String>,
    spec: &YoungSpec,
    ctx: &FeatureContext,
) -> Result<FeatureTable> {
    let (mut rows, mut y, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    for (id, profile) in corpus.profiles() {
        let Some(t) = young_reference_date(corpus, *id, first_division, spec) else {
            continue;
        };
        let goal = t + Duration::days(spec.horizon_days);
        let target = corpus
            .valuations_of(*id)
            .iter()
            .map(|v| ((v.value_date - goal).num_days().abs(), v.value_date, v.market_value))
            .filter(|(gap, _, _)| *gap <= spec.tolerance_days)
            .min_by_key(|(gap, date, _)| (*gap, *date));
        let Some((_, _, value)) = target else {
            continue;
        };
        if let Some(row) = window_row(corpus, profile, t, first_division, spec.window_days, ctx) {
            rows.push(row);
            y.push(value.ln());
            ids.push(*id);
        }
    }
    assemble(rows, y, ids, "young")
}

/// Players younger than `max_age_years` at `as_of` with first-division
/// minutes in the window ending there. `y` holds the log of the latest
/// valuation on or before `as_of`.
pub fn build_candidate_table(
    corpus: &Corpus,
    first_division: &BTreeSet<String>,
    as_of: NaiveDate,
    max_age_years: u32,
    spec: &YoungSpec,
    ctx: &FeatureContext,
) -> Result<FeatureTable> {
    let (mut rows, mut y, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    for (id, profile) in corpus.profiles() {
        if birthday(profile, max_age_years) <= as_of {
            continue;
        }
        let Some(current) = corpus.latest_valuation_on_or_before(*id, as_of) else {
            continue;
        };
        if let Some(row) = window_row(corpus, profile, as_of, first_division, spec.window_days, ctx) {
            rows.push(row);
            y.push(current.market_value.ln());
            ids.push(*id);
        }
    }
    assemble(rows, y, ids, "candidates")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub player_id: PlayerId,
    pub name: String,
    pub predicted_log_value: f64,
    /// Currency units.
    pub predicted_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub entries: Vec<RankEntry>,
    pub kendall_tau_vs_reference: Option<f64>,
    pub reference_coverage: Option<String>,
}

impl RankingReport {
    pub fn order(&self) -> Vec<PlayerId> {
        self.entries.iter().map(|e| e.player_id).collect()
    }

    /// Fixed-width text table of the first `top` entries.
    pub fn to_text(&self, top: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>4}  {:<28}  {:>16}", "rank", "player", "predicted_value");
        for e in self.entries.iter().take(top) {
            let _ = writeln!(out, "{:>4}  {:<28}  {:>16.0}", e.rank, e.name, e.predicted_value);
        }
        if let Some(tau) = self.kendall_tau_vs_reference {
            let _ = writeln!(out, "kendall_tau {tau:.6}");
        }
        out
    }
}

/// Orders players by descending prediction, lower id first on ties.
pub fn rank_by_prediction(ids: &[PlayerId], predictions: &[f64]) -> Result<Vec<(PlayerId, f64)>> {
    if ids.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            found: predictions.len(),
        });
    }
    let mut pairs: Vec<(PlayerId, f64)> = ids.iter().copied().zip(predictions.iter().copied()).collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(pairs)
}

/// Ranks the rows of a raw table by the model's predicted value.
pub fn rank_players(model: &FittedModel, table: &FeatureTable, names: &BTreeMap<PlayerId, String>) -> Result<RankingReport> {
    let predictions = model.predict_raw(table)?;
    let entries = rank_by_prediction(&table.player_ids, &predictions)?
        .into_iter()
        .enumerate()
        .map(|(i, (id, log_value))| RankEntry {
            rank: i + 1,
            player_id: id,
            name: names.get(&id).cloned().unwrap_or_else(|| id.to_string()),
            predicted_log_value: log_value,
            predicted_value: log_value.exp(),
        })
        .collect();
    Ok(RankingReport {
        entries,
        kendall_tau_vs_reference: None,
        reference_coverage: None,
    })
}

fn positions<T: Ord + Copy + std::fmt::Debug>(items: &[T]) -> Result<BTreeMap<T, usize>> {
    let mut pos = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        if pos.insert(*item, i).is_some() {
            return Err(Error::ItemSetMismatch(format!("{item:?} appears twice")));
        }
    }
    Ok(pos)
}

/// Merge sort that returns the number of inversions.
fn count_inversions(v: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            merged.push(v[i]);
            i += 1;
        } else {
            merged.push(v[j]);
            inv += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    inv
}

/// Kendall's tau between two orderings of the same items (best first).
pub fn kendall_tau<T: Ord + Copy + std::fmt::Debug>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ItemSetMismatch(format!("{} vs {} items", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::ItemSetMismatch("need at least two items".into()));
    }
    let pos_a = positions(a)?;
    positions(b)?;
    let mut seq = b
        .iter()
        .map(|item| {
            pos_a
                .get(item)
                .copied()
                .ok_or_else(|| Error::ItemSetMismatch(format!("{item:?} missing from first ranking")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = seq.len() as u64;
    let pairs = n * (n - 1) / 2;
    let discordant = count_inversions(&mut seq);
    Ok((pairs as f64 - 2.0 * discordant as f64) / pairs as f64)
}

/// Kendall's tau restricted to the first `k` items of `reference`, with
/// `ranking` reduced to those items in its own order.
pub fn kendall_tau_top_k<T: Ord + Copy + std::fmt::Debug>(ranking: &[T], reference: &[T], k: usize) -> Result<f64> {
    let top: BTreeSet<T> = reference.iter().take(k).copied().collect();
    let reduced: Vec<T> = ranking.iter().filter(|x| top.contains(x)).copied().collect();
    kendall_tau(&reduced, &reference[..k.min(reference.len())])
}

/// Reads `rank,player_id` rows and returns ids ordered by rank.
pub fn read_reference_ranking(path: &Path) -> Result<Vec<PlayerId>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(file);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("rank") {
        return Err(Error::MissingColumn("rank".into()));
    }
    if headers.get(1) != Some("player_id") {
        return Err(Error::MissingColumn("player_id".into()));
    }
    let mut rows = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::MalformedRow {
            line,
            detail: format!("{what} is not an integer"),
        };
        let rank: u64 = record[0].parse().map_err(|_| bad("rank"))?;
        let id: u64 = record[1].parse().map_err(|_| bad("player_id"))?;
        if rows.insert(rank, PlayerId(id)).is_some() {
            return Err(Error::DuplicateKey(format!("rank {rank}")));
        }
    }
    let ids: Vec<PlayerId> = rows.into_values().collect();
    positions(&ids)?;
    Ok(ids)
}

/// Adds Kendall's tau against `reference` to a report. With `top_k`, only
/// the reference's first `top_k` players count; otherwise every reference
/// player that appears in the report. The coverage note says how many
/// reference players were ranked.
pub fn attach_reference(report: &mut RankingReport, reference: &[PlayerId], top_k: Option<usize>) -> Result<()> {
    let order = report.order();
    let ranked: BTreeSet<PlayerId> = order.iter().copied().collect();
    let considered: Vec<PlayerId> = reference.iter().take(top_k.unwrap_or(reference.len())).copied().collect();
    let common: Vec<PlayerId> = considered.iter().copied().filter(|id| ranked.contains(id)).collect();
    let set: BTreeSet<PlayerId> = common.iter().copied().collect();
    let reduced: Vec<PlayerId> = order.into_iter().filter(|id| set.contains(id)).collect();
    report.kendall_tau_vs_reference = Some(kendall_tau(&reduced, &common)?);
    report.reference_coverage = Some(format!(
        "{} of {} reference players ranked{}",
        common.len(),
        considered.len(),
        top_k.map_or(String::new(), |k| format!(" (reference top {k})"))
    ));
    Ok(())
}
