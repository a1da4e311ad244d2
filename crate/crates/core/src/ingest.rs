//! Parsing, validation and joining of the three input datasets: per-game
//! match statistics, dated market valuations and player profiles.
//!
//! All three files are UTF-8 CSV with ISO-8601 dates. The join keeps only
//! players present in every source.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{
    stat_index, PositionAliases, PositionCode, MATCHES, MAX_MINUTES, MINUTES, N_STATS,
    STAT_NAMES, SUCCESS_PAIRS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u64);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One player-game row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub player_id: PlayerId,
    pub match_date: NaiveDate,
    pub league_id: String,
    /// Indexed like [`STAT_NAMES`].
    pub stats: Vec<f64>,
}

impl MatchRecord {
    pub fn stat(&self, name: &str) -> Option<f64> {
        stat_index(name).map(|i| self.stats[i])
    }

    pub fn minutes(&self) -> f64 {
        self.stats[MINUTES]
    }

    fn check_invariants(&self, line: u64) -> Result<()> {
        let violation = |detail: String| Error::InvariantViolation { line, detail };
        if let Some((i, v)) = self
            .stats
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(violation(format!("{} = {v} is not a non-negative real", STAT_NAMES[i])));
        }
        let played = self.stats[MATCHES];
        if played != 0.0 && played != 1.0 {
            return Err(violation(format!("total_matches = {played}, expected 0 or 1")));
        }
        if self.minutes() > MAX_MINUTES {
            return Err(violation(format!(
                "total_minutes_on_field = {} exceeds {MAX_MINUTES}",
                self.minutes()
            )));
        }
        for (success, attempt) in SUCCESS_PAIRS {
            let (s, a) = (self.stats[stat_idx(success)], self.stats[stat_idx(attempt)]);
            if s > a {
                return Err(violation(format!("{success} = {s} exceeds {attempt} = {a}")));
            }
        }
        Ok(())
    }
}

fn stat_idx(name: &str) -> usize {
    stat_index(name).expect("schema constant")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationSnapshot {
    pub player_id: PlayerId,
    pub value_date: NaiveDate,
    /// Nominal dollars.
    pub market_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub player_id: PlayerId,
    pub name: String,
    pub birth_date: NaiveDate,
    /// TransferMarkt labels as written in the source file.
    pub positions: BTreeSet<String>,
    /// Position datasets the labels map to.
    pub codes: BTreeSet<PositionCode>,
    pub league_id: String,
    pub youth_club: String,
    pub height_cm: Option<f64>,
}

/// Joined, immutable view of the three datasets. Matches and valuations
/// are grouped per player and sorted by date.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    matches: BTreeMap<PlayerId, Vec<MatchRecord>>,
    valuations: BTreeMap<PlayerId, Vec<ValuationSnapshot>>,
    profiles: BTreeMap<PlayerId, PlayerProfile>,
}

/// Counts of players kept and dropped by [`join_corpus`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    pub players_in_matches: usize,
    pub players_in_valuations: usize,
    pub players_in_profiles: usize,
    pub players_kept: usize,
    pub dropped_from_matches: usize,
    pub dropped_from_valuations: usize,
    pub dropped_from_profiles: usize,
}

const DATE_FORMAT: &str = "%Y-%m-%d";

fn parse_date(cell: &str, line: u64, column: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(cell.trim(), DATE_FORMAT).map_err(|_| Error::MalformedRow {
        line,
        detail: format!("{column} `{cell}` is not an ISO-8601 date"),
    })
}

fn parse_id(cell: &str, line: u64) -> Result<PlayerId> {
    cell.trim()
        .parse()
        .map(PlayerId)
        .map_err(|_| Error::MalformedRow {
            line,
            detail: format!("player_id `{cell}` is not an integer"),
        })
}

fn parse_real(cell: &str, line: u64, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::MalformedRow {
        line,
        detail: format!("{column} `{cell}` is not numeric"),
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

fn expect_leading(headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (i, want) in expected.iter().enumerate() {
        if headers.get(i) != Some(*want) {
            return Err(Error::MissingColumn((*want).to_string()));
        }
    }
    Ok(())
}

pub fn parse_matches(path: &Path) -> Result<Vec<MatchRecord>> {
    read_matches(open(path)?)
}

/// Reads match rows. Stat columns may appear in any order and any may be
/// omitted; missing columns and empty cells read as 0.
pub fn read_matches<R: Read>(reader: R) -> Result<Vec<MatchRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    expect_leading(&headers, &["player_id", "match_date", "league_id"])?;
    let mut columns = Vec::with_capacity(headers.len() - 3);
    let mut seen = BTreeSet::new();
    for h in headers.iter().skip(3) {
        let idx = stat_index(h).ok_or_else(|| Error::UnknownColumn(h.to_string()))?;
        if !seen.insert(idx) {
            return Err(Error::DuplicateKey(format!("column `{h}`")));
        }
        columns.push(idx);
    }

    let mut out = Vec::new();
    let mut keys = BTreeSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let player_id = parse_id(&record[0], line)?;
        let match_date = parse_date(&record[1], line, "match_date")?;
        let league_id = record[2].to_string();
        if league_id.is_empty() {
            return Err(Error::MalformedRow {
                line,
                detail: "empty league_id".into(),
            });
        }
        let mut stats = vec![0.0; N_STATS];
        for (cell, &idx) in record.iter().skip(3).zip(&columns) {
            if !cell.is_empty() {
                stats[idx] = parse_real(cell, line, STAT_NAMES[idx])?;
            }
        }
        let rec = MatchRecord {
            player_id,
            match_date,
            league_id,
            stats,
        };
        rec.check_invariants(line)?;
        if !keys.insert((player_id, match_date)) {
            return Err(Error::DuplicateKey(format!(
                "match ({player_id}, {match_date}) at line {line}"
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_valuations(path: &Path) -> Result<Vec<ValuationSnapshot>> {
    read_valuations(open(path)?)
}

pub fn read_valuations<R: Read>(reader: R) -> Result<Vec<ValuationSnapshot>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    expect_leading(&headers, &["player_id", "value_date", "market_value"])?;
    if let Some(extra) = headers.get(3) {
        return Err(Error::UnknownColumn(extra.to_string()));
    }
    let mut out = Vec::new();
    let mut keys = BTreeSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let player_id = parse_id(&record[0], line)?;
        let value_date = parse_date(&record[1], line, "value_date")?;
        let market_value = parse_real(&record[2], line, "market_value")?;
        if !market_value.is_finite() {
            return Err(Error::MalformedRow {
                line,
                detail: format!("market_value `{}` is not finite", &record[2]),
            });
        }
        if market_value <= 0.0 {
            return Err(Error::NonPositiveValue {
                line,
                value: market_value,
            });
        }
        if !keys.insert((player_id, value_date)) {
            return Err(Error::DuplicateKey(format!(
                "valuation ({player_id}, {value_date}) at line {line}"
            )));
        }
        out.push(ValuationSnapshot {
            player_id,
            value_date,
            market_value,
        });
    }
    Ok(out)
}

const PROFILE_COLUMNS: [&str; 6] = [
    "player_id",
    "name",
    "birth_date",
    "positions",
    "league_id",
    "youth_club",
];

pub fn parse_profiles(
    path: &Path,
    aliases: &PositionAliases,
) -> Result<BTreeMap<PlayerId, PlayerProfile>> {
    read_profiles(open(path)?, aliases)
}

/// Reads player profiles. Columns beyond the required ones (club, social
/// media handles, ...) are ignored except `height_cm`.
pub fn read_profiles<R: Read>(
    reader: R,
    aliases: &PositionAliases,
) -> Result<BTreeMap<PlayerId, PlayerProfile>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(PROFILE_COLUMNS) {
        *slot = column(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let height_col = column("height_cm");

    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let player_id = parse_id(&record[idx[0]], line)?;
        let birth_cell = &record[idx[2]];
        if birth_cell.is_empty() {
            return Err(Error::MissingBirthDate(player_id));
        }
        let birth_date = parse_date(birth_cell, line, "birth_date")?;
        let mut positions = BTreeSet::new();
        let mut codes = BTreeSet::new();
        for label in record[idx[3]].split(';').map(str::trim).filter(|l| !l.is_empty()) {
            codes.insert(aliases.resolve(label)?);
            positions.insert(label.to_string());
        }
        if positions.is_empty() {
            return Err(Error::MalformedRow {
                line,
                detail: format!("player {player_id} has no position"),
            });
        }
        let height_cm = match height_col.map(|c| &record[c]) {
            None | Some("") => None,
            Some(cell) => Some(parse_real(cell, line, "height_cm")?),
        };
        let profile = PlayerProfile {
            player_id,
            name: record[idx[1]].to_string(),
            birth_date,
            positions,
            codes,
            league_id: record[idx[4]].to_string(),
            youth_club: record[idx[5]].to_string(),
            height_cm,
        };
        if out.insert(player_id, profile).is_some() {
            return Err(Error::DuplicateKey(format!("profile {player_id} at line {line}")));
        }
    }
    Ok(out)
}

/// Joins the three sources on player id, keeping the intersection.
pub fn join_corpus(
    matches: Vec<MatchRecord>,
    valuations: Vec<ValuationSnapshot>,
    profiles: BTreeMap<PlayerId, PlayerProfile>,
) -> Result<(Corpus, JoinReport)> {
    let mut by_player: BTreeMap<PlayerId, Vec<MatchRecord>> = BTreeMap::new();
    for m in matches {
        by_player.entry(m.player_id).or_default().push(m);
    }
    let mut values: BTreeMap<PlayerId, Vec<ValuationSnapshot>> = BTreeMap::new();
    for v in valuations {
        values.entry(v.player_id).or_default().push(v);
    }

    let keep: BTreeSet<PlayerId> = by_player
        .keys()
        .filter(|id| values.contains_key(id) && profiles.contains_key(id))
        .copied()
        .collect();
    let report = JoinReport {
        players_in_matches: by_player.len(),
        players_in_valuations: values.len(),
        players_in_profiles: profiles.len(),
        players_kept: keep.len(),
        dropped_from_matches: by_player.len() - keep.len(),
        dropped_from_valuations: values.len() - keep.len(),
        dropped_from_profiles: profiles.len() - keep.len(),
    };
    if keep.is_empty() {
        return Err(Error::EmptyJoin);
    }

    by_player.retain(|id, _| keep.contains(id));
    values.retain(|id, _| keep.contains(id));
    let profiles: BTreeMap<_, _> = profiles
        .into_iter()
        .filter(|(id, _)| keep.contains(id))
        .collect();
    for rows in by_player.values_mut() {
        rows.sort_by_key(|m| m.match_date);
    }
    for rows in values.values_mut() {
        rows.sort_by_key(|v| v.value_date);
    }
    for (id, rows) in &by_player {
        let birth = profiles[id].birth_date;
        if let Some(first) = rows.first().filter(|m| m.match_date <= birth) {
            return Err(Error::InvariantViolation {
                line: 0,
                detail: format!(
                    "player {id} has a match on {} not after birth date {birth}",
                    first.match_date
                ),
            });
        }
    }
    Ok((
        Corpus {
            matches: by_player,
            valuations: values,
            profiles,
        },
        report,
    ))
}

/// Paths of the three dataset files.
#[derive(Debug, Clone)]
pub struct DatasetPaths<'a> {
    pub matches: &'a Path,
    pub valuations: &'a Path,
    pub profiles: &'a Path,
}

/// Parses the three files concurrently and joins them.
pub fn load_corpus(
    paths: &DatasetPaths<'_>,
    aliases: &PositionAliases,
) -> Result<(Corpus, JoinReport)> {
    let (matches, valuations, profiles) = std::thread::scope(|s| {
        let m = s.spawn(|| parse_matches(paths.matches));
        let v = s.spawn(|| parse_valuations(paths.valuations));
        let p = parse_profiles(paths.profiles, aliases);
        (
            m.join().expect("match parser panicked"),
            v.join().expect("valuation parser panicked"),
            p,
        )
    });
    join_corpus(matches?, valuations?, profiles?)
}

impl Corpus {
    pub fn player_ids(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.profiles.keys().copied()
    }

    pub fn n_players(&self) -> usize {
        self.profiles.len()
    }

    pub fn profiles(&self) -> &BTreeMap<PlayerId, PlayerProfile> {
        &self.profiles
    }

    pub fn profile(&self, id: PlayerId) -> Option<&PlayerProfile> {
        self.profiles.get(&id)
    }

    /// Matches of one player, sorted by date.
    pub fn matches_of(&self, id: PlayerId) -> &[MatchRecord] {
        self.matches.get(&id).map_or(&[], Vec::as_slice)
    }

    /// Valuations of one player, sorted by date.
    pub fn valuations_of(&self, id: PlayerId) -> &[ValuationSnapshot] {
        self.valuations.get(&id).map_or(&[], Vec::as_slice)
    }

    pub fn matches(&self) -> impl Iterator<Item = &MatchRecord> {
        self.matches.values().flatten()
    }

    pub fn valuations(&self) -> impl Iterator<Item = &ValuationSnapshot> {
        self.valuations.values().flatten()
    }

    pub fn last_valuation(&self, id: PlayerId) -> Option<&ValuationSnapshot> {
        self.valuations_of(id).last()
    }

    pub fn latest_valuation_on_or_before(
        &self,
        id: PlayerId,
        date: NaiveDate,
    ) -> Option<&ValuationSnapshot> {
        let rows = self.valuations_of(id);
        let end = rows.partition_point(|v| v.value_date <= date);
        end.checked_sub(1).map(|i| &rows[i])
    }

    pub fn write_matches<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["player_id", "match_date", "league_id"];
        header.extend(STAT_NAMES);
        w.write_record(&header)?;
        for m in self.matches() {
            let mut row = vec![
                m.player_id.to_string(),
                m.match_date.format(DATE_FORMAT).to_string(),
                m.league_id.clone(),
            ];
            row.extend(m.stats.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<matches>", e))
    }

    pub fn write_valuations<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["player_id", "value_date", "market_value"])?;
        for v in self.valuations() {
            w.write_record([
                v.player_id.to_string(),
                v.value_date.format(DATE_FORMAT).to_string(),
                v.market_value.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<values>", e))
    }

    pub fn write_profiles<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = PROFILE_COLUMNS.to_vec();
        header.push("height_cm");
        w.write_record(&header)?;
        for p in self.profiles.values() {
            let positions: Vec<&str> = p.positions.iter().map(String::as_str).collect();
            w.write_record([
                p.player_id.to_string(),
                p.name.clone(),
                p.birth_date.format(DATE_FORMAT).to_string(),
                positions.join(";"),
                p.league_id.clone(),
                p.youth_club.clone(),
                p.height_cm.map(|h| h.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<profiles>", e))
    }

    /// Writes `matches.csv`, `values.csv` and `profiles.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            File::create(&path)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(path, e))
        };
        self.write_matches(create("matches.csv")?)?;
        self.write_valuations(create("values.csv")?)?;
        self.write_profiles(create("profiles.csv")?)
    }
}

/// One club name per line; blank lines and `#` comments are skipped.
pub fn read_club_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_club_list(&text))
}

pub fn parse_club_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// `league_id,tier` rows; tier 1 is a first division.
pub fn read_league_tiers(path: &Path) -> Result<BTreeMap<String, u32>> {
    let mut rdr = csv_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    expect_leading(&headers, &["league_id", "tier"])?;
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let tier = record[1].parse().map_err(|_| Error::MalformedRow {
            line,
            detail: format!("tier `{}` is not an integer", &record[1]),
        })?;
        if out.insert(record[0].to_string(), tier).is_some() {
            return Err(Error::DuplicateKey(format!("league `{}`", &record[0])));
        }
    }
    Ok(out)
}

pub fn first_division_leagues(tiers: &BTreeMap<String, u32>) -> BTreeSet<String> {
    tiers
        .iter()
        .filter(|(_, t)| **t == 1)
        .map(|(l, _)| l.clone())
        .collect()
}
