//! Column vocabulary shared by ingestion, feature engineering and the
//! synthetic generator.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-game statistics, in the column order used when writing match files.
pub const STAT_NAMES: [&str; 108] = [
    "total_matches",
    "total_minutes_on_field",
    "total_goals",
    "total_assists",
    "total_shots",
    "total_head_shots",
    "total_yellow_cards",
    "total_red_cards",
    "total_direct_red_cards",
    "total_penalties",
    "total_linkup_plays",
    "total_duels",
    "total_duels_won",
    "total_defensive_duels",
    "total_defensive_duels_won",
    "total_offensive_duels",
    "total_offensive_duels_won",
    "total_aerial_duels",
    "total_aerial_duels_won",
    "total_fouls",
    "total_passes",
    "total_successful_passes",
    "total_smart_passes",
    "total_successful_smart_passes",
    "total_passes_to_final_third",
    "total_successful_passes_to_final_third",
    "total_crosses",
    "total_successful_crosses",
    "total_forward_passes",
    "total_successful_forward_passes",
    "total_back_passes",
    "total_successful_back_passes",
    "total_through_passes",
    "total_successful_through_passes",
    "total_key_passes",
    "total_successful_key_passes",
    "total_vertical_passes",
    "total_successful_vertical_passes",
    "total_long_passes",
    "total_successful_long_passes",
    "total_dribbles",
    "total_successful_dribbles",
    "total_interceptions",
    "total_defensive_actions",
    "total_successful_defensive_actions",
    "total_attacking_actions",
    "total_successful_attacking_actions",
    "total_free_kicks",
    "total_free_kicks_on_target",
    "total_direct_free_kicks",
    "total_direct_free_kicks_on_target",
    "total_corners",
    "total_successful_penalties",
    "total_successful_linkup_plays",
    "total_accelerations",
    "total_pressing_duels",
    "total_pressing_duels_won",
    "total_loose_ball_duels",
    "total_loose_ball_duels_won",
    "total_missed_balls",
    "total_shot_assists",
    "total_shot_on_target_assists",
    "total_recoveries",
    "total_opponent_half_recoveries",
    "total_dangerous_opponent_half_recoveries",
    "total_losses",
    "total_own_half_losses",
    "total_dangerous_own_half_losses",
    "total_xg_shot",
    "total_xg_assist",
    "total_xg_save",
    "total_received_pass",
    "total_touch_in_box",
    "total_progressive_run",
    "total_offsides",
    "total_clearances",
    "total_second_assists",
    "total_third_assists",
    "total_shots_blocked",
    "total_fouls_suffered",
    "total_progressive_passes",
    "total_counterpressing_recoveries",
    "total_sliding_tackles",
    "total_goal_kicks",
    "total_dribbles_against",
    "total_dribbles_against_won",
    "total_goal_kicks_short",
    "total_goal_kicks_long",
    "total_shots_on_target",
    "total_successful_progressive_passes",
    "total_successful_sliding_tackles",
    "total_successful_goal_kicks",
    "total_field_aerial_duels",
    "total_field_aerial_duels_won",
    "total_gk_clean_sheets",
    "total_gk_conceded_goals",
    "total_gk_shots_against",
    "total_gk_exits",
    "total_gk_successful_exits",
    "total_gk_aerial_duels",
    "total_gk_aerial_duels_won",
    "total_gk_saves",
    "total_new_duels_won",
    "total_new_defensive_duels_won",
    "total_new_offensive_duels_won",
    "total_new_successful_dribbles",
    "total_lateral_passes",
    "total_successful_lateral_passes",
];

pub const N_STATS: usize = STAT_NAMES.len();

pub const MATCHES: usize = 0;
pub const MINUTES: usize = 1;
pub const GOALS: usize = 2;
pub const ASSISTS: usize = 3;
pub const SHOTS: usize = 4;

/// Hard cap on minutes in one game, extra time included.
pub const MAX_MINUTES: f64 = 130.0;

pub fn stat_index(name: &str) -> Option<usize> {
    STAT_NAMES.iter().position(|s| *s == name)
}

/// Name of the per-minute rate column derived from a summed statistic.
///
/// `total_goals` becomes `goals_per_minute`.
pub fn rate_column(stat: &str) -> String {
    format!("{}_per_minute", stat.strip_prefix("total_").unwrap_or(stat))
}

/// (successful, attempted) pairs; the first never exceeds the second in a
/// single game record.
pub const SUCCESS_PAIRS: [(&str, &str); 38] = [
    ("total_head_shots", "total_shots"),
    ("total_shots_on_target", "total_shots"),
    ("total_successful_penalties", "total_penalties"),
    ("total_successful_linkup_plays", "total_linkup_plays"),
    ("total_duels_won", "total_duels"),
    ("total_defensive_duels_won", "total_defensive_duels"),
    ("total_offensive_duels_won", "total_offensive_duels"),
    ("total_aerial_duels_won", "total_aerial_duels"),
    ("total_successful_passes", "total_passes"),
    ("total_successful_smart_passes", "total_smart_passes"),
    ("total_successful_passes_to_final_third", "total_passes_to_final_third"),
    ("total_successful_crosses", "total_crosses"),
    ("total_successful_forward_passes", "total_forward_passes"),
    ("total_successful_back_passes", "total_back_passes"),
    ("total_successful_through_passes", "total_through_passes"),
    ("total_successful_key_passes", "total_key_passes"),
    ("total_successful_vertical_passes", "total_vertical_passes"),
    ("total_successful_long_passes", "total_long_passes"),
    ("total_successful_lateral_passes", "total_lateral_passes"),
    ("total_successful_progressive_passes", "total_progressive_passes"),
    ("total_successful_dribbles", "total_dribbles"),
    ("total_successful_defensive_actions", "total_defensive_actions"),
    ("total_successful_attacking_actions", "total_attacking_actions"),
    ("total_free_kicks_on_target", "total_free_kicks"),
    ("total_direct_free_kicks_on_target", "total_direct_free_kicks"),
    ("total_pressing_duels_won", "total_pressing_duels"),
    ("total_loose_ball_duels_won", "total_loose_ball_duels"),
    ("total_shot_on_target_assists", "total_shot_assists"),
    ("total_opponent_half_recoveries", "total_recoveries"),
    ("total_dangerous_opponent_half_recoveries", "total_opponent_half_recoveries"),
    ("total_own_half_losses", "total_losses"),
    ("total_dangerous_own_half_losses", "total_own_half_losses"),
    ("total_dribbles_against_won", "total_dribbles_against"),
    ("total_successful_sliding_tackles", "total_sliding_tackles"),
    ("total_successful_goal_kicks", "total_goal_kicks"),
    ("total_field_aerial_duels_won", "total_field_aerial_duels"),
    ("total_gk_successful_exits", "total_gk_exits"),
    ("total_gk_aerial_duels_won", "total_gk_aerial_duels"),
];

/// One engineered quotient of two window sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioDef {
    pub name: &'static str,
    pub numerator: &'static str,
    pub denominator: &'static str,
}

const fn ratio(name: &'static str, numerator: &'static str, denominator: &'static str) -> RatioDef {
    RatioDef {
        name,
        numerator,
        denominator,
    }
}

/// Engineered ratio features. Operand names are kept verbatim; the two that
/// are not raw columns (`total_actions`, `total_gk_save`) are resolved by
/// [`resolve_operand`].
pub const RATIO_FEATURES: [RatioDef; 37] = [
    ratio("ratio_minutes", "total_minutes_on_field", "total_matches"),
    ratio("ratio_goals_shots", "total_goals", "total_shots"),
    ratio("ratio_xg_shots", "total_xg_shot", "total_shots"),
    ratio("ratio_goals_xg", "total_goals", "total_xg_shot"),
    ratio("ratio_assists_xa", "total_xg_assist", "total_assists"),
    ratio("ratio_duels_won", "total_duels_won", "total_duels"),
    ratio("ratio_def_duels_won", "total_defensive_duels_won", "total_defensive_duels"),
    ratio("ratio_off_duels_won", "total_offensive_duels_won", "total_offensive_duels"),
    ratio("ratio_air_duels_won", "total_aerial_duels_won", "total_aerial_duels"),
    ratio("ratio_passes", "total_successful_passes", "total_passes"),
    ratio("ratio_smart_passes", "total_successful_smart_passes", "total_smart_passes"),
    ratio("ratio_third_passes", "total_successful_passes_to_final_third", "total_passes_to_final_third"),
    ratio("ratio_crosses", "total_successful_crosses", "total_crosses"),
    ratio("ratio_for_passes", "total_successful_forward_passes", "total_forward_passes"),
    ratio("ratio_back_passes", "total_successful_back_passes", "total_back_passes"),
    ratio("ratio_through_passes", "total_successful_through_passes", "total_through_passes"),
    ratio("ratio_key_passes", "total_successful_key_passes", "total_key_passes"),
    ratio("ratio_vert_passes", "total_successful_vertical_passes", "total_vertical_passes"),
    ratio("ratio_long_passes", "total_successful_long_passes", "total_long_passes"),
    ratio("ratio_dribbles", "total_successful_dribbles", "total_dribbles"),
    ratio("ratio_def_actions", "total_defensive_actions", "total_actions"),
    ratio("ratio_att_actions", "total_attacking_actions", "total_actions"),
    ratio("ratio_penalties", "total_successful_penalties", "total_penalties"),
    ratio("ratio_linup_plays", "total_successful_linkup_plays", "total_linkup_plays"),
    ratio("ratio_pressing_duels", "total_pressing_duels_won", "total_pressing_duels"),
    ratio("ratio_loose_ball", "total_loose_ball_duels_won", "total_loose_ball_duels"),
    ratio("ratio_opp_recoveries", "total_opponent_half_recoveries", "total_recoveries"),
    ratio("ratio_dang_recoveries", "total_dangerous_opponent_half_recoveries", "total_opponent_half_recoveries"),
    ratio("ratio_own_losses", "total_own_half_losses", "total_losses"),
    ratio("ratio_dang_losses", "total_dangerous_own_half_losses", "total_own_half_losses"),
    ratio("ratio_dribbles_against", "total_dribbles_against_won", "total_dribbles_against"),
    ratio("ratio_field_aerial_duels", "total_field_aerial_duels_won", "total_field_aerial_duels"),
    ratio("ratio_save_xs", "total_gk_save", "total_xg_save"),
    ratio("ratio_succ_exit", "total_gk_successful_exits", "total_gk_exits"),
    ratio("ratio_gk_air_duels", "total_gk_aerial_duels_won", "total_gk_aerial_duels"),
    ratio("ratio_lat_passes", "total_successful_lateral_passes", "total_lateral_passes"),
    ratio("ratio_clean_game", "total_gk_clean_sheets", "total_matches"),
];

/// Value of a ratio operand given per-stat window sums.
///
/// `total_actions` is the sum of defensive and attacking actions and
/// `total_gk_save` refers to the `total_gk_saves` column.
pub fn resolve_operand(name: &str, sums: &[f64]) -> f64 {
    match name {
        "total_actions" => {
            sums[idx("total_defensive_actions")] + sums[idx("total_attacking_actions")]
        }
        "total_gk_save" => sums[idx("total_gk_saves")],
        other => sums[idx(other)],
    }
}

fn idx(name: &str) -> usize {
    stat_index(name).unwrap_or_else(|| panic!("`{name}` is not a statistic column"))
}

/// The eight position datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PositionCode {
    GK,
    FB,
    CD,
    CDM,
    MD,
    AM,
    WG,
    FWD,
}

impl PositionCode {
    pub const ALL: [PositionCode; 8] = [
        PositionCode::GK,
        PositionCode::FB,
        PositionCode::CD,
        PositionCode::CDM,
        PositionCode::MD,
        PositionCode::AM,
        PositionCode::WG,
        PositionCode::FWD,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PositionCode::GK => "GK",
            PositionCode::FB => "FB",
            PositionCode::CD => "CD",
            PositionCode::CDM => "CDM",
            PositionCode::MD => "MD",
            PositionCode::AM => "AM",
            PositionCode::WG => "WG",
            PositionCode::FWD => "FWD",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PositionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PositionCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PositionCode::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownPosition(s.to_string()))
    }
}

pub(crate) const DEFAULT_ALIASES: &str = include_str!("../config/position_aliases.csv");

/// Maps TransferMarkt position labels onto position codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionAliases {
    table: BTreeMap<String, PositionCode>,
}

impl PositionAliases {
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut table = BTreeMap::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let (Some(label), Some(code)) = (record.get(0), record.get(1)) else {
                return Err(Error::MalformedRow {
                    line,
                    detail: "expected `label,code`".into(),
                });
            };
            if table.insert(label.to_string(), code.parse()?).is_some() {
                return Err(Error::DuplicateKey(format!("position label `{label}`")));
            }
        }
        Ok(Self { table })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn resolve(&self, label: &str) -> Result<PositionCode> {
        self.table
            .get(label.trim())
            .copied()
            .ok_or_else(|| Error::UnknownPosition(label.trim().to_string()))
    }

    /// Any label mapping to `code`, used when writing synthetic profiles.
    pub fn label_for(&self, code: PositionCode) -> Option<&str> {
        self.labels_for(code).next()
    }

    pub fn labels_for(&self, code: PositionCode) -> impl Iterator<Item = &str> {
        self.table
            .iter()
            .filter(move |(_, c)| **c == code)
            .map(|(l, _)| l.as_str())
    }
}

impl Default for PositionAliases {
    fn default() -> Self {
        Self::from_csv_str(DEFAULT_ALIASES).expect("bundled alias table is valid")
    }
}
