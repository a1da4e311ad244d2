//! Young-player ranking: train on players' under-22 seasons, rank the
//! current under-21s by predicted value in a year, and compare with a
//! reference ranking by Kendall's tau, in full and on its top ten.
//!
//! Run with `cargo run --release --example young_ranking`.

use std::collections::{BTreeMap, BTreeSet};

use valuecast::ingest::first_division_leagues;
use valuecast::model::FittedModel;
use valuecast::features::{normalize, FeatureContext};
use valuecast::lasso::fit_lasso;
use valuecast::ranking::{
    attach_reference, build_candidate_table, build_young_table, kendall_tau, rank_players, YoungSpec,
};
use valuecast::synth::{generate_synthetic_corpus, SynthSpec};
use valuecast::{LassoConfig, PlayerId, Result};

pub struct RankingResult {
    pub n_training: usize,
    pub n_ranked: usize,
    pub tau_full: f64,
    pub tau_top10: f64,
}

pub fn run_example() -> Result<RankingResult> {
    let spec = SynthSpec {
        n_players: 1500,
        seed: 9,
        min_age: 17.0,
        max_age: 26.0,
        noise_sd: 0.3,
        true_coefficients: BTreeMap::from([
            ("total_minutes_on_field".to_string(), 0.3),
            ("is_top_20".to_string(), 0.3),
        ]),
        ..SynthSpec::default()
    };
    let synth = generate_synthetic_corpus(&spec)?;
    let corpus = &synth.corpus;
    let ctx = FeatureContext::new(corpus, synth.top20_clubs.clone());
    let first: BTreeSet<String> = first_division_leagues(&synth.league_tiers);
    let young_spec = YoungSpec::default();

    let young = build_young_table(corpus, &first, &young_spec, &ctx)?;
    let model = FittedModel::Lasso(fit_lasso(&normalize(&young)?, &LassoConfig::new(0.01))?);
    let candidates = build_candidate_table(corpus, &first, spec.reference_date, 21, &young_spec, &ctx)?;
    let names: BTreeMap<PlayerId, String> = corpus.profiles().iter().map(|(id, p)| (*id, p.name.clone())).collect();
    let mut report = rank_players(&model, &candidates, &names)?;

    // Stand-in reference: the candidates ordered by their current value.
    let mut by_current: Vec<(PlayerId, f64)> =
        candidates.player_ids.iter().copied().zip(candidates.y.iter().copied()).collect();
    by_current.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let reference: Vec<PlayerId> = by_current.iter().map(|p| p.0).collect();

    let tau_full = kendall_tau(&report.order(), &reference)?;
    attach_reference(&mut report, &reference, Some(10))?;
    let tau_top10 = report.kendall_tau_vs_reference.unwrap_or(f64::NAN);
    print!("{}", report.to_text(10));
    println!("tau over all {} candidates: {tau_full:.3}", reference.len());
    println!("{}", report.reference_coverage.as_deref().unwrap_or(""));
    Ok(RankingResult {
        n_training: young.n_rows(),
        n_ranked: report.entries.len(),
        tau_full,
        tau_top10,
    })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
