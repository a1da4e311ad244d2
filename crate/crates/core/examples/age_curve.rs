//! Age dependence of the log value, read off a Lasso fit: with a tiny
//! penalty the curve rises and falls around the planted peak, with a large
//! one only the squared age survives.
//!
//! Run with `cargo run --release --example age_curve`.

use std::collections::BTreeMap;

use valuecast::features::{build_position_tables, normalize, FeatureContext, AGE_SQ_FEATURE};
use valuecast::lasso::{fit_lasso, lambda_max};
use valuecast::pipeline::age_curve;
use valuecast::synth::{generate_synthetic_corpus, AgeBell, SynthSpec};
use valuecast::{LassoConfig, ObjectiveScaling, PositionCode, Result, WindowSpec};

pub struct AgeCurveResult {
    pub curve: Vec<(u32, f64)>,
    pub large_lambda_active: Vec<String>,
    pub large_lambda_age_sq: f64,
}

pub fn run_example() -> Result<AgeCurveResult> {
    let spec = SynthSpec {
        n_players: 1500,
        seed: 4,
        position_weights: Some(BTreeMap::from([(PositionCode::MD, 1.0)])),
        second_position_prob: 0.05,
        noise_sd: 0.4,
        league_effect_sd: 0.1,
        age_bell: Some(AgeBell {
            peak: 24.0,
            curvature: 0.01,
        }),
        true_coefficients: BTreeMap::from([("total_minutes_on_field".to_string(), 0.1)]),
        ..SynthSpec::default()
    };
    let synth = generate_synthetic_corpus(&spec)?;
    let ctx = FeatureContext::new(&synth.corpus, synth.top20_clubs.clone());
    let tables = build_position_tables(&synth.corpus, &WindowSpec::default(), &ctx)?;
    let md = normalize(&tables.tables[&PositionCode::MD])?;

    let small = fit_lasso(
        &md,
        &LassoConfig {
            max_sweeps: 100_000,
            ..LassoConfig::new(1e-4)
        },
    )?;
    let curve = age_curve(&small, 16..=40)?;
    for (age, value) in curve.iter().step_by(4) {
        println!("age {age:>2}  log value {value:.3}");
    }

    let top = lambda_max(md.x.view(), &md.y, ObjectiveScaling::Mean)?;
    let large = fit_lasso(&md, &LassoConfig::new(0.5 * top))?;
    let age_sq = large.coefficient(AGE_SQ_FEATURE).unwrap_or(0.0);
    println!("at lambda {:.4}: active {:?}, age_sq {age_sq:.4}", large.lambda, large.active_set);
    Ok(AgeCurveResult {
        curve,
        large_lambda_active: large.active_set.clone(),
        large_lambda_age_sq: age_sq,
    })
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
