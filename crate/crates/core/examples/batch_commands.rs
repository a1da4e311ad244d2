//! The batch commands driven by one run config, as the binary uses them:
//! every output file starts with the same config-hash header, and a rerun
//! reproduces the files byte for byte.
//!
//! Run with `cargo run --release --example batch_commands`.

use std::collections::BTreeMap;
use std::path::Path;

use valuecast::config::{ModelKind, Overrides, RunConfig};
use valuecast::pipeline::{cmd_evaluate, cmd_importance, cmd_train, write_synth};
use valuecast::synth::SynthSpec;
use valuecast::{Error, PositionCode, Result};

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Returns the header line and whether the rerun matched.
pub fn run_example() -> Result<(String, bool)> {
    let dir = tempfile::tempdir().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let spec = SynthSpec {
        n_players: 900,
        seed: 2,
        true_coefficients: BTreeMap::from([("total_minutes_on_field".to_string(), 0.3)]),
        ..SynthSpec::default()
    };
    write_synth(&spec, dir.path())?;

    let mut outputs = Vec::new();
    for run in ["first", "second"] {
        let mut cfg = RunConfig::load(&dir.path().join("valuecast.toml"))?;
        cfg.forest.n_trees = 20;
        cfg.apply(&Overrides {
            position: Some(PositionCode::FWD),
            model: Some(ModelKind::Lasso),
            out: Some(dir.path().join(run)),
            ..Overrides::default()
        })?;
        let mut files = cmd_train(&cfg)?.files;
        files.extend(cmd_evaluate(&cfg)?.files);
        files.extend(cmd_importance(&cfg)?.files);
        outputs.push(files);
    }
    let same = outputs[0].len() == outputs[1].len()
        && outputs[0]
            .iter()
            .zip(&outputs[1])
            .try_fold(true, |acc, (a, b)| Ok::<_, Error>(acc && read(a)? == read(b)?))?;
    for f in &outputs[0] {
        println!("{}", f.file_name().map(|n| n.to_string_lossy()).unwrap_or_default());
    }
    let csv = String::from_utf8_lossy(&read(&dir.path().join("first/cv_report.csv"))?).into_owned();
    print!("{csv}");
    println!("rerun identical: {same}");
    Ok((csv.lines().next().unwrap_or_default().to_string(), same))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
