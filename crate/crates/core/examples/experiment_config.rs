//! Drive a full comparison from a TOML experiment file, the way the `reuse`
//! binary does, and list the reports it writes.
//!
//! cargo run --release --example experiment_config

use reuse_core::experiment::{cmd_compare, ExperimentConfig};
use reuse_core::strategies::StrategyKind;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn main() -> reuse_core::Result<()> {
    let out = std::env::temp_dir().join("reuse-experiment-example");
    let text = format!(
        r#"
seed = 42
output = {out:?}

[dataset]
path = {NSW:?}
target = "nswprice"
samples_per_day = 48

[window]
length = 31

[learner]
kind = "bagged_trees"
n_estimators = 40

[similarity]
forecaster = "sa"
metric = "tvd"
threshold = {{ rule = "quantile", value = 0.25 }}
"#
    );
    let config = ExperimentConfig::from_toml(&text)?;
    println!("effective config:\n{}", config.to_toml()?);

    let result = cmd_compare(&config)?;
    for kind in StrategyKind::ALL {
        let r = result.report(kind);
        println!("{:<24} mse {:.6}  fits {:>2}", r.label(), r.aggregate_mse, r.fits);
    }
    println!("max operation time ratio (periodic / reuse): {:.1}", result.timings.ratio);
    let mut files: Vec<_> = std::fs::read_dir(&out).map_err(|e| reuse_core::Error::Io { path: out.clone(), source: e })?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("wrote {} into {}", files.join(", "), out.display());
    Ok(())
}
