use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reuse_core::experiment::{
    cmd_analyze, cmd_compare, cmd_run, cmd_select_window, cmd_validate, ExperimentConfig, WindowLength,
};
use reuse_core::forecasting::Forecaster;
use reuse_core::learners::LearnerKind;
use reuse_core::similarity::Metric;
use reuse_core::strategies::StrategyKind;
use reuse_core::Error;

#[derive(Parser)]
#[command(name = "reuse", version, about = "Model reuse versus retraining on drifting time series")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// TOML experiment config; flags below override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    samples_per_day: Option<u32>,
    /// Window length in days, or `auto`.
    #[arg(long, global = true, value_parser = parse_from_str::<WindowLength>)]
    window_days: Option<WindowLength>,
    #[arg(long, global = true, value_parser = parse_from_str::<Forecaster>)]
    forecaster: Option<Forecaster>,
    #[arg(long, global = true, value_parser = parse_from_str::<Metric>)]
    metric: Option<Metric>,
    #[arg(long, global = true, value_parser = parse_from_str::<LearnerKind>)]
    learner: Option<LearnerKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load the dataset and report rows, arity and spacing.
    Validate,
    /// Write distribution and box-plot data (CSV and SVG) per window.
    Analyze,
    /// Search the candidate window lengths.
    SelectWindow,
    /// Run one strategy: stationary, periodic, random or reuse.
    Run {
        #[arg(value_parser = parse_from_str::<StrategyKind>)]
        strategy: StrategyKind,
    },
    /// Run all four strategies and compare them.
    Compare,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn build_config(o: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut config = match (&o.config, &o.dataset, &o.target) {
        (Some(path), _, _) => ExperimentConfig::from_file(path)?,
        (None, Some(dataset), Some(target)) => ExperimentConfig::new(dataset, target),
        _ => {
            return Err(Error::InvalidConfig(
                "give --config, or both --dataset and --target".into(),
            ))
        }
    };
    if let Some(d) = &o.dataset {
        config.dataset.path = d.clone();
    }
    if let Some(t) = &o.target {
        config.dataset.target = t.clone();
    }
    if let Some(n) = o.samples_per_day {
        config.dataset.samples_per_day = n;
    }
    if let Some(w) = o.window_days {
        config.window.length = w;
    }
    if let Some(f) = o.forecaster {
        config.similarity.forecaster = f;
    }
    if let Some(m) = o.metric {
        config.similarity.metric = m;
    }
    if let Some(l) = o.learner {
        config.learner.kind = l;
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if let Some(out) = &o.out {
        config.output = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = build_config(&cli.overrides)?;
    match cli.command {
        Command::Validate => println!("{}", cmd_validate(&config)?),
        Command::Analyze => {
            let out = cmd_analyze(&config)?;
            println!("{} windows of {} days", out.summaries.len(), out.window_days);
            for f in out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::SelectWindow => {
            let report = cmd_select_window(&config)?;
            for c in &report.candidates {
                match c.mse {
                    Some(m) => println!("{:>3} days  {:>3} windows  mse {m:.6}", c.days, c.windows),
                    None => println!("{:>3} days  {:>3} windows  (too few windows)", c.days, c.windows),
                }
            }
            println!("chosen: {} days", report.chosen);
        }
        Command::Run { strategy } => {
            let r = cmd_run(&config, strategy)?;
            println!(
                "{}: mse {:.6} over {} windows, {} fits, {} reused",
                r.label(),
                r.aggregate_mse,
                r.records.len(),
                r.fits,
                r.reduced_training_count
            );
            println!("reports in {}", config.output.display());
        }
        Command::Compare => {
            let out = cmd_compare(&config)?;
            for r in &out.reports {
                println!("{:<28} mse {:.6}  fits {:>3}  reused {:>3}", r.label(), r.aggregate_mse, r.fits, r.reduced_training_count);
            }
            for c in &out.comparisons {
                println!(
                    "{} vs {}: U = {}, p = {:.4} ({})",
                    c.a,
                    c.b,
                    c.u,
                    c.p_value,
                    if c.significant { "significant" } else { "insignificant" }
                );
            }
            println!("max operation time ratio (periodic / reuse): {:.2}", out.timings.ratio);
            println!("reports in {}", config.output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
