//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, in order.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{Months, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reuse_core::evaluation::{compare_samples, financial_cost, mann_whitney_u, CostLedger, Operation};
use reuse_core::experiment::{cmd_compare, ExperimentConfig};
use reuse_core::forecasting::{es_backtest, forecast_es, forecast_sa, EsParams, Forecaster};
use reuse_core::learners::{fit, LearnerKind, LearnerSpec};
use reuse_core::similarity::{
    total_variation_distance, wasserstein_distance, EmpiricalDistribution, Metric, SimilarityConfig,
    SimilarityThreshold,
};
use reuse_core::strategies::{
    prune_registry, run_model_reuse, run_periodic, run_random, run_stationary, ModelRegistry, Provenance,
};
use reuse_core::synthetic::{alternating_period, alternating_regimes, recurring_regimes};
use reuse_core::windowing::segment;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn sample(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(1..=50);
    // a third of the samples live on a coarse grid to force ties
    if rng.random_bool(1.0 / 3.0) {
        (0..n).map(|_| f64::from(rng.random_range(0..8u8)) / 4.0).collect()
    } else {
        let shift = rng.random_range(-2.0..2.0);
        (0..n).map(|_| shift + rng.random_range(0.0..1.0)).collect()
    }
}

fn dist(v: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::new(v).expect("non-empty finite sample")
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (p, q) = (sample(&mut rng), sample(&mut rng));
        let (dp, dq) = (dist(&p), dist(&q));
        let wd = wasserstein_distance(&dp, &dq);
        let tvd = total_variation_distance(&dp, &dq, 20);
        let wd_err = (wd - common::wasserstein_cdf_oracle(&p, &q)).abs();
        let tvd_err = (tvd - common::tvd_histogram_oracle(&p, &q, 20)).abs();
        worst = worst.max(wd_err).max(tvd_err);
        ensure!(wd_err <= 1e-9, "WD {wd} disagrees with the CDF oracle by {wd_err}");
        ensure!(tvd_err <= 1e-9, "TVD {tvd} disagrees with the histogram oracle by {tvd_err}");
    }
    for _ in 0..200 {
        let (a, b, c) = (dist(&sample(&mut rng)), dist(&sample(&mut rng)), dist(&sample(&mut rng)));
        for (d, name) in [
            (wasserstein_distance as fn(&_, &_) -> f64, "WD"),
            (|x: &_, y: &_| total_variation_distance(x, y, 20), "TVD"),
        ] {
            ensure!(d(&a, &b) == d(&b, &a), "{name} is not symmetric");
            ensure!(d(&a, &b) >= 0.0, "{name} is negative");
            ensure!(d(&a, &a) == 0.0, "{name}(P, P) != 0");
        }
        let (ab, bc, ac) = (wasserstein_distance(&a, &b), wasserstein_distance(&b, &c), wasserstein_distance(&a, &c));
        ensure!(ac <= ab + bc + 1e-9, "triangle inequality fails: {ac} > {ab} + {bc}");
    }
    Ok(format!("200 pairs and 200 triples, worst oracle gap {worst:.1e}"))
}

fn mann_whitney_exactness() -> Outcome {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        for m in 1..=8usize {
            let oracle = common::mann_whitney_enumeration(n, m);
            // every arrangement of n + m distinct values
            for mask in 0u32..(1 << (n + m)) {
                if mask.count_ones() as usize != n {
                    continue;
                }
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for r in 0..n + m {
                    if mask & (1 << r) != 0 { a.push(r as f64) } else { b.push(r as f64) }
                }
                let got = mann_whitney_u(&a, &b).map_err(|e| e.to_string())?;
                let want = oracle[got.u as usize];
                ensure!(got.exact, "({n}, {m}) fell back to the normal approximation");
                worst = worst.max((got.p_value - want).abs());
                ensure!(
                    (got.p_value - want).abs() <= 1e-9,
                    "({n}, {m}) U = {}: p {} vs enumeration {want}",
                    got.u,
                    got.p_value
                );
                checked += 1;
            }
        }
    }
    let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).map_err(|e| e.to_string())?;
    ensure!((r.p_value - 1.0 / 3.0).abs() <= 1e-9, "a=[1,2], b=[3,4] gave p = {}", r.p_value);
    Ok(format!("{checked} arrangements over n, m <= 8, worst gap {worst:.1e}; p([1,2],[3,4]) = {:.6}", r.p_value))
}

fn algorithm_fidelity() -> Outcome {
    let ds = alternating_regimes(12, 16, 2);
    let windows = segment(&ds, 2).map_err(|e| e.to_string())?;
    ensure!(windows.len() == 12, "fixture has {} windows", windows.len());
    let config = SimilarityConfig::new(Forecaster::Es, Metric::Wd).with_seasonal_period(alternating_period(16, 2));
    let spec = LearnerSpec::boosted().with_estimators(20);
    let mut registry = ModelRegistry::default();
    let report = run_model_reuse(&windows, &spec, &config, &mut registry).map_err(|e| e.to_string())?;

    // hand simulation: window 1 has no usable predecessor and is fit on
    // window 0; from window 2 on, the forecast reproduces window t - 2 exactly,
    // the earliest same-regime window wins the tie, and that is window 0 for A
    // and window 1 for B
    let mut expected = vec![Provenance::New { trained_on: 0 }];
    expected.extend((2..12).map(|t| Provenance::ReusedFrom { source: t % 2 }));
    let got: Vec<Provenance> = report.records.iter().map(|r| r.provenance).collect();
    ensure!(got == expected, "sequence {got:?}, expected {expected:?}");
    ensure!(report.reduced_training_count >= 8, "only {} reuses", report.reduced_training_count);
    for r in &report.records {
        if let Provenance::ReusedFrom { source } = r.provenance {
            ensure!(source % 2 == r.window % 2, "window {} reused from other-regime window {source}", r.window);
        }
    }
    Ok(format!(
        "1 fit then 10 reuses (even -> 0, odd -> 1), reduced_training_count = {}",
        report.reduced_training_count
    ))
}

fn degenerate_threshold() -> Outcome {
    let ds = recurring_regimes(12, 16, 2, 3, 0.2, 11);
    let windows = segment(&ds, 2).map_err(|e| e.to_string())?;
    let spec = LearnerSpec::bagged().with_estimators(10).with_seed(5);
    let periodic = run_periodic(&windows, &spec).map_err(|e| e.to_string())?;
    for forecaster in [Forecaster::Es, Forecaster::Sa] {
        let config = SimilarityConfig::new(forecaster, Metric::Wd).with_threshold(SimilarityThreshold::Absolute(0.0));
        let reuse = run_model_reuse(&windows, &spec, &config, &mut ModelRegistry::default()).map_err(|e| e.to_string())?;
        ensure!(reuse.reduced_training_count == 0, "{forecaster:?}: stream is not tie-free");
        ensure!(
            reuse.window_mses() == periodic.window_mses(),
            "{forecaster:?}: per-window MSEs differ from periodic"
        );
    }
    Ok(format!("ES and SA both reproduce all {} periodic MSEs bit for bit", periodic.records.len()))
}

fn baseline_ordering() -> Outcome {
    let ds = common::nsw();
    let windows = segment(&ds, 31).map_err(|e| e.to_string())?;
    let random = run_random(&windows, 0).map_err(|e| e.to_string())?.aggregate_mse;
    let mut lines = Vec::new();
    for spec in [LearnerSpec::bagged(), LearnerSpec::boosted()] {
        let p = run_periodic(&windows, &spec).map_err(|e| e.to_string())?.aggregate_mse;
        let s = run_stationary(&windows, &spec).map_err(|e| e.to_string())?.aggregate_mse;
        let name = spec.kind.label();
        ensure!(p < s && s < random, "{name}: periodic {p:.6}, stationary {s:.6}, random {random:.6}");
        lines.push(format!("{name} {p:.6} < {s:.6} < {random:.6}"));
    }
    Ok(lines.join("; "))
}

fn reuse_matches_periodic() -> Outcome {
    let ds = common::nsw();
    let windows = segment(&ds, 31).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    let mut diagnostics = Vec::new();
    for spec in [LearnerSpec::bagged(), LearnerSpec::boosted()] {
        let periodic = run_periodic(&windows, &spec).map_err(|e| e.to_string())?;
        let mut passing = Vec::new();
        for forecaster in [Forecaster::Sa, Forecaster::Es] {
            for metric in [Metric::Wd, Metric::Tvd] {
                let config = SimilarityConfig::new(forecaster, metric);
                let reuse =
                    run_model_reuse(&windows, &spec, &config, &mut ModelRegistry::default()).map_err(|e| e.to_string())?;
                let test = compare_samples("reuse", &reuse.window_mses(), "periodic", &periodic.window_mses())
                    .map_err(|e| e.to_string())?;
                let time_ratio = reuse.train_seconds() / periodic.train_seconds();
                let ok = test.p_value >= 0.05 && reuse.fits < periodic.fits && time_ratio <= 0.5;
                let label = format!("{}/{}/{}", spec.kind.label(), forecaster.label(), metric.label());
                diagnostics.push(format!(
                    "        {label:<16} p = {:.4}  fits {}/{}  train time x{:.2}  {}",
                    test.p_value,
                    reuse.fits,
                    periodic.fits,
                    time_ratio,
                    if ok { "meets all three" } else { "misses" }
                ));
                if ok {
                    passing.push(label);
                }
            }
        }
        ensure!(
            !passing.is_empty(),
            "no configuration meets p >= 0.05, fewer fits and <= 0.5x training time for {}\n{}",
            spec.kind.label(),
            diagnostics.join("\n")
        );
        summary.push(passing.join(", "));
    }
    Ok(format!("satisfied by {}\n{}", summary.join("; "), diagnostics.join("\n")))
}

fn cost_arithmetic() -> Outcome {
    let c = financial_cost(3600.0, 0.115).map_err(|e| e.to_string())?;
    ensure!((c - 0.115).abs() <= 1e-12, "3600 s cost {c}");
    ensure!(financial_cost(0.0, 0.115).map_err(|e| e.to_string())? == 0.0, "0 s is not free");
    let half = financial_cost(1800.0, 0.115).map_err(|e| e.to_string())?;
    ensure!((half - 0.0575).abs() <= 1e-12, "1800 s cost {half}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ledger = CostLedger::default();
    let mut by_hand = [0.0f64; 4];
    for _ in 0..500 {
        let k = rng.random_range(0..4);
        let secs = rng.random_range(0.0..5.0);
        ledger.record(Operation::ALL[k], secs);
        by_hand[k] += secs;
    }
    for (k, op) in Operation::ALL.iter().enumerate() {
        let got = ledger.seconds(*op);
        ensure!((got - by_hand[k]).abs() <= 1e-12, "{} total {got} vs {}", op.label(), by_hand[k]);
    }
    let total: f64 = by_hand.iter().sum();
    ensure!((ledger.total_seconds() - total).abs() <= 1e-9, "ledger total drifts");
    let priced = ledger.total_cost();
    ensure!((priced - 0.115 * total / 3600.0).abs() <= 1e-12, "ledger cost {priced}");
    Ok(format!("3600 s -> ${c}, 1800 s -> ${half}, 500-entry ledger totals exact"))
}

fn forecasting_sanity() -> Outcome {
    let constant = vec![0.42; 48 * 6];
    let mses = es_backtest(&constant, 48, 48).map_err(|e| e.to_string())?;
    ensure!(mses.iter().all(|&m| m == 0.0), "constant back-test MSEs {mses:?}");

    let history = [0.3, 0.9, 0.1, 0.55, 0.7];
    let naive = forecast_es(&history, &EsParams::simple(1.0), 6, 1).map_err(|e| e.to_string())?;
    ensure!(naive.values.iter().all(|&v| v == 0.7), "alpha = 1 forecast {:?}", naive.values);

    let ds = recurring_regimes(4, 8, 2, 2, 0.3, 1);
    let windows = segment(&ds, 2).map_err(|e| e.to_string())?;
    for t in 1..windows.len() {
        let f = forecast_sa(&windows, t).map_err(|e| e.to_string())?;
        let same = f.values.iter().zip(windows[t - 1].target()).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure!(same && f.values.len() == windows[t - 1].len(), "SA forecast of window {t} differs");
    }
    Ok(format!("{} back-test windows at MSE 0, naive forecast 0.7, SA bit-identical", mses.len()))
}

fn registry_retention() -> Outcome {
    let now = NaiveDate::from_ymd_opt(2024, 1, 15).and_then(|d| d.and_hms_opt(12, 0, 0)).expect("date");
    let model = |age_years: u32| {
        let mut m = fit(&LearnerSpec::boosted().with_estimators(2), &[0.0, 1.0, 2.0], 1, &[1.0, 2.0, 3.0])
            .expect("tiny fit");
        m.trained_at = now.checked_sub_months(Months::new(12 * age_years)).expect("date");
        m
    };
    let mut registry = ModelRegistry::default();
    registry.insert(0, model(1));
    registry.insert(1, model(4));
    registry.alias(2, 1).map_err(|e| e.to_string())?;
    registry.insert(3, model(1));
    let pruned = prune_registry(&mut registry, now);
    ensure!(pruned == 1, "pruned {pruned} models");
    ensure!(registry.model_for(1).is_err() && registry.model_for(2).is_err(), "4-year-old model still served");
    ensure!(registry.model_for(0).is_ok() && registry.model_for(3).is_ok(), "1-year-old model pruned");
    ensure!(registry.len() == 2, "{} models left", registry.len());
    Ok("4-year-old model and both of its window entries removed, 1-year-old models kept".into())
}

fn determinism() -> Outcome {
    let mut details = Vec::new();
    for (kind, forecaster, metric) in [
        (LearnerKind::BoostedTrees, Forecaster::Es, Metric::Wd),
        (LearnerKind::BaggedTrees, Forecaster::Sa, Metric::Tvd),
    ] {
        let mut texts = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let mut config = ExperimentConfig::new(common::NSW_PATH, "nswprice");
            config.seed = 17;
            config.learner.kind = kind;
            config.similarity.forecaster = forecaster;
            config.similarity.metric = metric;
            config.output = dir.path().to_path_buf();
            cmd_compare(&config).map_err(|e| e.to_string())?;
            let text = std::fs::read_to_string(dir.path().join("compare.json")).map_err(|e| e.to_string())?;
            let mut json: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            common::strip_timings(&mut json);
            texts.push(serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?);
        }
        ensure!(texts[0] == texts[1], "{} reports differ between runs", kind.label());
        details.push(format!("{}/{}/{} ({} bytes)", kind.label(), forecaster.label(), metric.label(), texts[0].len()));
    }
    Ok(format!("byte-identical compare reports for {}", details.join(", ")))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "metric oracles", limit: Duration::from_secs(5), run: metric_oracles },
        Criterion { id: 2, name: "Mann-Whitney exactness", limit: Duration::from_secs(30), run: mann_whitney_exactness },
        Criterion { id: 3, name: "model-reuse loop fidelity", limit: Duration::from_secs(60), run: algorithm_fidelity },
        Criterion { id: 4, name: "degenerate-threshold equivalence", limit: Duration::from_secs(60), run: degenerate_threshold },
        Criterion { id: 5, name: "baseline ordering on NSW", limit: Duration::from_secs(600), run: baseline_ordering },
        Criterion { id: 6, name: "reuse matches periodic on NSW", limit: Duration::from_secs(900), run: reuse_matches_periodic },
        Criterion { id: 7, name: "cost arithmetic", limit: Duration::from_secs(1), run: cost_arithmetic },
        Criterion { id: 8, name: "forecasting sanity", limit: Duration::from_secs(5), run: forecasting_sanity },
        Criterion { id: 9, name: "registry retention", limit: Duration::from_secs(1), run: registry_retention },
        Criterion { id: 10, name: "determinism", limit: Duration::from_secs(900), run: determinism },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {:>2}: {} ({:.2} s) - {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
