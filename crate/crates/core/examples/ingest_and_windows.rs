//! Load the bundled NSW electricity prices, scale them and cut them into
//! month-long windows.
//!
//! cargo run --example ingest_and_windows

use reuse_core::ingest::{daily_average, load_dataset, normalize_min_max, FitScope};
use reuse_core::windowing::segment;

const NSW: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/nsw_electricity.csv");

fn main() -> reuse_core::Result<()> {
    let raw = load_dataset(NSW, "nswprice", 48)?;
    println!(
        "{} rows, features {:?}, target `{}`, one row every {} s",
        raw.len(),
        raw.feature_names(),
        raw.target_name(),
        raw.spacing().num_seconds()
    );

    let days = daily_average(&raw, "nswprice")?;
    let (first, last) = (days[0], days[days.len() - 1]);
    println!("{} days, {} averaged {:.4}, {} averaged {:.4}", days.len(), first.0, first.1, last.0, last.1);

    // scaling parameters fitted on the first year only; later values may leave [0, 1]
    let (scaled, params) = normalize_min_max(&raw, FitScope::Prefix(365 * 48))?;
    let t = params.target();
    println!("target range fitted on the first year: [{}, {}]", t.min, t.max);
    let above = scaled.target().iter().filter(|v| **v > 1.0).count();
    println!("{above} later rows exceed 1 after scaling");

    let (scaled, _) = normalize_min_max(&raw, FitScope::Full)?;
    let windows = segment(&scaled, 31)?;
    let dropped = scaled.len() - windows.len() * windows[0].len();
    println!("{} windows of 31 days ({} trailing rows dropped)", windows.len(), dropped);
    for w in windows.iter().take(3) {
        let mean = w.target().iter().sum::<f64>() / w.len() as f64;
        println!("  window {:>2}: {} .. {}  mean {:.4}", w.index, w.first_timestamp(), w.last_timestamp(), mean);
    }
    Ok(())
}
