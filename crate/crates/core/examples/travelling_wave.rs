//! Travelling wave with slip friction; writes snapshots and a time series.
//!
//! ```text
//! cargo run --release --example travelling_wave -- [output-dir]
//! ```

use std::path::PathBuf;

use swme_dg::runner::{run_scenario, Overrides, RunConfig};

fn main() -> swme_dg::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "output/travelling_wave".into());
    let mut cfg = RunConfig::new("example1");
    cfg.overrides = Overrides { output_dir: Some(dir.clone()), snapshot_count: Some(5), ..Default::default() };
    let summary = run_scenario(&cfg)?;
    println!("{summary}");
    println!("snapshots and timeseries.csv written to {}", dir.display());
    Ok(())
}
