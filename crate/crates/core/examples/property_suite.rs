//! Randomized invariant checks: tensor antisymmetry, flux entropy
//! conservation, friction dissipation, SBP and discrete well-balancing.

use swme_dg::runner::{run_property_suite, PropertySuite};

fn main() -> swme_dg::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0);
    let report = run_property_suite(&PropertySuite { seed, samples: 1000 })?;
    for r in &report.results {
        println!("{r}");
    }
    if !report.passed() {
        std::process::exit(3);
    }
    Ok(())
}
