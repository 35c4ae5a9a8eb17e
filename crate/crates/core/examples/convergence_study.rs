//! Mesh-refinement study on the manufactured smooth solution.
//!
//! ```text
//! cargo run --release --example convergence_study -- [swme|swlme] [K0 K1 ...]
//! ```

use swme_dg::diagnostics::{analysis_l2_error, convergence_rates, l2_error};
use swme_dg::model::ModelKind;
use swme_dg::scenarios::example3;
use swme_dg::time::integrate;

fn print_table(title: &str, ladder: &[usize], errors: &[Vec<f64>]) -> swme_dg::Result<()> {
    println!("{title}");
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "K", "h", "hu", "ha1", "ha2", "b");
    let rates = if ladder.len() > 1 { convergence_rates(errors)? } else { Vec::new() };
    for (row, k) in ladder.iter().enumerate() {
        let e: Vec<String> = errors[row].iter().map(|v| format!("{v:12.3e}")).collect();
        println!("{k:>6} {}", e.join(" "));
        if row > 0 {
            let r: Vec<String> = rates[row - 1].iter().map(|v| format!("{v:12.2}")).collect();
            println!("{:>6} {}", "rate", r.join(" "));
        }
    }
    println!();
    Ok(())
}

fn main() -> swme_dg::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("swlme") => ModelKind::Swlme,
        _ => ModelKind::Swme,
    };
    let mut ladder: Vec<usize> = args.filter_map(|a| a.parse().ok()).collect();
    if ladder.is_empty() {
        ladder = vec![16, 32, 64];
    }

    let mut nodal = Vec::new();
    let mut oversampled = Vec::new();
    for &k in &ladder {
        let scenario = example3(kind, k)?;
        let disc = scenario.discretization()?;
        let mut state = scenario.initial_state(&disc)?;
        integrate(&disc, &mut state, &scenario.controls, |_, _| Ok(()))?;
        let t = state.t;
        let exact = |x| scenario.exact_solution(x, t).unwrap();
        nodal.push(l2_error(&state, disc.ops(), &exact));
        oversampled.push(analysis_l2_error(&state, disc.ops(), &exact, 2 * scenario.degree)?);
    }

    print_table("L2 error at the solution nodes", &ladder, &nodal)?;
    print_table("L2 error on degree-2P LGL nodes", &ladder, &oversampled)?;
    Ok(())
}
