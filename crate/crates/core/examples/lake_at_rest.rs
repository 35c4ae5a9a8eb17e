//! Perturbed lake at rest: the entropy-stable scheme returns to rest while
//! plain Rusanov dissipation settles on a spurious state.
//!
//! ```text
//! cargo run --release --example lake_at_rest -- [t_end]
//! ```

use swme_dg::diagnostics::lake_at_rest_error;
use swme_dg::scenarios::example4;
use swme_dg::time::{integrate, Event, TimeControls};

fn main() -> swme_dg::Result<()> {
    let t_end: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200.0);
    for wb in [true, false] {
        let mut s = example4(wb);
        s.controls = TimeControls::new(t_end).equispaced(4);
        let level = s.rest_level().expect("lake scenario has a rest level");
        let disc = s.discretization()?;
        let mut state = s.initial_state(&disc)?;
        println!("{}", s.name);
        integrate(&disc, &mut state, &s.controls, |st, ev| {
            if let Event::Snapshot { .. } = ev {
                println!("  t = {:8.2}  max |h + b - level| = {:.3e}", st.t, lake_at_rest_error(st, level));
            }
            Ok(())
        })?;
    }
    Ok(())
}
