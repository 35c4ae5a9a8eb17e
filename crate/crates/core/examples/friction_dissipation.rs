//! Entropy dissipation rate of the linearized model under slip and Manning
//! friction for several viscosities.

use swme_dg::diagnostics::entropy_dissipation_rate;
use swme_dg::model::Friction;
use swme_dg::scenarios::example2;
use swme_dg::time::{integrate, Event, TimeControls};

fn main() -> swme_dg::Result<()> {
    for nu in [0.01, 0.1, 1.0] {
        let laws = [
            ("slip", Friction::Slip { nu, slip_length: 0.1 }),
            ("manning", Friction::Manning { nu, n: 0.0165, rho: 1000.0 }),
        ];
        for (label, friction) in laws {
            let mut s = example2(friction)?;
            s.elements = 64;
            s.controls = TimeControls::new(2.0).equispaced(4);
            let disc = s.discretization()?;
            let mut state = s.initial_state(&disc)?;
            let mut rates = vec![entropy_dissipation_rate(&state, disc.ops(), disc.model())];
            integrate(&disc, &mut state, &s.controls, |st, ev| {
                if let Event::Snapshot { .. } = ev {
                    rates.push(entropy_dissipation_rate(st, disc.ops(), disc.model()));
                }
                Ok(())
            })?;
            let r: Vec<String> = rates.iter().map(|v| format!("{v:10.3e}")).collect();
            println!("{label:>7} nu={nu:<5} D(t=0,0.5,..,2): {}", r.join(" "));
        }
    }
    Ok(())
}
