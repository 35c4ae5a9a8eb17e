//! Entropy-conservation residual of the two-point flux on random state pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swme_dg::fluxes::{ec_condition_residual, es_fluctuations};
use swme_dg::model::{ConservedState, Model, ModelKind, PhysicsParams};

fn main() -> swme_dg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in [ModelKind::Swme, ModelKind::Swlme] {
        for n in 1..=4 {
            let model = Model::new(n, PhysicsParams::new(9.81, kind))?;
            let mut worst: f64 = 0.0;
            let mut es_min = f64::INFINITY;
            for _ in 0..2000 {
                let mut state = || {
                    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    ConservedState::from_primitive(rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0), &alpha, rng.gen_range(-0.5..0.5)).0
                };
                let (ul, ur) = (state(), state());
                let (res, scale) = ec_condition_residual(&model, &ul, &ur)?;
                worst = worst.max(res.abs() / (scale + 1.0));

                // dissipated entropy w_L·D⁻ + w_R·D⁺ − ⟦q⟧ is non-negative
                let f = es_fluctuations(&model, &ul, &ur)?;
                let (wl, wr) = (model.entropy_vars(&ul)?.0, model.entropy_vars(&ur)?.0);
                let prod: f64 = wl.iter().zip(&f.dminus).map(|(w, d)| w * d).sum::<f64>()
                    + wr.iter().zip(&f.dplus).map(|(w, d)| w * d).sum::<f64>()
                    - model.entropy_flux(&ur)?
                    + model.entropy_flux(&ul)?;
                es_min = es_min.min(prod);
            }
            println!("{kind:?} N={n}: EC residual {worst:.2e}, smallest ES dissipation {es_min:.2e}");
        }
    }
    Ok(())
}
