//! LGL-quadrature functionals of a mesh state.

use std::io::Write;

use crate::dgsem::{Discretization, MeshState, SpectralOperators};
use crate::error::{Error, Result};
use crate::model::{to_primitive_into, Model, H};

/// Σ_k Σ_i ω_i (Δx/2) g(k, i, U_i).
fn quadrature<F: FnMut(usize, usize, &[f64]) -> f64>(state: &MeshState, ops: &SpectralOperators, mut g: F) -> f64 {
    let half = 0.5 * state.dx();
    state
        .iter_nodes()
        .map(|(k, i, _, u)| ops.weights()[i] * half * g(k, i, u))
        .sum()
}

pub fn total_entropy(state: &MeshState, ops: &SpectralOperators, model: &Model) -> f64 {
    let mut prim = vec![0.0; state.n_vars()];
    quadrature(state, ops, |_, _, u| {
        to_primitive_into(u, &mut prim);
        model.entropy_prim(&prim)
    })
}

pub fn total_mass(state: &MeshState, ops: &SpectralOperators) -> f64 {
    quadrature(state, ops, |_, _, u| u[H])
}

/// (1/|Ω|) ∫ wᵀ S_friction dx; nonpositive for admissible states.
pub fn entropy_dissipation_rate(state: &MeshState, ops: &SpectralOperators, model: &Model) -> f64 {
    let nv = state.n_vars();
    let (mut prim, mut w, mut s) = (vec![0.0; nv], vec![0.0; nv], vec![0.0; nv]);
    let total = quadrature(state, ops, |_, _, u| {
        to_primitive_into(u, &mut prim);
        model.entropy_vars_into(u, &prim, &mut w);
        model.friction_into(&prim, &mut s);
        w.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>()
    });
    total / state.length()
}

/// ∫ wᵀ ∂t U dx for a given right-hand side, and ∫ |wᵀ ∂t U| dx as a scale.
pub fn entropy_production(state: &MeshState, ops: &SpectralOperators, model: &Model, rhs: &[f64]) -> (f64, f64) {
    let nv = state.n_vars();
    let np = state.nodes_per_element();
    let (mut prim, mut w) = (vec![0.0; nv], vec![0.0; nv]);
    let mut scale = 0.0;
    let half = 0.5 * state.dx();
    let prod = quadrature(state, ops, |k, i, u| {
        to_primitive_into(u, &mut prim);
        model.entropy_vars_into(u, &prim, &mut w);
        let r = &rhs[(k * np + i) * nv..(k * np + i + 1) * nv];
        let mut p = 0.0;
        for c in 0..nv {
            p += w[c] * r[c];
            scale += ops.weights()[i] * half * (w[c] * r[c]).abs();
        }
        p
    });
    (prod, scale)
}

/// Entropy production of the discretization's right-hand side at `state`.
pub fn rhs_entropy_production(disc: &Discretization, state: &MeshState) -> Result<(f64, f64)> {
    let mut rhs = vec![0.0; state.u.len()];
    disc.rhs(state, &mut rhs)?;
    Ok(entropy_production(state, disc.ops(), disc.model(), &rhs))
}

/// Per-component discrete L² error against a pointwise exact solution.
pub fn l2_error(state: &MeshState, ops: &SpectralOperators, exact: &dyn Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let nv = state.n_vars();
    let half = 0.5 * state.dx();
    let mut acc = vec![0.0; nv];
    for (_, i, x, u) in state.iter_nodes() {
        let ex = exact(x);
        for c in 0..nv {
            let d = u[c] - ex[c];
            acc[c] += ops.weights()[i] * half * d * d;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

/// Root-mean-square error per component, sampled on a finer LGL grid of
/// the given degree inside every element: sqrt(∫ (u_h − u)² dx / |Ω|).
pub fn analysis_l2_error(
    state: &MeshState,
    ops: &SpectralOperators,
    exact: &dyn Fn(f64) -> Vec<f64>,
    analysis_degree: usize,
) -> Result<Vec<f64>> {
    let fine = SpectralOperators::new(analysis_degree)?;
    let nv = state.n_vars();
    let np = state.nodes_per_element();
    let interp: Vec<Vec<f64>> = fine.nodes().iter().map(|&xi| ops.lagrange_at(xi)).collect();
    let (xa, _) = state.domain();
    let dx = state.dx();
    let mut acc = vec![0.0; nv];
    let mut uq = vec![0.0; nv];
    for k in 0..state.elements() {
        let left = xa + k as f64 * dx;
        for (q, l) in interp.iter().enumerate() {
            uq.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..np {
                for (v, s) in uq.iter_mut().zip(state.node(k, i)) {
                    *v += l[i] * s;
                }
            }
            let x = left + 0.5 * (fine.nodes()[q] + 1.0) * dx;
            let ex = exact(x);
            for c in 0..nv {
                let d = uq[c] - ex[c];
                acc[c] += fine.weights()[q] * 0.5 * dx * d * d;
            }
        }
    }
    Ok(acc.into_iter().map(|a| (a / state.length()).sqrt()).collect())
}

/// Observed orders log2(e_coarse / e_fine) between consecutive rows, each
/// row holding per-component errors on a mesh twice as fine as the last.
/// A zero fine error yields +∞.
pub fn convergence_rates(errors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if errors.len() < 2 {
        return Err(Error::arg("convergence rates need at least two mesh levels"));
    }
    errors
        .windows(2)
        .map(|w| {
            if w[0].len() != w[1].len() {
                return Err(Error::arg("error rows have different lengths"));
            }
            Ok(w[0]
                .iter()
                .zip(&w[1])
                .map(|(&c, &f)| if f == 0.0 { f64::INFINITY } else { (c / f).log2() })
                .collect())
        })
        .collect()
}

/// max |h + b − level| over all nodes.
pub fn lake_at_rest_error(state: &MeshState, level: f64) -> f64 {
    let b = state.n_vars() - 1;
    state
        .iter_nodes()
        .map(|(_, _, _, u)| (u[H] + u[b] - level).abs())
        .fold(0.0, f64::max)
}

/// Column names of [`TimeSeries`].
pub const SERIES_CHANNELS: [&str; 4] = ["total_entropy", "total_mass", "dissipation_rate", "lake_at_rest_error"];

/// Scalar diagnostics sampled over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub total_entropy: Vec<f64>,
    pub total_mass: Vec<f64>,
    pub dissipation_rate: Vec<f64>,
    pub lake_at_rest_error: Vec<f64>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample all channels at the state's time. Repeated times are skipped.
    pub fn record(&mut self, state: &MeshState, disc: &Discretization, level: Option<f64>) {
        if self.times.last().is_some_and(|&t| t >= state.t) {
            return;
        }
        let ops = disc.ops();
        let model = disc.model();
        self.times.push(state.t);
        self.total_entropy.push(total_entropy(state, ops, model));
        self.total_mass.push(total_mass(state, ops));
        self.dissipation_rate.push(entropy_dissipation_rate(state, ops, model));
        self.lake_at_rest_error.push(level.map_or(f64::NAN, |l| lake_at_rest_error(state, l)));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,{}", SERIES_CHANNELS.join(","))?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i],
                self.total_entropy[i],
                self.total_mass[i],
                self.dissipation_rate[i],
                self.lake_at_rest_error[i]
            )?;
        }
        Ok(())
    }
}
