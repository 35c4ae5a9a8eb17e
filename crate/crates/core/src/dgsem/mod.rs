//! Nodal DG spectral element discretization on a uniform periodic mesh.
//!
//! Volume terms use the entropy-conservative fluctuations in flux-differencing
//! form; element interfaces use the fluctuations of the configured
//! [`FluxMode`]. With shock capturing enabled, each element's DG volume term is
//! blended with a first-order finite-volume update on the LGL subcells.

pub mod mesh;
pub mod operators;
pub mod shock_capture;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluxes::{fluctuations_into, FluxMode, FluxScratch, PointData};
use crate::model::{to_primitive_into, Model, H, HU};

pub use mesh::{project_initial_condition, MeshState};
pub use operators::{build_operators, SpectralOperators};
pub use shock_capture::ShockCapture;

/// A pointwise source term S(x, t) added to the right-hand side.
pub trait PointSource: Send + Sync {
    fn source_into(&self, model: &Model, x: f64, t: f64, out: &mut [f64]);
}

#[derive(Clone, Default)]
pub enum SourceTerm {
    #[default]
    None,
    /// The model's bottom/bulk friction.
    Friction,
    Manufactured(Arc<dyn PointSource>),
}

impl std::fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SourceTerm::None => f.write_str("None"),
            SourceTerm::Friction => f.write_str("Friction"),
            SourceTerm::Manufactured(_) => f.write_str("Manufactured(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub flux_mode: FluxMode,
    pub shock_capture: Option<ShockCapture>,
    pub source: SourceTerm,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { flux_mode: FluxMode::Es, shock_capture: None, source: SourceTerm::None }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(sc) = &self.shock_capture {
            sc.validate()?;
        }
        Ok(())
    }

    /// Fluctuations used on the finite-volume subcells.
    fn subcell_mode(&self) -> FluxMode {
        match self.flux_mode {
            FluxMode::Rusanov => FluxMode::Rusanov,
            _ => FluxMode::Es,
        }
    }
}

/// Operators, physics and scheme options bundled for RHS evaluation.
#[derive(Debug, Clone)]
pub struct Discretization {
    ops: SpectralOperators,
    model: Model,
    cfg: SchemeConfig,
}

/// Primitive variables and physical fluxes at every node.
struct NodeData {
    prim: Vec<f64>,
    flux: Vec<f64>,
}

struct ElementScratch {
    fec: Vec<f64>,
    flux: FluxScratch,
    du: Vec<f64>,
    bdu: Vec<f64>,
    vol: Vec<f64>,
    fv_minus: Vec<f64>,
    fv_plus: Vec<f64>,
    src: Vec<f64>,
}

impl ElementScratch {
    fn new(np: usize, nv: usize) -> Self {
        ElementScratch {
            fec: vec![0.0; np * np * nv],
            flux: FluxScratch::new(nv),
            du: vec![0.0; nv],
            bdu: vec![0.0; nv],
            vol: vec![0.0; np * nv],
            fv_minus: vec![0.0; np * nv],
            fv_plus: vec![0.0; np * nv],
            src: vec![0.0; nv],
        }
    }
}

impl Discretization {
    pub fn new(model: Model, degree: usize, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Discretization { ops: SpectralOperators::new(degree)?, model, cfg })
    }

    pub fn ops(&self) -> &SpectralOperators {
        &self.ops
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn with_config(&self, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Discretization { ops: self.ops.clone(), model: self.model.clone(), cfg })
    }

    /// Zero state on `domain` with `elements` cells sized for this model.
    pub fn empty_state(&self, domain: (f64, f64), elements: usize) -> Result<MeshState> {
        MeshState::new(domain, elements, &self.ops, self.model.n_vars())
    }

    pub fn project(&self, ic: &dyn Fn(f64) -> Vec<f64>, domain: (f64, f64), elements: usize) -> Result<MeshState> {
        project_initial_condition(ic, domain, elements, &self.ops, &self.model)
    }

    fn check_layout(&self, state: &MeshState, out: &[f64]) -> Result<()> {
        if state.n_vars() != self.model.n_vars() || state.nodes_per_element() != self.ops.n_nodes() {
            return Err(Error::arg(format!(
                "state layout ({} nodes, {} vars) does not match discretization ({} nodes, {} vars)",
                state.nodes_per_element(),
                state.n_vars(),
                self.ops.n_nodes(),
                self.model.n_vars()
            )));
        }
        if out.len() != state.u.len() {
            return Err(Error::arg("output buffer has the wrong length"));
        }
        Ok(())
    }

    fn node_data(&self, state: &MeshState) -> Result<NodeData> {
        let nv = self.model.n_vars();
        let np = self.ops.n_nodes();
        let h_min = self.model.params().h_min;
        let mut prim = vec![0.0; state.u.len()];
        let mut flux = vec![0.0; state.u.len()];
        state
            .u
            .par_chunks(nv)
            .zip(prim.par_chunks_mut(nv))
            .zip(flux.par_chunks_mut(nv))
            .enumerate()
            .try_for_each(|(g, ((u, p), f))| {
                if !u.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite { location: Default::default() }.at(g / np, g % np));
                }
                if !(u[H] > h_min) {
                    return Err(Error::DryState { h: u[H], location: Default::default() }.at(g / np, g % np));
                }
                to_primitive_into(u, p);
                self.model.flux_into(u, p, f);
                Ok(())
            })
            .map_err(|e| e.at_time(state.t, None))?;
        Ok(NodeData { prim, flux })
    }

    /// Fluctuations at the K periodic interfaces. Interface k joins the last
    /// node of element k−1 to the first node of element k.
    fn interface_fluctuations(&self, state: &MeshState, data: &NodeData) -> (Vec<f64>, Vec<f64>) {
        let nv = self.model.n_vars();
        let np = self.ops.n_nodes();
        let ne = state.elements();
        let mut dminus = vec![0.0; ne * nv];
        let mut dplus = vec![0.0; ne * nv];
        let point = |g: usize| PointData {
            u: &state.u[g * nv..(g + 1) * nv],
            prim: &data.prim[g * nv..(g + 1) * nv],
            flux: &data.flux[g * nv..(g + 1) * nv],
        };
        dminus
            .par_chunks_mut(nv)
            .zip(dplus.par_chunks_mut(nv))
            .enumerate()
            .for_each_init(
                || FluxScratch::new(nv),
                |scratch, (k, (dm, dp))| {
                    let left = ((k + ne - 1) % ne) * np + np - 1;
                    let right = k * np;
                    fluctuations_into(&self.model, self.cfg.flux_mode, point(left), point(right), scratch, dm, dp);
                },
            );
        (dminus, dplus)
    }

    /// Blending coefficient per element; all zero without shock capturing.
    pub fn blending_coefficients(&self, state: &MeshState) -> Result<Vec<f64>> {
        let ne = state.elements();
        let Some(sc) = &self.cfg.shock_capture else {
            return Ok(vec![0.0; ne]);
        };
        let np = self.ops.n_nodes();
        let nv = self.model.n_vars();
        if state.n_vars() != nv || state.nodes_per_element() != np {
            return Err(Error::arg("state layout does not match discretization"));
        }
        let mut beta: Vec<f64> = (0..ne)
            .into_par_iter()
            .map_init(
                || (vec![0.0; np], vec![0.0; np]),
                |(ind, modal), k| {
                    for i in 0..np {
                        let u = state.node(k, i);
                        let um = u[HU] / u[H];
                        ind[i] = um * um * um;
                    }
                    sc.element_coefficient(&self.ops, ind, modal)
                },
            )
            .collect();
        sc.smooth_coefficients(&mut beta);
        Ok(beta)
    }

    /// Full right-hand side including shock-capture blending when enabled.
    pub fn rhs(&self, state: &MeshState, out: &mut [f64]) -> Result<()> {
        if self.cfg.shock_capture.is_some() {
            let beta = self.blending_coefficients(state)?;
            self.rhs_blended(state, &beta, out)
        } else {
            self.rhs_impl(state, None, out)
        }
    }

    /// Right-hand side of the pure DG scheme (no blending).
    pub fn rhs_dg(&self, state: &MeshState, out: &mut [f64]) -> Result<()> {
        self.rhs_impl(state, None, out)
    }

    /// Right-hand side with the subcell finite-volume volume term only.
    pub fn rhs_subcell_fv(&self, state: &MeshState, out: &mut [f64]) -> Result<()> {
        let beta = vec![1.0; state.elements()];
        self.rhs_impl(state, Some(&beta), out)
    }

    /// Right-hand side with the volume term blended per element by `beta`.
    pub fn rhs_blended(&self, state: &MeshState, beta: &[f64], out: &mut [f64]) -> Result<()> {
        if beta.len() != state.elements() {
            return Err(Error::arg("one blending coefficient per element required"));
        }
        self.rhs_impl(state, Some(beta), out)
    }

    fn rhs_impl(&self, state: &MeshState, beta: Option<&[f64]>, out: &mut [f64]) -> Result<()> {
        self.check_layout(state, out)?;
        let data = self.node_data(state)?;
        let (iface_minus, iface_plus) = self.interface_fluctuations(state, &data);

        let nv = self.model.n_vars();
        let np = self.ops.n_nodes();
        let ne = state.elements();
        let p = np - 1;
        let scale = -2.0 / state.dx();
        let w = self.ops.weights();
        let t = state.t;
        let model = &self.model;
        let ops = &self.ops;
        let subcell_mode = self.cfg.subcell_mode();

        out.par_chunks_mut(np * nv)
            .enumerate()
            .for_each_init(
                || ElementScratch::new(np, nv),
                |s, (k, rhs)| {
                    let base = k * np;
                    let u = |i: usize| &state.u[(base + i) * nv..(base + i + 1) * nv];
                    let pr = |i: usize| &data.prim[(base + i) * nv..(base + i + 1) * nv];
                    let fl = |i: usize| &data.flux[(base + i) * nv..(base + i + 1) * nv];
                    let bk = beta.map_or(0.0, |b| b[k]);

                    if bk < 1.0 {
                        // symmetric table of EC fluxes
                        for i in 0..np {
                            for m in (i + 1)..np {
                                let (a, b) = (i * np + m, m * np + i);
                                crate::fluxes::ec_flux_into(
                                    model,
                                    u(i),
                                    pr(i),
                                    u(m),
                                    pr(m),
                                    &mut s.fec[a * nv..(a + 1) * nv],
                                );
                                let (lo, hi) = s.fec.split_at_mut(b * nv);
                                hi[..nv].copy_from_slice(&lo[a * nv..(a + 1) * nv]);
                            }
                        }
                        for i in 0..np {
                            let vol = &mut s.vol[i * nv..(i + 1) * nv];
                            vol.iter_mut().for_each(|v| *v = 0.0);
                            s.du.iter_mut().for_each(|v| *v = 0.0);
                            let ui = u(i);
                            let fi = fl(i);
                            let b_idx = nv - 1;
                            let eta_i = ui[H] + ui[b_idx];
                            let mut d_eta = 0.0;
                            for m in 0..np {
                                if m == i {
                                    continue;
                                }
                                let d = ops.d(i, m);
                                let f = &s.fec[(i * np + m) * nv..(i * np + m + 1) * nv];
                                let um = u(m);
                                for c in 0..nv {
                                    vol[c] += 2.0 * d * (f[c] - fi[c]);
                                    s.du[c] += d * (um[c] - ui[c]);
                                }
                                d_eta += d * ((um[H] + um[b_idx]) - eta_i);
                            }
                            model.nonconservative_into(pr(i), &s.du, d_eta, &mut s.bdu);
                            for c in 0..nv {
                                vol[c] += s.bdu[c];
                            }
                        }
                    }

                    if bk > 0.0 {
                        for i in 0..p {
                            let (dm, dp) = (&mut s.fv_minus[i * nv..(i + 1) * nv], &mut s.fv_plus[i * nv..(i + 1) * nv]);
                            fluctuations_into(
                                model,
                                subcell_mode,
                                PointData { u: u(i), prim: pr(i), flux: fl(i) },
                                PointData { u: u(i + 1), prim: pr(i + 1), flux: fl(i + 1) },
                                &mut s.flux,
                                dm,
                                dp,
                            );
                        }
                    }

                    for i in 0..np {
                        let r = &mut rhs[i * nv..(i + 1) * nv];
                        let inv_w = 1.0 / w[i];
                        for c in 0..nv {
                            let mut acc = 0.0;
                            if bk < 1.0 {
                                acc += (1.0 - bk) * s.vol[i * nv + c];
                            }
                            let mut surf = 0.0;
                            if i == 0 {
                                surf += iface_plus[k * nv + c];
                            }
                            if i == p {
                                surf += iface_minus[((k + 1) % ne) * nv + c];
                            }
                            if bk > 0.0 {
                                let mut fv = 0.0;
                                if i > 0 {
                                    fv += s.fv_plus[(i - 1) * nv + c];
                                }
                                if i < p {
                                    fv += s.fv_minus[i * nv + c];
                                }
                                surf += bk * fv;
                            }
                            r[c] = scale * (acc + surf * inv_w);
                        }
                        match &self.cfg.source {
                            SourceTerm::None => {}
                            SourceTerm::Friction => {
                                model.friction_into(pr(i), &mut s.src);
                                for c in 0..nv {
                                    r[c] += s.src[c];
                                }
                            }
                            SourceTerm::Manufactured(src) => {
                                src.source_into(model, state.x_at(k, i), t, &mut s.src);
                                for c in 0..nv {
                                    r[c] += s.src[c];
                                }
                            }
                        }
                        // bathymetry is static
                        r[nv - 1] = 0.0;
                    }
                },
            );
        Ok(())
    }
}

/// Allocating form of [`Discretization::rhs`].
pub fn semidiscrete_rhs(disc: &Discretization, state: &MeshState) -> Result<Vec<f64>> {
    let mut out = vec![0.0; state.u.len()];
    disc.rhs(state, &mut out)?;
    Ok(out)
}

/// Per-element convex blend (1−β)·a + β·b of two right-hand sides.
pub fn shock_capture_blend(rhs_dg: &[f64], rhs_fv: &[f64], beta: &[f64], values_per_element: usize) -> Vec<f64> {
    rhs_dg
        .chunks(values_per_element)
        .zip(rhs_fv.chunks(values_per_element))
        .zip(beta)
        .flat_map(|((a, b), &bk)| {
            a.iter().zip(b).map(move |(x, y)| if bk == 0.0 { *x } else { (1.0 - bk) * x + bk * y })
        })
        .collect()
}
