//! Pointwise physics of the augmented moment system
//!
//! ```text
//! ∂t u + ∂x f(u) + B(u) ∂x u = S(u),   u = (h, h u_m, h α_1..h α_N, b)
//! ```
//!
//! The hydrostatic pressure is carried by the nonconservative product
//! (g h ∂x(h + b) in the momentum row), not by the flux.
//!
//! Hot kernels take flat slices. A primitive slice has the same layout as the
//! conserved one: `(h, u_m, α_1..α_N, b)`.

use std::sync::Arc;

use crate::error::{Error, Location, Result};
use crate::moment_basis::{build_tensors, MomentTensors};

pub const DEFAULT_H_MIN: f64 = 1e-10;

/// Index of h.
pub const H: usize = 0;
/// Index of h·u_m (or u_m in primitive layout).
pub const HU: usize = 1;

/// Index of the i-th moment, i in 0..n.
#[inline]
pub const fn moment(i: usize) -> usize {
    2 + i
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Full moment equations with the A/B coupling tensors.
    Swme,
    /// Linearized moment equations (A and B contractions dropped).
    Swlme,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Friction {
    None,
    /// Newtonian slip bottom friction plus bulk viscosity.
    Slip { nu: f64, slip_length: f64 },
    /// Manning bottom friction plus bulk viscosity.
    Manning { nu: f64, n: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicsParams {
    pub g: f64,
    pub model: ModelKind,
    pub friction: Friction,
    pub h_min: f64,
}

impl PhysicsParams {
    pub fn new(g: f64, model: ModelKind) -> Self {
        PhysicsParams { g, model, friction: Friction::None, h_min: DEFAULT_H_MIN }
    }

    pub fn with_friction(mut self, friction: Friction) -> Self {
        self.friction = friction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0) {
            return Err(Error::arg(format!("gravity must be positive, got {}", self.g)));
        }
        if !(self.h_min >= 0.0) {
            return Err(Error::arg("h_min must be non-negative"));
        }
        match self.friction {
            Friction::None => {}
            Friction::Slip { nu, slip_length } => {
                if !(nu >= 0.0) || !(slip_length > 0.0) {
                    return Err(Error::arg("slip friction needs nu >= 0 and slip_length > 0"));
                }
            }
            Friction::Manning { nu, n, rho } => {
                if !(nu >= 0.0) || !(n >= 0.0) || !(rho > 0.0) {
                    return Err(Error::arg("Manning friction needs nu >= 0, n >= 0, rho > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Conserved state at one point: `(h, h u_m, h α_1..h α_N, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState(pub Vec<f64>);

/// Primitive state at one point: `(h, u_m, α_1..α_N, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState(pub Vec<f64>);

/// Entropy variables `(w1, u_m, α_i/(2i+1).., b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyVars(pub Vec<f64>);

impl ConservedState {
    pub fn from_primitive(h: f64, u_m: f64, alpha: &[f64], b: f64) -> Self {
        let mut v = Vec::with_capacity(alpha.len() + 3);
        v.push(h);
        v.push(h * u_m);
        v.extend(alpha.iter().map(|a| h * a));
        v.push(b);
        ConservedState(v)
    }

    pub fn n_moments(&self) -> usize {
        self.0.len() - 3
    }

    pub fn h(&self) -> f64 {
        self.0[H]
    }

    pub fn b(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn to_primitive(&self) -> PrimitiveState {
        let mut p = vec![0.0; self.0.len()];
        to_primitive_into(&self.0, &mut p);
        PrimitiveState(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl PrimitiveState {
    pub fn to_conserved(&self) -> ConservedState {
        let n = self.0.len() - 3;
        ConservedState::from_primitive(self.0[H], self.0[HU], &self.0[2..2 + n], self.0[n + 2])
    }
}

/// Conserved → primitive. Assumes h > 0.
#[inline]
pub fn to_primitive_into(u: &[f64], prim: &mut [f64]) {
    let nv = u.len();
    let h = u[H];
    let inv_h = 1.0 / h;
    prim[H] = h;
    for v in 1..nv - 1 {
        prim[v] = u[v] * inv_h;
    }
    prim[nv - 1] = u[nv - 1];
}

/// Moment system for a fixed moment count: tensors plus physical parameters.
#[derive(Debug, Clone)]
pub struct Model {
    n: usize,
    tensors: Arc<MomentTensors>,
    params: PhysicsParams,
    // r_i = 2i + 1 and 1/r_i for i = 1..N
    r: Vec<f64>,
    inv_r: Vec<f64>,
}

impl Model {
    pub fn new(n: usize, params: PhysicsParams) -> Result<Self> {
        let tensors = Arc::new(build_tensors(n)?);
        Self::with_tensors(tensors, params)
    }

    pub fn with_tensors(tensors: Arc<MomentTensors>, params: PhysicsParams) -> Result<Self> {
        params.validate()?;
        let n = tensors.n();
        let r: Vec<f64> = (1..=n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let inv_r = r.iter().map(|v| 1.0 / v).collect();
        Ok(Model { n, tensors, params, r, inv_r })
    }

    pub fn n_moments(&self) -> usize {
        self.n
    }

    /// Length of the augmented state vector, N + 3.
    pub fn n_vars(&self) -> usize {
        self.n + 3
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn tensors(&self) -> &MomentTensors {
        &self.tensors
    }

    pub fn tensors_arc(&self) -> Arc<MomentTensors> {
        Arc::clone(&self.tensors)
    }

    pub fn g(&self) -> f64 {
        self.params.g
    }

    pub fn is_linearized(&self) -> bool {
        self.params.model == ModelKind::Swlme
    }

    /// Same tensors, different parameters.
    pub fn with_params(&self, params: PhysicsParams) -> Result<Self> {
        Self::with_tensors(self.tensors_arc(), params)
    }

    #[inline]
    pub(crate) fn inv_r(&self) -> &[f64] {
        &self.inv_r
    }

    /// Check the dimension and the dry threshold.
    pub fn check_state(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_vars() {
            return Err(Error::arg(format!(
                "state has {} components, expected {}",
                u.len(),
                self.n_vars()
            )));
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { location: Location::default() });
        }
        if !(u[H] > self.params.h_min) {
            return Err(Error::DryState { h: u[H], location: Location::default() });
        }
        Ok(())
    }

    fn primitive(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_state(u)?;
        let mut p = vec![0.0; u.len()];
        to_primitive_into(u, &mut p);
        Ok(p)
    }

    /// Ψ = h Σ α_i²/(2i+1), from primitives.
    #[inline]
    pub fn psi(&self, prim: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let a = prim[moment(i)];
            s += a * a * self.inv_r[i];
        }
        prim[H] * s
    }

    /// Σ_jk A_ijk x_j y_k for every i.
    #[inline]
    fn contract_a(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let a = self.tensors.a_flat();
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let row = &a[(i * n + j) * n..(i * n + j + 1) * n];
                let mut t = 0.0;
                for k in 0..n {
                    t += row[k] * y[k];
                }
                s += x[j] * t;
            }
            out[i] = s;
        }
    }

    /// Σ_ijk T_ijk/(2i+1) α_i α_j α_k for T = A + B (or B alone).
    fn triple_sum(&self, alpha: &[f64], include_a: bool) -> f64 {
        let n = self.n;
        let a = self.tensors.a_flat();
        let b = self.tensors.b_flat();
        let mut s = 0.0;
        for i in 0..n {
            let mut si = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    let t = if include_a { a[idx] + b[idx] } else { b[idx] };
                    si += t * alpha[j] * alpha[k];
                }
            }
            s += si * alpha[i] * self.inv_r[i];
        }
        s
    }

    /// Physical flux from conserved and primitive values.
    #[inline]
    pub fn flux_into(&self, u: &[f64], prim: &[f64], out: &mut [f64]) {
        let n = self.n;
        let um = prim[HU];
        out[H] = u[HU];
        out[HU] = u[HU] * um + self.psi(prim);
        for i in 0..n {
            out[moment(i)] = 2.0 * u[HU] * prim[moment(i)];
        }
        if !self.is_linearized() {
            let alpha = &prim[2..2 + n];
            let mut tmp = [0.0f64; 16];
            let mut heap;
            let buf: &mut [f64] = if n <= 16 {
                &mut tmp[..n]
            } else {
                heap = vec![0.0; n];
                &mut heap
            };
            self.contract_a(alpha, alpha, buf);
            for i in 0..n {
                out[moment(i)] += prim[H] * buf[i];
            }
        }
        out[n + 2] = 0.0;
    }

    /// B(u)·du, with the total-height increment passed separately so that
    /// lake-at-rest data cancels exactly.
    #[inline]
    pub fn nonconservative_into(&self, prim: &[f64], du: &[f64], d_eta: f64, out: &mut [f64]) {
        let n = self.n;
        let um = prim[HU];
        out[H] = 0.0;
        out[HU] = self.params.g * prim[H] * d_eta;
        for i in 0..n {
            out[moment(i)] = -um * du[moment(i)];
        }
        if !self.is_linearized() {
            // Σ_j (Σ_k B_ijk α_k) d(hα_j)
            let b = self.tensors.b_flat();
            let alpha = &prim[2..2 + n];
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    let row = &b[(i * n + j) * n..(i * n + j + 1) * n];
                    let mut t = 0.0;
                    for k in 0..n {
                        t += row[k] * alpha[k];
                    }
                    s += t * du[moment(j)];
                }
                out[moment(i)] += s;
            }
        }
        out[n + 2] = 0.0;
    }

    /// Entropy (total energy) density from primitives.
    #[inline]
    pub fn entropy_prim(&self, prim: &[f64]) -> f64 {
        let h = prim[H];
        let um = prim[HU];
        let b = prim[self.n + 2];
        0.5 * h * um * um + 0.5 * self.psi(prim) + 0.5 * self.params.g * h * h + self.params.g * h * b
    }

    pub fn entropy_flux_prim(&self, prim: &[f64]) -> f64 {
        let h = prim[H];
        let um = prim[HU];
        let b = prim[self.n + 2];
        let mut f = 0.5 * h * um * um * um
            + 1.5 * um * self.psi(prim)
            + self.params.g * h * um * (h + b);
        if !self.is_linearized() {
            f += h * self.triple_sum(&prim[2..2 + self.n], true);
        }
        f
    }

    #[inline]
    pub fn entropy_vars_into(&self, u: &[f64], prim: &[f64], out: &mut [f64]) {
        let n = self.n;
        let um = prim[HU];
        let mut kin = um * um;
        for i in 0..n {
            let a = prim[moment(i)];
            kin += a * a * self.inv_r[i];
            out[moment(i)] = a * self.inv_r[i];
        }
        // g(h + b) is formed from the stored values so that a lake at rest
        // gives identical w1 everywhere.
        out[H] = -0.5 * kin + self.params.g * (u[H] + u[n + 2]);
        out[HU] = um;
        out[n + 2] = u[n + 2];
    }

    /// |u_m| + sqrt(g h + Σ 3 α_i²/(2i+1)).
    #[inline]
    pub fn max_abs_eigenvalue_prim(&self, prim: &[f64]) -> f64 {
        let mut s = self.params.g * prim[H];
        for i in 0..self.n {
            let a = prim[moment(i)];
            s += 3.0 * a * a * self.inv_r[i];
        }
        prim[HU].abs() + s.sqrt()
    }

    /// Friction source from primitives. Zero when friction is off.
    #[inline]
    pub fn friction_into(&self, prim: &[f64], out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = 0.0);
        let (bottom, nu) = match self.params.friction {
            Friction::None => return,
            Friction::Slip { nu, slip_length } => {
                let s = prim[HU] + prim[2..2 + n].iter().sum::<f64>();
                (-(nu / slip_length) * s, nu)
            }
            Friction::Manning { nu, n: manning, rho } => {
                let s = prim[HU] + prim[2..2 + n].iter().sum::<f64>();
                let coef = rho * self.params.g * manning * manning / prim[H].cbrt();
                (-coef * s.abs() * s, nu)
            }
        };
        out[HU] = bottom;
        let c = self.tensors.c_flat();
        let bulk = nu / prim[H];
        for i in 0..n {
            let mut ca = 0.0;
            for j in 0..n {
                ca += c[i * n + j] * prim[moment(j)];
            }
            out[moment(i)] = bottom * self.r[i] - bulk * ca;
        }
    }

    // Checked, allocating API on whole state vectors.

    pub fn physical_flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.primitive(u)?;
        let mut out = vec![0.0; u.len()];
        self.flux_into(u, &p, &mut out);
        Ok(out)
    }

    /// B(u)·du using ∂x h + ∂x b for the pressure row.
    pub fn nonconservative_product(&self, u: &[f64], du: &[f64]) -> Result<Vec<f64>> {
        let p = self.primitive(u)?;
        if du.len() != u.len() {
            return Err(Error::arg("derivative vector length mismatch"));
        }
        let mut out = vec![0.0; u.len()];
        let d_eta = du[H] + du[self.n + 2];
        self.nonconservative_into(&p, du, d_eta, &mut out);
        Ok(out)
    }

    pub fn entropy(&self, u: &[f64]) -> Result<f64> {
        Ok(self.entropy_prim(&self.primitive(u)?))
    }

    pub fn entropy_flux(&self, u: &[f64]) -> Result<f64> {
        Ok(self.entropy_flux_prim(&self.primitive(u)?))
    }

    pub fn entropy_vars(&self, u: &[f64]) -> Result<EntropyVars> {
        let p = self.primitive(u)?;
        let mut w = vec![0.0; u.len()];
        self.entropy_vars_into(u, &p, &mut w);
        Ok(EntropyVars(w))
    }

    /// u_m Ψ − Σ B_ijk/(2i+1) h α_i α_j α_k, i.e. wᵀf − F.
    pub fn entropy_potential(&self, u: &[f64]) -> Result<f64> {
        let p = self.primitive(u)?;
        let mut v = p[HU] * self.psi(&p);
        if !self.is_linearized() {
            v -= p[H] * self.triple_sum(&p[2..2 + self.n], false);
        }
        Ok(v)
    }

    pub fn max_abs_eigenvalue(&self, u: &[f64]) -> Result<f64> {
        Ok(self.max_abs_eigenvalue_prim(&self.primitive(u)?))
    }

    pub fn friction_source(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.primitive(u)?;
        let mut out = vec![0.0; u.len()];
        self.friction_into(&p, &mut out);
        Ok(out)
    }
}
