use crate::dgsem::operators::SpectralOperators;
use crate::error::{Error, Result};
use crate::model::{Model, H};

/// Uniform periodic mesh with nodal states at the LGL points of each element.
///
/// States are stored node-major: `u[((k * (P+1)) + i) * nv + v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshState {
    elements: usize,
    nodes_per_element: usize,
    n_vars: usize,
    domain: (f64, f64),
    dx: f64,
    x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl MeshState {
    /// Zero-filled state on `[xa, xb]` with `elements` cells.
    pub fn new(domain: (f64, f64), elements: usize, ops: &SpectralOperators, n_vars: usize) -> Result<Self> {
        let (xa, xb) = domain;
        if !(xa < xb) {
            return Err(Error::arg(format!("empty domain [{xa}, {xb}]")));
        }
        if elements == 0 {
            return Err(Error::arg("mesh needs at least one element"));
        }
        let np = ops.n_nodes();
        let dx = (xb - xa) / elements as f64;
        let mut x = Vec::with_capacity(elements * np);
        for k in 0..elements {
            let left = xa + k as f64 * dx;
            for &xi in ops.nodes() {
                x.push(left + 0.5 * (xi + 1.0) * dx);
            }
        }
        Ok(MeshState {
            elements,
            nodes_per_element: np,
            n_vars,
            domain,
            dx,
            x,
            u: vec![0.0; elements * np * n_vars],
            t: 0.0,
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_moments(&self) -> usize {
        self.n_vars - 3
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Physical coordinates, element-major.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn x_at(&self, element: usize, node: usize) -> f64 {
        self.x[element * self.nodes_per_element + node]
    }

    #[inline]
    pub fn node(&self, element: usize, node: usize) -> &[f64] {
        let s = (element * self.nodes_per_element + node) * self.n_vars;
        &self.u[s..s + self.n_vars]
    }

    #[inline]
    pub fn node_mut(&mut self, element: usize, node: usize) -> &mut [f64] {
        let s = (element * self.nodes_per_element + node) * self.n_vars;
        &mut self.u[s..s + self.n_vars]
    }

    /// Iterate `(element, node, x, state)`.
    pub fn iter_nodes(&self) -> impl Iterator<Item = (usize, usize, f64, &[f64])> {
        let np = self.nodes_per_element;
        self.u
            .chunks_exact(self.n_vars)
            .enumerate()
            .map(move |(g, s)| (g / np, g % np, self.x[g], s))
    }

    /// Evaluate the polynomial solution at `x` (periodic wrap).
    pub fn evaluate(&self, ops: &SpectralOperators, x: f64) -> Vec<f64> {
        let (xa, _) = self.domain;
        let len = self.length();
        let xr = (x - xa).rem_euclid(len);
        let k = ((xr / self.dx) as usize).min(self.elements - 1);
        let xi = (2.0 * (xr - k as f64 * self.dx) / self.dx - 1.0).clamp(-1.0, 1.0);
        let l = ops.lagrange_at(xi);
        let mut out = vec![0.0; self.n_vars];
        for (i, li) in l.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.node(k, i)) {
                *o += li * v;
            }
        }
        out
    }

    /// Error with location if any node is dry or non-finite.
    pub fn validate(&self, model: &Model) -> Result<()> {
        for (k, i, _, s) in self.iter_nodes() {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { location: Default::default() }.at(k, i));
            }
            if !(s[H] > model.params().h_min) {
                return Err(Error::DryState { h: s[H], location: Default::default() }.at(k, i));
            }
        }
        Ok(())
    }
}

/// Nodal interpolation of a pointwise initial condition that returns the
/// conserved vector `(h, hu, hα.., b)` at `x`.
pub fn project_initial_condition(
    ic: &dyn Fn(f64) -> Vec<f64>,
    domain: (f64, f64),
    elements: usize,
    ops: &SpectralOperators,
    model: &Model,
) -> Result<MeshState> {
    let nv = model.n_vars();
    let mut state = MeshState::new(domain, elements, ops, nv)?;
    let xs = state.x.clone();
    for (g, &x) in xs.iter().enumerate() {
        let v = ic(x);
        if v.len() != nv {
            return Err(Error::arg(format!(
                "initial condition returned {} components, expected {nv}",
                v.len()
            )));
        }
        state.u[g * nv..(g + 1) * nv].copy_from_slice(&v);
    }
    state.validate(model)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, PhysicsParams};

    #[test]
    fn geometry_tiles_the_domain() {
        let ops = SpectralOperators::new(3).unwrap();
        let m = MeshState::new((-1.0, 1.0), 8, &ops, 5).unwrap();
        for k in 0..8 {
            for i in 1..4 {
                assert!(m.x_at(k, i) > m.x_at(k, i - 1));
            }
            if k > 0 {
                assert!((m.x_at(k, 0) - m.x_at(k - 1, 3)).abs() < 1e-15);
            }
        }
        assert!((m.x_at(0, 0) + 1.0).abs() < 1e-15 && (m.x_at(7, 3) - 1.0).abs() < 1e-15);
        assert!(MeshState::new((1.0, 1.0), 8, &ops, 5).is_err());
    }

    #[test]
    fn projection_is_interpolation() {
        let ops = SpectralOperators::new(3).unwrap();
        let model = Model::new(1, PhysicsParams::new(1.0, ModelKind::Swme)).unwrap();
        let c = project_initial_condition(&|_| vec![1.5, 0.3, -0.2, 0.1], (0.0, 1.0), 4, &ops, &model).unwrap();
        assert!(c.iter_nodes().all(|(_, _, _, s)| s == [1.5, 0.3, -0.2, 0.1]));

        let poly = |x: f64| vec![2.0 + x * x * x - x, 0.0, 0.0, 0.0];
        let s = project_initial_condition(&poly, (0.0, 1.0), 4, &ops, &model).unwrap();
        for x in [0.05, 0.31, 0.77] {
            assert!((s.evaluate(&ops, x)[0] - poly(x)[0]).abs() < 1e-13);
        }

        let dry = project_initial_condition(&|x| vec![x - 0.5, 0.0, 0.0, 0.0], (0.0, 1.0), 4, &ops, &model);
        assert!(matches!(dry, Err(Error::DryState { .. })));
    }
}
