//! Legendre–Gauss–Lobatto collocation operators.

use crate::error::{Error, Result};
use crate::moment_basis::legendre_with_deriv;

/// LGL nodes, weights and the nodal derivative matrix for degree `P`.
///
/// With M = diag(weights) and Q = M·D the operators satisfy
/// Q + Qᵀ = diag(−1, 0, …, 0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperators {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major (P+1)×(P+1).
    dmat: Vec<f64>,
    /// Nodal → orthonormal Legendre modal coefficients, row-major.
    to_modal: Vec<f64>,
    bary: Vec<f64>,
}

fn lgl_nodes_weights(p: usize) -> (Vec<f64>, Vec<f64>) {
    let np = p + 1;
    let pf = p as f64;
    let mut x = vec![0.0; np];
    x[0] = -1.0;
    x[p] = 1.0;
    // interior nodes are the roots of L'_P
    for i in 1..p {
        let mut xi = -(std::f64::consts::PI * i as f64 / pf).cos();
        for _ in 0..100 {
            let (l, dl) = legendre_with_deriv(p, xi);
            let d2l = (2.0 * xi * dl - pf * (pf + 1.0) * l) / (1.0 - xi * xi);
            let dx = dl / d2l;
            xi -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        x[i] = xi;
    }
    // enforce exact symmetry
    for i in 0..np / 2 {
        let v = 0.5 * (x[p - i] - x[i]);
        x[i] = -v;
        x[p - i] = v;
    }
    if np % 2 == 1 {
        x[p / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&xi| {
            let (l, _) = legendre_with_deriv(p, xi);
            2.0 / (pf * (pf + 1.0) * l * l)
        })
        .collect();
    (x, w)
}

fn invert(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
                inv.swap(piv * n + c, col * n + c);
            }
        }
        let d = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r * n + c] -= f * a[col * n + c];
                        inv[r * n + c] -= f * inv[col * n + c];
                    }
                }
            }
        }
    }
    inv
}

impl SpectralOperators {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::arg("polynomial degree must be at least 1"));
        }
        let np = degree + 1;
        let (nodes, weights) = lgl_nodes_weights(degree);

        let bary: Vec<f64> = (0..np)
            .map(|j| {
                1.0 / (0..np)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product::<f64>()
            })
            .collect();
        let mut dmat = vec![0.0; np * np];
        for i in 0..np {
            let mut diag = 0.0;
            for j in 0..np {
                if i != j {
                    let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                    dmat[i * np + j] = v;
                    diag -= v;
                }
            }
            dmat[i * np + i] = diag;
        }

        // V_ij = sqrt((2j+1)/2) L_j(x_i)
        let mut vander = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                let (l, _) = legendre_with_deriv(j, nodes[i]);
                vander[i * np + j] = ((2.0 * j as f64 + 1.0) / 2.0).sqrt() * l;
            }
        }
        let to_modal = invert(vander, np);

        Ok(SpectralOperators { degree, nodes, weights, dmat, to_modal, bary })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dmat[i * (self.degree + 1) + j]
    }

    pub fn dmat(&self) -> &[f64] {
        &self.dmat
    }

    /// Orthonormal Legendre coefficients of nodal values.
    pub fn modal_coefficients(&self, nodal: &[f64], out: &mut [f64]) {
        let np = self.n_nodes();
        for j in 0..np {
            let mut s = 0.0;
            for i in 0..np {
                s += self.to_modal[j * np + i] * nodal[i];
            }
            out[j] = s;
        }
    }

    /// Lagrange basis values l_j(ξ) at a reference point.
    pub fn lagrange_at(&self, xi: f64) -> Vec<f64> {
        let np = self.n_nodes();
        if let Some(j) = self.nodes.iter().position(|&x| x == xi) {
            let mut v = vec![0.0; np];
            v[j] = 1.0;
            return v;
        }
        let terms: Vec<f64> = (0..np).map(|j| self.bary[j] / (xi - self.nodes[j])).collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }

    /// Max entry of |Q + Qᵀ − diag(−1, 0, …, 0, 1)|.
    pub fn sbp_residual(&self) -> f64 {
        let np = self.n_nodes();
        let mut worst: f64 = 0.0;
        for i in 0..np {
            for j in 0..np {
                let q = self.weights[i] * self.d(i, j) + self.weights[j] * self.d(j, i);
                let b = if i == j && i == 0 {
                    -1.0
                } else if i == j && i == np - 1 {
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((q - b).abs());
            }
        }
        worst
    }
}

/// Free-function form of [`SpectralOperators::new`].
pub fn build_operators(degree: usize) -> Result<SpectralOperators> {
    SpectralOperators::new(degree)
}
