//! Shifted Legendre basis of the vertical velocity profile, Gauss quadrature,
//! and the moment tensors that couple the moment equations.
//!
//! The basis functions live on ζ ∈ [0, 1] and are normalized so that
//! φ_j(0) = 1:
//!
//! ```text
//! φ_0 = 1,  φ_1 = 1 - 2ζ
//! φ_j = (2j-1)/j (1 - 2ζ) φ_{j-1} - (j-1)/j φ_{j-2}
//! φ'_j = φ'_{j-2} - 2 (2j-1) φ_{j-1}
//! ```
//!
//! Tensors are stored dense and zero-based: `a(i, j, k)` holds A_{i+1,j+1,k+1}.

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::arg(format!("zeta = {zeta} outside [0, 1]")));
    }
    Ok(())
}

/// φ_j(ζ) by the three-term recurrence.
pub fn shifted_legendre_eval(j: usize, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(shifted_legendre_values(j, zeta)[j])
}

/// φ'_j(ζ) by the derivative recurrence.
pub fn shifted_legendre_deriv(j: usize, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(shifted_legendre_derivs(j, zeta)[j])
}

/// φ_0(ζ), …, φ_n(ζ). No range check on ζ.
pub fn shifted_legendre_values(n: usize, zeta: f64) -> Vec<f64> {
    let mut phi = Vec::with_capacity(n + 1);
    phi.push(1.0);
    if n == 0 {
        return phi;
    }
    let s = 1.0 - 2.0 * zeta;
    phi.push(s);
    for j in 2..=n {
        let jf = j as f64;
        let next = (2.0 * jf - 1.0) / jf * s * phi[j - 1] - (jf - 1.0) / jf * phi[j - 2];
        phi.push(next);
    }
    phi
}

/// φ'_0(ζ), …, φ'_n(ζ). No range check on ζ.
pub fn shifted_legendre_derivs(n: usize, zeta: f64) -> Vec<f64> {
    let phi = shifted_legendre_values(n, zeta);
    let mut dphi = Vec::with_capacity(n + 1);
    dphi.push(0.0);
    if n == 0 {
        return dphi;
    }
    dphi.push(-2.0);
    for j in 2..=n {
        dphi.push(dphi[j - 2] - 2.0 * (2.0 * j as f64 - 1.0) * phi[j - 1]);
    }
    dphi
}

/// Classical Legendre polynomial L_n(x) and its derivative.
pub(crate) fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut dp_prev = 0.0;
    let mut dp = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Gauss–Legendre rule with `points` nodes (exact to degree 2·points − 1).
///
/// Newton iteration on L_n started from Chebyshev-like guesses.
pub fn legendre_gauss_rule(points: usize) -> Result<QuadratureRule> {
    if points == 0 {
        return Err(Error::arg("Gauss rule needs at least one point"));
    }
    let n = points;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots are symmetric; solve for the upper half and mirror.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_deriv(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Precomputed A, B tensors and the friction matrix C̃ for `n` moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTensors {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

/// Point count used for the B tensor: ⌈(3N−1)/2 + 1⌉.
pub fn tensor_quadrature_points(n: usize) -> usize {
    ((3.0 * n as f64 - 1.0) / 2.0 + 1.0).ceil() as usize
}

/// Point count used for C̃: ⌈(2N−3)/2 + 1⌉.
pub fn friction_quadrature_points(n: usize) -> usize {
    (((2.0 * n as f64 - 3.0) / 2.0 + 1.0).ceil() as usize).max(1)
}

impl MomentTensors {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[self.idx(i, j, k)]
    }

    #[inline]
    pub fn b(&self, i: usize, j: usize, k: usize) -> f64 {
        self.b[self.idx(i, j, k)]
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n + j]
    }

    /// Flat A tensor, index `(i*n + j)*n + k`.
    pub fn a_flat(&self) -> &[f64] {
        &self.a
    }

    pub fn b_flat(&self) -> &[f64] {
        &self.b
    }

    pub fn c_flat(&self) -> &[f64] {
        &self.c
    }

    /// Tensors with every entry zero. Contracting against these must give the
    /// same results as the linearized model.
    pub fn zeroed(n: usize) -> Self {
        MomentTensors {
            n,
            a: vec![0.0; n * n * n],
            b: vec![0.0; n * n * n],
            c: vec![0.0; n * n],
        }
    }

    /// Build from explicit arrays, e.g. to inject a corrupted tensor in tests.
    pub fn from_parts(n: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != n * n * n || b.len() != n * n * n || c.len() != n * n {
            return Err(Error::arg("tensor dimensions do not match moment count"));
        }
        Ok(MomentTensors { n, a, b, c })
    }

    /// Max over (i,j,k) of |B_ijk/(2i+1) + A_kji/(2k+1) + B_kji/(2k+1)|.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.n;
        let r = |i: usize| 2.0 * i as f64 + 3.0;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.b(i, j, k) / r(i) + self.a(k, j, i) / r(k) + self.b(k, j, i) / r(k);
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

/// Assemble A, B and C̃ for `n` moments.
///
/// B uses a doubly affine-mapped Gauss rule (the inner integral ∫_0^ζ φ_j
/// reuses the outer rule), and A follows from the scaled identity
/// B_ijk/(2i+1) + A_kji/(2k+1) + B_kji/(2k+1) = 0.
pub fn build_tensors(n: usize) -> Result<MomentTensors> {
    if n == 0 {
        return Err(Error::arg("moment count must be at least 1"));
    }
    let rule = legendre_gauss_rule(tensor_quadrature_points(n))?;
    let nn = n * n * n;
    let mut b = vec![0.0; nn];

    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let zeta = 0.5 * (xi + 1.0);
        let phi = shifted_legendre_values(n, zeta);
        let dphi = shifted_legendre_derivs(n, zeta);

        // Φ_j(ζ) = ∫_0^ζ φ_j(s) ds with s = ζ (η + 1) / 2
        let mut big_phi = vec![0.0; n + 1];
        for (&eta, &we) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * zeta * (eta + 1.0);
            let inner = shifted_legendre_values(n, s);
            for j in 1..=n {
                big_phi[j] += we * inner[j];
            }
        }
        for v in big_phi.iter_mut() {
            *v *= 0.5 * zeta;
        }

        for i in 0..n {
            let scale = 0.5 * (2.0 * (i + 1) as f64 + 1.0) * w * dphi[i + 1];
            for j in 0..n {
                let sj = scale * big_phi[j + 1];
                for k in 0..n {
                    b[(i * n + j) * n + k] += sj * phi[k + 1];
                }
            }
        }
    }

    let mut a = vec![0.0; nn];
    let r = |i: usize| 2.0 * i as f64 + 3.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                a[(k * n + j) * n + i] =
                    -r(k) * (b[(i * n + j) * n + k] / r(i) + b[(k * n + j) * n + i] / r(k));
            }
        }
    }

    let crule = legendre_gauss_rule(friction_quadrature_points(n))?;
    let mut c = vec![0.0; n * n];
    for (&xi, &w) in crule.nodes.iter().zip(&crule.weights) {
        let dphi = shifted_legendre_derivs(n, 0.5 * (xi + 1.0));
        for i in 0..n {
            for j in 0..n {
                c[i * n + j] += 0.5 * r(i) * w * dphi[i + 1] * dphi[j + 1];
            }
        }
    }

    Ok(MomentTensors { n, a, b, c })
}
