//! Element blending indicator for subcell finite-volume shock capturing.
//!
//! The indicator quantity u_m³ is transformed to orthonormal Legendre modes;
//! the energy fraction in the highest (and second-highest) modes is mapped
//! through a logistic ramp whose threshold depends on the polynomial degree.

use crate::dgsem::operators::SpectralOperators;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShockCapture {
    /// Upper bound on the blending coefficient.
    pub alpha_max: f64,
    /// Coefficients below this are set to 0 (above 1 − alpha_min to 1).
    pub alpha_min: f64,
    /// Spread half of each coefficient to the neighbouring elements.
    pub smooth: bool,
    /// Multiplier of the degree-dependent threshold 0.5·10^(−1.8 (P+1)^¼).
    pub threshold_scale: f64,
}

impl Default for ShockCapture {
    fn default() -> Self {
        ShockCapture { alpha_max: 0.5, alpha_min: 0.001, smooth: true, threshold_scale: 1.0 }
    }
}

impl ShockCapture {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha_max) {
            return Err(Error::arg(format!("alpha_max = {} outside [0, 1]", self.alpha_max)));
        }
        if !(0.0..0.5).contains(&self.alpha_min) {
            return Err(Error::arg("alpha_min must lie in [0, 0.5)"));
        }
        if !(self.threshold_scale > 0.0) {
            return Err(Error::arg("threshold_scale must be positive"));
        }
        Ok(())
    }

    pub fn threshold(&self, n_nodes: usize) -> f64 {
        self.threshold_scale * 0.5 * 10f64.powf(-1.8 * (n_nodes as f64).powf(0.25))
    }

    /// Raw (unsmoothed) coefficient for one element's nodal indicator values.
    pub fn element_coefficient(&self, ops: &SpectralOperators, indicator: &[f64], modal: &mut [f64]) -> f64 {
        let np = ops.n_nodes();
        ops.modal_coefficients(indicator, modal);
        let total: f64 = modal.iter().map(|m| m * m).sum();
        let clip1: f64 = modal[..np - 1].iter().map(|m| m * m).sum();
        let clip2: f64 = modal[..np.saturating_sub(2)].iter().map(|m| m * m).sum();
        let frac1 = if total != 0.0 { (total - clip1) / total } else { 0.0 };
        let frac2 = if clip1 != 0.0 { (clip1 - clip2) / clip1 } else { 0.0 };
        let energy = frac1.max(frac2);

        let threshold = self.threshold(np);
        let sharpness = ((1.0 - 0.0001) / 0.0001f64).ln();
        let mut alpha = 1.0 / (1.0 + (-sharpness / threshold * (energy - threshold)).exp());
        if alpha < self.alpha_min {
            alpha = 0.0;
        } else if alpha > 1.0 - self.alpha_min {
            alpha = 1.0;
        }
        alpha.min(self.alpha_max)
    }

    /// Periodic neighbour smoothing: β_k ← max(β_k, ½β_{k±1}).
    pub fn smooth_coefficients(&self, beta: &mut [f64]) {
        if !self.smooth || beta.len() < 2 {
            return;
        }
        let raw = beta.to_vec();
        let k = raw.len();
        for e in 0..k {
            let l = raw[(e + k - 1) % k];
            let r = raw[(e + 1) % k];
            beta[e] = raw[e].max(0.5 * l).max(0.5 * r);
        }
    }
}
