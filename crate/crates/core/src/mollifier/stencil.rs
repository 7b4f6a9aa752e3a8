use serde::Serialize;

use super::kernel::MollifierKernel;
use crate::conv::Offset;
use crate::error::{LabError, Result};
use crate::sum::pairwise_sum;

/// Node-offset samples of `ρ_ε` and `∇ρ_ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteStencil {
    pub epsilon: f64,
    pub h: f64,
    pub offsets: Vec<Offset>,
    /// Samples of `ρ_ε h^3`, renormalized to unit sum.
    pub weights: Vec<f64>,
    /// Samples of `∇ρ_ε h^3` with the same renormalization, mean-subtracted
    /// so each component sums to zero.
    pub grad_weights: Vec<[f64; 3]>,
}

impl DiscreteStencil {
    /// Kernel radius in nodes, `⌈ε / h⌉`.
    pub fn radius_steps(&self) -> usize {
        radius_steps(self.epsilon, self.h)
    }

    pub fn grad_channel(&self, axis: usize) -> Vec<f64> {
        self.grad_weights.iter().map(|g| g[axis]).collect()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

pub(crate) fn radius_steps(epsilon: f64, h: f64) -> usize {
    let r = epsilon / h;
    let rounded = r.round();
    if (r - rounded).abs() <= 1e-9 * r.max(1.0) {
        rounded as usize
    } else {
        r.ceil() as usize
    }
}

/// Samples `ρ_ε` at every node offset with `|o| h < ε`.
pub fn make_stencil(kernel: &MollifierKernel, epsilon: f64, h: f64) -> Result<DiscreteStencil> {
    if !(h > 0.0) || !(epsilon >= h * (1.0 - 1e-12)) {
        return Err(LabError::UnderResolvedKernel { epsilon, h });
    }
    let r = radius_steps(epsilon, h) as isize;
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    let mut raw_grad = Vec::new();
    let h3 = h * h * h;
    let eps4 = epsilon.powi(4);
    for c in -r..=r {
        for b in -r..=r {
            for a in -r..=r {
                let y = [a as f64 * h, b as f64 * h, c as f64 * h];
                let dist = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                let s = dist / epsilon;
                if s >= 1.0 - 1e-12 {
                    continue;
                }
                offsets.push([a, b, c]);
                raw.push(kernel.profile(s) * h3 / epsilon.powi(3));
                // ∇ρ_ε(y) = ε^{-4} ρ'(|y|/ε) y/|y|
                let d = if dist > 0.0 { kernel.profile_derivative(s) * h3 / (eps4 * dist) } else { 0.0 };
                raw_grad.push([d * y[0], d * y[1], d * y[2]]);
            }
        }
    }
    let total = pairwise_sum(&raw);
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let n = raw_grad.len() as f64;
    let mut grad_weights: Vec<[f64; 3]> =
        raw_grad.iter().map(|g| [g[0] / total, g[1] / total, g[2] / total]).collect();
    for axis in 0..3 {
        let col: Vec<f64> = grad_weights.iter().map(|g| g[axis]).collect();
        let mean = pairwise_sum(&col) / n;
        for g in &mut grad_weights {
            g[axis] -= mean;
        }
    }
    Ok(DiscreteStencil { epsilon, h, offsets, weights, grad_weights })
}
