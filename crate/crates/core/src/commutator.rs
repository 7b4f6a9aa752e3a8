//! Commutator decomposition of the mollified nonlinear term,
//!
//! `(v⊗v)_ε = v_ε⊗v_ε + r_ε(v, v) − (v − v_ε)⊗(v − v_ε)`,
//!
//! with `r_ε(v, v)(x) = ∫ ρ_ε(y) δ_y v ⊗ δ_y v dy` and
//! `δ_y v(x) = v̄(x − y) − v̄(x)`, and the three convective integrals it
//! induces against `∇S_ε v`.
//!
//! Every part is evaluated with the same discrete stencil, so the identity
//! holds to rounding; the remainder is a direct loop over stencil offsets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{
    holder_seminorm, jacobian, lp_norm, max_abs, tensor_inner, HolderMode, ScalarField, TensorField, VectorField3,
};
use crate::mollifier::{grad_conv_translate_with, mollify_with, MollifierKernel, Scale};

/// Upper-triangular index pairs of a symmetric 3×3 tensor.
const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// The four tensor fields of the decomposition.
#[derive(Clone, Debug)]
pub struct CetParts {
    /// `(v⊗v)_ε`.
    pub lhs: TensorField,
    /// `v_ε⊗v_ε`.
    pub main: TensorField,
    /// `r_ε(v, v)`.
    pub remainder: TensorField,
    /// `(v − v_ε)⊗(v − v_ε)`.
    pub defect: TensorField,
}

impl CetParts {
    /// `max |lhs − (main + remainder − defect)| / max |lhs|` (absolute when
    /// `lhs ≡ 0`).
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for c in 0..9 {
            let l = self.lhs.comps()[c].values();
            let m = self.main.comps()[c].values();
            let r = self.remainder.comps()[c].values();
            let d = self.defect.comps()[c].values();
            for n in 0..l.len() {
                worst = worst.max((l[n] - (m[n] + r[n] - d[n])).abs());
            }
        }
        let scale = max_abs(&self.lhs);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

/// Splits `(v⊗v)_ε` into main term, remainder and defect.
pub fn cet_decompose(v: &VectorField3, epsilon: f64) -> Result<CetParts> {
    let scale = Scale::new(v.grid(), epsilon)?;
    cet_decompose_with(v, &scale)
}

pub fn cet_decompose_with(v: &VectorField3, scale: &Scale) -> Result<CetParts> {
    let v_eps = mollify_with(v, scale)?;
    let lhs = mollify_with(&TensorField::outer(v, v)?, scale)?;
    let main = TensorField::outer(&v_eps, &v_eps)?;
    let diff = v.sub(&v_eps)?;
    let defect = TensorField::outer(&diff, &diff)?;
    let remainder = remainder(v, scale);
    Ok(CetParts { lhs, main, remainder, defect })
}

/// `r_ε(v, v)` by direct summation over the stencil, one output layer per
/// task and offsets in stencil order.
fn remainder(v: &VectorField3, scale: &Scale) -> TensorField {
    let grid = *v.grid();
    let (n1, n2, n3) = (grid.n1() as isize, grid.n2() as isize, grid.n3());
    let layer = grid.layer_len();
    let s = &scale.stencil;
    let mut sym: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; 6];
    let mut per_layer: Vec<Vec<&mut [f64]>> = (0..n3).map(|_| Vec::with_capacity(6)).collect();
    for ch in sym.iter_mut() {
        for (k, chunk) in ch.chunks_mut(layer).enumerate() {
            per_layer[k].push(chunk);
        }
    }
    let comps = v.comps();
    per_layer.into_par_iter().enumerate().for_each(|(k, mut outs)| {
        let here: Vec<&[f64]> = comps.iter().map(|c| &c.values()[k * layer..(k + 1) * layer]).collect();
        let mut delta = vec![[0.0_f64; 3]; layer];
        for (off, &w) in s.offsets.iter().zip(&s.weights) {
            let ks = k as isize - off[2];
            let inside = ks >= 0 && ks < n3 as isize;
            for j in 0..n2 {
                let js = (j - off[1]).rem_euclid(n2);
                for i in 0..n1 {
                    let is = (i - off[0]).rem_euclid(n1);
                    let n = (j * n1 + i) as usize;
                    let src = ks * n1 * n2 + js * n1 + is;
                    for c in 0..3 {
                        let shifted = if inside { comps[c].values()[src as usize] } else { 0.0 };
                        delta[n][c] = shifted - here[c][n];
                    }
                }
            }
            for (out, &(a, b)) in outs.iter_mut().zip(&SYM) {
                for (o, d) in out.iter_mut().zip(&delta) {
                    *o += w * d[a] * d[b];
                }
            }
        }
    });
    let mut comps = Vec::with_capacity(9);
    for a in 0..3 {
        for b in 0..3 {
            let slot = SYM.iter().position(|&p| p == (a.min(b), a.max(b))).expect("symmetric slot");
            comps.push(ScalarField::from_values(grid, sym[slot].clone()).expect("same grid"));
        }
    }
    TensorField::new(comps).expect("same grid")
}

/// `J¹ = ∫ v_ε⊗v_ε : ∇S_ε v`, `J² = ∫ r_ε : ∇S_ε v`,
/// `J³ = −∫ (v − v_ε)⊗(v − v_ε) : ∇S_ε v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JTerms {
    pub epsilon: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    /// `j1 + j2 + j3`.
    pub sum: f64,
    /// `∫ (v⊗v)_ε : ∇S_ε v`, evaluated directly.
    pub direct: f64,
    /// Nodewise identity residual of the decomposition.
    pub residual: f64,
}

impl JTerms {
    /// `|sum − direct|`, relative to the largest of the integrals involved.
    pub fn sum_mismatch(&self) -> f64 {
        let scale = [self.j1, self.j2, self.j3, self.direct].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale > 0.0 {
            (self.sum - self.direct).abs() / scale
        } else {
            0.0
        }
    }
}

pub fn j_terms(v: &VectorField3, epsilon: f64) -> Result<JTerms> {
    let scale = Scale::new(v.grid(), epsilon)?;
    let parts = cet_decompose_with(v, &scale)?;
    let grad = grad_conv_translate_with(v, &scale)?;
    let j1 = tensor_inner(&parts.main, &grad)?;
    let j2 = tensor_inner(&parts.remainder, &grad)?;
    let j3 = -tensor_inner(&parts.defect, &grad)?;
    let direct = tensor_inner(&parts.lhs, &grad)?;
    Ok(JTerms { epsilon, j1, j2, j3, sum: j1 + j2 + j3, direct, residual: parts.residual() })
}

/// Constant of the `J¹` estimate, read off its proof: pointwise
/// `|S_ε v − v_ε| ≤ (3^α + 1)[v] ε^α` and `|∇S_ε v| ≤ c_ρ [v] ε^{α−1}`
/// absorb the powers of `ε`, and `‖S_ε v − v_ε‖₂ ≤ 2‖v‖₂`,
/// `‖∇S_ε v‖₂ ≤ ‖∇v‖₂` hold because smoothing the zero extension is an `L²`
/// contraction.
pub fn j1_constant(alpha: f64) -> f64 {
    let c_rho = MollifierKernel::standard().c_rho;
    (3f64.powf(alpha) + 1.0).powf(1.0 - alpha) * c_rho.powf(alpha) * 2f64.powf(alpha)
}

/// Measured norms entering the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub alpha: f64,
    /// `[v]_{0,α}`.
    pub seminorm: f64,
    /// `‖∇v‖_{L²}`.
    pub grad_l2: f64,
    /// `‖v₀‖_{L²}`.
    pub v0_l2: f64,
}

impl BoundInputs {
    pub fn measure(v: &VectorField3, alpha: f64, v0_l2: f64, mode: HolderMode) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha = {alpha} outside (0, 1)")));
        }
        if !(v0_l2 >= 0.0) {
            return Err(invalid("negative initial energy norm"));
        }
        Ok(Self {
            alpha,
            seminorm: holder_seminorm(v, alpha, mode)?,
            grad_l2: lp_norm(&jacobian(v), 2.0)?,
            v0_l2,
        })
    }
}

/// Right-hand sides of the three `J` estimates; none depends on `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JBounds {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

pub fn j_bounds_from(inputs: &BoundInputs) -> JBounds {
    let BoundInputs { alpha: a, seminorm: s, grad_l2: g, v0_l2: v0 } = *inputs;
    let c_rho = MollifierKernel::standard().c_rho;
    let common = v0.powf(1.0 + a) * g.powf(1.0 - a);
    JBounds {
        b1: j1_constant(a) * s * common,
        b2: c_rho.powf(a) * 2f64.powf(a + 1.0) * s.powf(a) * common,
        b3: c_rho.powf(a) * s * common,
    }
}

/// Bounds with measured norms, `[v]` by [`HolderMode::Lines`].
pub fn j_bounds(v: &VectorField3, epsilon: f64, alpha: f64, v0_l2: f64) -> Result<JBounds> {
    Scale::new(v.grid(), epsilon)?;
    let inputs = BoundInputs::measure(v, alpha, v0_l2, HolderMode::Lines)?;
    Ok(j_bounds_from(&inputs))
}

/// `(Σ_k w_k |y_k|^{α(1−α)}, ε^{α(1−α)})` on the discrete stencil; the first
/// never exceeds the second because every offset has `|y| < ε`.
pub fn remainder_moment(scale: &Scale, alpha: f64) -> (f64, f64) {
    let s = &scale.stencil;
    let p = alpha * (1.0 - alpha);
    let moment = s
        .offsets
        .iter()
        .zip(&s.weights)
        .map(|(o, w)| {
            let r = ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt() * s.h;
            w * r.powf(p)
        })
        .sum();
    (moment, s.epsilon.powf(p))
}

/// One line of the commutator report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub epsilon: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub sum: f64,
    pub direct: f64,
    pub bounds: JBounds,
    pub residual: f64,
    /// `|jᵢ| / bᵢ` (zero when the bound vanishes and so does the term).
    pub ratios: [f64; 3],
    /// Intermediate `J²` inequality on the stencil: `(moment, ε^{α(1−α)})`.
    pub remainder_moment: (f64, f64),
    pub passed: bool,
}

fn ratio(j: f64, b: f64) -> f64 {
    if b > 0.0 {
        j.abs() / b
    } else if j == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Evaluates the decomposition at each `ε` and judges it: identity to
/// `1e−12`, sum rule to `1e−10`, `|J¹| ≤ b₁(1+tol)` and `|J³| ≤ b₃(1+tol)`.
/// `J²` against `b₂` is reported but not judged.
pub fn commutator_report(
    v: &VectorField3,
    eps_list: &[f64],
    inputs: &BoundInputs,
    tol: f64,
) -> Result<Vec<CommutatorReport>> {
    let bounds = j_bounds_from(inputs);
    eps_list
        .iter()
        .map(|&e| {
            let scale = Scale::new(v.grid(), e)?;
            let t = j_terms(v, e)?;
            let ratios = [ratio(t.j1, bounds.b1), ratio(t.j2, bounds.b2), ratio(t.j3, bounds.b3)];
            let moment = remainder_moment(&scale, inputs.alpha);
            let passed = t.residual <= 1e-12
                && t.sum_mismatch() <= 1e-10
                && ratios[0] <= 1.0 + tol
                && ratios[2] <= 1.0 + tol
                && moment.0 <= moment.1;
            Ok(CommutatorReport {
                epsilon: e,
                j1: t.j1,
                j2: t.j2,
                j3: t.j3,
                sum: t.sum,
                direct: t.direct,
                bounds,
                residual: t.residual,
                ratios,
                remainder_moment: moment,
                passed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::HalfSpaceGrid;
    use crate::synth::{curl_field, power_field, shear_field, smooth_step, CurlSpec};

    fn grid(n: usize) -> HalfSpaceGrid {
        HalfSpaceGrid::cubic(n, 1.0 / (n - 1) as f64).unwrap()
    }

    /// `r_ε` straight from its definition, node by node.
    #[allow(clippy::needless_range_loop)]
    fn naive_remainder(v: &VectorField3, epsilon: f64) -> TensorField {
        let g = *v.grid();
        let s = Scale::new(&g, epsilon).unwrap().stencil;
        let mut comps = vec![vec![0.0; g.len()]; 9];
        for n in 0..g.len() {
            let [i, j, k] = g.unravel(n);
            let (i, j, k) = (i as isize, j as isize, k as isize);
            for (o, w) in s.offsets.iter().zip(&s.weights) {
                let d: Vec<f64> = (0..3)
                    .map(|c| v.comp(c).sample(i - o[0], j - o[1], k - o[2]) - v.comp(c).sample(i, j, k))
                    .collect();
                for a in 0..3 {
                    for b in 0..3 {
                        comps[3 * a + b][n] += w * d[a] * d[b];
                    }
                }
            }
        }
        TensorField::new(comps.into_iter().map(|c| ScalarField::from_values(g, c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn zero_field_gives_zero_parts() {
        let g = grid(16);
        let p = cet_decompose(&VectorField3::zeros(g), 2.0 * g.h()).unwrap();
        for t in [&p.lhs, &p.main, &p.remainder, &p.defect] {
            assert_eq!(max_abs(t), 0.0);
        }
        let j = j_terms(&VectorField3::zeros(g), 2.0 * g.h()).unwrap();
        assert_eq!((j.j1, j.j2, j.j3), (0.0, 0.0, 0.0));
        let b = j_bounds(&VectorField3::zeros(g), 2.0 * g.h(), 0.5, 0.0).unwrap();
        assert_eq!((b.b1, b.b2, b.b3), (0.0, 0.0, 0.0));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn remainder_matches_the_definition() {
        let g = grid(16);
        let v = curl_field(&CurlSpec::new(3), g).unwrap();
        let fast = cet_decompose(&v, 2.0 * g.h()).unwrap().remainder;
        let slow = naive_remainder(&v, 2.0 * g.h());
        for (a, b) in fast.comps().iter().zip(slow.comps()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-15 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn identity_holds_on_curl_fields() {
        let g = grid(24);
        let v = curl_field(&CurlSpec::new(11), g).unwrap();
        for m in [2.0, 4.0] {
            let p = cet_decompose(&v, m * g.h()).unwrap();
            assert!(p.residual() <= 1e-12, "{}", p.residual());
        }
    }

    #[test]
    fn constant_patch_has_no_remainder_or_defect() {
        // v = (1, 0, 0) on a slab well inside the support
        let g = grid(32);
        let l = g.height();
        let v = shear_field(g, move |x| smooth_step((x / l - 0.05) / 0.1) * smooth_step((0.7 - x / l) / 0.1));
        let p = cet_decompose(&v, 2.0 * g.h()).unwrap();
        let patch = (0.15 * l / g.h()).ceil() as usize + 2..(0.6 * l / g.h()).floor() as usize - 2;
        for k in patch {
            let n = g.idx(0, 0, k);
            for c in 0..9 {
                assert!(p.remainder.comps()[c].values()[n].abs() < 1e-15);
                assert!(p.defect.comps()[c].values()[n].abs() < 1e-15);
                assert!((p.lhs.comps()[c].values()[n] - p.main.comps()[c].values()[n]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shear_contraction_vanishes() {
        let g = grid(24);
        let v = power_field(0.5, g).unwrap();
        let j = j_terms(&v, 2.0 * g.h()).unwrap();
        for x in [j.j1, j.j2, j.j3, j.direct] {
            assert!(x.abs() <= 1e-10, "{j:?}");
        }
    }

    #[test]
    fn sum_rule_on_curl_field() {
        let g = grid(24);
        let v = curl_field(&CurlSpec::new(8), g).unwrap();
        let j = j_terms(&v, 2.0 * g.h()).unwrap();
        assert!(j.sum_mismatch() <= 1e-10, "{j:?}");
        assert!(j.j1 != 0.0 && j.j2 != 0.0 && j.j3 != 0.0);
    }

    #[test]
    fn bounds_do_not_depend_on_epsilon() {
        let g = grid(24);
        let v = curl_field(&CurlSpec::new(2), g).unwrap();
        let v0 = lp_norm(&v, 2.0).unwrap();
        let a = j_bounds(&v, 2.0 * g.h(), 0.5, v0).unwrap();
        let b = j_bounds(&v, 4.0 * g.h(), 0.5, v0).unwrap();
        assert_eq!(a, b);
        assert!(a.b1 > 0.0 && a.b2 > 0.0 && a.b3 > 0.0);
    }

    #[test]
    fn j1_constant_at_the_ends() {
        let c_rho = MollifierKernel::standard().c_rho;
        assert!((j1_constant(1e-12) - 2.0).abs() < 1e-9);
        assert!((j1_constant(1.0 - 1e-12) - 2.0 * c_rho).abs() < 1e-9);
    }

    #[test]
    fn remainder_moment_is_below_its_bound() {
        let g = grid(32);
        for m in [1.0, 2.0, 4.0, 8.0] {
            let scale = Scale::new(&g, m * g.h()).unwrap();
            for alpha in [0.1, 0.5, 0.9] {
                let (moment, bound) = remainder_moment(&scale, alpha);
                assert!(moment <= bound, "{m} {alpha}");
            }
        }
    }

    #[test]
    fn report_on_reference_field() {
        let g = grid(32);
        let v = curl_field(&CurlSpec::new(42), g).unwrap();
        let v0 = lp_norm(&v, 2.0).unwrap();
        let inputs = BoundInputs::measure(&v, 0.5, v0, HolderMode::Lines).unwrap();
        let eps: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|m| m * g.h()).collect();
        let rows = commutator_report(&v, &eps, &inputs, 0.1).unwrap();
        for r in &rows {
            assert!(r.passed, "{r:?}");
        }
        let json = serde_json::to_value(&rows[0]).unwrap();
        for key in ["epsilon", "j1", "j2", "j3", "sum", "bounds", "residual"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn margin_violation_is_reported() {
        let g = grid(16);
        let v = VectorField3::from_fn(g, |x| [x[2], 0.0, 0.0]);
        assert!(cet_decompose(&v, 2.0 * g.h()).is_err());
    }
}
