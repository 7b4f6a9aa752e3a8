//! Standard mollification, upward translation, and the convolution-translation
//! operator `S_ε u = ρ_ε * (τ_{2ε} ū)`.
//!
//! `S_ε` is evaluated as one fused stencil sum whose source layer is shifted
//! down by `2ε / h`. The output at stored nodes therefore never depends on
//! values that a separate translation step would push out of the box.
//!
//! Support margins are checked on the input only: a field whose top
//! `⌈ε/h⌉` layers are zero has a mollification whose support still fits in the
//! stored slab.

mod kernel;
mod stencil;

pub use kernel::{MollifierKernel, REFERENCE_C_RHO, REFERENCE_NORMALIZATION};
pub use stencil::{make_stencil, DiscreteStencil};

use crate::conv::{accumulate, convolve};
use crate::error::{LabError, Result};
use crate::field::{jacobian, Field, HalfSpaceGrid, ScalarField, TensorField, VectorField3};

/// Validated smoothing scale on a given grid.
#[derive(Clone, Debug)]
pub struct Scale {
    pub stencil: DiscreteStencil,
    /// `⌈ε / h⌉`.
    pub radius: usize,
    /// `2ε / h`, when it is an integer.
    pub shift: Option<usize>,
}

impl Scale {
    pub fn new(grid: &HalfSpaceGrid, epsilon: f64) -> Result<Self> {
        let stencil = make_stencil(MollifierKernel::standard(), epsilon, grid.h())?;
        let radius = stencil.radius_steps();
        let shift = grid.steps(2.0 * epsilon);
        Ok(Self { stencil, radius, shift })
    }

    pub fn epsilon(&self) -> f64 {
        self.stencil.epsilon
    }

    fn shift_steps(&self, grid: &HalfSpaceGrid) -> Result<usize> {
        self.shift.ok_or(LabError::MisalignedTranslation { ratio: 2.0 * self.epsilon() / grid.h() })
    }
}

fn require_margin(margin: usize, required: usize) -> Result<()> {
    if margin < required {
        Err(LabError::TruncationContamination { margin, required })
    } else {
        Ok(())
    }
}

/// `ū(x - 2ε e3)` on the stored nodes; layers pushed above `L3` are dropped.
pub fn translate<F: Field>(u: &F, epsilon: f64) -> Result<F> {
    let grid = *u.grid();
    let shift = grid.steps(2.0 * epsilon).ok_or(LabError::MisalignedTranslation { ratio: 2.0 * epsilon / grid.h() })?;
    let layer = grid.layer_len();
    u.map_components(|c| {
        let mut values = vec![0.0; grid.len()];
        if shift < grid.n3() {
            let keep = (grid.n3() - shift) * layer;
            values[shift * layer..].copy_from_slice(&c.values()[..keep]);
        }
        ScalarField::from_values(grid, values)
    })
}

/// `u_ε = ρ_ε * ū`.
pub fn mollify<F: Field>(u: &F, epsilon: f64) -> Result<F> {
    let scale = Scale::new(u.grid(), epsilon)?;
    mollify_with(u, &scale)
}

pub fn mollify_with<F: Field>(u: &F, scale: &Scale) -> Result<F> {
    require_margin(u.support_margin(), scale.radius)?;
    let s = &scale.stencil;
    u.map_components(|c| Ok(convolve(c, &s.offsets, &s.weights, 0)))
}

/// `S_ε u = ρ_ε * (τ_{2ε} ū)`.
pub fn conv_translate<F: Field>(u: &F, epsilon: f64) -> Result<F> {
    let scale = Scale::new(u.grid(), epsilon)?;
    conv_translate_with(u, &scale)
}

pub fn conv_translate_with<F: Field>(u: &F, scale: &Scale) -> Result<F> {
    let shift = scale.shift_steps(u.grid())?;
    require_margin(u.support_margin(), scale.radius)?;
    let s = &scale.stencil;
    u.map_components(|c| Ok(convolve(c, &s.offsets, &s.weights, shift as isize)))
}

/// `ρ_ε * S_ε u`, the admissible test function.
///
/// The intermediate `S_ε u` reaches `3ε` above the support of `u`, so it is
/// evaluated on a grid extended by that many layers; every stored output
/// node is then exact.
pub fn double_smooth<F: Field>(u: &F, epsilon: f64) -> Result<F> {
    let grid = *u.grid();
    let scale = Scale::new(&grid, epsilon)?;
    let shift = scale.shift_steps(&grid)?;
    require_margin(u.support_margin(), 2 * scale.radius)?;
    let s = &scale.stencil;
    let tall = grid.n3() + shift + scale.radius;
    u.map_components(|c| {
        let inner = convolve(&resize_layers(c, tall)?, &s.offsets, &s.weights, shift as isize);
        let outer = convolve(&inner, &s.offsets, &s.weights, 0);
        resize_layers(&outer, grid.n3())
    })
}

/// Same tangential layout with `n3` layers: zero-padded on top or cropped.
fn resize_layers(f: &ScalarField, n3: usize) -> Result<ScalarField> {
    let g = f.grid();
    let grid = HalfSpaceGrid::new(g.n1(), g.n2(), n3, g.h())?;
    let mut values = vec![0.0; grid.len()];
    let keep = grid.len().min(g.len());
    values[..keep].copy_from_slice(&f.values()[..keep]);
    ScalarField::from_values(grid, values)
}

/// `∇ρ_ε * f` for one scalar source, shifted by `shift` layers.
fn stencil_gradient(f: &ScalarField, scale: &Scale, shift: usize) -> [ScalarField; 3] {
    let grid = *f.grid();
    let s = &scale.stencil;
    let channels: Vec<Vec<f64>> = (0..3).map(|a| s.grad_channel(a)).collect();
    let refs: Vec<&[f64]> = channels.iter().map(Vec::as_slice).collect();
    let mut out = vec![vec![0.0; grid.len()]; 3];
    accumulate(f, &s.offsets, &refs, shift as isize, &mut out);
    out.map_into()
        .map(|v| ScalarField::from_values(grid, v).expect("same grid"))
}

trait IntoArray3 {
    fn map_into(self) -> [Vec<f64>; 3];
}

impl IntoArray3 for Vec<Vec<f64>> {
    fn map_into(self) -> [Vec<f64>; 3] {
        self.try_into().expect("three channels")
    }
}

fn stencil_jacobian(v: &VectorField3, scale: &Scale, shift: usize) -> TensorField {
    let mut comps = Vec::with_capacity(9);
    for i in 0..3 {
        comps.extend(stencil_gradient(v.comp(i), scale, shift));
    }
    TensorField::new(comps).expect("same grid")
}

/// `∇ u_ε = ∇ρ_ε * ū`, entry `(i, j) = ∂_j (u_i)_ε`.
pub fn grad_mollify(v: &VectorField3, epsilon: f64) -> Result<TensorField> {
    let scale = Scale::new(v.grid(), epsilon)?;
    grad_mollify_with(v, &scale)
}

pub fn grad_mollify_with(v: &VectorField3, scale: &Scale) -> Result<TensorField> {
    require_margin(v.support_margin(), scale.radius)?;
    Ok(stencil_jacobian(v, scale, 0))
}

/// Both discrete forms of `∇ S_ε u`.
#[derive(Clone, Debug)]
pub struct GradPair {
    /// `∇ρ_ε` stencil applied to `τ_{2ε} ū`.
    pub stencil_form: TensorField,
    /// Central-difference gradient of `S_ε u`.
    pub difference_form: TensorField,
}

pub fn grad_conv_translate(v: &VectorField3, epsilon: f64) -> Result<GradPair> {
    let scale = Scale::new(v.grid(), epsilon)?;
    let smoothed = conv_translate_with(v, &scale)?;
    Ok(GradPair { stencil_form: grad_conv_translate_with(v, &scale)?, difference_form: jacobian(&smoothed) })
}

/// Stencil form of `∇ S_ε u` only.
pub fn grad_conv_translate_with(v: &VectorField3, scale: &Scale) -> Result<TensorField> {
    let shift = scale.shift_steps(v.grid())?;
    require_margin(v.support_margin(), scale.radius)?;
    Ok(stencil_jacobian(v, scale, shift))
}

/// Stencil form of `∇ S_ε f` for a scalar field.
pub fn grad_conv_translate_scalar(f: &ScalarField, epsilon: f64) -> Result<VectorField3> {
    let scale = Scale::new(f.grid(), epsilon)?;
    let shift = scale.shift_steps(f.grid())?;
    require_margin(f.support_margin(), scale.radius)?;
    let [a, b, c] = stencil_gradient(f, &scale, shift);
    VectorField3::new(a, b, c)
}
