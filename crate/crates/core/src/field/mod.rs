//! Node-centered fields on a truncated half-space.
//!
//! The grid covers `[0, n1 h) x [0, n2 h) x [0, (n3 - 1) h]`. Tangential
//! directions are periodic with period `n_i h`; the plane `x3 = 0` carries the
//! nodes with `k = 0`. Outside `0 <= x3 <= L3` every field is extended by zero.

mod holder;
mod io;
mod maximal;
mod ops;

pub use holder::{holder_seminorm, HolderMode};
pub use io::{read_field, write_field, MAGIC};
pub use maximal::{ball_offsets, maximal_function};
pub use ops::{
    convective_term, curl, dirichlet_energy, divergence, gradient, jacobian, l2_inner, lp_norm,
    max_abs, tensor_inner, Exponent,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceGrid {
    n1: usize,
    n2: usize,
    n3: usize,
    h: f64,
}

impl HalfSpaceGrid {
    pub fn new(n1: usize, n2: usize, n3: usize, h: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(LabError::InvalidGrid("tangential node counts must be positive".into()));
        }
        if n3 < 4 {
            return Err(LabError::InvalidGrid(format!("n3 = {n3} < 4")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::InvalidGrid(format!("spacing h = {h} must be positive")));
        }
        Ok(Self { n1, n2, n3, h })
    }

    /// `n^3` nodes with spacing `h`.
    pub fn cubic(n: usize, h: f64) -> Result<Self> {
        Self::new(n, n, n, h)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.n1, self.n2, self.n3]
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn layer_len(&self) -> usize {
        self.n1 * self.n2
    }

    /// Tangential periods `(n1 h, n2 h)`.
    pub fn periods(&self) -> [f64; 2] {
        [self.n1 as f64 * self.h, self.n2 as f64 * self.h]
    }

    /// Height `L3 = (n3 - 1) h` of the stored slab.
    pub fn height(&self) -> f64 {
        (self.n3 - 1) as f64 * self.h
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n1 * (j + self.n2 * k)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n1;
        let j = (idx / self.n1) % self.n2;
        let k = idx / self.layer_len();
        [i, j, k]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [i as f64 * self.h, j as f64 * self.h, k as f64 * self.h]
    }

    /// Quadrature weight of layer `k`: rectangle rule tangentially, trapezoid in `x3`.
    #[inline]
    pub fn layer_weight(&self, k: usize) -> f64 {
        let h3 = self.h * self.h * self.h;
        if k == 0 || k + 1 == self.n3 {
            0.5 * h3
        } else {
            h3
        }
    }

    /// Number of grid steps in `length`, if it is an integer multiple of `h`.
    pub fn steps(&self, length: f64) -> Option<usize> {
        let ratio = length / self.h;
        let rounded = ratio.round();
        if rounded >= 0.0 && (ratio - rounded).abs() <= 1e-9 * ratio.abs().max(1.0) {
            Some(rounded as usize)
        } else {
            None
        }
    }

    pub(crate) fn ensure_same(&self, other: &HalfSpaceGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }
}

/// Real values on the grid nodes, zero-extended in `x3` and periodic tangentially.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: HalfSpaceGrid,
    values: Vec<f64>,
    support_margin: usize,
}

fn top_zero_layers(grid: &HalfSpaceGrid, values: &[f64]) -> usize {
    let layer = grid.layer_len();
    (0..grid.n3())
        .rev()
        .take_while(|&k| values[k * layer..(k + 1) * layer].iter().all(|&v| v == 0.0))
        .count()
}

impl ScalarField {
    pub fn zeros(grid: HalfSpaceGrid) -> Self {
        Self { values: vec![0.0; grid.len()], support_margin: grid.n3(), grid }
    }

    pub fn from_values(grid: HalfSpaceGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let support_margin = top_zero_layers(&grid, &values);
        Ok(Self { grid, values, support_margin })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: HalfSpaceGrid, f: F) -> Self {
        let values = (0..grid.len()).map(|n| f(grid.coords(n))).collect();
        Self::from_values(grid, values).expect("length matches grid")
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of all-zero node layers directly below `x3 = L3` (inclusive).
    pub fn support_margin(&self) -> usize {
        self.support_margin
    }

    pub fn is_zero(&self) -> bool {
        self.support_margin == self.grid.n3()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.idx(i, j, k)]
    }

    /// Value at an arbitrary integer node, applying the extension rule.
    #[inline]
    pub fn sample(&self, i: isize, j: isize, k: isize) -> f64 {
        if k < 0 || k >= self.grid.n3() as isize {
            return 0.0;
        }
        let i = i.rem_euclid(self.grid.n1() as isize) as usize;
        let j = j.rem_euclid(self.grid.n2() as isize) as usize;
        self.at(i, j, k as usize)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_values(self.grid, values).expect("same grid")
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_values(self.grid, values)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }
}

/// Three scalar components on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3 {
    comps: [ScalarField; 3],
}

impl VectorField3 {
    pub fn new(c0: ScalarField, c1: ScalarField, c2: ScalarField) -> Result<Self> {
        c0.grid.ensure_same(&c1.grid)?;
        c0.grid.ensure_same(&c2.grid)?;
        Ok(Self { comps: [c0, c1, c2] })
    }

    pub fn zeros(grid: HalfSpaceGrid) -> Self {
        let z = ScalarField::zeros(grid);
        Self { comps: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: HalfSpaceGrid, f: F) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.len()).map(|n| f(grid.coords(n))).collect();
        let comp = |c: usize| {
            ScalarField::from_values(grid, vals.iter().map(|v| v[c]).collect()).expect("length")
        };
        Self { comps: [comp(0), comp(1), comp(2)] }
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        self.comps[0].grid()
    }

    pub fn comp(&self, c: usize) -> &ScalarField {
        &self.comps[c]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn support_margin(&self) -> usize {
        self.comps.iter().map(ScalarField::support_margin).min().unwrap_or(0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { comps: self.comps.clone().map(|f| f.scale(c)) }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.comps[0].zip_with(&other.comps[0], |a, b| a - b)?,
            self.comps[1].zip_with(&other.comps[1], |a, b| a - b)?,
            self.comps[2].zip_with(&other.comps[2], |a, b| a - b)?,
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.comps[0].zip_with(&other.comps[0], |a, b| a + b)?,
            self.comps[1].zip_with(&other.comps[1], |a, b| a + b)?,
            self.comps[2].zip_with(&other.comps[2], |a, b| a + b)?,
        )
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField {
        magnitude_of(self.grid(), &self.comps)
    }
}

/// 3x3 tensor field stored row-major: component `(i, j)` at `3 i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    comps: Vec<ScalarField>,
}

impl TensorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        if comps.len() != 9 {
            return Err(LabError::InvalidParameter(format!("tensor needs 9 components, got {}", comps.len())));
        }
        for c in &comps[1..] {
            comps[0].grid.ensure_same(&c.grid)?;
        }
        Ok(Self { comps })
    }

    pub fn zeros(grid: HalfSpaceGrid) -> Self {
        Self { comps: vec![ScalarField::zeros(grid); 9] }
    }

    /// Outer product `a ⊗ b`, entry `(i, j) = a_i b_j`.
    pub fn outer(a: &VectorField3, b: &VectorField3) -> Result<Self> {
        a.grid().ensure_same(b.grid())?;
        let mut comps = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                comps.push(a.comp(i).zip_with(b.comp(j), |x, y| x * y)?);
            }
        }
        Ok(Self { comps })
    }

    pub fn grid(&self) -> &HalfSpaceGrid {
        self.comps[0].grid()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[3 * i + j]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn support_margin(&self) -> usize {
        self.comps.iter().map(ScalarField::support_margin).min().unwrap_or(0)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Result<Self> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.zip_with(b, f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { comps })
    }

    /// Pointwise Frobenius norm.
    pub fn magnitude(&self) -> ScalarField {
        magnitude_of(self.grid(), &self.comps)
    }
}

fn magnitude_of(grid: &HalfSpaceGrid, comps: &[ScalarField]) -> ScalarField {
    let values = (0..grid.len())
        .map(|n| comps.iter().map(|c| c.values[n] * c.values[n]).sum::<f64>().sqrt())
        .collect();
    ScalarField::from_values(*grid, values).expect("same grid")
}

/// Common view over scalar, vector, and tensor fields as lists of components.
pub trait Field: Sized {
    fn grid(&self) -> &HalfSpaceGrid;
    fn components(&self) -> Vec<&ScalarField>;
    fn from_components(comps: Vec<ScalarField>) -> Result<Self>;

    fn support_margin(&self) -> usize {
        self.components().iter().map(|c| c.support_margin()).min().unwrap_or(0)
    }

    /// Pointwise Euclidean norm over all components.
    fn pointwise_norm(&self) -> ScalarField {
        let comps: Vec<ScalarField> = self.components().into_iter().cloned().collect();
        magnitude_of(self.grid(), &comps)
    }

    fn map_components(&self, f: impl Fn(&ScalarField) -> Result<ScalarField>) -> Result<Self> {
        let comps = self.components().into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_components(comps)
    }
}

impl Field for ScalarField {
    fn grid(&self) -> &HalfSpaceGrid {
        &self.grid
    }
    fn components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
    fn from_components(mut comps: Vec<ScalarField>) -> Result<Self> {
        if comps.len() != 1 {
            return Err(LabError::InvalidParameter("scalar field has one component".into()));
        }
        Ok(comps.pop().expect("one component"))
    }
}

impl Field for VectorField3 {
    fn grid(&self) -> &HalfSpaceGrid {
        self.comps[0].grid()
    }
    fn components(&self) -> Vec<&ScalarField> {
        self.comps.iter().collect()
    }
    fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let [a, b, c]: [ScalarField; 3] = comps
            .try_into()
            .map_err(|_| LabError::InvalidParameter("vector field has three components".into()))?;
        Self::new(a, b, c)
    }
}

impl Field for TensorField {
    fn grid(&self) -> &HalfSpaceGrid {
        self.comps[0].grid()
    }
    fn components(&self) -> Vec<&ScalarField> {
        self.comps.iter().collect()
    }
    fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        Self::new(comps)
    }
}
