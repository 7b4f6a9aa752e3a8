use rayon::prelude::*;

use super::{Field, HalfSpaceGrid, ScalarField, TensorField, VectorField3};
use crate::error::{LabError, Result};
use crate::sum::pairwise_sum;

/// Integrability exponent `r` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(r: f64) -> Result<Self> {
        if r == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if r >= 1.0 && r.is_finite() {
            Ok(Exponent::Finite(r))
        } else {
            Err(LabError::InvalidExponent(r))
        }
    }
}

/// Per-node quadrature weights times `g(node)`, reduced pairwise.
pub(crate) fn integrate(grid: &HalfSpaceGrid, g: impl Fn(usize) -> f64 + Sync) -> f64 {
    let layer = grid.layer_len();
    let buf: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|n| grid.layer_weight(n / layer) * g(n))
        .collect();
    pairwise_sum(&buf)
}

fn squared_norm_at(comps: &[&ScalarField], n: usize) -> f64 {
    comps.iter().map(|c| c.values()[n] * c.values()[n]).sum()
}

/// Discrete `L^r` norm over `0 <= x3 <= L3`; `r = f64::INFINITY` gives the max norm.
pub fn lp_norm<F: Field>(f: &F, r: f64) -> Result<f64> {
    let comps = f.components();
    match Exponent::new(r)? {
        Exponent::Infinity => Ok(max_abs(f)),
        Exponent::Finite(2.0) => {
            Ok(integrate(f.grid(), |n| squared_norm_at(&comps, n)).sqrt())
        }
        Exponent::Finite(r) => {
            let s = integrate(f.grid(), |n| squared_norm_at(&comps, n).powf(0.5 * r));
            Ok(s.powf(1.0 / r))
        }
    }
}

/// Maximum over nodes of the pointwise Euclidean norm.
pub fn max_abs<F: Field>(f: &F) -> f64 {
    let comps = f.components();
    (0..f.grid().len())
        .map(|n| squared_norm_at(&comps, n))
        .fold(0.0_f64, f64::max)
        .sqrt()
}

/// Discrete `∫ f · g dx` with the same quadrature as [`lp_norm`].
pub fn l2_inner(f: &VectorField3, g: &VectorField3) -> Result<f64> {
    f.grid().ensure_same(g.grid())?;
    Ok(integrate(f.grid(), |n| {
        (0..3).map(|c| f.comp(c).values()[n] * g.comp(c).values()[n]).sum()
    }))
}

/// Discrete `∫ A : B dx`.
pub fn tensor_inner(a: &TensorField, b: &TensorField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let pairs: Vec<(&[f64], &[f64])> = a
        .comps()
        .iter()
        .zip(b.comps())
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| (x.values(), y.values()))
        .collect();
    Ok(integrate(a.grid(), |n| pairs.iter().map(|(x, y)| x[n] * y[n]).sum()))
}

/// Central difference along `axis`, periodic tangentially, zero-extended in `x3`.
pub(crate) fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = *f.grid();
    if f.is_zero() {
        return ScalarField::zeros(g);
    }
    let inv = 0.5 / g.h();
    let values = (0..g.len())
        .into_par_iter()
        .map(|n| {
            let [i, j, k] = g.unravel(n);
            let (i, j, k) = (i as isize, j as isize, k as isize);
            let (p, m) = match axis {
                0 => (f.sample(i + 1, j, k), f.sample(i - 1, j, k)),
                1 => (f.sample(i, j + 1, k), f.sample(i, j - 1, k)),
                _ => (f.sample(i, j, k + 1), f.sample(i, j, k - 1)),
            };
            (p - m) * inv
        })
        .collect();
    ScalarField::from_values(g, values).expect("same grid")
}

pub fn gradient(f: &ScalarField) -> VectorField3 {
    VectorField3::new(partial(f, 0), partial(f, 1), partial(f, 2)).expect("same grid")
}

/// Velocity gradient with entry `(i, j) = ∂_j v_i`.
pub fn jacobian(v: &VectorField3) -> TensorField {
    let mut comps = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            comps.push(partial(v.comp(i), j));
        }
    }
    TensorField::new(comps).expect("same grid")
}

pub fn divergence(v: &VectorField3) -> ScalarField {
    let d0 = partial(v.comp(0), 0);
    let d1 = partial(v.comp(1), 1);
    let d2 = partial(v.comp(2), 2);
    let values = (0..v.grid().len())
        .map(|n| d0.values()[n] + d1.values()[n] + d2.values()[n])
        .collect();
    ScalarField::from_values(*v.grid(), values).expect("same grid")
}

/// Discrete curl with the same central differences as [`divergence`].
pub fn curl(psi: &VectorField3) -> VectorField3 {
    let d = |c: usize, axis: usize| partial(psi.comp(c), axis);
    let diff = |a: ScalarField, b: ScalarField| a.zip_with(&b, |x, y| x - y).expect("same grid");
    VectorField3::new(diff(d(2, 1), d(1, 2)), diff(d(0, 2), d(2, 0)), diff(d(1, 0), d(0, 1)))
        .expect("same grid")
}

/// `∫ |∇u|^2` from forward differences on grid edges, including the edges
/// into the zero extension at both ends in `x3`.
///
/// Edge midpoints see the rectangle rule in every direction, which keeps the
/// quadrature second order for fields with a kink at the wall.
pub fn dirichlet_energy<F: Field>(f: &F) -> f64 {
    let g = *f.grid();
    let h3 = g.h().powi(3);
    let inv_h2 = 1.0 / (g.h() * g.h());
    let mut total = Vec::new();
    for c in f.components() {
        if c.is_zero() {
            continue;
        }
        let buf: Vec<f64> = (0..g.len())
            .into_par_iter()
            .map(|n| {
                let [i, j, k] = g.unravel(n);
                let (i, j, k) = (i as isize, j as isize, k as isize);
                let u = c.sample(i, j, k);
                let d1 = c.sample(i + 1, j, k) - u;
                let d2 = c.sample(i, j + 1, k) - u;
                let d3 = c.sample(i, j, k + 1) - u;
                let mut e = d1 * d1 + d2 * d2 + d3 * d3;
                if k == 0 {
                    // edge from the extension node below the wall
                    e += u * u;
                }
                e * inv_h2 * h3
            })
            .collect();
        total.push(pairwise_sum(&buf));
    }
    pairwise_sum(&total)
}

/// `[∇v] v`, i.e. `Σ_j v_j ∂_j v_i`.
pub fn convective_term(v: &VectorField3) -> VectorField3 {
    let jac = jacobian(v);
    let g = *v.grid();
    let comp = |i: usize| {
        let values = (0..g.len())
            .map(|n| (0..3).map(|j| v.comp(j).values()[n] * jac.get(i, j).values()[n]).sum())
            .collect();
        ScalarField::from_values(g, values).expect("same grid")
    };
    VectorField3::new(comp(0), comp(1), comp(2)).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid9() -> HalfSpaceGrid {
        HalfSpaceGrid::cubic(9, 1.0).unwrap()
    }

    #[test]
    fn lp_norm_of_zero_and_constant() {
        let g = grid9();
        assert_eq!(lp_norm(&ScalarField::zeros(g), 2.0).unwrap(), 0.0);
        let one = ScalarField::from_fn(g, |_| 1.0);
        // 9 x 9 tangential period, x3-extent 8 with half weights at both ends
        let l2 = lp_norm(&one, 2.0).unwrap();
        assert!((l2 - 648f64.sqrt()).abs() < 1e-12);
        assert!((l2 - 25.456).abs() < 1e-3);
    }

    #[test]
    fn lp_norm_rejects_small_exponent() {
        let g = grid9();
        assert!(matches!(lp_norm(&ScalarField::zeros(g), 0.5), Err(LabError::InvalidExponent(_))));
    }

    #[test]
    fn linf_bounded_by_amplitude() {
        let g = grid9();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 9.0).sin());
        let m = lp_norm(&f, f64::INFINITY).unwrap();
        assert!(m <= 1.0 && m > 0.9);
    }

    #[test]
    fn inner_matches_norm_and_orthogonality() {
        let g = grid9();
        let f = VectorField3::from_fn(g, |x| [x[0].sin(), x[2] * 0.1, 1.0]);
        let n = lp_norm(&f, 2.0).unwrap();
        let ip = l2_inner(&f, &f).unwrap();
        assert!((n * n - ip).abs() <= 1e-12 * ip);
        let a = VectorField3::from_fn(g, |_| [1.0, 0.0, 0.0]);
        let b = VectorField3::from_fn(g, |_| [0.0, 1.0, 0.0]);
        assert_eq!(l2_inner(&a, &b).unwrap(), 0.0);
        let lo = VectorField3::from_fn(g, |x| [if x[2] < 3.0 { 1.0 } else { 0.0 }, 0.0, 0.0]);
        let hi = VectorField3::from_fn(g, |x| [if x[2] > 4.0 { 1.0 } else { 0.0 }, 0.0, 0.0]);
        assert_eq!(l2_inner(&lo, &hi).unwrap(), 0.0);
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let g = grid9();
        let c = ScalarField::from_fn(g, |_| 3.0);
        let gc = gradient(&c);
        // interior in x3 only; the end layers see the zero extension
        for k in 1..8 {
            for c in 0..3 {
                assert_eq!(gc.comp(c).at(4, 4, k), 0.0);
            }
        }
        let lin = ScalarField::from_fn(g, |x| x[2]);
        let gl = gradient(&lin);
        for k in 1..8 {
            assert_eq!(gl.comp(0).at(2, 5, k), 0.0);
            assert!((gl.comp(2).at(2, 5, k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_second_order_in_h() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let g = HalfSpaceGrid::new(n, 2, 4, h).unwrap();
            let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
            let d = gradient(&f);
            (0..n)
                .map(|i| (d.comp(0).at(i, 0, 1) - 2.0 * PI * (2.0 * PI * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn divergence_of_shear_and_linear() {
        let g = grid9();
        let shear = VectorField3::from_fn(g, |x| [(x[2] * 0.3).sin(), 0.0, 0.0]);
        assert!(divergence(&shear).values().iter().all(|&d| d == 0.0));
        let g2 = HalfSpaceGrid::new(12, 3, 5, 0.5).unwrap();
        let lin = VectorField3::from_fn(g2, |x| [x[0], 0.0, 0.0]);
        let d = divergence(&lin);
        // interior in x1 (away from the periodic seam)
        for i in 1..11 {
            assert!((d.at(i, 1, 2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn div_curl_vanishes() {
        let g = HalfSpaceGrid::cubic(10, 0.1).unwrap();
        let psi = VectorField3::from_fn(g, |x| {
            let w = (PI * x[2] / 0.9).sin().powi(2);
            [
                w * (2.0 * PI * x[0]).cos(),
                w * (2.0 * PI * x[1]).sin() * x[0],
                w * (2.0 * PI * (x[0] + x[1])).sin(),
            ]
        });
        let d = divergence(&curl(&psi));
        assert!(max_abs(&d) < 1e-12);
    }

    #[test]
    fn dirichlet_energy_of_sine_profile() {
        // ∫ (k cos kx)^2 over a half period is k^2 L / 2
        let n3 = 65;
        let h = 1.0 / (n3 - 1) as f64;
        let g = HalfSpaceGrid::new(2, 2, n3, h).unwrap();
        let f = ScalarField::from_fn(g, |x| (PI * x[2]).sin());
        let area = 4.0 * h * h;
        let exact = PI * PI / 2.0 * area;
        let e = dirichlet_energy(&f);
        assert!(((e - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn homogeneity_of_lp_norm() {
        let g = grid9();
        let f = ScalarField::from_fn(g, |x| (x[0] - x[1]).sin() * x[2]);
        for r in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let a = lp_norm(&f.scale(-2.5), r).unwrap();
            let b = 2.5 * lp_norm(&f, r).unwrap();
            assert!((a - b).abs() <= 1e-14 * b, "r = {r}");
        }
    }
}
