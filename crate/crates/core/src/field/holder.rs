use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Field, HalfSpaceGrid};
use crate::error::{invalid, Result};

/// How the supremum over node pairs is taken.
///
/// Only `Exact` visits every pair; the other modes are sups over subsets and
/// therefore lower bounds of the exact value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum HolderMode {
    /// All unordered node pairs, `O(N^2)`.
    Exact,
    /// `n_pairs` uniformly random node pairs drawn from a seeded stream.
    Sampled { seed: u64, n_pairs: usize },
    /// Every pair on every grid line parallel to a coordinate axis.
    Lines,
    /// Every pair whose node offset lies in the cube `[-radius, radius]^3`.
    Windowed { radius: usize },
}

/// Tangential offset folded to the nearest periodic image.
#[inline]
fn fold(d: isize, n: usize) -> isize {
    let n = n as isize;
    let d = d.rem_euclid(n);
    if 2 * d > n {
        d - n
    } else {
        d
    }
}

struct PairView<'a> {
    grid: HalfSpaceGrid,
    comps: Vec<&'a [f64]>,
    alpha: f64,
}

impl PairView<'_> {
    #[inline]
    fn ratio(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let g = &self.grid;
        let [i1, j1, k1] = g.unravel(a);
        let [i2, j2, k2] = g.unravel(b);
        let d1 = fold(i2 as isize - i1 as isize, g.n1()) as f64;
        let d2 = fold(j2 as isize - j1 as isize, g.n2()) as f64;
        let d3 = k2 as f64 - k1 as f64;
        let dist2 = (d1 * d1 + d2 * d2 + d3 * d3) * g.h() * g.h();
        if dist2 == 0.0 {
            return 0.0;
        }
        let diff2: f64 = self.comps.iter().map(|c| (c[a] - c[b]) * (c[a] - c[b])).sum();
        diff2.sqrt() / dist2.powf(0.5 * self.alpha)
    }
}

/// Discrete Hölder seminorm `sup |u(x) - u(y)| / |x - y|^alpha` over node pairs.
///
/// Tangential distances use the nearest periodic image.
pub fn holder_seminorm<F: Field>(f: &F, alpha: f64, mode: HolderMode) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("Hölder exponent {alpha} outside (0, 1]")));
    }
    let comps: Vec<&[f64]> =
        f.components().into_iter().filter(|c| !c.is_zero()).map(|c| c.values()).collect();
    let grid = *f.grid();
    if comps.is_empty() {
        if let HolderMode::Sampled { n_pairs: 0, .. } = mode {
            return Err(invalid("sampled mode needs n_pairs >= 1"));
        }
        return Ok(0.0);
    }
    let view = PairView { grid, comps, alpha };
    let n = grid.len();
    let best = match mode {
        HolderMode::Exact => (0..n)
            .into_par_iter()
            .map(|a| (a + 1..n).map(|b| view.ratio(a, b)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max),
        HolderMode::Sampled { seed, n_pairs } => {
            if n_pairs == 0 {
                return Err(invalid("sampled mode needs n_pairs >= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_pairs)
                .map(|_| {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    view.ratio(a, b)
                })
                .fold(0.0, f64::max)
        }
        HolderMode::Lines => {
            let [n1, n2, n3] = grid.dims();
            let line = |start: usize, stride: usize, len: usize| {
                let mut m = 0.0_f64;
                for p in 0..len {
                    for q in p + 1..len {
                        m = m.max(view.ratio(start + p * stride, start + q * stride));
                    }
                }
                m
            };
            let along1 = (0..n2 * n3)
                .into_par_iter()
                .map(|jk| line(jk * n1, 1, n1))
                .reduce(|| 0.0, f64::max);
            let along2 = (0..n1 * n3)
                .into_par_iter()
                .map(|ik| line(grid.idx(ik % n1, 0, ik / n1), n1, n2))
                .reduce(|| 0.0, f64::max);
            let along3 = (0..n1 * n2)
                .into_par_iter()
                .map(|ij| line(ij, n1 * n2, n3))
                .reduce(|| 0.0, f64::max);
            along1.max(along2).max(along3)
        }
        HolderMode::Windowed { radius } => {
            let r = radius as isize;
            let mut offsets = Vec::new();
            for c in -r..=r {
                for b in -r..=r {
                    for a in -r..=r {
                        if (c, b, a) > (0, 0, 0) {
                            offsets.push((a, b, c));
                        }
                    }
                }
            }
            let [n1, n2, n3] = grid.dims();
            (0..n)
                .into_par_iter()
                .map(|x| {
                    let [i, j, k] = grid.unravel(x);
                    let mut m = 0.0_f64;
                    for &(a, b, c) in &offsets {
                        let k2 = k as isize + c;
                        if k2 < 0 || k2 >= n3 as isize {
                            continue;
                        }
                        let i2 = (i as isize + a).rem_euclid(n1 as isize) as usize;
                        let j2 = (j as isize + b).rem_euclid(n2 as isize) as usize;
                        m = m.max(view.ratio(x, grid.idx(i2, j2, k2 as usize)));
                    }
                    m
                })
                .reduce(|| 0.0, f64::max)
        }
    };
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, VectorField3};

    #[test]
    fn constant_field_has_zero_seminorm() {
        let g = HalfSpaceGrid::cubic(6, 0.2).unwrap();
        let c = ScalarField::from_fn(g, |_| 4.0);
        assert_eq!(holder_seminorm(&c, 0.5, HolderMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn identity_in_x3_is_lipschitz_one() {
        let g = HalfSpaceGrid::new(3, 3, 8, 0.25).unwrap();
        let f = ScalarField::from_fn(g, |x| x[2]);
        let s = holder_seminorm(&f, 1.0, HolderMode::Exact).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_profile_attains_one_from_the_wall() {
        let alpha = 0.4;
        let g = HalfSpaceGrid::new(2, 2, 12, 0.1).unwrap();
        let f = ScalarField::from_fn(g, |x| x[2].powf(alpha));
        let s = holder_seminorm(&f, alpha, HolderMode::Exact).unwrap();
        assert!(s <= 1.0 + 1e-12 && s > 1.0 - 1e-9);
    }

    #[test]
    fn subset_modes_are_lower_bounds() {
        let g = HalfSpaceGrid::cubic(7, 0.3).unwrap();
        let v = VectorField3::from_fn(g, |x| [(3.0 * x[0]).sin() * x[2], (x[1] * x[2]).cos(), x[0] * x[1]]);
        let exact = holder_seminorm(&v, 0.6, HolderMode::Exact).unwrap();
        for mode in [
            HolderMode::Sampled { seed: 7, n_pairs: 500 },
            HolderMode::Lines,
            HolderMode::Windowed { radius: 2 },
        ] {
            let s = holder_seminorm(&v, 0.6, mode).unwrap();
            assert!(s <= exact, "{mode:?}: {s} > {exact}");
        }
        let wide = holder_seminorm(&v, 0.6, HolderMode::Windowed { radius: 6 }).unwrap();
        assert!((wide - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn parameter_validation() {
        let g = HalfSpaceGrid::cubic(5, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0]);
        assert!(holder_seminorm(&f, 0.0, HolderMode::Exact).is_err());
        assert!(holder_seminorm(&f, 1.5, HolderMode::Exact).is_err());
        assert!(holder_seminorm(&f, 0.5, HolderMode::Sampled { seed: 1, n_pairs: 0 }).is_err());
    }
}
