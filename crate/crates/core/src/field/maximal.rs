use super::{HalfSpaceGrid, ScalarField};
use crate::conv::{accumulate, Offset};
use crate::error::{LabError, Result};

/// Lattice offsets with `|o| <= radius` (in node units), ordered by squared
/// length and then lexicographically in `(c, b, a)`.
pub fn ball_offsets(radius: usize) -> Vec<Offset> {
    let r = radius as isize;
    let mut out = Vec::new();
    for c in -r..=r {
        for b in -r..=r {
            for a in -r..=r {
                if a * a + b * b + c * c <= r * r {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out.sort_by_key(|o| (o[0] * o[0] + o[1] * o[1] + o[2] * o[2], o[2], o[1], o[0]));
    out
}

/// Discrete Hardy–Littlewood maximal function of `|f̄|`.
///
/// At each node the result is the largest average of `|f̄|` over the discrete
/// balls of radius `i h <= r_max`, `i = 0, 1, ...`; extension nodes count
/// toward the ball size with value zero.
pub fn maximal_function(f: &ScalarField, r_max: f64) -> Result<ScalarField> {
    let grid: HalfSpaceGrid = *f.grid();
    if !(r_max >= grid.h() * (1.0 - 1e-12)) {
        return Err(LabError::InvalidRadius { radius: r_max, h: grid.h() });
    }
    let steps = ((r_max / grid.h()) * (1.0 + 1e-12)).floor() as usize;
    let abs = f.map(f64::abs);
    let mut best = abs.values().to_vec();
    if abs.is_zero() {
        return ScalarField::from_values(grid, best);
    }
    let all = ball_offsets(steps);
    let mut running = vec![vec![0.0; grid.len()]];
    let mut start = 0;
    for i in 0..=steps {
        let r2 = (i * i) as isize;
        let end = start + all[start..].iter().take_while(|o| o[0] * o[0] + o[1] * o[1] + o[2] * o[2] <= r2).count();
        if end > start {
            let shell = &all[start..end];
            let ones = vec![1.0; shell.len()];
            // average over the ball: x + o for o in the ball, i.e. src(x - (-o))
            let neg: Vec<Offset> = shell.iter().map(|o| [-o[0], -o[1], -o[2]]).collect();
            accumulate(&abs, &neg, &[&ones], 0, &mut running);
            let count = end as f64;
            for (b, &s) in best.iter_mut().zip(&running[0]) {
                *b = b.max(s / count);
            }
        }
        start = end;
    }
    ScalarField::from_values(grid, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_offsets(0).len(), 1);
        assert_eq!(ball_offsets(1).len(), 7);
        assert_eq!(ball_offsets(2).len(), 33);
    }

    #[test]
    fn zero_and_constant_fields() {
        let g = HalfSpaceGrid::cubic(9, 1.0).unwrap();
        let z = maximal_function(&ScalarField::zeros(g), 2.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let one = ScalarField::from_fn(g, |_| 1.0);
        let m = maximal_function(&one, 2.0).unwrap();
        assert!((m.at(4, 4, 4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_of_one_node() {
        let g = HalfSpaceGrid::cubic(9, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| if x == [4.0, 4.0, 4.0] { 1.0 } else { 0.0 });
        let m = maximal_function(&f, 1.0).unwrap();
        assert_eq!(m.at(4, 4, 4), 1.0);
        assert!((m.at(5, 4, 4) - 1.0 / 7.0).abs() < 1e-15);
        let m2 = maximal_function(&f, 3.0).unwrap();
        // radius-1 ball around the neighbor still gives the largest average
        assert!((m2.at(5, 4, 4) - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_radius() {
        let g = HalfSpaceGrid::cubic(5, 0.5).unwrap();
        assert!(matches!(
            maximal_function(&ScalarField::zeros(g), 0.25),
            Err(LabError::InvalidRadius { .. })
        ));
    }

    #[test]
    fn dominates_pointwise() {
        let g = HalfSpaceGrid::cubic(8, 0.5).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 1.3).sin() * x[2] - x[1]);
        let m = maximal_function(&f, 1.0).unwrap();
        for (mv, fv) in m.values().iter().zip(f.values()) {
            assert!(*mv >= fv.abs() / 7.0);
            assert!(*mv >= fv.abs());
        }
    }
}
