//! Direct stencil summation on the zero-extended, tangentially periodic grid.
//!
//! Output layers are independent jobs. Within a node the terms are always
//! added in stencil order, so the result does not depend on the thread count.

use rayon::prelude::*;

use crate::field::{HalfSpaceGrid, ScalarField};

/// Integer node offset `(a, b, c)`.
pub type Offset = [isize; 3];

/// `out[ch](x) += Σ_m weights[ch][m] · src(x - offsets[m] - shift3 e3)`.
pub(crate) fn accumulate(
    src: &ScalarField,
    offsets: &[Offset],
    weights: &[&[f64]],
    shift3: isize,
    out: &mut [Vec<f64>],
) {
    let grid = *src.grid();
    assert_eq!(weights.len(), out.len());
    for w in weights {
        assert_eq!(w.len(), offsets.len());
    }
    if src.is_zero() {
        return;
    }
    let layer = grid.layer_len();
    let n3 = grid.n3();
    let mut per_layer: Vec<Vec<&mut [f64]>> = (0..n3).map(|_| Vec::with_capacity(out.len())).collect();
    for ch in out.iter_mut() {
        assert_eq!(ch.len(), grid.len());
        for (k, chunk) in ch.chunks_mut(layer).enumerate() {
            per_layer[k].push(chunk);
        }
    }
    let values = src.values();
    let flat = layer_constant(values, layer);
    per_layer.into_par_iter().enumerate().for_each(|(k, mut outs)| {
        if let Some(consts) = &flat {
            if outs.iter().all(|o| is_constant(o)) {
                // Same terms in the same order as the general path, evaluated once per layer.
                for (ch, out_layer) in outs.iter_mut().enumerate() {
                    let mut acc = out_layer[0];
                    for (m, off) in offsets.iter().enumerate() {
                        let ks = k as isize - off[2] - shift3;
                        if ks >= 0 && ks < n3 as isize {
                            acc += weights[ch][m] * consts[ks as usize];
                        }
                    }
                    out_layer.fill(acc);
                }
                return;
            }
        }
        for (m, off) in offsets.iter().enumerate() {
            let ks = k as isize - off[2] - shift3;
            if ks < 0 || ks >= n3 as isize {
                continue;
            }
            let src_layer = &values[ks as usize * layer..(ks as usize + 1) * layer];
            for (ch, out_layer) in outs.iter_mut().enumerate() {
                shifted_axpy(&grid, weights[ch][m], src_layer, off[0], off[1], out_layer);
            }
        }
    });
}

fn is_constant(layer: &[f64]) -> bool {
    layer.iter().all(|&x| x.to_bits() == layer[0].to_bits())
}

/// Per-layer values when every layer of `values` is constant.
fn layer_constant(values: &[f64], layer: usize) -> Option<Vec<f64>> {
    values.chunks(layer).map(|l| is_constant(l).then_some(l[0])).collect()
}

/// `out(i, j) += w · src(i - a, j - b)` on one periodic layer.
#[inline]
pub(crate) fn shifted_axpy(grid: &HalfSpaceGrid, w: f64, src: &[f64], a: isize, b: isize, out: &mut [f64]) {
    let n1 = grid.n1();
    let n2 = grid.n2();
    let a = a.rem_euclid(n1 as isize) as usize;
    let b = b.rem_euclid(n2 as isize) as usize;
    for j in 0..n2 {
        let js = (j + n2 - b) % n2;
        let s = &src[js * n1..(js + 1) * n1];
        let o = &mut out[j * n1..(j + 1) * n1];
        // i >= a reads s[i - a]; i < a wraps to s[i - a + n1]
        let (o_lo, o_hi) = o.split_at_mut(a);
        for (x, &y) in o_hi.iter_mut().zip(&s[..n1 - a]) {
            *x += w * y;
        }
        for (x, &y) in o_lo.iter_mut().zip(&s[n1 - a..]) {
            *x += w * y;
        }
    }
}

/// Single-channel convenience wrapper returning a new field.
pub(crate) fn convolve(src: &ScalarField, offsets: &[Offset], weights: &[f64], shift3: isize) -> ScalarField {
    let mut out = vec![vec![0.0; src.grid().len()]];
    accumulate(src, offsets, &[weights], shift3, &mut out);
    ScalarField::from_values(*src.grid(), out.pop().expect("one channel")).expect("same grid")
}
