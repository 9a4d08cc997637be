//! Leaf orderings for binary trees over lattices.

use crate::error::{arg, Result};

/// Site order of a binary tree over a 1D chain.
pub fn chain_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Leaf order for an `lx x ly` lattice (site `r * lx + c`) built by
/// recursively halving the longer side, columns first on a tie. Neighboring
/// leaf pairs are vertical dominoes.
pub fn domino_quadtree(lx: usize, ly: usize) -> Result<Vec<usize>> {
    if !lx.is_power_of_two() || !ly.is_power_of_two() || lx * ly < 2 {
        return arg(format!("{lx}x{ly} lattice needs power-of-two sides and at least 2 sites"));
    }
    let mut out = Vec::with_capacity(lx * ly);
    split(0, ly, 0, lx, lx, &mut out);
    Ok(out)
}

fn split(r0: usize, r1: usize, c0: usize, c1: usize, lx: usize, out: &mut Vec<usize>) {
    let (h, w) = (r1 - r0, c1 - c0);
    if h * w == 1 {
        out.push(r0 * lx + c0);
    } else if h > w {
        let m = r0 + h / 2;
        split(r0, m, c0, c1, lx, out);
        split(m, r1, c0, c1, lx, out);
    } else {
        let m = c0 + w / 2;
        split(r0, r1, c0, m, lx, out);
        split(r0, r1, m, c1, lx, out);
    }
}
