use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

/// Latin-hypercube sample of `n` points in the box `ranges`, row-major
/// `n x ranges.len()`.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, ranges: &[(f64, f64)], rng: &mut R) -> Vec<f64> {
    let d = ranges.len();
    let mut out = alloc::vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for (j, &(lo, hi)) in ranges.iter().enumerate() {
        perm.shuffle(rng);
        for (i, &cell) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            out[i * d + j] = lo + (hi - lo) * (cell as f64 + u) / n as f64;
        }
    }
    out
}

/// One-dimensional stratified sample: one uniform draw per equal cell, in
/// ascending order.
pub fn stratified<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let u: f64 = rng.random();
            lo + (hi - lo) * (i as f64 + u) / n as f64
        })
        .collect()
}
