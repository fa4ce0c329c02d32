//! Deterministic low-discrepancy sequences used for sampling without
//! Monte-Carlo noise.

/// Van der Corput radical inverse of `i` in the given base.
pub(crate) fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

pub(crate) const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// The k-th point of the Halton sequence in `[0,1)^dim` (1-based k to
/// avoid the degenerate origin point).
pub(crate) fn halton_point(k: u64, dim: usize) -> Vec<f64> {
    (0..dim).map(|c| halton(k + 1, PRIMES[c])).collect()
}

/// Deterministic points in the closed ball of radius `r` in `R^dim`:
/// Halton points in the cube, rejecting those outside the ball.
pub(crate) fn ball_points(count: usize, dim: usize, r: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        let u = halton_point(k, dim);
        let x: Vec<f64> = u.iter().map(|&c| (2.0 * c - 1.0) * r).collect();
        if x.iter().map(|c| c * c).sum::<f64>().sqrt() <= r {
            out.push(x);
        }
        k += 1;
    }
    out
}
