#![allow(dead_code)]

use kiwi_calyx::eval::CostMatrix;
use kiwi_calyx::synth::SceneRng;

/// Minimum total over every injective assignment of the short side.
pub fn brute_force_min(c: &CostMatrix) -> f64 {
    let (rows, cols) = (c.rows(), c.cols());
    let get = |short: usize, long: usize| {
        if rows <= cols {
            c.get(short, long)
        } else {
            c.get(long, short)
        }
    };
    let (n, m) = (rows.min(cols), rows.max(cols));
    let mut used = vec![false; m];
    fn go(i: usize, n: usize, used: &mut [bool], acc: f64, get: &dyn Fn(usize, usize) -> f64, best: &mut f64) {
        if i == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, n, used, acc + get(i, j), get, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, n, &mut used, 0.0, &get, &mut best);
    if n == 0 {
        0.0
    } else {
        best
    }
}

/// Random matrix up to 6x6 with quarter-integer costs, so every partial sum
/// is exact and totals compare bit for bit.
pub fn random_matrix(rng: &mut SceneRng) -> CostMatrix {
    let rows = 1 + rng.below(6);
    let cols = 1 + rng.below(6);
    let data = (0..rows * cols).map(|_| rng.below(400) as f64 / 4.0).collect();
    CostMatrix::new(rows, cols, data).unwrap()
}
