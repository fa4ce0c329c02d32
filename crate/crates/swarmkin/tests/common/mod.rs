//! Shared helpers: random measure generators and an independent exact
//! transport oracle (successive shortest augmenting paths), plus a
//! northwest-corner enumeration that yields a certified upper bound.

use rand::Rng;
use swarmkin::measures::{DiscreteMeasure, PhasePoint};
use swarmkin::transport::GroundMetric;

const EPS: f64 = 1e-13;

pub fn random_measure<R: Rng>(rng: &mut R, max_atoms: usize, dim: usize) -> DiscreteMeasure {
    let n = rng.gen_range(1..=max_atoms);
    let atoms = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            (PhasePoint::new(x, v), rng.gen_range(0.1..1.0))
        })
        .collect();
    DiscreteMeasure::normalize(atoms).expect("generated atoms are valid")
}

/// Exact W1 by successive shortest augmenting paths on the bipartite
/// residual graph (a min-cost-flow method entirely unlike the
/// tree-basis simplex under test). Bellman-Ford handles the negative
/// residual arcs; each augmentation is optimal, so the final flow is.
pub fn oracle_w1(f: &DiscreteMeasure, g: &DiscreteMeasure, metric: GroundMetric) -> f64 {
    let n = f.len();
    let m = g.len();
    let mut supply: Vec<f64> = f.masses().to_vec();
    let mut demand: Vec<f64> = g.masses().to_vec();
    let mut flow = vec![vec![0.0f64; m]; n];
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..m).map(|j| metric.dist(f, i, g, j)).collect())
        .collect();

    for _round in 0..10_000 {
        if supply.iter().sum::<f64>() <= EPS {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..m {
                    total += flow[i][j] * cost[i][j];
                }
            }
            return total;
        }
        // shortest residual path from any row with remaining supply
        let mut dist = vec![f64::INFINITY; n + m];
        let mut prev = vec![usize::MAX; n + m];
        for (i, &s) in supply.iter().enumerate() {
            if s > EPS {
                dist[i] = 0.0;
            }
        }
        for _ in 0..(n + m) {
            let mut changed = false;
            for i in 0..n {
                for j in 0..m {
                    if dist[i] + cost[i][j] < dist[n + j] - EPS {
                        dist[n + j] = dist[i] + cost[i][j];
                        prev[n + j] = i;
                        changed = true;
                    }
                    if flow[i][j] > EPS && dist[n + j] - cost[i][j] < dist[i] - EPS {
                        dist[i] = dist[n + j] - cost[i][j];
                        prev[i] = n + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let j_end = (0..m)
            .filter(|&j| demand[j] > EPS)
            .min_by(|&a, &b| dist[n + a].partial_cmp(&dist[n + b]).unwrap())
            .expect("feasible problems always leave an open demand");

        // walk the path backwards to find the bottleneck
        let mut theta = demand[j_end];
        let mut node = n + j_end;
        loop {
            let p = prev[node];
            if node >= n {
                // arrived via forward arc p -> node
                if prev[p] == usize::MAX {
                    theta = theta.min(supply[p]);
                    break;
                }
                node = p;
            } else {
                // arrived via backward arc (undo flow[node][p - n])
                theta = theta.min(flow[node][p - n]);
                node = p;
            }
        }
        // apply the augmentation
        let mut node = n + j_end;
        loop {
            let p = prev[node];
            if node >= n {
                flow[p][node - n] += theta;
                if prev[p] == usize::MAX {
                    supply[p] -= theta;
                    break;
                }
                node = p;
            } else {
                flow[node][p - n] -= theta;
                node = p;
            }
        }
        demand[j_end] -= theta;
    }
    panic!("augmenting-path oracle failed to converge");
}

// the northwest-corner helpers are exercised from one test binary
// only; the other includes of this module see them as unused
#[allow(dead_code)]
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    fn heap(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    let k = items.len();
    heap(&mut items, k, &mut out);
    out
}

/// Northwest-corner cost for one ordering of rows and columns.
#[allow(dead_code)]
fn nw_cost(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    metric: GroundMetric,
    rows: &[usize],
    cols: &[usize],
) -> f64 {
    let mut cost = 0.0;
    let mut supply = f.mass(rows[0]);
    let mut demand = g.mass(cols[0]);
    let mut r = 0;
    let mut c = 0;
    loop {
        let moved = supply.min(demand);
        cost += moved * metric.dist(f, rows[r], g, cols[c]);
        supply -= moved;
        demand -= moved;
        let rows_done = r + 1 == rows.len();
        let cols_done = c + 1 == cols.len();
        if supply <= demand && !rows_done {
            r += 1;
            supply = f.mass(rows[r]);
        } else if !cols_done {
            c += 1;
            demand = g.mass(cols[c]);
        } else {
            break;
        }
    }
    cost
}

/// Cheapest northwest-corner solution over all row and column
/// orderings. Every such solution is feasible, so this is a certified
/// upper bound on W1 (staircase supports do not cover every vertex,
/// so it is not always tight). Only viable for small measures.
#[allow(dead_code)]
pub fn nw_upper_bound(f: &DiscreteMeasure, g: &DiscreteMeasure, metric: GroundMetric) -> f64 {
    let row_perms = permutations(f.len());
    let col_perms = permutations(g.len());
    let mut best = f64::INFINITY;
    for rows in &row_perms {
        for cols in &col_perms {
            best = best.min(nw_cost(f, g, metric, rows, cols));
        }
    }
    best
}
