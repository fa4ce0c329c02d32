//! Exact Wasserstein-1 distance between discrete measures.
//!
//! The primal problem is solved as a minimum-cost flow on the dense
//! bipartite atom graph with a network-simplex pivoting scheme
//! (tree basis, Bland's rule as anti-cycling fallback). The solver
//! also emits a Kantorovich dual certificate: a 1-Lipschitz potential
//! whose dual value matches the primal optimum.

use crate::measures::DiscreteMeasure;
use serde_json::json;
use thiserror::Error;

/// Default cap on the combined atom count of a single solve.
pub const DEFAULT_SIZE_CAP: usize = 4000;
/// Tolerance used when verifying plan invariants.
pub const PLAN_TOL: f64 = 1e-10;
/// Slack allowed in the pairwise Lipschitz check of a dual potential.
pub const LIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("combined atom count {0} exceeds cap {1}")]
    SizeCapExceeded(usize, usize),
    #[error("atoms of both measures must vary in a single coordinate")]
    NotOneDimensional,
    #[error("potential is not 1-Lipschitz: |phi(p)-phi(q)| = {excess:.3e} above |p-q|")]
    NotLipschitz { excess: f64 },
    #[error("pivoting iteration limit exceeded")]
    IterationLimit,
}

/// Ground metric used to price an atom pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroundMetric {
    /// Euclidean norm on the concatenated `(x, v)` vector.
    #[default]
    Phase,
    /// Euclidean norm on positions only.
    PositionOnly,
}

impl GroundMetric {
    pub fn dist(
        &self,
        f: &DiscreteMeasure,
        i: usize,
        g: &DiscreteMeasure,
        j: usize,
    ) -> f64 {
        let dx: f64 = f
            .position(i)
            .iter()
            .zip(g.position(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        match self {
            GroundMetric::PositionOnly => dx.sqrt(),
            GroundMetric::Phase => {
                let dv: f64 = f
                    .velocity(i)
                    .iter()
                    .zip(g.velocity(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (dx + dv).sqrt()
            }
        }
    }
}

/// A coupling realizing a transport cost between two measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Sparse entries `(i, j, mass)`, sorted lexicographically by `(i, j)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub metric: GroundMetric,
}

impl TransportPlan {
    /// JSON export: `{"cost": c, "entries": [[i, j, mass], ...]}`.
    pub fn to_json(&self) -> String {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(i, j, m)| json!([i, j, m]))
            .collect();
        json!({"cost": self.cost, "entries": entries}).to_string()
    }
}

/// Kantorovich potential values at the atoms of both measures.
#[derive(Debug, Clone)]
pub struct DualPotential {
    pub f_values: Vec<f64>,
    pub g_values: Vec<f64>,
}

/// Full output of an exact solve: optimal plan plus dual certificate.
#[derive(Debug, Clone)]
pub struct W1Solution {
    pub distance: f64,
    pub plan: TransportPlan,
    pub potential: DualPotential,
}

/// Exact W1 with the phase-space metric and the default size cap.
pub fn w1_exact(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
) -> Result<(f64, TransportPlan), TransportError> {
    let sol = solve(f, g, GroundMetric::Phase, DEFAULT_SIZE_CAP)?;
    Ok((sol.distance, sol.plan))
}

/// Exact W1 with an explicit ground metric.
pub fn w1_exact_with(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    metric: GroundMetric,
) -> Result<(f64, TransportPlan), TransportError> {
    let sol = solve(f, g, metric, DEFAULT_SIZE_CAP)?;
    Ok((sol.distance, sol.plan))
}

/// Solve the transportation problem exactly, returning plan and dual
/// certificate.
pub fn solve(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    metric: GroundMetric,
    size_cap: usize,
) -> Result<W1Solution, TransportError> {
    if f.dim() != g.dim() {
        return Err(TransportError::DimensionMismatch(f.dim(), g.dim()));
    }
    let n = f.len();
    let m = g.len();
    if n + m > size_cap {
        return Err(TransportError::SizeCapExceeded(n + m, size_cap));
    }

    // Dense cost matrix, row-major.
    let mut cost = vec![0.0; n * m];
    let mut max_cost: f64 = 0.0;
    for i in 0..n {
        for j in 0..m {
            let c = metric.dist(f, i, g, j);
            cost[i * m + j] = c;
            max_cost = max_cost.max(c);
        }
    }

    let mut simplex = Simplex::new(n, m, &cost, f.masses(), g.masses(), max_cost);
    simplex.run()?;

    let mut entries: Vec<(usize, usize, f64)> = simplex
        .arcs
        .iter()
        .filter(|a| a.flow > 0.0)
        .map(|a| (a.row, a.col, a.flow))
        .collect();
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let total_cost: f64 = entries.iter().map(|&(i, j, w)| w * cost[i * m + j]).sum();

    let potential = simplex.dual_certificate(g, metric, &cost);

    Ok(W1Solution {
        distance: total_cost,
        plan: TransportPlan {
            n_rows: n,
            n_cols: m,
            entries,
            cost: total_cost,
            metric,
        },
        potential,
    })
}

#[derive(Debug, Clone)]
struct BasicArc {
    row: usize,
    col: usize,
    flow: f64,
}

/// Transportation simplex on a spanning-tree basis. Sources are nodes
/// `0..n`, sinks are `n..n+m`.
struct Simplex<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    arcs: Vec<BasicArc>,
    /// node -> indices into `arcs`
    adj: Vec<Vec<usize>>,
    u: Vec<f64>,
    v: Vec<f64>,
    tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(
        n: usize,
        m: usize,
        cost: &'a [f64],
        supply: &[f64],
        demand: &[f64],
        max_cost: f64,
    ) -> Self {
        // Northwest-corner initial basis: exactly n + m - 1 arcs.
        let mut a = supply.to_vec();
        let mut b = demand.to_vec();
        let mut arcs = Vec::with_capacity(n + m - 1);
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let w = a[i].min(b[j]);
            arcs.push(BasicArc {
                row: i,
                col: j,
                flow: w,
            });
            a[i] -= w;
            b[j] -= w;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if a[i] <= b[j] && i < n - 1 {
                i += 1;
            } else if j < m - 1 {
                j += 1;
            } else {
                i += 1;
            }
        }
        let mut s = Simplex {
            n,
            m,
            cost,
            arcs,
            adj: vec![Vec::new(); n + m],
            u: vec![0.0; n],
            v: vec![0.0; m],
            tol: 1e-12 * (1.0 + max_cost),
        };
        s.rebuild_adjacency();
        s
    }

    fn rebuild_adjacency(&mut self) {
        for l in &mut self.adj {
            l.clear();
        }
        for (k, a) in self.arcs.iter().enumerate() {
            self.adj[a.row].push(k);
            self.adj[self.n + a.col].push(k);
        }
    }

    /// Node potentials from the tree, rooted at source 0 with `u[0] = 0`.
    fn update_potentials(&mut self) {
        let mut seen = vec![false; self.n + self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        self.u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &self.adj[node] {
                let a = &self.arcs[k];
                let (src, snk) = (a.row, self.n + a.col);
                let c = self.cost[a.row * self.m + a.col];
                let other = if node == src { snk } else { src };
                if !seen[other] {
                    seen[other] = true;
                    if other == snk {
                        self.v[a.col] = c - self.u[a.row];
                    } else {
                        self.u[a.row] = c - self.v[a.col];
                    }
                    stack.push(other);
                }
            }
        }
    }

    /// Entering arc: most negative reduced cost, lowest index on ties.
    /// In Bland mode, the lowest-index arc with negative reduced cost.
    fn entering(&self, bland: bool) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut best_r = -self.tol;
        for i in 0..self.n {
            for j in 0..self.m {
                let r = self.cost[i * self.m + j] - self.u[i] - self.v[j];
                if r < -self.tol {
                    if bland {
                        return Some((i, j));
                    }
                    if r < best_r {
                        best_r = r;
                        best = Some((i, j));
                    }
                }
            }
        }
        best
    }

    /// Tree path from source `p` to sink node `n + q`; returns the arc
    /// indices along the path in order starting at the sink end.
    fn path_arcs(&self, p: usize, q: usize) -> Vec<usize> {
        let target = self.n + q;
        let total = self.n + self.m;
        let mut parent_arc = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut seen = vec![false; total];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(p);
        seen[p] = true;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &k in &self.adj[node] {
                let a = &self.arcs[k];
                let other = if node == a.row { self.n + a.col } else { a.row };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = node;
                    parent_arc[other] = k;
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != p {
            path.push(parent_arc[node]);
            node = parent[node];
        }
        path
    }

    fn run(&mut self) -> Result<(), TransportError> {
        let max_iters: u64 = 1_000 + 200 * (self.n as u64 + self.m as u64).pow(2);
        let mut bland = false;
        let mut degenerate_streak = 0usize;
        self.update_potentials();
        for _ in 0..max_iters {
            let Some((p, q)) = self.entering(bland) else {
                return Ok(());
            };
            // Cycle: entering arc plus tree path from sink q back to p.
            // Arcs at even positions along the path (counted from the
            // sink end) lose flow, odd positions gain.
            let path = self.path_arcs(p, q);
            let mut theta = f64::INFINITY;
            let mut leaving: Option<usize> = None;
            for (pos, &k) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    let a = &self.arcs[k];
                    let key = a.row * self.m + a.col;
                    let better = a.flow < theta
                        || (a.flow == theta
                            && leaving
                                .map(|l| {
                                    key < self.arcs[l].row * self.m + self.arcs[l].col
                                })
                                .unwrap_or(true));
                    if better {
                        theta = a.flow;
                        leaving = Some(k);
                    }
                }
            }
            let leaving = leaving.expect("cycle always has a reverse arc");
            for (pos, &k) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    self.arcs[k].flow -= theta;
                } else {
                    self.arcs[k].flow += theta;
                }
            }
            self.arcs[leaving] = BasicArc {
                row: p,
                col: q,
                flow: theta,
            };
            self.rebuild_adjacency();
            self.update_potentials();

            if theta <= 0.0 {
                degenerate_streak += 1;
                if degenerate_streak > self.n + self.m {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
        Err(TransportError::IterationLimit)
    }

    /// Turn the simplex duals into a globally 1-Lipschitz potential by
    /// an infimal convolution against the sink atoms.
    fn dual_certificate(
        &self,
        g: &DiscreteMeasure,
        metric: GroundMetric,
        cost: &[f64],
    ) -> DualPotential {
        let f_values: Vec<f64> = (0..self.n)
            .map(|i| {
                (0..self.m)
                    .map(|j| cost[i * self.m + j] - self.v[j])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let g_values: Vec<f64> = (0..self.m)
            .map(|j| {
                (0..self.m)
                    .map(|k| metric.dist(g, j, g, k) - self.v[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        DualPotential { f_values, g_values }
    }
}

/// Dual objective `|int phi d(f - g)|` after checking the pairwise
/// 1-Lipschitz invariant across all atoms of both measures.
pub fn dual_value(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    phi: &DualPotential,
    metric: GroundMetric,
) -> Result<f64, TransportError> {
    if f.dim() != g.dim() {
        return Err(TransportError::DimensionMismatch(f.dim(), g.dim()));
    }
    assert_eq!(phi.f_values.len(), f.len());
    assert_eq!(phi.g_values.len(), g.len());
    let check = |d: f64, pa: f64, pb: f64| -> Result<(), TransportError> {
        let excess = (pa - pb).abs() - d;
        if excess > LIP_TOL {
            Err(TransportError::NotLipschitz { excess })
        } else {
            Ok(())
        }
    };
    for i in 0..f.len() {
        for j in 0..g.len() {
            check(metric.dist(f, i, g, j), phi.f_values[i], phi.g_values[j])?;
        }
    }
    for i in 0..f.len() {
        for k in i + 1..f.len() {
            check(metric.dist(f, i, f, k), phi.f_values[i], phi.f_values[k])?;
        }
    }
    for j in 0..g.len() {
        for k in j + 1..g.len() {
            check(metric.dist(g, j, g, k), phi.g_values[j], phi.g_values[k])?;
        }
    }
    let int_f: f64 = (0..f.len()).map(|i| f.mass(i) * phi.f_values[i]).sum();
    let int_g: f64 = (0..g.len()).map(|j| g.mass(j) * phi.g_values[j]).sum();
    Ok((int_f - int_g).abs())
}

/// Check the marginal and cost invariants of a plan at [`PLAN_TOL`].
pub fn verify_plan(plan: &TransportPlan, f: &DiscreteMeasure, g: &DiscreteMeasure) -> bool {
    if plan.n_rows != f.len() || plan.n_cols != g.len() {
        return false;
    }
    let mut row_sums = vec![0.0; f.len()];
    let mut col_sums = vec![0.0; g.len()];
    let mut cost = 0.0;
    for &(i, j, w) in &plan.entries {
        if i >= f.len() || j >= g.len() || w < 0.0 {
            return false;
        }
        row_sums[i] += w;
        col_sums[j] += w;
        cost += w * plan.metric.dist(f, i, g, j);
    }
    let rows_ok = row_sums
        .iter()
        .zip(f.masses())
        .all(|(s, m)| (s - m).abs() <= PLAN_TOL);
    let cols_ok = col_sums
        .iter()
        .zip(g.masses())
        .all(|(s, m)| (s - m).abs() <= PLAN_TOL);
    rows_ok && cols_ok && (cost - plan.cost).abs() <= PLAN_TOL
}

/// W1 between two weighted scalar samples via the quantile coupling.
pub fn w1_1d_scalar(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // Integral of |F_a - F_b| over the merged breakpoints.
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(a.len() + b.len());
    events.extend(a.iter().map(|&(x, m)| (x, m, 0.0)));
    events.extend(b.iter().map(|&(x, m)| (x, 0.0, m)));
    events.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut w = 0.0f64;
    let mut cf = 0.0f64;
    let mut cg = 0.0f64;
    let mut last = events[0].0;
    for (x, mf, mg) in events {
        w += (cf - cg).abs() * (x - last);
        last = x;
        cf += mf;
        cg += mg;
    }
    w
}

/// Fast 1-D path: exact W1 for measures whose atoms differ in a single
/// phase-space coordinate. Validated against [`w1_exact`].
pub fn w1_1d(f: &DiscreteMeasure, g: &DiscreteMeasure) -> Result<f64, TransportError> {
    if f.dim() != g.dim() {
        return Err(TransportError::DimensionMismatch(f.dim(), g.dim()));
    }
    let d = f.dim();
    let coord = |msr: &DiscreteMeasure, i: usize, c: usize| -> f64 {
        if c < d {
            msr.position(i)[c]
        } else {
            msr.velocity(i)[c - d]
        }
    };
    let mut varying: Option<usize> = None;
    for c in 0..2 * d {
        let reference = coord(f, 0, c);
        let varies = (0..f.len()).any(|i| coord(f, i, c) != reference)
            || (0..g.len()).any(|j| coord(g, j, c) != reference);
        if varies {
            if varying.is_some() {
                return Err(TransportError::NotOneDimensional);
            }
            varying = Some(c);
        }
    }
    let Some(c) = varying else {
        return Ok(0.0); // all atoms coincide
    };
    let a: Vec<(f64, f64)> = (0..f.len()).map(|i| (coord(f, i, c), f.mass(i))).collect();
    let b: Vec<(f64, f64)> = (0..g.len()).map(|j| (coord(g, j, c), g.mass(j))).collect();
    Ok(w1_1d_scalar(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::PhasePoint;
    use approx::assert_abs_diff_eq;

    fn measure_1d(atoms: &[(f64, f64, f64)]) -> DiscreteMeasure {
        // (x, v, mass)
        DiscreteMeasure::normalize(
            atoms
                .iter()
                .map(|&(x, v, m)| (PhasePoint::new(vec![x], vec![v]), m))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_measures_have_zero_distance() {
        let f = measure_1d(&[(0.0, 0.0, 0.5), (2.0, 1.0, 0.5)]);
        let (d, plan) = w1_exact(&f, &f).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-12);
        assert!(verify_plan(&plan, &f, &f));
    }

    #[test]
    fn two_diracs_distance_is_euclidean() {
        let f = measure_1d(&[(0.0, 0.0, 1.0)]);
        let g = measure_1d(&[(3.0, 4.0, 1.0)]);
        let (d, _) = w1_exact(&f, &g).unwrap();
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn split_mass_to_single_atom() {
        // f = 1/2 d_0 + 1/2 d_2, g = d_1: brute force over the 2x1
        // simplex gives 1.0.
        let f = measure_1d(&[(0.0, 0.0, 0.5), (2.0, 0.0, 0.5)]);
        let g = measure_1d(&[(1.0, 0.0, 1.0)]);
        let (d, plan) = w1_exact(&f, &g).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        assert!(verify_plan(&plan, &f, &g));
        assert!(plan.entries.len() <= f.len() + g.len() - 1);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = measure_1d(&[(0.0, 0.0, 1.0)]);
        let g = DiscreteMeasure::new(vec![(
            PhasePoint::new(vec![0.0, 0.0], vec![0.0, 0.0]),
            1.0,
        )])
        .unwrap();
        assert!(matches!(
            w1_exact(&f, &g),
            Err(TransportError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn size_cap_enforced() {
        let f = measure_1d(&[(0.0, 0.0, 1.0)]);
        assert!(matches!(
            solve(&f, &f, GroundMetric::Phase, 1),
            Err(TransportError::SizeCapExceeded(2, 1))
        ));
    }

    #[test]
    fn w1_1d_sorted_pairing() {
        let f = measure_1d(&[(0.0, 0.0, 0.5), (2.0, 0.0, 0.5)]);
        let g = measure_1d(&[(1.0, 0.0, 0.5), (3.0, 0.0, 0.5)]);
        assert_abs_diff_eq!(w1_1d(&f, &g).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w1_1d(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn w1_1d_rejects_two_varying_coordinates() {
        let f = measure_1d(&[(0.0, 0.0, 0.5), (1.0, 1.0, 0.5)]);
        let g = measure_1d(&[(0.5, 0.0, 1.0)]);
        assert_eq!(w1_1d(&f, &g), Err(TransportError::NotOneDimensional));
    }

    #[test]
    fn dual_value_examples() {
        let f = measure_1d(&[(0.0, 0.0, 1.0)]);
        let g = measure_1d(&[(1.0, 0.0, 1.0)]);
        // phi == 0
        let zero = DualPotential {
            f_values: vec![0.0],
            g_values: vec![0.0],
        };
        assert_abs_diff_eq!(dual_value(&f, &g, &zero, GroundMetric::Phase).unwrap(), 0.0);
        // phi(p) = x is optimal for two diracs
        let opt = DualPotential {
            f_values: vec![0.0],
            g_values: vec![1.0],
        };
        assert_abs_diff_eq!(dual_value(&f, &g, &opt, GroundMetric::Phase).unwrap(), 1.0);
        // slope 2 violates the Lipschitz bound
        let bad = DualPotential {
            f_values: vec![0.0],
            g_values: vec![2.0],
        };
        assert!(matches!(
            dual_value(&f, &g, &bad, GroundMetric::Phase),
            Err(TransportError::NotLipschitz { .. })
        ));
    }

    #[test]
    fn verify_plan_detects_tampering() {
        let f = measure_1d(&[(0.0, 0.0, 0.5), (2.0, 0.0, 0.5)]);
        let g = measure_1d(&[(1.0, 0.0, 1.0)]);
        let (_, plan) = w1_exact(&f, &g).unwrap();
        assert!(verify_plan(&plan, &f, &g));

        let mut broken = plan.clone();
        broken.entries[0].2 = 0.0;
        assert!(!verify_plan(&broken, &f, &g));

        let mut off_cost = plan.clone();
        off_cost.cost += 1e-3;
        assert!(!verify_plan(&off_cost, &f, &g));
    }

    #[test]
    fn plan_json_is_sorted_and_has_cost() {
        let f = measure_1d(&[(0.0, 0.0, 0.5), (2.0, 0.0, 0.5)]);
        let g = measure_1d(&[(1.0, 0.0, 0.5), (3.0, 0.0, 0.5)]);
        let (_, plan) = w1_exact(&f, &g).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        assert!(parsed["cost"].is_number());
        let entries = parsed["entries"].as_array().unwrap();
        let keys: Vec<(u64, u64)> = entries
            .iter()
            .map(|e| (e[0].as_u64().unwrap(), e[1].as_u64().unwrap()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn solver_emits_strong_dual_certificate() {
        let f = measure_1d(&[(0.0, 0.5, 0.3), (2.0, -1.0, 0.3), (5.0, 0.0, 0.4)]);
        let g = measure_1d(&[(1.0, 0.0, 0.6), (4.0, 1.0, 0.4)]);
        let sol = solve(&f, &g, GroundMetric::Phase, DEFAULT_SIZE_CAP).unwrap();
        let dv = dual_value(&f, &g, &sol.potential, GroundMetric::Phase).unwrap();
        assert!(dv <= sol.distance + 1e-9);
        assert!(dv >= sol.distance - 1e-6);
    }
}
