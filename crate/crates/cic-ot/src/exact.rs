//! Exact discrete Kantorovich solver: a transportation simplex on the dense
//! squared-Euclidean cost matrix, plus the barycentric projection of a plan.

use crate::error::{Error, Result};
use crate::measure::{squared_distance, EmpiricalMeasure};

/// A nonnegative coupling between two weight vectors.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    coupling: Vec<f64>, // row-major, n x m
    n: usize,
    m: usize,
    source_weights: Vec<f64>,
    target_weights: Vec<f64>,
}

impl TransportPlan {
    pub(crate) fn from_parts(
        coupling: Vec<f64>,
        source_weights: Vec<f64>,
        target_weights: Vec<f64>,
    ) -> Self {
        let n = source_weights.len();
        let m = target_weights.len();
        debug_assert_eq!(coupling.len(), n * m);
        Self {
            coupling,
            n,
            m,
            source_weights,
            target_weights,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.m + j]
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.m..(i + 1) * self.m]
    }

    pub fn source_weights(&self) -> &[f64] {
        &self.source_weights
    }

    pub fn target_weights(&self) -> &[f64] {
        &self.target_weights
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.m];
        for i in 0..self.n {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// Largest absolute deviation of a row or column sum from its
    /// prescribed marginal.
    pub fn max_marginal_violation(&self) -> f64 {
        let row = self
            .row_sums()
            .iter()
            .zip(&self.source_weights)
            .map(|(s, w)| (s - w).abs())
            .fold(0.0, f64::max);
        let col = self
            .col_sums()
            .iter()
            .zip(&self.target_weights)
            .map(|(s, w)| (s - w).abs())
            .fold(0.0, f64::max);
        row.max(col)
    }
}

/// Dense squared-Euclidean cost matrix between two point sets.
pub(crate) fn cost_matrix(source: &EmpiricalMeasure, target: &EmpiricalMeasure) -> Vec<f64> {
    let m = target.len();
    let mut cost = vec![0.0; source.len() * m];
    for (i, x) in source.points().iter().enumerate() {
        let row = &mut cost[i * m..(i + 1) * m];
        for (c, y) in row.iter_mut().zip(target.points()) {
            *c = squared_distance(x, y);
        }
    }
    cost
}

/// Solves the discrete Kantorovich problem with squared-Euclidean cost.
///
/// Returns an optimal basic feasible solution of the transportation polytope
/// and its cost. Deterministic for a fixed input ordering.
pub fn exact_ot_plan(
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
) -> Result<(TransportPlan, f64)> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            left: source.dim(),
            right: target.dim(),
        });
    }
    let cost = cost_matrix(source, target);
    let coupling = solve_transportation(source.weights(), target.weights(), &cost)?;
    let total: f64 = coupling.iter().zip(&cost).map(|(p, c)| p * c).sum();
    Ok((
        TransportPlan::from_parts(coupling, source.weights().to_vec(), target.weights().to_vec()),
        total,
    ))
}

/// Exact OT cost; the evaluation metric used throughout.
pub fn ot_distance(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    exact_ot_plan(a, b).map(|(_, cost)| cost)
}

/// Barycentric projection of a plan: row `i` maps to the plan-weighted
/// average of the target atoms.
pub fn barycentric_map(plan: &TransportPlan, target: &EmpiricalMeasure) -> Result<Vec<Vec<f64>>> {
    if plan.n_cols() != target.len() {
        return Err(Error::invalid(format!(
            "plan has {} columns but target has {} atoms",
            plan.n_cols(),
            target.len()
        )));
    }
    let d = target.dim();
    let mut out = Vec::with_capacity(plan.n_rows());
    for i in 0..plan.n_rows() {
        let row = plan.row(i);
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(Error::invalid(format!("zero row sum at row {i}")));
        }
        let mut p = vec![0.0; d];
        for (pi_ij, y) in row.iter().zip(target.points()) {
            if *pi_ij != 0.0 {
                for (acc, &yc) in p.iter_mut().zip(y) {
                    *acc += pi_ij * yc;
                }
            }
        }
        for acc in &mut p {
            *acc /= mass;
        }
        out.push(p);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Transportation simplex
// ---------------------------------------------------------------------------

const ROOT: u32 = 0;

struct Simplex<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    /// Basis tree adjacency: for each node, (neighbor, flow on the arc).
    /// Node ids: source i -> i, sink j -> n + j.
    adj: Vec<Vec<(u32, f64)>>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    potential: Vec<f64>,
    // scratch
    queue: Vec<u32>,
    path_a: Vec<(u32, u32)>,
    path_b: Vec<(u32, u32)>,
}

impl<'a> Simplex<'a> {
    fn new(n: usize, m: usize, cost: &'a [f64]) -> Self {
        let nodes = n + m;
        Simplex {
            n,
            m,
            cost,
            adj: vec![Vec::new(); nodes],
            parent: vec![u32::MAX; nodes],
            depth: vec![0; nodes],
            potential: vec![0.0; nodes],
            queue: Vec::with_capacity(nodes),
            path_a: Vec::new(),
            path_b: Vec::new(),
        }
    }

    fn cell(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.m + j]
    }

    /// North-west-corner initial basis: exactly n + m - 1 staircase cells.
    fn init_northwest(&mut self, a: &[f64], b: &[f64]) {
        let (n, m) = (self.n, self.m);
        let mut i = 0usize;
        let mut j = 0usize;
        let mut ra = a[0];
        let mut rb = b[0];
        loop {
            let t = ra.min(rb).max(0.0);
            self.add_arc(i as u32, (n + j) as u32, t);
            ra -= t;
            rb -= t;
            if i + 1 == n && j + 1 == m {
                break;
            }
            if (ra <= rb && i + 1 < n) || j + 1 == m {
                i += 1;
                ra = a[i];
            } else {
                j += 1;
                rb = b[j];
            }
        }
        let _ = m;
    }

    fn add_arc(&mut self, u: u32, v: u32, flow: f64) {
        self.adj[u as usize].push((v, flow));
        self.adj[v as usize].push((u, flow));
    }

    fn remove_arc(&mut self, u: u32, v: u32) {
        let lu = &mut self.adj[u as usize];
        let pos = lu.iter().position(|&(x, _)| x == v).unwrap();
        lu.swap_remove(pos);
        let lv = &mut self.adj[v as usize];
        let pos = lv.iter().position(|&(x, _)| x == u).unwrap();
        lv.swap_remove(pos);
    }

    fn arc_flow(&self, u: u32, v: u32) -> f64 {
        self.adj[u as usize]
            .iter()
            .find(|&&(x, _)| x == v)
            .map(|&(_, f)| f)
            .unwrap()
    }

    fn add_to_arc_flow(&mut self, u: u32, v: u32, delta: f64) {
        for &mut (x, ref mut f) in &mut self.adj[u as usize] {
            if x == v {
                *f += delta;
            }
        }
        for &mut (x, ref mut f) in &mut self.adj[v as usize] {
            if x == u {
                *f += delta;
            }
        }
    }

    /// Recomputes parent pointers, depths and potentials by BFS from the
    /// root. Potentials satisfy u_i + v_j = c_ij on every basis arc.
    fn rebuild(&mut self) {
        self.queue.clear();
        self.queue.push(ROOT);
        self.parent[ROOT as usize] = u32::MAX;
        self.depth[ROOT as usize] = 0;
        self.potential[ROOT as usize] = 0.0;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let ui = u as usize;
            for k in 0..self.adj[ui].len() {
                let (v, _) = self.adj[ui][k];
                if v != ROOT && self.parent[v as usize] == u32::MAX {
                    self.parent[v as usize] = u;
                    self.depth[v as usize] = self.depth[ui] + 1;
                    let (src, sink) = if (u as usize) < self.n {
                        (u as usize, v as usize - self.n)
                    } else {
                        (v as usize, u as usize - self.n)
                    };
                    self.potential[v as usize] = self.cell(src, sink) - self.potential[ui];
                    self.queue.push(v);
                }
            }
        }
        // Mark visited-state for the next rebuild by resetting parents lazily:
        // every node except the root got a parent this pass, so clear via the
        // queue on entry instead.
    }

    fn reset_parents(&mut self) {
        for p in &mut self.parent {
            *p = u32::MAX;
        }
    }

    /// Flat cell index of the tree arc between a node and its parent.
    fn arc_cell(&self, child: u32, parent: u32) -> usize {
        let (src, sink) = if (child as usize) < self.n {
            (child as usize, parent as usize - self.n)
        } else {
            (parent as usize, child as usize - self.n)
        };
        src * self.m + sink
    }

    /// Performs one pivot on the entering cell; returns false if the pivot
    /// was degenerate (zero mass moved).
    fn pivot(&mut self, ei: usize, ej: usize) -> bool {
        let a = ei as u32;
        let b = (self.n + ej) as u32;

        // Collect the tree paths from both endpoints up to their LCA.
        self.path_a.clear();
        self.path_b.clear();
        let (mut x, mut y) = (a, b);
        while self.depth[x as usize] > self.depth[y as usize] {
            let p = self.parent[x as usize];
            self.path_a.push((x, p));
            x = p;
        }
        while self.depth[y as usize] > self.depth[x as usize] {
            let p = self.parent[y as usize];
            self.path_b.push((y, p));
            y = p;
        }
        while x != y {
            let px = self.parent[x as usize];
            self.path_a.push((x, px));
            x = px;
            let py = self.parent[y as usize];
            self.path_b.push((y, py));
            y = py;
        }

        // Cells along both paths alternate -, +, -, ... starting at the arcs
        // adjacent to the entering cell. Find theta = min flow on "-" arcs,
        // leaving arc tie-broken by lowest flat cell index (Bland).
        let mut theta = f64::INFINITY;
        let mut leaving: Option<(u32, u32)> = None;
        let mut leaving_cell = usize::MAX;
        for (path_idx, path) in [&self.path_a, &self.path_b].into_iter().enumerate() {
            let _ = path_idx;
            for (k, &(u, v)) in path.iter().enumerate() {
                if k % 2 == 0 {
                    let f = self.arc_flow(u, v);
                    let cell = self.arc_cell(u, v);
                    if f < theta - 1e-15 || (f <= theta + 1e-15 && cell < leaving_cell) {
                        theta = f.min(theta);
                        leaving = Some((u, v));
                        leaving_cell = cell;
                    }
                }
            }
        }
        let (lu, lv) = leaving.expect("cycle must contain at least one minus arc");
        let theta = theta.max(0.0);

        // Apply the flow change around the cycle.
        for path in [
            std::mem::take(&mut self.path_a),
            std::mem::take(&mut self.path_b),
        ] {
            for (k, &(u, v)) in path.iter().enumerate() {
                let delta = if k % 2 == 0 { -theta } else { theta };
                self.add_to_arc_flow(u, v, delta);
            }
            if self.path_a.is_empty() {
                self.path_a = path;
            } else {
                self.path_b = path;
            }
        }

        self.remove_arc(lu, lv);
        self.add_arc(a, b, theta);
        theta > 0.0
    }

    fn solve(&mut self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let (n, m) = (self.n, self.m);

        // Uniform marginals make every north-west basis maximally degenerate
        // and the simplex stalls. Perturb the supplies by tiny distinct
        // amounts so tree flows are generically nonzero, then recover the
        // flows for the true marginals on the final optimal tree (optimality
        // of a tree depends on its potentials, not its flows).
        let delta = 1e-13 / n as f64;
        let pa: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, &w)| w + delta * (i + 1) as f64)
            .collect();
        let extra = delta * (n * (n + 1) / 2) as f64;
        let mut pb = b.to_vec();
        pb[m - 1] += extra;

        self.init_northwest(&pa, &pb);
        self.reset_parents();
        self.rebuild();

        let total_cells = n * m;
        let block = ((total_cells as f64).sqrt().ceil() as usize)
            .max(64)
            .min(total_cells);
        let max_cost = self.cost.iter().cloned().fold(0.0, f64::max);
        let eps = 1e-12 * (1.0 + max_cost);

        let mut start = 0usize;
        let mut degenerate_run = 0usize;
        let bland_threshold = 16 * (n + m);
        let max_pivots: u64 = 2_000_000_000 / (n + m).max(1) as u64 + 1_000_000;
        let mut pivots: u64 = 0;

        loop {
            // Pricing: block search for the most negative reduced cost,
            // falling back to Bland's rule (first eligible by index) after a
            // long degenerate run.
            let bland = degenerate_run > bland_threshold;
            let mut best_cell = usize::MAX;
            let mut best_red = -eps;
            if bland {
                // Bland's rule: lowest-index eligible cell, scanned from a
                // fixed origin so the anti-cycling argument applies.
                for idx in 0..total_cells {
                    let i = idx / m;
                    let j = idx - i * m;
                    let red = self.cost[idx] - self.potential[i] - self.potential[n + j];
                    if red < -eps {
                        best_cell = idx;
                        break;
                    }
                }
            } else {
                let mut scanned = 0usize;
                let mut idx = start;
                while scanned < total_cells {
                    let chunk = block.min(total_cells - scanned);
                    for _ in 0..chunk {
                        let i = idx / m;
                        let j = idx - i * m;
                        let red =
                            self.cost[idx] - self.potential[i] - self.potential[n + j];
                        if red < best_red {
                            best_red = red;
                            best_cell = idx;
                        }
                        idx += 1;
                        if idx == total_cells {
                            idx = 0;
                        }
                    }
                    scanned += chunk;
                    if best_cell != usize::MAX {
                        start = idx;
                        break;
                    }
                }
            }
            if best_cell == usize::MAX {
                break; // optimal
            }

            let ei = best_cell / m;
            let ej = best_cell - ei * m;
            let nondegenerate = self.pivot(ei, ej);
            if nondegenerate {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            self.reset_parents();
            self.rebuild();

            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::invalid(
                    "transportation simplex exceeded its pivot budget",
                ));
            }
        }

        // Recover the flows of the true marginals on the optimal tree:
        // process nodes leaves-first, each non-root node sends its residual
        // mass up the arc to its parent. Perturbation residue can leave a
        // flow a hair negative; clamp it.
        let mut residual: Vec<f64> = (0..n + m)
            .map(|u| if u < n { a[u] } else { b[u - n] })
            .collect();
        let mut plan = vec![0.0; total_cells];
        for &node in self.queue.iter().skip(1).rev() {
            let p = self.parent[node as usize];
            let f = residual[node as usize];
            residual[p as usize] -= f;
            if f > 0.0 {
                plan[self.arc_cell(node, p)] = f;
            }
        }
        Ok(plan)
    }
}

/// Solves the balanced transportation problem for supplies `a`, demands `b`
/// and dense row-major `cost`; returns the optimal coupling.
pub(crate) fn solve_transportation(a: &[f64], b: &[f64], cost: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let m = b.len();
    if n == 0 || m == 0 {
        return Err(Error::EmptyMeasure);
    }
    debug_assert_eq!(cost.len(), n * m);
    let mut simplex = Simplex::new(n, m, cost);
    simplex.solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform(points: &[&[f64]]) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identical_measures_cost_zero() {
        let a = uniform(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, -1.0]]);
        let (plan, cost) = exact_ot_plan(&a, &a).unwrap();
        assert_abs_diff_eq!(cost, 0.0, epsilon = 1e-12);
        assert!(plan.max_marginal_violation() < 1e-12);
    }

    #[test]
    fn vertical_matching() {
        let src = uniform(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let tgt = uniform(&[&[0.0, 1.0], &[1.0, 1.0]]);
        let (_, cost) = exact_ot_plan(&src, &tgt).unwrap();
        assert_abs_diff_eq!(cost, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_source_split_target() {
        let src = EmpiricalMeasure::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let tgt = EmpiricalMeasure::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let (plan, cost) = exact_ot_plan(&src, &tgt).unwrap();
        assert_abs_diff_eq!(cost, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.entry(0, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.entry(0, 1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = uniform(&[&[0.0, 0.0]]);
        let b = uniform(&[&[0.0]]);
        assert!(matches!(
            exact_ot_plan(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn translation_identity() {
        let a = uniform(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.5]]);
        let v = [3.0, -4.0];
        let b = a.translate(&v).unwrap();
        let d = ot_distance(&a, &b).unwrap();
        assert_abs_diff_eq!(d, 25.0, epsilon = 1e-9);
    }

    #[test]
    fn barycentric_permutation_plan_recovers_targets() {
        let src = uniform(&[&[0.0, 0.0], &[5.0, 5.0]]);
        let tgt = uniform(&[&[0.1, 0.0], &[5.0, 5.2]]);
        let (plan, _) = exact_ot_plan(&src, &tgt).unwrap();
        let images = barycentric_map(&plan, &tgt).unwrap();
        assert_abs_diff_eq!(images[0][0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(images[1][1], 5.2, epsilon = 1e-12);
    }

    #[test]
    fn barycentric_uniform_plan_averages() {
        let tgt = uniform(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let plan = TransportPlan::from_parts(
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
        );
        let images = barycentric_map(&plan, &tgt).unwrap();
        for img in images {
            assert_abs_diff_eq!(img[0], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(img[1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn barycentric_zero_row_rejected() {
        let tgt = uniform(&[&[0.0], &[1.0]]);
        let plan = TransportPlan::from_parts(vec![0.0, 0.0, 0.5, 0.5], vec![0.0, 1.0], vec![0.5, 0.5]);
        assert!(barycentric_map(&plan, &tgt).is_err());
    }
}
