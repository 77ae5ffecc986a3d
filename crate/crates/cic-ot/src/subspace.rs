//! Robust one-dimensional subspace construction: uniform direction sampling
//! on the sphere, projection of measures, argmax selection over a finite
//! direction set, and the first-order max-sliced ascent variant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::one_d::{ot_cost_sorted, StepCdf};

const UNIT_NORM_TOL: f64 = 1e-12;

/// Recommended number of projection directions.
pub const DEFAULT_K: usize = 10;

/// A unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    vector: Vec<f64>,
}

impl Direction {
    /// Normalizes `vector` to the unit sphere.
    pub fn new(vector: Vec<f64>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::invalid("direction must have dimension >= 1"));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < UNIT_NORM_TOL {
            return Err(Error::invalid("direction vector has near-zero norm"));
        }
        Ok(Self {
            vector: vector.into_iter().map(|x| x / norm).collect(),
        })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn dot(&self, point: &[f64]) -> f64 {
        self.vector.iter().zip(point).map(|(w, x)| w * x).sum()
    }
}

/// A finite set of projection directions with the seed that produced it.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    seed: u64,
}

impl DirectionSet {
    pub fn new(directions: Vec<Direction>, seed: u64) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("direction set must be non-empty"));
        }
        Ok(Self { directions, seed })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Samples `k` i.i.d. directions uniform on the unit sphere `S^{d-1}` by
/// normalizing standard-Gaussian draws. Deterministic for a fixed seed.
pub fn sample_directions(k: usize, d: usize, seed: u64) -> Result<DirectionSet> {
    if k == 0 || d == 0 {
        return Err(Error::invalid("k and d must both be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut directions = Vec::with_capacity(k);
    while directions.len() < k {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        // Degenerate draws are redrawn.
        if let Ok(dir) = Direction::new(v) {
            directions.push(dir);
        }
    }
    DirectionSet::new(directions, seed)
}

/// Projects every atom onto `w`, keeping weights.
pub fn project(m: &EmpiricalMeasure, w: &Direction) -> Result<EmpiricalMeasure> {
    if m.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: m.dim(),
            right: w.dim(),
        });
    }
    EmpiricalMeasure::new(
        m.points().iter().map(|p| vec![w.dot(p)]).collect(),
        m.weights().to_vec(),
    )
}

/// Result of the argmax selection over a direction set.
#[derive(Debug, Clone)]
pub struct RotSelection {
    pub best: Direction,
    pub best_index: usize,
    pub cost: f64,
    pub all_costs: Vec<f64>,
}

/// Evaluates the 1D transport cost along every direction and returns the
/// argmax (ties broken by lowest index). Projections are computed into
/// reused scalar buffers so the per-direction work is two dot-product
/// passes, two sorts and the merged-breakpoint cost walk.
pub fn rot_select(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    dirs: &DirectionSet,
) -> Result<RotSelection> {
    let d = mu.dim();
    if nu.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: nu.dim(),
        });
    }
    for dir in dirs.directions() {
        if dir.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: dir.dim(),
            });
        }
    }
    let mut proj_mu = vec![0.0; mu.len()];
    let mut proj_nu = vec![0.0; nu.len()];
    let mut all_costs = Vec::with_capacity(dirs.len());
    let mut best_index = 0;
    let mut best_cost = f64::NEG_INFINITY;
    for (idx, dir) in dirs.directions().iter().enumerate() {
        for (out, p) in proj_mu.iter_mut().zip(mu.points()) {
            *out = dir.dot(p);
        }
        for (out, p) in proj_nu.iter_mut().zip(nu.points()) {
            *out = dir.dot(p);
        }
        let src = StepCdf::from_scalars(&proj_mu, mu.weights());
        let tgt = StepCdf::from_scalars(&proj_nu, nu.weights());
        let cost = ot_cost_sorted(&src, &tgt)?;
        if cost > best_cost {
            best_cost = cost;
            best_index = idx;
        }
        all_costs.push(cost);
    }
    Ok(RotSelection {
        best: dirs.directions()[best_index].clone(),
        best_index,
        cost: best_cost,
        all_costs,
    })
}

/// Adam hyperparameters for [`max_sliced_ascent`].
#[derive(Debug, Clone)]
pub struct AscentConfig {
    pub step: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Maximizes the projected 1D transport cost over the sphere by first-order
/// adaptive-moment ascent, reprojecting onto the sphere after every update.
/// The objective is nonsmooth (the monotone matching changes with the
/// direction) and momentum can carry the iterate through low regions, so the
/// best direction visited is returned rather than the last one.
///
/// Requires equal-size uniform-weight measures: the gradient is formed from
/// the monotone matching of the projected atoms.
pub fn max_sliced_ascent(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    iters: usize,
    config: &AscentConfig,
    seed: u64,
) -> Result<(Direction, f64)> {
    if iters == 0 {
        return Err(Error::invalid("iters must be >= 1"));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    if mu.len() != nu.len() {
        return Err(Error::invalid(
            "max-sliced ascent requires equal-size measures",
        ));
    }
    let n = mu.len();
    let d = mu.dim();
    let w = 1.0 / n as f64;

    let mut omega = sample_directions(1, d, seed)?.directions()[0].clone();
    let mut m1 = vec![0.0; d];
    let mut m2 = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut order_s: Vec<usize> = (0..n).collect();
    let mut order_t: Vec<usize> = (0..n).collect();
    let mut best = omega.clone();
    let mut best_cost = f64::NEG_INFINITY;

    for t in 1..=iters {
        let s: Vec<f64> = mu.points().iter().map(|p| omega.dot(p)).collect();
        let u: Vec<f64> = nu.points().iter().map(|p| omega.dot(p)).collect();
        order_s.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
        order_t.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).unwrap());

        // Cost at the current iterate from the monotone matching.
        let cost: f64 = order_s
            .iter()
            .zip(&order_t)
            .map(|(&i, &j)| w * (s[i] - u[j]) * (s[i] - u[j]))
            .sum();
        if cost > best_cost {
            best_cost = cost;
            best = omega.clone();
        }

        grad.iter_mut().for_each(|g| *g = 0.0);
        for (&i, &j) in order_s.iter().zip(&order_t) {
            let scale = 2.0 * w * (s[i] - u[j]);
            let x = mu.point(i);
            let y = nu.point(j);
            for ((g, &xc), &yc) in grad.iter_mut().zip(x).zip(y) {
                *g += scale * (xc - yc);
            }
        }

        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break; // stationary; return the current iterate
        }

        let bc1 = 1.0 - config.beta1.powi(t as i32);
        let bc2 = 1.0 - config.beta2.powi(t as i32);
        let mut v: Vec<f64> = omega.vector().to_vec();
        for k in 0..d {
            m1[k] = config.beta1 * m1[k] + (1.0 - config.beta1) * grad[k];
            m2[k] = config.beta2 * m2[k] + (1.0 - config.beta2) * grad[k] * grad[k];
            let mhat = m1[k] / bc1;
            let vhat = m2[k] / bc2;
            v[k] += config.step * mhat / (vhat.sqrt() + config.epsilon);
        }
        omega = Direction::new(v)?;
    }

    // The final iterate was updated but never scored above.
    let final_cost = crate::one_d::ot_cost_sorted(
        &StepCdf::from_measure(&project(mu, &omega)?)?,
        &StepCdf::from_measure(&project(nu, &omega)?)?,
    )?;
    if final_cost > best_cost {
        best_cost = final_cost;
        best = omega;
    }
    Ok((best, best_cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional_directions_are_signs() {
        let set = sample_directions(1, 1, 42).unwrap();
        let v = set.directions()[0].vector()[0];
        assert!(v == 1.0 || v == -1.0);
    }

    #[test]
    fn sampled_directions_have_unit_norm() {
        let set = sample_directions(20, 7, 3).unwrap();
        for dir in set.directions() {
            let norm: f64 = dir.vector().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_directions(5, 3, 9).unwrap();
        let b = sample_directions(5, 3, 9).unwrap();
        assert_eq!(a.directions(), b.directions());
        let c = sample_directions(5, 3, 10).unwrap();
        assert_ne!(a.directions(), c.directions());
    }

    #[test]
    fn project_inner_product() {
        let m = EmpiricalMeasure::new(vec![vec![3.0, 4.0]], vec![1.0]).unwrap();
        let w = Direction::new(vec![0.6, 0.8]).unwrap();
        let p = project(&m, &w).unwrap();
        assert_abs_diff_eq!(p.point(0)[0], 5.0, epsilon = 1e-12);
        assert_eq!(p.weights(), m.weights());
    }

    #[test]
    fn project_basis_direction_extracts_coordinate() {
        let m = EmpiricalMeasure::uniform(vec![vec![1.0, 9.0], vec![2.0, 8.0]]).unwrap();
        let e1 = Direction::new(vec![1.0, 0.0]).unwrap();
        let p = project(&m, &e1).unwrap();
        assert_eq!(p.point(0)[0], 1.0);
        assert_eq!(p.point(1)[0], 2.0);
    }

    #[test]
    fn rot_select_identical_measures_ties_to_first() {
        let m = EmpiricalMeasure::uniform(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let dirs = sample_directions(5, 2, 1).unwrap();
        let sel = rot_select(&m, &m, &dirs).unwrap();
        assert_eq!(sel.best_index, 0);
        assert_eq!(sel.cost, 0.0);
        assert!(sel.all_costs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rot_select_point_masses_axis_directions() {
        let mu = EmpiricalMeasure::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let nu = EmpiricalMeasure::new(vec![vec![3.0, 4.0]], vec![1.0]).unwrap();
        let dirs = DirectionSet::new(
            vec![
                Direction::new(vec![1.0, 0.0]).unwrap(),
                Direction::new(vec![0.0, 1.0]).unwrap(),
            ],
            0,
        )
        .unwrap();
        let sel = rot_select(&mu, &nu, &dirs).unwrap();
        assert_abs_diff_eq!(sel.all_costs[0], 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sel.all_costs[1], 16.0, epsilon = 1e-12);
        assert_eq!(sel.best_index, 1);
        assert_abs_diff_eq!(sel.cost, 16.0, epsilon = 1e-12);
        // Contraction against the full-space cost, here 25.
        assert!(sel.cost <= 25.0);
    }

    #[test]
    fn ascent_identity_measures_zero_cost() {
        let m = EmpiricalMeasure::uniform(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let (_, cost) = max_sliced_ascent(&m, &m, 5, &AscentConfig::default(), 0).unwrap();
        assert_abs_diff_eq!(cost, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ascent_point_masses_aligns_with_displacement() {
        let mu = EmpiricalMeasure::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        let nu = EmpiricalMeasure::new(vec![vec![3.0, 4.0]], vec![1.0]).unwrap();
        let (omega, cost) =
            max_sliced_ascent(&mu, &nu, 3000, &AscentConfig::default(), 7).unwrap();
        // Objective is <(3,4), omega>^2, maximized along the displacement.
        assert_abs_diff_eq!(cost, 25.0, epsilon = 0.6);
        let alignment = (omega.vector()[0] * 0.6 + omega.vector()[1] * 0.8).abs();
        assert!(alignment > 0.98, "alignment = {alignment}");
    }

    #[test]
    fn ascent_improves_over_initialization() {
        use rand::SeedableRng;
        use rand_distr::Distribution;
        // A correlated 3D instance: nu stretches mu along a fixed direction.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let mu = EmpiricalMeasure::uniform(points).unwrap();
        let nu = mu
            .map_points(|p| vec![3.0 * p[0] + p[1], p[1], p[2] - 1.0])
            .unwrap();
        for seed in 0..10u64 {
            let init = sample_directions(1, 3, seed).unwrap().directions()[0].clone();
            let init_cost =
                crate::one_d::ot_cost_1d(&project(&mu, &init).unwrap(), &project(&nu, &init).unwrap()).unwrap();
            let (_, final_cost) =
                max_sliced_ascent(&mu, &nu, 300, &AscentConfig::default(), seed).unwrap();
            assert!(
                final_cost >= init_cost - 1e-12,
                "seed {seed}: final {final_cost} < init {init_cost}"
            );
        }
    }
}
