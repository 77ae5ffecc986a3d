//! Counterfactual-distribution estimators: tensorized univariate CiC,
//! exact-OT, entropic (Sinkhorn) and the robust one-dimensional-subspace
//! (ROT) estimator. Each maps (y0c, y1c, y0t) to estimated counterfactual
//! samples for the treatment group.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exact::{barycentric_map, exact_ot_plan, ot_distance};
use crate::measure::{squared_distance, EmpiricalMeasure};
use crate::one_d::{quantile_map_1d, StepCdf};
use crate::sinkhorn::sinkhorn_plan_default;
use crate::subspace::{rot_select, Direction, DirectionSet};

/// Method-specific metadata attached to an estimate.
#[derive(Debug, Clone)]
pub enum MethodMeta {
    Cic,
    Ot,
    Sinkhorn {
        lambda: f64,
        converged: bool,
        iterations: usize,
    },
    Rot {
        direction: Direction,
        selected_index: usize,
        projected_costs: Vec<f64>,
    },
}

impl MethodMeta {
    pub fn method_name(&self) -> &'static str {
        match self {
            MethodMeta::Cic => "cic",
            MethodMeta::Ot => "ot",
            MethodMeta::Sinkhorn { .. } => "sinkhorn",
            MethodMeta::Rot { .. } => "rot",
        }
    }
}

/// Estimated counterfactual samples plus provenance.
#[derive(Debug, Clone)]
pub struct CounterfactualEstimate {
    samples: Vec<Vec<f64>>,
    dim: usize,
    /// Wall-clock seconds spent inside the estimator call.
    pub runtime_seconds: f64,
    pub meta: MethodMeta,
}

impl CounterfactualEstimate {
    fn new(samples: Vec<Vec<f64>>, runtime_seconds: f64, meta: MethodMeta) -> Self {
        let dim = samples.first().map_or(0, |s| s.len());
        Self {
            samples,
            dim,
            runtime_seconds,
            meta,
        }
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn method(&self) -> &'static str {
        self.meta.method_name()
    }

    /// The samples as a uniform-weight measure.
    pub fn to_measure(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::uniform(self.samples.clone())
    }
}

fn check_dims(y0c: &EmpiricalMeasure, y1c: &EmpiricalMeasure, y0t: &EmpiricalMeasure) -> Result<usize> {
    let d = y0c.dim();
    for m in [y1c, y0t] {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: m.dim(),
            });
        }
    }
    Ok(d)
}

/// Tensorized univariate CiC: an independent monotone quantile map per
/// coordinate, applied coordinate-wise to the treatment atoms.
pub fn cic_tensorized(
    y0c: &EmpiricalMeasure,
    y1c: &EmpiricalMeasure,
    y0t: &EmpiricalMeasure,
) -> Result<CounterfactualEstimate> {
    let d = check_dims(y0c, y1c, y0t)?;
    let start = Instant::now();
    let mut samples: Vec<Vec<f64>> = vec![vec![0.0; d]; y0t.len()];
    for c in 0..d {
        let src = EmpiricalMeasure::new(
            y0c.coordinate(c).into_iter().map(|v| vec![v]).collect(),
            y0c.weights().to_vec(),
        )?;
        let tgt = EmpiricalMeasure::new(
            y1c.coordinate(c).into_iter().map(|v| vec![v]).collect(),
            y1c.weights().to_vec(),
        )?;
        let map = quantile_map_1d(&src, &tgt)?;
        for (out, p) in samples.iter_mut().zip(y0t.points()) {
            out[c] = map.eval(p[c]);
        }
    }
    let runtime = start.elapsed().as_secs_f64();
    Ok(CounterfactualEstimate::new(samples, runtime, MethodMeta::Cic))
}

fn nearest_control_index(y: &[f64], controls: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, x) in controls.iter().enumerate() {
        let d = squared_distance(y, x);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Applies the barycentric displacements of a control-group plan to the
/// treatment atoms via nearest-control-atom transfer.
fn displace_by_plan(
    y0c: &EmpiricalMeasure,
    y0t: &EmpiricalMeasure,
    barycenters: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let displacements: Vec<Vec<f64>> = barycenters
        .iter()
        .zip(y0c.points())
        .map(|(b, x)| b.iter().zip(x).map(|(bc, xc)| bc - xc).collect())
        .collect();
    y0t.points()
        .iter()
        .map(|y| {
            let j = nearest_control_index(y, y0c.points());
            y.iter()
                .zip(&displacements[j])
                .map(|(yc, dc)| yc + dc)
                .collect()
        })
        .collect()
}

/// Exact-OT estimator: barycentric map of the optimal control plan,
/// transferred to treatment atoms by nearest control atom.
pub fn ot_counterfactual(
    y0c: &EmpiricalMeasure,
    y1c: &EmpiricalMeasure,
    y0t: &EmpiricalMeasure,
) -> Result<CounterfactualEstimate> {
    check_dims(y0c, y1c, y0t)?;
    let start = Instant::now();
    let (plan, _) = exact_ot_plan(y0c, y1c)?;
    let barycenters = barycentric_map(&plan, y1c)?;
    let samples = displace_by_plan(y0c, y0t, &barycenters);
    let runtime = start.elapsed().as_secs_f64();
    Ok(CounterfactualEstimate::new(samples, runtime, MethodMeta::Ot))
}

/// Entropic variant of [`ot_counterfactual`] with regularization `lambda`.
pub fn sinkhorn_counterfactual(
    y0c: &EmpiricalMeasure,
    y1c: &EmpiricalMeasure,
    y0t: &EmpiricalMeasure,
    lambda: f64,
) -> Result<CounterfactualEstimate> {
    check_dims(y0c, y1c, y0t)?;
    let start = Instant::now();
    let result = sinkhorn_plan_default(y0c, y1c, lambda)?;
    let barycenters = barycentric_map(&result.plan, y1c)?;
    let samples = displace_by_plan(y0c, y0t, &barycenters);
    let runtime = start.elapsed().as_secs_f64();
    Ok(CounterfactualEstimate::new(
        samples,
        runtime,
        MethodMeta::Sinkhorn {
            lambda,
            converged: result.converged,
            iterations: result.iterations,
        },
    ))
}

/// ROT estimator: selects the direction with maximal projected 1D cost and
/// runs the univariate CiC map on that axis. Each treatment atom is pushed
/// through `F_1^{-1} ∘ F_0` of the projected control cdfs and mapped to the
/// full t=1 control atom realizing the target quantile, so coordinates
/// orthogonal to the subspace inherit the post-period control structure.
pub fn rot_counterfactual(
    y0c: &EmpiricalMeasure,
    y1c: &EmpiricalMeasure,
    y0t: &EmpiricalMeasure,
    dirs: &DirectionSet,
) -> Result<CounterfactualEstimate> {
    check_dims(y0c, y1c, y0t)?;
    let start = Instant::now();
    let selection = rot_select(y0c, y1c, dirs)?;
    let omega = &selection.best;
    let proj_src: Vec<f64> = y0c.points().iter().map(|p| omega.dot(p)).collect();
    let src = StepCdf::from_scalars(&proj_src, y0c.weights());
    // Target atoms by ascending projection with cumulative weights; the
    // quantile lookup picks the atom index instead of the projected value.
    let proj_tgt: Vec<f64> = y1c.points().iter().map(|p| omega.dot(p)).collect();
    let mut order: Vec<usize> = (0..y1c.len()).collect();
    order.sort_by(|&a, &b| proj_tgt[a].partial_cmp(&proj_tgt[b]).unwrap());
    let mut cumulative = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    for &i in &order {
        acc += y1c.weights()[i];
        cumulative.push(acc);
    }
    *cumulative.last_mut().unwrap() = 1.0;
    let samples: Vec<Vec<f64>> = y0t
        .points()
        .iter()
        .map(|y| {
            let p = src.eval(omega.dot(y));
            let idx = cumulative
                .partition_point(|&c| c < p)
                .min(order.len() - 1);
            y1c.points()[order[idx]].clone()
        })
        .collect();
    let runtime = start.elapsed().as_secs_f64();
    Ok(CounterfactualEstimate::new(
        samples,
        runtime,
        MethodMeta::Rot {
            direction: omega.clone(),
            selected_index: selection.best_index,
            projected_costs: selection.all_costs,
        },
    ))
}

/// Exact OT distance between an estimate (uniform weights) and a reference
/// measure; the scoring metric used in all benchmarks.
pub fn evaluate(estimate: &CounterfactualEstimate, ground_truth: &EmpiricalMeasure) -> Result<f64> {
    ot_distance(&estimate.to_measure()?, ground_truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::sample_directions;
    use approx::assert_abs_diff_eq;

    fn measure(points: &[&[f64]]) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn assert_points_close(actual: &[Vec<f64>], expected: &[Vec<f64>], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            for (&x, &y) in a.iter().zip(e) {
                assert_abs_diff_eq!(x, y, epsilon = tol);
            }
        }
    }

    #[test]
    fn cic_identity_drift_returns_treatment_on_support() {
        let y0c = measure(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 0.5]]);
        // Treatment atoms on the per-coordinate control support.
        let y0t = measure(&[&[2.0, 1.0], &[4.0, 3.0]]);
        let est = cic_tensorized(&y0c, &y0c, &y0t).unwrap();
        assert_points_close(est.samples(), y0t.points(), 0.0);
    }

    #[test]
    fn cic_off_support_atoms_snap_to_quantile_levels() {
        // The step-cdf pseudo-inverse maps an off-support value to the
        // largest control atom below it.
        let y0c = measure(&[&[0.0], &[2.0], &[4.0]]);
        let y0t = measure(&[&[1.0]]);
        let est = cic_tensorized(&y0c, &y0c, &y0t).unwrap();
        assert_points_close(est.samples(), &[vec![0.0]], 0.0);
    }

    #[test]
    fn cic_translation_drift_shifts_treatment() {
        let y0c = measure(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, 0.5]]);
        let v = [1.5, -2.0];
        let y1c = y0c.translate(&v).unwrap();
        let y0t = measure(&[&[2.0, 1.0], &[4.0, 3.0]]);
        let est = cic_tensorized(&y0c, &y1c, &y0t).unwrap();
        let expected = y0t.translate(&v).unwrap();
        assert_points_close(est.samples(), expected.points(), 1e-12);
    }

    #[test]
    fn cic_independent_coordinate_maps() {
        // Coordinate maps x -> 2x and y -> y + 1, realized by marginals.
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let y1c = measure(&[&[0.0, 1.0], &[2.0, 2.0], &[4.0, 3.0]]);
        let y0t = measure(&[&[1.0, 1.0]]);
        let est = cic_tensorized(&y0c, &y1c, &y0t).unwrap();
        assert_points_close(est.samples(), &[vec![2.0, 2.0]], 1e-12);
    }

    #[test]
    fn ot_treatment_on_control_support_gets_barycentric_images() {
        let y0c = measure(&[&[0.0, 0.0], &[2.0, 2.0]]);
        let y1c = measure(&[&[0.5, 0.0], &[2.5, 2.0]]);
        let est = ot_counterfactual(&y0c, &y1c, &y0c).unwrap();
        assert_points_close(est.samples(), y1c.points(), 1e-9);
    }

    #[test]
    fn ot_translation_drift() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, 1.0]]);
        let v = [0.7, -0.3];
        let y1c = y0c.translate(&v).unwrap();
        let y0t = measure(&[&[0.5, 0.5], &[2.0, 1.5]]);
        let est = ot_counterfactual(&y0c, &y1c, &y0t).unwrap();
        let expected = y0t.translate(&v).unwrap();
        assert_points_close(est.samples(), expected.points(), 1e-9);
    }

    #[test]
    fn ot_single_atom_control_shifts_everything() {
        let y0c = measure(&[&[1.0, 1.0]]);
        let y1c = measure(&[&[2.0, 3.0]]);
        let y0t = measure(&[&[0.0, 0.0], &[5.0, 5.0]]);
        let est = ot_counterfactual(&y0c, &y1c, &y0t).unwrap();
        assert_points_close(
            est.samples(),
            &[vec![1.0, 2.0], vec![6.0, 7.0]],
            1e-12,
        );
    }

    #[test]
    fn sinkhorn_small_lambda_matches_ot() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, 1.0], &[4.0, 4.0]]);
        let y1c = measure(&[&[0.5, 0.5], &[1.5, 2.5], &[3.5, 1.5], &[4.5, 4.5]]);
        let y0t = measure(&[&[0.2, 0.1], &[2.0, 2.0]]);
        let ot = ot_counterfactual(&y0c, &y1c, &y0t).unwrap();
        let sk = sinkhorn_counterfactual(&y0c, &y1c, &y0t, 0.01).unwrap();
        assert_points_close(sk.samples(), ot.samples(), 1e-6);
    }

    #[test]
    fn sinkhorn_large_lambda_collapses_to_mean() {
        let y0c = measure(&[&[0.0, 0.0], &[2.0, 2.0]]);
        let y1c = measure(&[&[1.0, 0.0], &[3.0, 2.0]]);
        let y0t = y0c.clone();
        let est = sinkhorn_counterfactual(&y0c, &y1c, &y0t, 1e6).unwrap();
        let mean = y1c.mean();
        // Treatment atom j gets mean(y1c) - x_j + y_j = mean (y0t = y0c here).
        assert_points_close(est.samples(), &[mean.clone(), mean], 1e-4);
    }

    #[test]
    fn rot_translation_returns_full_shift_on_support() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.5]]);
        let v = [1.0, 2.0];
        let y1c = y0c.translate(&v).unwrap();
        // Treatment atoms on the control support: the projected ranks are
        // preserved by a common shift, so each atom maps to its own shifted
        // control atom regardless of which direction wins.
        let y0t = measure(&[&[0.0, 0.0], &[2.0, 0.5]]);
        let dirs = sample_directions(10, 2, 11).unwrap();
        let est = rot_counterfactual(&y0c, &y1c, &y0t, &dirs).unwrap();
        let expected = y0t.translate(&v).unwrap();
        assert_points_close(est.samples(), expected.points(), 1e-9);
    }

    #[test]
    fn rot_point_mass_drift_selects_axis() {
        let y0c = measure(&[&[0.0, 0.0]]);
        let y1c = measure(&[&[3.0, 4.0]]);
        // Single-atom target: every treatment atom maps to it.
        let y0t = measure(&[&[1.0, 0.0], &[-2.0, 0.0]]);
        let dirs = DirectionSet::new(
            vec![
                Direction::new(vec![1.0, 0.0]).unwrap(),
                Direction::new(vec![0.0, 1.0]).unwrap(),
            ],
            0,
        )
        .unwrap();
        let est = rot_counterfactual(&y0c, &y1c, &y0t, &dirs).unwrap();
        // e2 wins the argmax (cost 16 > 9).
        let MethodMeta::Rot { selected_index, .. } = &est.meta else {
            panic!("wrong meta");
        };
        assert_eq!(*selected_index, 1);
        assert_points_close(est.samples(), &[vec![3.0, 4.0], vec![3.0, 4.0]], 1e-12);
    }

    #[test]
    fn rot_identity_drift_on_support_is_identity() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.5], &[-1.0, 2.0]]);
        let y0t = measure(&[&[1.0, 1.0], &[-1.0, 2.0]]);
        let dirs = sample_directions(10, 2, 5).unwrap();
        let est = rot_counterfactual(&y0c, &y0c, &y0t, &dirs).unwrap();
        let MethodMeta::Rot { projected_costs, .. } = &est.meta else {
            panic!("wrong meta");
        };
        assert!(projected_costs.iter().all(|&c| c == 0.0));
        // Treatment atoms sit on the control support, so the composed map
        // returns each atom itself.
        assert_points_close(est.samples(), y0t.points(), 0.0);
    }

    #[test]
    fn rot_pushing_control_reproduces_target_atoms() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 0.5], &[-1.0, 2.0]]);
        let y1c = measure(&[&[4.0, 1.0], &[0.0, 3.0], &[2.0, 2.0], &[1.0, -1.0]]);
        let dirs = sample_directions(6, 2, 3).unwrap();
        let est = rot_counterfactual(&y0c, &y1c, &y0c, &dirs).unwrap();
        // With equal counts and no projection ties, pushing y0c through the
        // estimator reproduces the y1c atoms as a multiset.
        let mut got: Vec<Vec<f64>> = est.samples().to_vec();
        let mut want: Vec<Vec<f64>> = y1c.points().to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_points_close(&got, &want, 0.0);
    }

    #[test]
    fn evaluate_zero_for_equal_and_translation_identity() {
        let gt = measure(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let est = cic_tensorized(&gt, &gt, &gt).unwrap();
        assert_abs_diff_eq!(evaluate(&est, &gt).unwrap(), 0.0, epsilon = 1e-12);
        let shifted = gt.translate(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(evaluate(&est, &shifted).unwrap(), 25.0, epsilon = 1e-9);
    }

    #[test]
    fn sample_count_and_dimension_preserved() {
        let y0c = measure(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let y1c = measure(&[&[0.5, 0.5], &[1.5, 1.5], &[2.5, 2.5]]);
        let y0t = measure(&[&[0.1, 0.9], &[1.1, 1.9], &[0.4, 0.2], &[2.2, 0.3]]);
        let dirs = sample_directions(4, 2, 2).unwrap();
        for est in [
            cic_tensorized(&y0c, &y1c, &y0t).unwrap(),
            ot_counterfactual(&y0c, &y1c, &y0t).unwrap(),
            sinkhorn_counterfactual(&y0c, &y1c, &y0t, 1.0).unwrap(),
            rot_counterfactual(&y0c, &y1c, &y0t, &dirs).unwrap(),
        ] {
            assert_eq!(est.len(), y0t.len());
            assert_eq!(est.dim(), y0t.dim());
        }
    }
}
