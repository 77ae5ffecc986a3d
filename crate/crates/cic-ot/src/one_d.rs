//! One-dimensional optimal transport: step cdfs, the monotone quantile map
//! and the closed-form squared-distance cost.

use crate::error::Result;
use crate::measure::EmpiricalMeasure;

/// A right-continuous empirical step cdf: sorted atom values with their
/// cumulative weights.
#[derive(Debug, Clone)]
pub struct StepCdf {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCdf {
    /// Sorts the atoms of a 1D measure (stable, ties kept in input order)
    /// and accumulates their weights.
    pub fn from_measure(m: &EmpiricalMeasure) -> Result<Self> {
        let scalars = m.scalars()?;
        Ok(Self::from_scalars(&scalars, m.weights()))
    }

    /// Builds the cdf straight from parallel value/weight slices, avoiding
    /// any intermediate measure. Weights must sum to 1 within the usual
    /// measure tolerance.
    pub fn from_scalars(scalars: &[f64], weights: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..scalars.len()).collect();
        order.sort_by(|&a, &b| scalars[a].partial_cmp(&scalars[b]).unwrap());
        let mut values = Vec::with_capacity(scalars.len());
        let mut cumulative = Vec::with_capacity(scalars.len());
        let mut acc = 0.0;
        for &i in &order {
            acc += weights[i];
            values.push(scalars[i]);
            cumulative.push(acc);
        }
        // The measure invariant puts the sum within 1e-12 of 1; pin the last
        // breakpoint so the cdf ends exactly at 1.
        *cumulative.last_mut().unwrap() = 1.0;
        Self { values, cumulative }
    }

    /// `F(x)`: total weight of atoms with value <= x.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// `F^{-1}(p) = inf { t | F(t) >= p }`, clamped to the atom range for
    /// p <= 0 and p > 1.
    pub fn quantile(&self, p: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c < p);
        if idx >= self.values.len() {
            *self.values.last().unwrap()
        } else {
            self.values[idx]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

/// The nondecreasing map `F_target^{-1} ∘ F_source` between two 1D empirical
/// measures.
#[derive(Debug, Clone)]
pub struct Monotone1DMap {
    source: StepCdf,
    target: StepCdf,
}

impl Monotone1DMap {
    /// Evaluates the map at any real `s`, including points outside the
    /// source support.
    pub fn eval(&self, s: f64) -> f64 {
        self.target.quantile(self.source.eval(s))
    }

    pub fn source_cdf(&self) -> &StepCdf {
        &self.source
    }

    pub fn target_cdf(&self) -> &StepCdf {
        &self.target
    }
}

/// Builds the monotone quantile map pushing `source` onto `target`.
pub fn quantile_map_1d(
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
) -> Result<Monotone1DMap> {
    Ok(Monotone1DMap {
        source: StepCdf::from_measure(source)?,
        target: StepCdf::from_measure(target)?,
    })
}

/// Closed-form squared-distance transport cost between two 1D measures,
/// computed by walking the merged cumulative-weight breakpoints of the two
/// sorted atom lists (the north-west-corner coupling of sorted atoms).
pub fn ot_cost_1d(source: &EmpiricalMeasure, target: &EmpiricalMeasure) -> Result<f64> {
    let src = StepCdf::from_measure(source)?;
    let tgt = StepCdf::from_measure(target)?;
    ot_cost_sorted(&src, &tgt)
}

/// Same as [`ot_cost_1d`] but on pre-built cdfs; used by callers that reuse
/// a sorted side.
pub fn ot_cost_sorted(src: &StepCdf, tgt: &StepCdf) -> Result<f64> {
    let sv = src.values();
    let tv = tgt.values();
    let mut cost = 0.0;
    let mut i = 0;
    let mut j = 0;
    // Remaining mass on the current atoms, recovered from the cumulative sums.
    let mut wi = src.cumulative()[0];
    let mut wj = tgt.cumulative()[0];
    while i < sv.len() && j < tv.len() {
        let mass = wi.min(wj);
        let diff = sv[i] - tv[j];
        cost += mass * diff * diff;
        wi -= mass;
        wj -= mass;
        if wi <= 0.0 {
            i += 1;
            if i < sv.len() {
                wi = src.cumulative()[i] - src.cumulative()[i - 1];
            }
        }
        if wj <= 0.0 {
            j += 1;
            if j < tv.len() {
                wj = tgt.cumulative()[j] - tgt.cumulative()[j - 1];
            }
        }
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(vals: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(vals).unwrap()
    }

    #[test]
    fn identity_map_on_support() {
        let map = quantile_map_1d(&m(&[0.0, 1.0, 2.0]), &m(&[0.0, 1.0, 2.0])).unwrap();
        for s in [0.0, 1.0, 2.0] {
            assert_eq!(map.eval(s), s);
        }
    }

    #[test]
    fn shifted_map_and_out_of_sample() {
        let map = quantile_map_1d(&m(&[0.0, 1.0, 2.0]), &m(&[10.0, 11.0, 12.0])).unwrap();
        assert_eq!(map.eval(0.0), 10.0);
        assert_eq!(map.eval(1.0), 11.0);
        assert_eq!(map.eval(2.0), 12.0);
        // F_src(0.5) = 1/3 and F_tgt^{-1}(1/3) = 10.
        assert_eq!(map.eval(0.5), 10.0);
        // Below the source support F = 0, clamped to the smallest target atom.
        assert_eq!(map.eval(-5.0), 10.0);
        // Above the support F = 1, the largest target atom.
        assert_eq!(map.eval(100.0), 12.0);
    }

    #[test]
    fn single_atom_target_forces_constant_map() {
        let src = EmpiricalMeasure::new(vec![vec![0.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
        let tgt = EmpiricalMeasure::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let map = quantile_map_1d(&src, &tgt).unwrap();
        assert_eq!(map.eval(0.0), 1.0);
        assert_eq!(map.eval(2.0), 1.0);
    }

    #[test]
    fn map_rejects_multidimensional_input() {
        let two_d = EmpiricalMeasure::uniform(vec![vec![0.0, 1.0]]).unwrap();
        assert!(quantile_map_1d(&two_d, &two_d).is_err());
    }

    #[test]
    fn cost_identical_measures_is_zero() {
        let a = m(&[3.0, -1.0, 4.0]);
        assert_eq!(ot_cost_1d(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn cost_two_uniform_pairs() {
        // Monotone match 0->1, 1->2 costs (1 + 1) / 2.
        let c = ot_cost_1d(&m(&[0.0, 1.0]), &m(&[1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_split_to_single_atom() {
        let src = EmpiricalMeasure::new(vec![vec![0.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
        let tgt = EmpiricalMeasure::new(vec![vec![1.0]], vec![1.0]).unwrap();
        assert_abs_diff_eq!(ot_cost_1d(&src, &tgt).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_unequal_sizes() {
        // src uniform on {0, 1}, tgt single atom at 0: cost = 0.5 * 1 = 0.5.
        let c = ot_cost_1d(
            &m(&[0.0, 1.0]),
            &EmpiricalMeasure::new(vec![vec![0.0]], vec![1.0]).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pushforward_exactness_no_ties() {
        let src = m(&[5.0, 1.0, 3.0, 2.0]);
        let tgt = m(&[10.0, 40.0, 20.0, 30.0]);
        let map = quantile_map_1d(&src, &tgt).unwrap();
        let mut pushed: Vec<f64> = [5.0, 1.0, 3.0, 2.0].iter().map(|&s| map.eval(s)).collect();
        pushed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pushed, vec![10.0, 20.0, 30.0, 40.0]);
    }
}
