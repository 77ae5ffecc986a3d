//! Weighted finite point sets in `R^d`.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A discrete probability measure: `n` points in `R^d` with nonnegative
/// weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl EmpiricalMeasure {
    /// Builds a measure, validating the weight and dimension invariants.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::invalid("points must have dimension >= 1"));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.len(),
                });
            }
        }
        // Kahan summation: the check must not fail on the accumulated
        // rounding of n equal weights at large n.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &w in &weights {
            let y = w - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::BadWeights { sum });
        }
        Ok(Self {
            points,
            weights,
            dim,
        })
    }

    /// Uniform weights `1/n` on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        // Exactly 1/n everywhere (the sum tolerance absorbs the rounding):
        // equal-count uniform measures then share bit-identical cumulative
        // grids, which keeps rank-r atoms mapping to rank-r atoms in the
        // quantile map.
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Uniform 1D measure from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::uniform(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Scalar values of a 1D measure.
    pub fn scalars(&self) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::NotOneDimensional(self.dim));
        }
        Ok(self.points.iter().map(|p| p[0]).collect())
    }

    /// The `i`-th coordinate of every atom.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[i]).collect()
    }

    /// Applies `f` to every atom, keeping weights.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.points.iter().map(|p| f(p)).collect(), self.weights.clone())
    }

    /// Translated copy: every atom shifted by `v`.
    pub fn translate(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        self.map_points(|p| p.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            for (o, &x) in out.iter_mut().zip(p) {
                *o += w * x;
            }
        }
        out
    }

    /// Writes the measure as CSV with header `dim_0,...,dim_{d-1},weight`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header: Vec<String> = (0..self.dim)
            .map(|i| format!("dim_{i}"))
            .chain(std::iter::once("weight".to_string()))
            .collect();
        writeln!(file, "{}", header.join(","))?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let row: Vec<String> = p.iter().chain(std::iter::once(w)).map(|v| v.to_string()).collect();
            writeln!(file, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a measure written by [`EmpiricalMeasure::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let ncols = reader.headers().map_err(csv_err)?.len();
        if ncols < 2 {
            return Err(Error::invalid("measure CSV needs at least one dim column and a weight"));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let line = idx + 2;
            let mut vals = Vec::with_capacity(ncols);
            for field in record.iter() {
                vals.push(field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{field:?}: {e}"),
                })?);
            }
            if vals.len() != ncols {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {ncols} fields, got {}", vals.len()),
                });
            }
            weights.push(vals.pop().unwrap());
            points.push(vals);
        }
        Self::new(points, weights)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(e.to_string())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
