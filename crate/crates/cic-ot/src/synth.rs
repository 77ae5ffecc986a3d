//! Synthetic dataset generation: latent families, co-monotone linear
//! production pairs and full four-measure dataset assembly with ground-truth
//! counterfactual samples.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;

const COMONOTONE_TOL: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e12;

/// A pair of linear production maps `h_t(x) = H_t x` built so that
/// `H0^T H1` is a diagonal matrix with entries in (0, 1), hence positive
/// semi-definite and the pair co-monotone.
#[derive(Debug, Clone)]
pub struct ProductionPair {
    h0: DMatrix<f64>,
    h1: DMatrix<f64>,
    b: Vec<f64>,
    seed: Option<u64>,
}

impl ProductionPair {
    pub fn new(h0: DMatrix<f64>, h1: DMatrix<f64>, seed: Option<u64>) -> Result<Self> {
        if !h0.is_square() || h0.shape() != h1.shape() {
            return Err(Error::invalid("production matrices must be square and equal-size"));
        }
        let d = h0.nrows();
        let prod = h0.transpose() * &h1;
        let mut b = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    b[i] = prod[(i, j)];
                } else if prod[(i, j)].abs() > COMONOTONE_TOL {
                    return Err(Error::invalid(format!(
                        "H0^T H1 is not diagonal: entry ({i},{j}) = {}",
                        prod[(i, j)]
                    )));
                }
            }
        }
        if b.iter().any(|&x| x <= 0.0 || x >= 1.0) {
            return Err(Error::invalid("diagonal of H0^T H1 must lie in (0, 1)"));
        }
        Ok(Self { h0, h1, b, seed })
    }

    /// The fixed 2D pair used by the illustrative examples:
    /// `H0 = [[1, 0.5], [0.5, 1]]`, `H1 = [[1, -0.5], [-0.5, 1]]`.
    pub fn illustrative() -> Self {
        let h0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let h1 = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        // H0^T H1 = 0.75 * I.
        Self::new(h0, h1, None).expect("fixed pair is co-monotone")
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &DMatrix<f64> {
        &self.h0
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    /// Diagonal of `H0^T H1`.
    pub fn b_diagonal(&self) -> &[f64] {
        &self.b
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn apply_h0(&self, x: &[f64]) -> Vec<f64> {
        apply(&self.h0, x)
    }

    pub fn apply_h1(&self, x: &[f64]) -> Vec<f64> {
        apply(&self.h1, x)
    }
}

fn apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let v = nalgebra::DVector::from_column_slice(x);
    (m * v).iter().cloned().collect()
}

/// Draws a co-monotone production pair: `H0` has unit diagonal and
/// off-diagonal entries uniform in (0, 1); `B` is diagonal uniform in
/// (0, 1); `H1 = (H0^{-1})^T B`. Numerically singular draws (condition
/// number above 1e12) are redrawn with an incremented seed.
pub fn gen_comonotone_pair(d: usize, seed: u64) -> Result<ProductionPair> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    let mut attempt_seed = seed;
    for _ in 0..64 {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let mut h0 = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                h0[(i, j)] = if i == j { 1.0 } else { rng.random::<f64>() };
            }
        }
        let svd = h0.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 0.0 || smax / smin > MAX_CONDITION {
            attempt_seed += 1;
            continue;
        }
        let b: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let inv = h0
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("H0 inversion failed"))?;
        let h1 = inv.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(b));
        return ProductionPair::new(h0, h1, Some(attempt_seed));
    }
    Err(Error::invalid("could not draw a well-conditioned H0"))
}

/// One latent marginal distribution.
#[derive(Debug, Clone)]
pub enum Marginal {
    Gamma { shape: f64, scale: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, std_devs: Vec<f64> },
}

impl Marginal {
    fn validate(&self) -> Result<()> {
        match self {
            Marginal::Gamma { shape, scale } => {
                if *shape <= 0.0 || *scale <= 0.0 {
                    return Err(Error::invalid("gamma shape and scale must be positive"));
                }
            }
            Marginal::GaussianMixture {
                weights,
                means,
                std_devs,
            } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != std_devs.len() {
                    return Err(Error::invalid("mixture parameter lengths must match"));
                }
                let sum: f64 = weights.iter().sum();
                if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("mixture weights must be nonnegative and sum to 1"));
                }
                if std_devs.iter().any(|&s| s <= 0.0) {
                    return Err(Error::invalid("mixture standard deviations must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::Gamma { shape, scale } => shape * scale,
            Marginal::GaussianMixture { weights, means, .. } => {
                weights.iter().zip(means).map(|(w, m)| w * m).sum()
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Marginal::Gamma { shape, scale } => {
                Gamma::new(*shape, *scale).unwrap().sample(rng)
            }
            Marginal::GaussianMixture {
                weights,
                means,
                std_devs,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut idx = weights.len() - 1;
                for (k, &w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = k;
                        break;
                    }
                }
                Normal::new(means[idx], std_devs[idx]).unwrap().sample(rng)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Control,
    Treatment,
}

/// Per-group latent marginals (coordinates are sampled independently).
#[derive(Debug, Clone)]
pub struct LatentSpec {
    pub family: String,
    control: Vec<Marginal>,
    treatment: Vec<Marginal>,
}

impl LatentSpec {
    pub fn new(family: impl Into<String>, control: Vec<Marginal>, treatment: Vec<Marginal>) -> Result<Self> {
        if control.is_empty() || control.len() != treatment.len() {
            return Err(Error::invalid("control and treatment marginals must be non-empty and equal-length"));
        }
        for m in control.iter().chain(&treatment) {
            m.validate()?;
        }
        Ok(Self {
            family: family.into(),
            control,
            treatment,
        })
    }

    /// Bivariate Gamma: control dims (shape 2, scale 3) and (shape 3,
    /// scale 2); treatment has the two dims reversed.
    pub fn bivariate_gamma() -> Self {
        let g23 = Marginal::Gamma { shape: 2.0, scale: 3.0 };
        let g32 = Marginal::Gamma { shape: 3.0, scale: 2.0 };
        Self::new("bivariate-gamma", vec![g23.clone(), g32.clone()], vec![g32, g23]).unwrap()
    }

    /// 2D Gaussian mixtures: control dims 0.5 N(1,1) + 0.5 N(5,1) and
    /// 0.5 N(2,1) + 0.5 N(4,1); treatment has the two dims reversed.
    pub fn gaussian_mixture_2d() -> Self {
        let m15 = Marginal::GaussianMixture {
            weights: vec![0.5, 0.5],
            means: vec![1.0, 5.0],
            std_devs: vec![1.0, 1.0],
        };
        let m24 = Marginal::GaussianMixture {
            weights: vec![0.5, 0.5],
            means: vec![2.0, 4.0],
            std_devs: vec![1.0, 1.0],
        };
        Self::new("gaussian-mixture-2d", vec![m15.clone(), m24.clone()], vec![m24, m15]).unwrap()
    }

    /// `d`-dimensional Gamma: control dims i.i.d. (shape 2, scale 3),
    /// treatment dims i.i.d. (shape 3, scale 2).
    pub fn multivariate_gamma(d: usize) -> Self {
        let g23 = Marginal::Gamma { shape: 2.0, scale: 3.0 };
        let g32 = Marginal::Gamma { shape: 3.0, scale: 2.0 };
        Self::new("multivariate-gamma", vec![g23; d], vec![g32; d]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.control.len()
    }

    pub fn marginals(&self, group: Group) -> &[Marginal] {
        match group {
            Group::Control => &self.control,
            Group::Treatment => &self.treatment,
        }
    }
}

/// `n` i.i.d. latent draws with uniform weights; deterministic per seed.
pub fn sample_latent(spec: &LatentSpec, group: Group, n: usize, seed: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let marginals = spec.marginals(group);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| marginals.iter().map(|m| m.sample(&mut rng)).collect())
        .collect();
    EmpiricalMeasure::uniform(points)
}

/// Whether latent draws are shared across the two time stamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatentCoupling {
    /// Fresh i.i.d. draws per time stamp (the default).
    Fresh,
    /// The same latent realization at t = 0 and t = 1 within each group.
    Shared,
}

/// One synthetic experiment instance: the three observed measures, the
/// ground-truth counterfactual samples and generator metadata.
#[derive(Debug, Clone)]
pub struct DatasetQuad {
    pub y0c: EmpiricalMeasure,
    pub y1c: EmpiricalMeasure,
    pub y0t: EmpiricalMeasure,
    pub ground_truth: EmpiricalMeasure,
    pub seed: u64,
    pub family: String,
    pub production_seed: Option<u64>,
}

/// Assembles a dataset: `y0c = H0 latents`, `y1c = H1 latents`, `y0t = H0
/// treatment latents`, ground truth `= H1 treatment latents`, with fresh
/// independent latent draws per time stamp.
pub fn generate_quad(
    spec: &LatentSpec,
    prod: &ProductionPair,
    n: usize,
    seed: u64,
) -> Result<DatasetQuad> {
    generate_quad_with_coupling(spec, prod, n, seed, LatentCoupling::Fresh)
}

pub fn generate_quad_with_coupling(
    spec: &LatentSpec,
    prod: &ProductionPair,
    n: usize,
    seed: u64,
    coupling: LatentCoupling,
) -> Result<DatasetQuad> {
    if spec.dim() != prod.dim() {
        return Err(Error::DimensionMismatch {
            left: spec.dim(),
            right: prod.dim(),
        });
    }
    // Independent sub-seeds for the four draws.
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let sub: Vec<u64> = (0..4).map(|_| master.random()).collect();
    let (seed_c0, seed_c1, seed_t0, seed_t1) = match coupling {
        LatentCoupling::Fresh => (sub[0], sub[1], sub[2], sub[3]),
        LatentCoupling::Shared => (sub[0], sub[0], sub[2], sub[2]),
    };

    let lat_c0 = sample_latent(spec, Group::Control, n, seed_c0)?;
    let lat_c1 = sample_latent(spec, Group::Control, n, seed_c1)?;
    let lat_t0 = sample_latent(spec, Group::Treatment, n, seed_t0)?;
    let lat_t1 = sample_latent(spec, Group::Treatment, n, seed_t1)?;

    Ok(DatasetQuad {
        y0c: lat_c0.map_points(|p| prod.apply_h0(p))?,
        y1c: lat_c1.map_points(|p| prod.apply_h1(p))?,
        y0t: lat_t0.map_points(|p| prod.apply_h0(p))?,
        ground_truth: lat_t1.map_points(|p| prod.apply_h1(p))?,
        seed,
        family: spec.family.clone(),
        production_seed: prod.seed(),
    })
}

impl DatasetQuad {
    pub fn dim(&self) -> usize {
        self.y0c.dim()
    }

    /// Writes the four measures as `y0c.csv`, `y1c.csv`, `y0t.csv`,
    /// `ground_truth.csv` under `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.y0c.write_csv(&dir.join("y0c.csv"))?;
        self.y1c.write_csv(&dir.join("y1c.csv"))?;
        self.y0t.write_csv(&dir.join("y0t.csv"))?;
        self.ground_truth.write_csv(&dir.join("ground_truth.csv"))?;
        Ok(())
    }
}
