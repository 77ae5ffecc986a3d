//! Experiment runners shared by the CLI subcommands.

use std::error::Error;
use std::path::Path;
use std::time::Instant;

use cic_ot::estimators::{
    cic_tensorized, ot_counterfactual, rot_counterfactual, sinkhorn_counterfactual,
    CounterfactualEstimate, MethodMeta,
};
use cic_ot::exact::ot_distance;
use cic_ot::measure::EmpiricalMeasure;
use cic_ot::subspace::{max_sliced_ascent, sample_directions, AscentConfig, DirectionSet};
use cic_ot::synth::{gen_comonotone_pair, generate_quad, DatasetQuad, LatentSpec, ProductionPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::records::BenchRecord;
use crate::svg::{self, Series};

pub type AnyResult<T> = Result<T, Box<dyn Error>>;

pub const ILLUSTRATIVE_FAMILIES: [&str; 2] = ["bivariate-gamma", "gaussian-mixture-2d"];

pub fn latent_for(family: &str, d: usize) -> AnyResult<LatentSpec> {
    match family {
        "bivariate-gamma" => Ok(LatentSpec::bivariate_gamma()),
        "gaussian-mixture-2d" => Ok(LatentSpec::gaussian_mixture_2d()),
        "multivariate-gamma" => Ok(LatentSpec::multivariate_gamma(d)),
        other => Err(format!("unknown latent family {other:?}").into()),
    }
}

pub fn production_for(family: &str, d: usize, seed: u64) -> AnyResult<ProductionPair> {
    match family {
        "bivariate-gamma" | "gaussian-mixture-2d" => {
            if d != 2 {
                return Err(format!("family {family} is 2D, got d = {d}").into());
            }
            Ok(ProductionPair::illustrative())
        }
        "multivariate-gamma" => Ok(gen_comonotone_pair(d, seed)?),
        other => Err(format!("unknown latent family {other:?}").into()),
    }
}

/// Uniform subsample without replacement (partial Fisher-Yates), seeded.
fn subsample(m: &EmpiricalMeasure, target: usize, seed: u64) -> EmpiricalMeasure {
    if target >= m.len() {
        return m.clone();
    }
    let mut idx: Vec<usize> = (0..m.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..target {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    EmpiricalMeasure::uniform(idx[..target].iter().map(|&i| m.point(i).to_vec()).collect())
        .unwrap()
}

/// Exact OT distance between an estimate and the ground truth, optionally on
/// a seeded subsample of both sides. Returns the distance and whether the
/// subsample was applied.
pub fn score(
    estimate: &CounterfactualEstimate,
    ground_truth: &EmpiricalMeasure,
    metric_subsample: Option<usize>,
    seed: u64,
) -> AnyResult<(f64, bool)> {
    let est = estimate.to_measure()?;
    match metric_subsample {
        Some(target) if target < est.len() || target < ground_truth.len() => {
            let a = subsample(&est, target, seed.wrapping_mul(2));
            let b = subsample(ground_truth, target, seed.wrapping_mul(2).wrapping_add(1));
            Ok((ot_distance(&a, &b)?, true))
        }
        _ => Ok((ot_distance(&est, ground_truth)?, false)),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Method {
    Cic,
    Ot,
    Sinkhorn(f64),
    Rot(usize),
}

fn meta_string(est: &CounterfactualEstimate, dir_seed: Option<u64>, subsampled: Option<usize>) -> String {
    let mut parts: Vec<String> = Vec::new();
    match &est.meta {
        MethodMeta::Sinkhorn {
            converged,
            iterations,
            ..
        } => {
            parts.push(format!("converged={converged}"));
            parts.push(format!("iterations={iterations}"));
        }
        MethodMeta::Rot {
            direction,
            selected_index,
            ..
        } => {
            if let Some(s) = dir_seed {
                parts.push(format!("dir_seed={s}"));
            }
            parts.push(format!("selected={selected_index}"));
            let omega: Vec<String> = direction
                .vector()
                .iter()
                .take(4)
                .map(|x| format!("{x:.4}"))
                .collect();
            parts.push(format!("omega={}", omega.join(" ")));
        }
        _ => {}
    }
    if let Some(m) = subsampled {
        parts.push(format!("metric_subsample={m}"));
    }
    parts.join(";")
}

/// Runs the listed methods on one dataset and scores them.
#[allow(clippy::too_many_arguments)]
pub fn run_methods(
    experiment: &str,
    quad: &DatasetQuad,
    methods: &[Method],
    seed: u64,
    dir_seed: u64,
    metric_subsample: Option<usize>,
    records: &mut Vec<BenchRecord>,
    keep_estimates: bool,
) -> AnyResult<Vec<(String, CounterfactualEstimate)>> {
    let mut kept = Vec::new();
    for &method in methods {
        let (est, k, lambda, dseed) = match method {
            Method::Cic => (
                cic_tensorized(&quad.y0c, &quad.y1c, &quad.y0t)?,
                None,
                None,
                None,
            ),
            Method::Ot => (
                ot_counterfactual(&quad.y0c, &quad.y1c, &quad.y0t)?,
                None,
                None,
                None,
            ),
            Method::Sinkhorn(lambda) => (
                sinkhorn_counterfactual(&quad.y0c, &quad.y1c, &quad.y0t, lambda)?,
                None,
                Some(lambda),
                None,
            ),
            Method::Rot(k) => {
                let dirs = sample_directions(k, quad.dim(), dir_seed)?;
                (
                    rot_counterfactual(&quad.y0c, &quad.y1c, &quad.y0t, &dirs)?,
                    Some(k),
                    None,
                    Some(dir_seed),
                )
            }
        };
        let (distance, subsampled) = score(&est, &quad.ground_truth, metric_subsample, seed)?;
        records.push(BenchRecord {
            experiment: experiment.to_string(),
            method: est.method().to_string(),
            n: quad.y0t.len(),
            d: quad.dim(),
            k,
            lambda,
            seed,
            runtime_s: est.runtime_seconds,
            ot_distance: distance,
            meta: meta_string(&est, dseed, subsampled.then(|| metric_subsample.unwrap())),
        });
        if keep_estimates {
            kept.push((est.method().to_string(), est));
        }
    }
    Ok(kept)
}

#[allow(clippy::too_many_arguments)]
pub fn run_illustrative(
    n: usize,
    seeds: u64,
    k: usize,
    master_seed: u64,
    metric_subsample: Option<usize>,
    out: &Path,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    for family in ILLUSTRATIVE_FAMILIES {
        let spec = latent_for(family, 2)?;
        let prod = production_for(family, 2, master_seed)?;
        let experiment = format!("illustrative-{family}");
        for s in 0..seeds {
            let seed = master_seed + s;
            let quad = generate_quad(&spec, &prod, n, seed)?;
            let kept = run_methods(
                &experiment,
                &quad,
                &[Method::Cic, Method::Ot, Method::Rot(k)],
                seed,
                seed.wrapping_add(0x9e3779b9),
                metric_subsample,
                records,
                s == 0,
            )?;
            if s == 0 {
                for (method, est) in &kept {
                    svg::scatter(
                        &out.join(format!("{experiment}-{method}.svg")),
                        &format!("{family}: {method} estimate vs ground truth"),
                        &[
                            Series {
                                label: "ground truth",
                                color: "#888888",
                                points: quad.ground_truth.points(),
                            },
                            Series {
                                label: method,
                                color: "#d62728",
                                points: est.samples(),
                            },
                        ],
                    )?;
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_varying_n(
    family: &str,
    n_values: &[usize],
    seeds: u64,
    k: usize,
    lambda: f64,
    master_seed: u64,
    metric_subsample: Option<usize>,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    let spec = latent_for(family, 2)?;
    let prod = production_for(family, 2, master_seed)?;
    let experiment = format!("varying-n-{family}");
    let methods = [
        Method::Cic,
        Method::Ot,
        Method::Sinkhorn(lambda),
        Method::Rot(k),
    ];
    for &n in n_values {
        for s in 0..seeds {
            let seed = master_seed + s;
            let quad = generate_quad(&spec, &prod, n, seed)?;
            run_methods(
                &experiment,
                &quad,
                &methods,
                seed,
                seed.wrapping_add(n as u64),
                metric_subsample,
                records,
                false,
            )?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_varying_d(
    d_values: &[usize],
    n: usize,
    seeds: u64,
    k: usize,
    lambda: f64,
    master_seed: u64,
    metric_subsample: Option<usize>,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    let methods = [
        Method::Cic,
        Method::Ot,
        Method::Sinkhorn(lambda),
        Method::Rot(k),
    ];
    for &d in d_values {
        let spec = latent_for("multivariate-gamma", d)?;
        // One fixed production pair per d, reused across seeds.
        let prod = production_for("multivariate-gamma", d, master_seed + d as u64)?;
        for s in 0..seeds {
            let seed = master_seed + s;
            let quad = generate_quad(&spec, &prod, n, seed)?;
            run_methods(
                "varying-d",
                &quad,
                &methods,
                seed,
                seed.wrapping_add(d as u64),
                metric_subsample,
                records,
                false,
            )?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_varying_k(
    d_values: &[usize],
    k_values: &[usize],
    ascent_iters: &[usize],
    n: usize,
    runs: u64,
    master_seed: u64,
    metric_subsample: Option<usize>,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    for &d in d_values {
        let spec = latent_for("multivariate-gamma", d)?;
        let prod = production_for("multivariate-gamma", d, master_seed + d as u64)?;
        // One dataset per d; repeated runs vary only the direction seeds.
        let quad = generate_quad(&spec, &prod, n, master_seed)?;
        for &k in k_values {
            for run in 0..runs {
                run_methods(
                    "varying-k",
                    &quad,
                    &[Method::Rot(k)],
                    master_seed + run,
                    master_seed + run * 7919 + k as u64,
                    metric_subsample,
                    records,
                    false,
                )?;
            }
        }
        for &iters in ascent_iters {
            for run in 0..runs {
                let seed = master_seed + run;
                let start = Instant::now();
                let (omega, _) = max_sliced_ascent(
                    &quad.y0c,
                    &quad.y1c,
                    iters,
                    &AscentConfig::default(),
                    seed,
                )?;
                let dirs = DirectionSet::new(vec![omega], seed)?;
                let est = rot_counterfactual(&quad.y0c, &quad.y1c, &quad.y0t, &dirs)?;
                let runtime = start.elapsed().as_secs_f64();
                let (distance, subsampled) =
                    score(&est, &quad.ground_truth, metric_subsample, seed)?;
                let mut meta = format!("ascent_iters={iters};init_seed={seed}");
                if subsampled {
                    meta.push_str(&format!(";metric_subsample={}", metric_subsample.unwrap()));
                }
                records.push(BenchRecord {
                    experiment: "varying-k".to_string(),
                    method: "rot-ascent".to_string(),
                    n: quad.y0t.len(),
                    d,
                    // The iteration budget plays the role of k for this method.
                    k: Some(iters),
                    lambda: None,
                    seed,
                    runtime_s: runtime,
                    ot_distance: distance,
                    meta,
                });
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_lambda_sweep(
    lambdas: &[f64],
    n_values: &[usize],
    d_values: &[usize],
    n_for_d: usize,
    seeds: u64,
    k: usize,
    master_seed: u64,
    metric_subsample: Option<usize>,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    let spec2 = latent_for("bivariate-gamma", 2)?;
    let prod2 = production_for("bivariate-gamma", 2, master_seed)?;
    for &lambda in lambdas {
        for &n in n_values {
            for s in 0..seeds {
                let seed = master_seed + s;
                let quad = generate_quad(&spec2, &prod2, n, seed)?;
                run_methods(
                    "lambda-sweep-n",
                    &quad,
                    &[Method::Sinkhorn(lambda), Method::Rot(k)],
                    seed,
                    seed.wrapping_add(n as u64),
                    metric_subsample,
                    records,
                    false,
                )?;
            }
        }
        for &d in d_values {
            let spec = latent_for("multivariate-gamma", d)?;
            let prod = production_for("multivariate-gamma", d, master_seed + d as u64)?;
            for s in 0..seeds {
                let seed = master_seed + s;
                let quad = generate_quad(&spec, &prod, n_for_d, seed)?;
                run_methods(
                    "lambda-sweep-d",
                    &quad,
                    &[Method::Sinkhorn(lambda), Method::Rot(k)],
                    seed,
                    seed.wrapping_add(d as u64),
                    metric_subsample,
                    records,
                    false,
                )?;
            }
        }
    }
    Ok(())
}

pub fn run_ck(
    path: &Path,
    runs: u64,
    k: usize,
    master_seed: u64,
    out: &Path,
    records: &mut Vec<BenchRecord>,
) -> AnyResult<()> {
    let ds = cic_ot::ck::load_ck(path, &cic_ot::ck::ALL_COLUMNS)?;
    // 2D FT/PT analysis with the full-column missing-value filter; empft and
    // emppt are the first two coordinates.
    let take2 = |m: &EmpiricalMeasure| {
        EmpiricalMeasure::uniform(m.points().iter().map(|p| p[..2].to_vec()).collect())
    };
    let y0c = take2(&ds.y0c)?;
    let y1c = take2(&ds.y1c)?;
    let y0t = take2(&ds.y0t)?;
    let n = y0t.len();

    // The OT estimate is the reference the other methods are scored against.
    let ot = ot_counterfactual(&y0c, &y1c, &y0t)?;
    let reference = ot.to_measure()?;
    records.push(BenchRecord {
        experiment: "ck".to_string(),
        method: "ot".to_string(),
        n,
        d: 2,
        k: None,
        lambda: None,
        seed: master_seed,
        runtime_s: ot.runtime_seconds,
        ot_distance: 0.0,
        meta: format!(
            "reference;control={};treatment={}",
            ds.control_count(),
            ds.treatment_count()
        ),
    });

    let cic = cic_tensorized(&y0c, &y1c, &y0t)?;
    let cic_dist = ot_distance(&cic.to_measure()?, &reference)?;
    records.push(BenchRecord {
        experiment: "ck".to_string(),
        method: "cic".to_string(),
        n,
        d: 2,
        k: None,
        lambda: None,
        seed: master_seed,
        runtime_s: cic.runtime_seconds,
        ot_distance: cic_dist,
        meta: String::new(),
    });

    let mut first_rot: Option<CounterfactualEstimate> = None;
    for run in 0..runs {
        let dir_seed = master_seed + run;
        let dirs = sample_directions(k, 2, dir_seed)?;
        let rot = rot_counterfactual(&y0c, &y1c, &y0t, &dirs)?;
        let dist = ot_distance(&rot.to_measure()?, &reference)?;
        records.push(BenchRecord {
            experiment: "ck".to_string(),
            method: "rot".to_string(),
            n,
            d: 2,
            k: Some(k),
            lambda: None,
            seed: dir_seed,
            runtime_s: rot.runtime_seconds,
            ot_distance: dist,
            meta: meta_string(&rot, Some(dir_seed), None),
        });
        if first_rot.is_none() {
            first_rot = Some(rot);
        }
    }

    let rot_est = first_rot.ok_or("ck requires runs >= 1")?;
    svg::scatter(
        &out.join("ck-estimates.svg"),
        "Card-Krueger FT/PT counterfactual estimates",
        &[
            Series {
                label: "ot (reference)",
                color: "#1f77b4",
                points: reference.points(),
            },
            Series {
                label: "cic",
                color: "#d62728",
                points: cic.samples(),
            },
            Series {
                label: "rot",
                color: "#2ca02c",
                points: rot_est.samples(),
            },
        ],
    )?;
    Ok(())
}

pub fn run_gen(family: &str, n: usize, d: usize, seed: u64, out: &Path) -> AnyResult<()> {
    let spec = latent_for(family, d)?;
    let prod = production_for(family, d, seed)?;
    let quad = generate_quad(&spec, &prod, n, seed)?;
    quad.write_csv(out)?;
    println!(
        "wrote quad (family {family}, n {n}, d {}, seed {seed}) to {}",
        quad.dim(),
        out.display()
    );
    Ok(())
}
