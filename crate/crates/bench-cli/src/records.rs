//! Benchmark record rows and their CSV serialization.

use std::collections::BTreeMap;
use std::error::Error;
use std::path::Path;

/// One benchmark measurement.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub experiment: String,
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub runtime_s: f64,
    pub ot_distance: f64,
    pub meta: String,
}

impl BenchRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.runtime_s < 0.0 || self.ot_distance < 0.0 {
            return Err(format!(
                "record ({}, {}, seed {}) has negative runtime or distance",
                self.experiment, self.method, self.seed
            ));
        }
        Ok(())
    }
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), Box<dyn Error>> {
    for r in records {
        r.validate()?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "experiment",
        "method",
        "n",
        "d",
        "k",
        "lambda",
        "seed",
        "runtime_s",
        "ot_distance",
        "meta",
    ])?;
    for r in records {
        w.write_record([
            r.experiment.as_str(),
            r.method.as_str(),
            &r.n.to_string(),
            &r.d.to_string(),
            &opt_usize(r.k),
            &opt_f64(r.lambda),
            &r.seed.to_string(),
            &format!("{:.9e}", r.runtime_s),
            &format!("{:.12e}", r.ot_distance),
            r.meta.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Grouping key for summary rows: everything identifying except the seed.
type GroupKey = (String, String, usize, usize, String, String);

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes per-group mean/std of runtime and distance. Statistics are the
/// sample mean and the (n-1)-normalized standard deviation.
pub fn write_summary(path: &Path, records: &[BenchRecord]) -> Result<(), Box<dyn Error>> {
    let mut groups: BTreeMap<GroupKey, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let key = (
            r.experiment.clone(),
            r.method.clone(),
            r.n,
            r.d,
            opt_usize(r.k),
            opt_f64(r.lambda),
        );
        let entry = groups.entry(key).or_default();
        entry.0.push(r.runtime_s);
        entry.1.push(r.ot_distance);
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "experiment",
        "method",
        "n",
        "d",
        "k",
        "lambda",
        "count",
        "mean_runtime_s",
        "std_runtime_s",
        "mean_ot_distance",
        "std_ot_distance",
    ])?;
    for ((experiment, method, n, d, k, lambda), (runtimes, distances)) in &groups {
        let (mrt, srt) = mean_std(runtimes);
        let (md, sd) = mean_std(distances);
        w.write_record([
            experiment.as_str(),
            method.as_str(),
            &n.to_string(),
            &d.to_string(),
            k.as_str(),
            lambda.as_str(),
            &runtimes.len().to_string(),
            &format!("{mrt:.9e}"),
            &format!("{srt:.9e}"),
            &format!("{md:.12e}"),
            &format!("{sd:.12e}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
