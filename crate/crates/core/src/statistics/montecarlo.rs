//! Seeding, ordered parallel evaluation and resampling errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The seed of sample `index` under base seed `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Evaluates `job(i)` for i in 0..n on `workers` threads (0 for the rayon
/// default) and returns the results in index order.
pub fn run_indexed<T, F>(n: usize, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&job).collect())
}

/// Jackknife standard error of `stat` evaluated at the mean of per-sample
/// feature vectors. Uses leave-one-out means, so the cost is linear.
pub fn jackknife_se<F>(features: &[Vec<f64>], stat: F) -> Option<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = features.len();
    if n < 2 {
        return None;
    }
    let m = features[0].len();
    let mut sums = vec![0.0; m];
    for row in features {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    let mut loo = vec![0.0; m];
    let values: Vec<f64> = features
        .iter()
        .map(|row| {
            for j in 0..m {
                loo[j] = (sums[j] - row[j]) / (n - 1) as f64;
            }
            stat(&loo)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Some(((n - 1) as f64 / n as f64 * ss).sqrt())
}

/// sup |F_n - Φ| against the standard normal.
pub fn ks_statistic_normal(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let c = normal.cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    Some(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts / (n · width), integrating to one
    pub density: Vec<f64>,
}

/// ⌈√n⌉ equal bins spanning the sample range.
pub fn histogram(values: &[f64]) -> Option<Histogram> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let bins = (n as f64).sqrt().ceil() as usize;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let density = counts
        .iter()
        .map(|&c| c as f64 / (n as f64 * width))
        .collect();
    Some(Histogram {
        edges,
        counts,
        density,
    })
}

/// (z, F_n(z), Φ(z)) on z = -4, -3.75, .., 4.
pub fn ecdf_grid(values: &[f64]) -> Vec<(f64, f64, f64)> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    (0..=32)
        .map(|i| {
            let z = -4.0 + 0.25 * i as f64;
            let below = sorted.partition_point(|&v| v <= z);
            (z, below as f64 / n, normal.cdf(z))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_and_repeat() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn ordered_results() {
        let out = run_indexed(100, 4, |i| Ok(i * i)).unwrap();
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs = [1.0, 2.0, 4.0, 7.0, 11.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let se = jackknife_se(&rows, |m| m[0]).unwrap();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((se - (var / 5.0).sqrt()).abs() < 1e-12);
        assert!(jackknife_se(&rows[..1], |m| m[0]).is_none());
    }

    #[test]
    fn ks_of_a_point_mass() {
        let d = ks_statistic_normal(&[0.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = histogram(&xs).unwrap();
        assert_eq!(h.counts.len(), 8);
        let mass: f64 = h
            .density
            .iter()
            .zip(h.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }
}
