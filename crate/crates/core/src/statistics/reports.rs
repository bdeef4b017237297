//! Moment, covariance, Gaussian and mean-square experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beurling_selberg::{build_pair, constant_c_k, limit_c, SelbergPair, Sign};
use crate::error::{Error, Result};
use crate::family::{FamilySpec, PolyOverFq, EXHAUSTIVE_LIMIT};
use crate::lfun::{l_polynomial_from_histograms, SumEngine};
use crate::zeros::{count_in_interval, find_angles, Interval};

use super::montecarlo::{derive_seed, ecdf_grid, histogram, jackknife_se, ks_statistic_normal, run_indexed, Histogram};
use super::{s_statistic_from_histograms, second_moment_structural, variance_scale};

/// Largest field degree the Monte Carlo experiments will tabulate: the
/// largest K with q^K <= 3^10.
pub fn gaussian_k_max(q: u64) -> usize {
    let mut k = 0;
    let mut size: u64 = 1;
    while size * q <= 59_049 {
        size *= q;
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    MonteCarlo { samples: usize, seed: u64 },
}

/// One family member's statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleValue {
    pub sample_index: u64,
    pub seed: Option<u64>,
    pub f: PolyOverFq,
    pub s_plus: f64,
    pub s_minus: f64,
    /// N_I(C_f), when the full zero set was computed
    pub n_interval: Option<usize>,
    pub imaginary: f64,
}

/// Evaluates S^±(K, C_f) over the family (every member, or seeded samples)
/// in sample-index order. With `with_zeros`, N_I(C_f) is also computed,
/// which needs fields up to degree d - 1.
pub fn collect_samples(
    engine: &SumEngine,
    spec: &FamilySpec,
    pair: &SelbergPair,
    mode: Mode,
    workers: usize,
    with_zeros: bool,
) -> Result<Vec<SampleValue>> {
    if engine.p() != spec.p || engine.q() != spec.q() {
        return Err(Error::InvalidParameter("engine and family disagree on q".into()));
    }
    let n_max = if with_zeros { (spec.d - 1).max(pair.k()) } else { pair.k() } as u32;
    for n in 1..=n_max {
        engine.kernel(n, spec.d)?;
    }
    let (count, seeds) = match mode {
        Mode::Exhaustive => {
            let size = spec.family_size();
            if size > EXHAUSTIVE_LIMIT {
                return Err(Error::FamilyTooLarge {
                    size,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            (size as usize, None)
        }
        Mode::MonteCarlo { samples, seed } => (samples, Some(seed)),
    };
    let q = engine.q() as u64;
    let interval = pair.interval();
    run_indexed(count, workers, |i| {
        let seed = seeds.map(|base| derive_seed(base, i as u64));
        let f = match seed {
            Some(s) => spec.sample(s),
            None => spec.member(i as u128),
        };
        let hists = engine.histograms(&f, n_max)?;
        let plus = s_statistic_from_histograms(pair, Sign::Plus, &hists, q)?;
        let minus = s_statistic_from_histograms(pair, Sign::Minus, &hists, q)?;
        let n_interval = if with_zeros {
            let mut total = 0;
            for h in 1..spec.p as i64 {
                let l = l_polynomial_from_histograms(&f, h, q, &hists)?;
                total += count_in_interval(&find_angles(&l)?, interval);
            }
            Some(total)
        } else {
            None
        };
        Ok(SampleValue {
            sample_index: i as u64,
            seed,
            f,
            s_plus: plus.curve,
            s_minus: minus.curve,
            n_interval,
            imaginary: plus.imaginary.max(minus.imaginary),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignMoments {
    pub sign: Sign,
    /// ⟨S^n⟩ for n = 1..=n_max
    pub raw: Vec<f64>,
    pub raw_se: Vec<f64>,
    /// ⟨S^n⟩ / σ^n with σ² = (2(p-1)/π²) log(d|I|)
    pub normalized: Vec<f64>,
    pub normalized_se: Vec<f64>,
    pub predicted_raw: Vec<Option<f64>>,
    pub predicted_normalized: Vec<Option<f64>>,
    /// empirically centred and scaled moments; None below two samples
    pub centered: Option<Vec<f64>>,
    /// 2(p-1) C(K), the exact family mean
    pub mean_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub spec: FamilySpec,
    pub q: u64,
    pub k: usize,
    pub beta: f64,
    pub mode: Mode,
    pub members: usize,
    /// (2(p-1)/π²) log(d|I|)
    pub sigma2: f64,
    /// (2(p-1)/π²) log(K|I|)
    pub main_term: f64,
    pub c_limit: f64,
    pub c_k_plus: f64,
    pub c_k_minus: f64,
    pub signs: Vec<SignMoments>,
    /// ⟨S^+ S^-⟩
    pub cross: f64,
    pub cross_se: f64,
    /// exact ⟨S^+S^+⟩, ⟨S^-S^-⟩, ⟨S^+S^-⟩ from the M2 closed form
    pub second_moment_exact: Option<[f64; 3]>,
    pub max_imaginary: f64,
}

fn double_factorial_odd(l: u32) -> f64 {
    // (2l)! / (l! 2^l)
    (1..=l).map(|i| (2 * i - 1) as f64).product()
}

fn check_k_range(k: usize, beta: f64, d: usize, n_max: usize) -> Result<()> {
    if (k as f64) <= 1.0f64.max(1.0 / beta) {
        return Err(Error::Precondition(format!(
            "K = {k} must exceed max(1, 1/|I|) = {}",
            1.0f64.max(1.0 / beta)
        )));
    }
    if k * n_max >= d {
        return Err(Error::Precondition(format!(
            "K = {k} must be below d/{n_max} = {}",
            d as f64 / n_max as f64
        )));
    }
    Ok(())
}

/// Moments of S^±(K, C_f) over the given samples.
pub fn moments_from_samples(
    spec: &FamilySpec,
    pair: &SelbergPair,
    mode: Mode,
    n_max: usize,
    samples: &[SampleValue],
) -> Result<MomentReport> {
    let p = spec.p;
    let q = spec.q() as u64;
    let k = pair.k();
    let interval = pair.interval();
    let beta = interval.length();
    let sigma2 = variance_scale(p, spec.d as f64 * beta);
    let sigma = sigma2.sqrt();
    let main_term = variance_scale(p, k as f64 * beta);
    let c_limit = limit_c(interval, p, q);
    let c_k_plus = constant_c_k(pair, Sign::Plus, p, q);
    let c_k_minus = constant_c_k(pair, Sign::Minus, p, q);
    let exhaustive = mode == Mode::Exhaustive;
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let log_k = (k as f64 * beta).ln();

    let moments_for = |sign: Sign| -> SignMoments {
        let xs: Vec<f64> = samples
            .iter()
            .map(|s| match sign {
                Sign::Plus => s.s_plus,
                Sign::Minus => s.s_minus,
            })
            .collect();
        let features: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| (1..=n_max as i32).map(|j| x.powi(j)).collect())
            .collect();
        let raw: Vec<f64> = (0..n_max)
            .map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let raw_se: Vec<f64> = (0..n_max)
            .map(|j| {
                if exhaustive {
                    0.0
                } else {
                    jackknife_se(&features, |m| m[j]).unwrap_or(f64::NAN)
                }
            })
            .collect();
        let normalized: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(j, v)| v / sigma.powi(j as i32 + 1))
            .collect();
        let normalized_se: Vec<f64> = raw_se
            .iter()
            .enumerate()
            .map(|(j, v)| v / sigma.powi(j as i32 + 1))
            .collect();
        let mean_exact = 2.0 * (p as f64 - 1.0)
            * match sign {
                Sign::Plus => c_k_plus,
                Sign::Minus => c_k_minus,
            };
        let pm1 = p as f64 - 1.0;
        let mut predicted_raw = Vec::with_capacity(n_max);
        let mut predicted_normalized = Vec::with_capacity(n_max);
        for order in 1..=n_max {
            let (r, z) = if order == 1 {
                (Some(mean_exact), Some(mean_exact / sigma))
            } else if order % 2 == 0 {
                let g = double_factorial_odd(order as u32 / 2);
                (Some(g * main_term.powi(order as i32 / 2)), Some(g))
            } else if order == 3 {
                let coeff = 6.0 * c_limit * pm1 * pm1 / (PI * PI);
                (Some(coeff * log_k), Some(coeff / log_k.sqrt()))
            } else {
                (None, None)
            };
            predicted_raw.push(r);
            predicted_normalized.push(z);
        }
        let centered = if n >= 2 {
            let mean = raw[0];
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 {
                let sd = var.sqrt();
                Some(
                    (1..=n_max as i32)
                        .map(|j| xs.iter().map(|x| ((x - mean) / sd).powi(j)).sum::<f64>() / n as f64)
                        .collect(),
                )
            } else {
                None
            }
        } else {
            None
        };
        SignMoments {
            sign,
            raw,
            raw_se,
            normalized,
            normalized_se,
            predicted_raw,
            predicted_normalized,
            centered,
            mean_exact,
        }
    };

    let cross_rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.s_plus * s.s_minus]).collect();
    let cross = cross_rows.iter().map(|r| r[0]).sum::<f64>() / n as f64;
    let cross_se = if exhaustive {
        0.0
    } else {
        jackknife_se(&cross_rows, |m| m[0]).unwrap_or(f64::NAN)
    };
    let second_moment_exact = if 2 * k < spec.d {
        Some([
            second_moment_structural(pair, [Sign::Plus, Sign::Plus], p, q, spec.d)?,
            second_moment_structural(pair, [Sign::Minus, Sign::Minus], p, q, spec.d)?,
            second_moment_structural(pair, [Sign::Plus, Sign::Minus], p, q, spec.d)?,
        ])
    } else {
        None
    };
    Ok(MomentReport {
        spec: spec.clone(),
        q,
        k,
        beta,
        mode,
        members: n,
        sigma2,
        main_term,
        c_limit,
        c_k_plus,
        c_k_minus,
        signs: vec![moments_for(Sign::Plus), moments_for(Sign::Minus)],
        cross,
        cross_se,
        second_moment_exact,
        max_imaginary: samples.iter().map(|s| s.imaginary).fold(0.0, f64::max),
    })
}

/// Raw and normalized moments of S^±(K, C_f) up to n_max; requires
/// max(1, 1/|I|) < K < d/n_max.
pub fn moments_report(
    engine: &SumEngine,
    spec: &FamilySpec,
    k: usize,
    interval: Interval,
    n_max: usize,
    mode: Mode,
    workers: usize,
) -> Result<(MomentReport, Vec<SampleValue>)> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be positive".into()));
    }
    check_k_range(k, interval.length(), spec.d, n_max)?;
    let pair = build_pair(k, interval)?;
    let samples = collect_samples(engine, spec, &pair, mode, workers, false)?;
    let report = moments_from_samples(spec, &pair, mode, n_max, &samples)?;
    Ok((report, samples))
}

/// Second moments and ⟨S^+S^-⟩; requires max(1, 1/|I|) < K < d/2.
pub fn covariance_report(
    engine: &SumEngine,
    spec: &FamilySpec,
    k: usize,
    interval: Interval,
    mode: Mode,
    workers: usize,
) -> Result<(MomentReport, Vec<SampleValue>)> {
    moments_report(engine, spec, k, interval, 2, mode, workers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDistribution {
    pub sign: Sign,
    pub ks: Option<f64>,
    pub histogram: Option<Histogram>,
    /// (z, empirical CDF, Φ(z))
    pub ecdf: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianReport {
    /// d / log log(d|I|)
    pub k_nominal: f64,
    pub k: usize,
    pub clamped: bool,
    pub variance_defined: bool,
    pub moments: MomentReport,
    pub distributions: Vec<SignDistribution>,
    #[serde(skip)]
    pub samples: Vec<SampleValue>,
}

/// K = min(⌊d / log log(d|I|)⌋, K_max), with the clamp reported.
pub fn gaussian_k(d: usize, beta: f64, q: u64) -> (f64, usize, bool) {
    let x = (d as f64 * beta).ln().ln();
    let nominal = if x > 0.0 { d as f64 / x } else { f64::INFINITY };
    let k_max = gaussian_k_max(q);
    let k = if nominal.is_finite() {
        (nominal.floor() as usize).min(k_max)
    } else {
        k_max
    };
    (nominal, k, nominal.floor() > k as f64)
}

/// The distribution of S^±(K, C_f)/σ over seeded samples, with K chosen
/// by [`gaussian_k`] unless `k_override` is given.
pub fn gaussian_experiment(
    engine: &SumEngine,
    spec: &FamilySpec,
    interval: Interval,
    samples: usize,
    seed: u64,
    workers: usize,
    k_override: Option<usize>,
) -> Result<GaussianReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    let (k_nominal, auto_k, clamped) = gaussian_k(spec.d, interval.length(), engine.q() as u64);
    let k = k_override.unwrap_or(auto_k);
    let mode = Mode::MonteCarlo { samples, seed };
    let pair = build_pair(k, interval)?;
    let values = collect_samples(engine, spec, &pair, mode, workers, false)?;
    let moments = moments_from_samples(spec, &pair, mode, 4, &values)?;
    let sigma = moments.sigma2.sqrt();
    let distributions = Sign::both()
        .into_iter()
        .map(|sign| {
            let z: Vec<f64> = values
                .iter()
                .map(|s| match sign {
                    Sign::Plus => s.s_plus,
                    Sign::Minus => s.s_minus,
                } / sigma)
                .collect();
            SignDistribution {
                sign,
                ks: ks_statistic_normal(&z),
                histogram: histogram(&z),
                ecdf: ecdf_grid(&z),
            }
        })
        .collect();
    Ok(GaussianReport {
        k_nominal,
        k,
        clamped: k_override.is_none() && clamped,
        variance_defined: samples >= 2,
        moments,
        distributions,
        samples: values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareReport {
    pub spec: FamilySpec,
    pub k: usize,
    pub beta: f64,
    pub members: usize,
    /// ⟨(N_I(C_f) - (d-1)(p-1)|I| + S^±)²⟩
    pub mean_square_plus: f64,
    pub mean_square_minus: f64,
    /// ((p-1)(d-1)/(K+1))²
    pub scale: f64,
    /// members and characters where the pointwise sandwich failed
    pub sandwich_violations: usize,
    pub sandwich_checks: usize,
    /// ⟨N_I(f, ψ) - (d-1)|I|⟩ at h = 1
    pub first_moment: f64,
    pub c_k_plus: f64,
    pub c_k_minus: f64,
    pub max_rh_residual: f64,
}

/// Exhaustive mean-square and sandwich check; needs zeros of every member.
pub fn mean_square_check(
    engine: &SumEngine,
    spec: &FamilySpec,
    interval: Interval,
    k: usize,
    workers: usize,
) -> Result<MeanSquareReport> {
    let pair = build_pair(k, interval)?;
    let p = spec.p;
    let q = spec.q() as u64;
    let d = spec.d;
    let beta = interval.length();
    let size = spec.family_size();
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::FamilyTooLarge {
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let n_max = (d - 1).max(k) as u32;
    for n in 1..=n_max {
        engine.kernel(n, d)?;
    }
    let slack = (d as f64 - 1.0) / (k as f64 + 1.0);
    struct Row {
        plus: f64,
        minus: f64,
        violations: usize,
        first: f64,
        rh: f64,
    }
    let rows = run_indexed(size as usize, workers, |i| {
        let f = spec.member(i as u128);
        let hists = engine.histograms(&f, n_max)?;
        let plus = s_statistic_from_histograms(&pair, Sign::Plus, &hists, q)?;
        let minus = s_statistic_from_histograms(&pair, Sign::Minus, &hists, q)?;
        let mut total = 0usize;
        let mut violations = 0;
        let mut first = 0.0;
        let mut rh: f64 = 0.0;
        for h in 1..p as i64 {
            let angles = find_angles(&l_polynomial_from_histograms(&f, h, q, &hists)?)?;
            rh = rh.max(angles.rh_residual);
            let count = count_in_interval(&angles, interval);
            total += count;
            let dev = count as f64 - (d as f64 - 1.0) * beta;
            let lo = -minus.per_character[h as usize - 1].re - slack;
            let hi = -plus.per_character[h as usize - 1].re + slack;
            if dev < lo - 1e-9 || dev > hi + 1e-9 {
                violations += 1;
            }
            if h == 1 {
                first = dev;
            }
        }
        let centred = total as f64 - (d as f64 - 1.0) * (p as f64 - 1.0) * beta;
        Ok(Row {
            plus: (centred + plus.curve).powi(2),
            minus: (centred + minus.curve).powi(2),
            violations,
            first,
            rh,
        })
    })?;
    let n = rows.len() as f64;
    Ok(MeanSquareReport {
        spec: spec.clone(),
        k,
        beta,
        members: rows.len(),
        mean_square_plus: rows.iter().map(|r| r.plus).sum::<f64>() / n,
        mean_square_minus: rows.iter().map(|r| r.minus).sum::<f64>() / n,
        scale: ((p as f64 - 1.0) * (d as f64 - 1.0) / (k as f64 + 1.0)).powi(2),
        sandwich_violations: rows.iter().map(|r| r.violations).sum(),
        sandwich_checks: rows.len() * (p as usize - 1),
        first_moment: rows.iter().map(|r| r.first).sum::<f64>() / n,
        c_k_plus: constant_c_k(&pair, Sign::Plus, p, q),
        c_k_minus: constant_c_k(&pair, Sign::Minus, p, q),
        max_rh_residual: rows.iter().map(|r| r.rh).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Variant;

    #[test]
    fn k_selection() {
        assert_eq!(gaussian_k_max(3), 10);
        assert_eq!(gaussian_k_max(5), 6);
        let (nominal, k, clamped) = gaussian_k(41, 0.5, 3);
        assert!(nominal > 30.0);
        assert_eq!(k, 10);
        assert!(clamped);
    }

    #[test]
    fn k_range_guard() {
        let engine = SumEngine::new(3, 1).unwrap();
        let spec = FamilySpec::new(3, 1, 7, Variant::PrimeToP).unwrap();
        let i = Interval::new(0.9).unwrap();
        assert!(covariance_report(&engine, &spec, 4, i, Mode::Exhaustive, 1).is_err());
        assert!(covariance_report(&engine, &spec, 1, i, Mode::Exhaustive, 1).is_err());
    }

    #[test]
    fn one_sample_flags_variance() {
        let engine = SumEngine::new(3, 1).unwrap();
        let spec = FamilySpec::new(3, 1, 20, Variant::PrimeToP).unwrap();
        let r = gaussian_experiment(&engine, &spec, Interval::new(0.5).unwrap(), 1, 3, 1, Some(3)).unwrap();
        assert!(!r.variance_defined);
        assert!(r.moments.signs[0].centered.is_none());
        assert!(r.moments.signs[0].raw_se[0].is_nan());
    }

    #[test]
    fn exhaustive_mean_is_exact() {
        let engine = SumEngine::new(3, 1).unwrap();
        let spec = FamilySpec::new(3, 1, 7, Variant::PrimeToP).unwrap();
        let (r, _) = covariance_report(&engine, &spec, 3, Interval::new(0.9).unwrap(), Mode::Exhaustive, 2).unwrap();
        for s in &r.signs {
            assert!((s.raw[0] - s.mean_exact).abs() < 1e-10, "{} vs {}", s.raw[0], s.mean_exact);
            assert_eq!(s.raw_se, vec![0.0, 0.0]);
        }
        let exact = r.second_moment_exact.unwrap();
        assert!((r.signs[0].raw[1] - exact[0]).abs() < 1e-9);
        assert!((r.signs[1].raw[1] - exact[1]).abs() < 1e-9);
        assert!((r.cross - exact[2]).abs() < 1e-9);
    }
}
