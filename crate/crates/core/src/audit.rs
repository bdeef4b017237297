//! Pinned O(1) constants for the property bands, and the run that measures
//! how much of each band the current build uses.

use serde::{Deserialize, Serialize};

use crate::beurling_selberg::{build_pair, coefficient_sums, PROP_FR_AUDIT};
use crate::error::{Error, Result};
use crate::family::{FamilySpec, Variant};
use crate::lfun::SumEngine;
use crate::statistics::{covariance_report, mean_square_check, Mode};
use crate::zeros::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConstants {
    /// |coefficient sum - log(K|I|)/(2π²)| bound
    pub prop_fr: f64,
    /// half-width of the band around (2(p-1)/π²) log(K|I|) for second moments
    pub covariance_band: f64,
    /// mean square <= factor · ((p-1)(d-1)/(K+1))²
    pub mean_square_factor: f64,
    /// multiplier on the third-moment C-term
    pub third_moment_safety: f64,
    /// |⟨N_I(f, ψ) - (d-1)|I|⟩| <= 2|C(K)| + slack
    pub first_moment_slack: f64,
}

pub const AUDIT: AuditConstants = AuditConstants {
    prop_fr: PROP_FR_AUDIT,
    covariance_band: 2.5,
    mean_square_factor: 4.0,
    third_moment_safety: 2.0,
    first_moment_slack: 1.0,
};

pub const BS_GRID_K: [usize; 4] = [5, 10, 50, 200];
pub const BS_GRID_BETA: [f64; 4] = [0.1, 0.25, 0.5, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observed {
    pub prop_fr_max_deviation: f64,
    pub covariance_max_deviation: f64,
    pub mean_square_max_ratio: f64,
    pub first_moment_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFixture {
    pub constants: AuditConstants,
    pub observed: Observed,
    pub covariance_seed: u64,
    pub covariance_samples: usize,
}

impl AuditFixture {
    pub fn from_json(text: &str) -> Result<AuditFixture> {
        let fixture: AuditFixture =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("audit fixture: {e}")))?;
        let c = &fixture.constants;
        for v in [
            c.prop_fr,
            c.covariance_band,
            c.mean_square_factor,
            c.third_moment_safety,
            c.first_moment_slack,
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!("audit constant {v} must be positive")));
            }
        }
        Ok(fixture)
    }

    /// Every observed value inside its pinned band.
    pub fn within_bands(&self) -> bool {
        let c = &self.constants;
        let o = &self.observed;
        o.prop_fr_max_deviation <= c.prop_fr
            && o.covariance_max_deviation <= c.covariance_band
            && o.mean_square_max_ratio <= c.mean_square_factor
            && o.first_moment_excess <= c.first_moment_slack
    }
}

/// Largest coefficient-sum deviation over the grid points with K|I| > 1.
pub fn prop_fr_max_deviation() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in BS_GRID_K {
        for beta in BS_GRID_BETA {
            if k as f64 * beta <= 1.0 {
                continue;
            }
            let pair = build_pair(k, Interval::new(beta)?)?;
            worst = worst.max(coefficient_sums(&pair)?.max_deviation());
        }
    }
    Ok(worst)
}

/// Measures every audited quantity at its reference configuration.
pub fn calibrate(samples: usize, seed: u64, workers: usize) -> Result<AuditFixture> {
    let engine = SumEngine::new(3, 1)?;
    let half = Interval::new(0.5)?;

    let spec = FamilySpec::new(3, 1, 41, Variant::PrimeToP)?;
    let (cov, _) = covariance_report(&engine, &spec, 8, half, Mode::MonteCarlo { samples, seed }, workers)?;
    let covariance_max_deviation = [cov.signs[0].raw[1], cov.signs[1].raw[1], cov.cross]
        .iter()
        .map(|v| (v - cov.main_term).abs())
        .fold(0.0, f64::max);

    let small = FamilySpec::new(3, 1, 8, Variant::PrimeToP)?;
    let ms = mean_square_check(&engine, &small, half, 3, workers)?;
    let mean_square_max_ratio = ms.mean_square_plus.max(ms.mean_square_minus) / ms.scale;
    let first_moment_excess =
        ms.first_moment.abs() - 2.0 * ms.c_k_plus.abs().max(ms.c_k_minus.abs());

    Ok(AuditFixture {
        constants: AUDIT,
        observed: Observed {
            prop_fr_max_deviation: prop_fr_max_deviation()?,
            covariance_max_deviation,
            mean_square_max_ratio,
            first_moment_excess,
        },
        covariance_seed: seed,
        covariance_samples: samples,
    })
}
