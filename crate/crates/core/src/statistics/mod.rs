//! Truncated explicit-formula statistics S^±(K, f, ψ^h), their family
//! averages, and the moment experiments built on them.

mod exact;
mod io;
mod montecarlo;
mod reports;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beurling_selberg::{SelbergPair, Sign};
use crate::error::{Error, Result};
use crate::family::PolyOverFq;
use crate::lfun::{SumEngine, TraceHistogram};

pub use exact::*;
pub use io::*;
pub use montecarlo::*;
pub use reports::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SStatistic {
    pub k: usize,
    pub sign: Sign,
    /// S^±(K, f, ψ^h) for h = 1..p-1
    pub per_character: Vec<Complex64>,
    /// S^±(K, C_f), the real part of the sum over h
    pub curve: f64,
    /// |Im Σ_h S^±(K, f, ψ^h)|
    pub imaginary: f64,
}

/// S^±(K, f, ψ^h) = Σ_{k=1}^K [Î(k) S_k(f, ψ^h) + Î(-k) S_k(f, ψ^{-h})] / q^{k/2}
/// from histograms `hists[n - 1]`, n = 1..=K at least.
pub fn s_statistic_from_histograms(
    pair: &SelbergPair,
    sign: Sign,
    hists: &[TraceHistogram],
    q: u64,
) -> Result<SStatistic> {
    let k = pair.k();
    if hists.len() < k {
        return Err(Error::InvalidParameter(format!(
            "need trace histograms up to n = {k}, got {}",
            hists.len()
        )));
    }
    let p = hists[0].p() as i64;
    let sq = (q as f64).sqrt();
    let per_character: Vec<Complex64> = (1..p)
        .map(|h| {
            let mut total = Complex64::new(0.0, 0.0);
            let mut scale = 1.0;
            for (j, hist) in hists.iter().take(k).enumerate() {
                scale *= sq;
                let kk = j as i64 + 1;
                total += (pair.coeff(sign, kk) * hist.weighted(h)
                    + pair.coeff(sign, -kk) * hist.weighted(-h))
                    / scale;
            }
            total
        })
        .collect();
    let sum: Complex64 = per_character.iter().sum();
    Ok(SStatistic {
        k,
        sign,
        per_character,
        curve: sum.re,
        imaginary: sum.im.abs(),
    })
}

pub fn s_statistic(engine: &SumEngine, f: &PolyOverFq, pair: &SelbergPair, sign: Sign) -> Result<SStatistic> {
    f.check_artin_schreier(engine.p(), engine.q())?;
    let hists = engine.histograms(f, pair.k() as u32)?;
    s_statistic_from_histograms(pair, sign, &hists, engine.q() as u64)
}

/// (2(p-1)/π²) log(x), the variance scale at x = d|I| or K|I|.
pub fn variance_scale(p: u32, x: f64) -> f64 {
    2.0 * (p as f64 - 1.0) / (PI * PI) * x.ln()
}

/// Σ_{h1,h2=1}^{p-1} Σ_{k1,k2=1}^{K} Σ_{e1,e2=±1} Î^a(e1k1) Î^b(e2k2) M2,
/// the expansion of ⟨S^a(K, C_f) S^b(K, C_f)⟩ in M-quantities.
pub fn second_moment_expansion<F>(pair: &SelbergPair, signs: [Sign; 2], p: u32, mut m2: F) -> Result<Complex64>
where
    F: FnMut([u32; 2], [i8; 2], [i64; 2]) -> Result<Complex64>,
{
    let k = pair.k() as u32;
    let mut total = Complex64::new(0.0, 0.0);
    for h1 in 1..p as i64 {
        for h2 in 1..p as i64 {
            for k1 in 1..=k {
                for k2 in 1..=k {
                    for e1 in [1i8, -1] {
                        for e2 in [1i8, -1] {
                            let w = pair.coeff(signs[0], e1 as i64 * k1 as i64)
                                * pair.coeff(signs[1], e2 as i64 * k2 as i64);
                            total += w * m2([k1, k2], [e1, e2], [h1, h2])?;
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

/// ⟨S^a S^b⟩ from the structural M2 formula; exact when 2K < d.
pub fn second_moment_structural(pair: &SelbergPair, signs: [Sign; 2], p: u32, q: u64, d: usize) -> Result<f64> {
    if 2 * pair.k() >= d {
        return Err(Error::Precondition(format!(
            "the closed form needs 2K < d (K = {}, d = {d})",
            pair.k()
        )));
    }
    let v = second_moment_expansion(pair, signs, p, |ks, es, hs| {
        Ok(Complex64::new(m2_structural(ks, es, hs, p, q), 0.0))
    })?;
    Ok(v.re)
}
