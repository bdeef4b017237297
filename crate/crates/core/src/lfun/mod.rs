//! Character sums, L-polynomials, zeta numerators and point counts.
//!
//! Everything starts from exact trace histograms; complex arithmetic only
//! enters when a histogram is weighted by p-th roots of unity.

mod kernel;
mod primes;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::PolyOverFq;
use crate::field_tower::split_prime_power;

pub use kernel::{trace_histogram_direct, SumEngine, TraceKernel};
pub use primes::{
    enumerate_monic_irreducibles, l_polynomial_euler, prime_count, von_mangoldt_sum,
    MonicIrreducible,
};

/// Default tolerance for rounding zeta coefficients to integers.
pub const ZETA_TOLERANCE: f64 = 1e-6;

/// c_j = #{x in F_{q^n} : tr_n(f(x)) = j}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceHistogram {
    pub n: u32,
    pub counts: Vec<u64>,
}

impl TraceHistogram {
    pub fn p(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Σ_j c_j ζ_p^{hj}; any integer h is accepted, h = 0 gives the total.
    pub fn weighted(&self, h: i64) -> Complex64 {
        let p = self.p() as i64;
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * root_of_unity(h * j as i64, p))
            .sum()
    }
}

/// e^{2πi k/p}, reduced exactly before the float step.
pub fn root_of_unity(k: i64, p: i64) -> Complex64 {
    let k = k.rem_euclid(p);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharSumValue {
    pub value: Complex64,
    pub h: i64,
    pub histogram: TraceHistogram,
}

/// S_n(f, ψ^h) from the histogram of tr_n ∘ f.
pub fn char_sum(hist: &TraceHistogram, h: i64) -> Result<CharSumValue> {
    let p = hist.p();
    if h.rem_euclid(p as i64) == 0 {
        return Err(Error::PDividesCharacter { p, h });
    }
    Ok(CharSumValue {
        value: hist.weighted(h),
        h,
        histogram: hist.clone(),
    })
}

/// Coefficients c_0..c_{len-1} of exp(Σ_n S_n u^n / n), where `sums[n-1]`
/// is S_n. Uses m c_m = Σ_{j=1}^m S_j c_{m-j}.
pub fn newton_series(sums: &[Complex64], len: usize) -> Vec<Complex64> {
    assert!(len == 0 || sums.len() + 1 >= len, "not enough power sums");
    let mut c: Vec<Complex64> = Vec::with_capacity(len);
    for m in 0..len {
        if m == 0 {
            c.push(Complex64::new(1.0, 0.0));
            continue;
        }
        let acc: Complex64 = (1..=m).map(|j| sums[j - 1] * c[m - j]).sum();
        c.push(acc / m as f64);
    }
    c
}

/// L(u, f, ψ^h) as a polynomial in u.
#[derive(Debug, Clone, PartialEq)]
pub struct LPolynomial {
    pub coefficients: Vec<Complex64>,
    pub q: u64,
    pub f: PolyOverFq,
    pub h: i64,
}

#[derive(Serialize, Deserialize)]
struct Provenance {
    f: PolyOverFq,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<i64>,
    q: u64,
}

#[derive(Serialize, Deserialize)]
struct LPolynomialRecord {
    degree: usize,
    coefficients: Vec<[f64; 2]>,
    provenance: Provenance,
}

impl LPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let record = LPolynomialRecord {
            degree: self.degree(),
            coefficients: self.coefficients.iter().map(|c| [c.re, c.im]).collect(),
            provenance: Provenance {
                f: self.f.clone(),
                h: Some(self.h),
                q: self.q,
            },
        };
        serde_json::to_value(record).expect("serializable")
    }

    /// Inverse of [`LPolynomial::to_json`], with shape checks.
    pub fn from_json(text: &str) -> Result<LPolynomial> {
        let record: LPolynomialRecord =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if record.coefficients.is_empty() {
            return Err(Error::Parse("no coefficients".into()));
        }
        if record.degree + 1 != record.coefficients.len() {
            return Err(Error::Parse(format!(
                "degree {} but {} coefficients",
                record.degree,
                record.coefficients.len()
            )));
        }
        if record.coefficients.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite coefficient".into()));
        }
        if (Complex64::new(record.coefficients[0][0], record.coefficients[0][1]) - 1.0).norm() > 1e-9 {
            return Err(Error::Parse("constant term must be 1".into()));
        }
        let h = record
            .provenance
            .h
            .ok_or_else(|| Error::Parse("missing character index".into()))?;
        let (p, _) = split_prime_power(record.provenance.q).map_err(|e| Error::Parse(e.to_string()))?;
        check_character(p, h).map_err(|e| Error::Parse(e.to_string()))?;
        record
            .provenance
            .f
            .check_field(record.provenance.q as u32)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(LPolynomial {
            coefficients: record
                .coefficients
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
            q: record.provenance.q,
            f: record.provenance.f,
            h,
        })
    }
}

fn check_character(p: u32, h: i64) -> Result<()> {
    if h.rem_euclid(p as i64) == 0 {
        return Err(Error::PDividesCharacter { p, h });
    }
    Ok(())
}

/// L(u, f, ψ^h) from precomputed histograms for n = 1..d-1.
pub fn l_polynomial_from_histograms(
    f: &PolyOverFq,
    h: i64,
    q: u64,
    hists: &[TraceHistogram],
) -> Result<LPolynomial> {
    let d = f
        .degree()
        .ok_or_else(|| Error::InvalidPolynomial("zero polynomial".into()))?;
    let p = hists.first().map(|h| h.p()).unwrap_or(3);
    check_character(p, h)?;
    if hists.len() + 1 < d {
        return Err(Error::Precondition(format!(
            "need histograms up to n = {}, have {}",
            d - 1,
            hists.len()
        )));
    }
    let sums: Vec<Complex64> = hists[..d - 1].iter().map(|hist| hist.weighted(h)).collect();
    Ok(LPolynomial {
        coefficients: newton_series(&sums, d),
        q,
        f: f.clone(),
        h,
    })
}

/// L(u, f, ψ^h) via the Newton recursion on S_1..S_{d-1}.
pub fn l_polynomial(engine: &SumEngine, f: &PolyOverFq, h: i64) -> Result<LPolynomial> {
    let d = f.check_artin_schreier(engine.p(), engine.q())?;
    check_character(engine.p(), h)?;
    let hists = engine.histograms(f, d as u32 - 1)?;
    l_polynomial_from_histograms(f, h, engine.q() as u64, &hists)
}

/// L(u, f, ψ^h) for h = 1..p-1, sharing one set of histograms.
pub fn l_polynomials(engine: &SumEngine, f: &PolyOverFq) -> Result<Vec<LPolynomial>> {
    let d = f.check_artin_schreier(engine.p(), engine.q())?;
    let hists = engine.histograms(f, d as u32 - 1)?;
    (1..engine.p() as i64)
        .map(|h| l_polynomial_from_histograms(f, h, engine.q() as u64, &hists))
        .collect()
}

/// Integer coefficients of P_{C_f}(u), degree 2g = (d-1)(p-1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaNumerator {
    pub coefficients: Vec<i64>,
    pub genus: usize,
    pub q: u64,
    /// largest |c - round(c)| / (1 + |c|) seen while rounding
    pub residual: f64,
    pub f: PolyOverFq,
}

impl ZetaNumerator {
    /// s_n = Σ α^n over the reciprocal roots, n = 1..=n_max, from the
    /// integer coefficients: s_n = -n a_n - Σ_{k<n} a_k s_{n-k}.
    pub fn power_sums(&self, n_max: usize) -> Vec<i128> {
        let a = |k: usize| self.coefficients.get(k).copied().unwrap_or(0) as i128;
        let mut s: Vec<i128> = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let mut v = -(n as i128) * a(n);
            for k in 1..n {
                v -= a(k) * s[n - k - 1];
            }
            s.push(v);
        }
        s
    }

    /// #C_f(F_{q^n}) = q^n + 1 - Σ α^n.
    pub fn point_count(&self, n: usize) -> i128 {
        let s = self.power_sums(n);
        (self.q as i128).pow(n as u32) + 1 - s[n - 1]
    }

    /// Checks coeff_{2g-k} = q^{g-k} coeff_k for k <= g.
    pub fn functional_equation_holds(&self) -> bool {
        let g = self.genus;
        if self.coefficients.len() != 2 * g + 1 {
            return false;
        }
        (0..=g).all(|k| {
            (self.q as i128)
                .checked_pow((g - k) as u32)
                .and_then(|w| w.checked_mul(self.coefficients[k] as i128))
                == Some(self.coefficients[2 * g - k] as i128)
        })
    }
}

/// P_{C_f} = Π_{h=1}^{p-1} L(u, f, ψ^h), rounded to integers.
pub fn zeta_numerator(engine: &SumEngine, f: &PolyOverFq) -> Result<ZetaNumerator> {
    zeta_numerator_with_tolerance(engine, f, ZETA_TOLERANCE)
}

pub fn zeta_numerator_with_tolerance(
    engine: &SumEngine,
    f: &PolyOverFq,
    tolerance: f64,
) -> Result<ZetaNumerator> {
    let ls = l_polynomials(engine, f)?;
    zeta_from_l_polynomials(&ls, engine.p(), tolerance)
}

pub fn zeta_from_l_polynomials(
    ls: &[LPolynomial],
    p: u32,
    tolerance: f64,
) -> Result<ZetaNumerator> {
    let first = ls
        .first()
        .ok_or_else(|| Error::InvalidParameter("no L-polynomials".into()))?;
    let mut product = vec![Complex64::new(1.0, 0.0)];
    for l in ls {
        let mut next = vec![Complex64::new(0.0, 0.0); product.len() + l.coefficients.len() - 1];
        for (i, &a) in product.iter().enumerate() {
            for (j, &b) in l.coefficients.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        product = next;
    }
    let mut residual: f64 = 0.0;
    let mut coefficients = Vec::with_capacity(product.len());
    for (k, c) in product.iter().enumerate() {
        if c.norm() > (1u64 << 52) as f64 {
            return Err(Error::Numerical(format!(
                "coefficient {k} too large for exact rounding"
            )));
        }
        let rounded = c.re.round();
        let err = (c - Complex64::new(rounded, 0.0)).norm();
        let scale = 1.0 + c.norm();
        residual = residual.max(err / scale);
        if err > tolerance * scale {
            return Err(Error::Numerical(format!(
                "coefficient {k} = {c} is not within {tolerance} of an integer"
            )));
        }
        coefficients.push(rounded as i64);
    }
    let d = first.coefficients.len();
    let zeta = ZetaNumerator {
        coefficients,
        genus: (d - 1) * (p as usize - 1) / 2,
        q: first.q,
        residual,
        f: first.f.clone(),
    };
    if !zeta.functional_equation_holds() {
        return Err(Error::Numerical(
            "functional equation fails after rounding".into(),
        ));
    }
    Ok(zeta)
}

/// #C_f(F_{q^n}) counted directly: the point at infinity plus p points
/// over every x with tr_n(f(x)) = 0.
pub fn point_count(engine: &SumEngine, f: &PolyOverFq, n: u32) -> Result<u64> {
    f.check_artin_schreier(engine.p(), engine.q())?;
    let hist = engine.trace_histogram(f, n)?;
    Ok(1 + engine.p() as u64 * hist.counts[0])
}
