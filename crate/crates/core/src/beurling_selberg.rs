//! Selberg's majorant and minorant of a symmetric interval, built from
//! Vaaler's approximation to the sawtooth plus a Fejér correction:
//!
//! Î^±(k) = Ĵ(|k|/(K+1)) sin(πkβ)/(πk) ± (1 - |k|/(K+1)) cos(πkβ)/(K+1)
//! Î^±(0) = β ± 1/(K+1)
//!
//! with Ĵ(u) = πu(1-u) cot(πu) + u.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zeros::{e, Interval};

/// Audit band for the coefficient-sum asymptotics.
pub const PROP_FR_AUDIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

/// Vaaler's weight Ĵ(u) on [0, 1).
pub fn vaaler_weight(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    PI * u * (1.0 - u) / (PI * u).tan() + u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelbergPair {
    k: usize,
    interval: Interval,
    /// Î^+(0..=K)
    plus: Vec<f64>,
    /// Î^-(0..=K)
    minus: Vec<f64>,
}

pub fn build_pair(k: usize, interval: Interval) -> Result<SelbergPair> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let beta = interval.length();
    let k1 = (k + 1) as f64;
    let mut plus = Vec::with_capacity(k + 1);
    let mut minus = Vec::with_capacity(k + 1);
    plus.push(beta + 1.0 / k1);
    minus.push(beta - 1.0 / k1);
    for j in 1..=k {
        let u = j as f64 / k1;
        let x = PI * j as f64;
        let main = vaaler_weight(u) * (x * beta).sin() / x;
        let fejer = (1.0 - u) * (x * beta).cos() / k1;
        plus.push(main + fejer);
        minus.push(main - fejer);
    }
    Ok(SelbergPair {
        k,
        interval,
        plus,
        minus,
    })
}

impl SelbergPair {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Î^±(k), zero outside |k| <= K.
    pub fn coeff(&self, sign: Sign, k: i64) -> f64 {
        let table = match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        };
        table.get(k.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// I^±(x), using evenness.
    pub fn eval(&self, sign: Sign, x: f64) -> f64 {
        let mut v = self.coeff(sign, 0);
        for k in 1..=self.k {
            v += 2.0 * self.coeff(sign, k as i64) * (2.0 * PI * k as f64 * x).cos();
        }
        v
    }

    /// Σ_{|k|<=K} Î^±(k) e(kx) without folding the symmetric terms.
    pub fn eval_complex(&self, sign: Sign, x: f64) -> Complex64 {
        let k = self.k as i64;
        (-k..=k).map(|j| self.coeff(sign, j) * e(j as f64 * x)).sum()
    }

    /// (k, Î^+(k), Î^-(k)) for k = 0..=K.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        (0..=self.k).map(|k| (k, self.plus[k], self.minus[k])).collect()
    }
}

/// Numerical audit of the defining properties over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    /// min over the grid of I^+ - χ (must be >= 0)
    pub majorant_gap: f64,
    /// min over the grid of χ - I^- (must be >= 0)
    pub minorant_gap: f64,
    /// max |Î^±(0) - (β ± 1/(K+1))|
    pub mass_error: f64,
    /// max |Im I^±(x)| from the unfolded sum
    pub max_imaginary: f64,
    /// max_k |Î^±(k) - sin(πkβ)/(πk)| - 1/(K+1) (must be <= 0)
    pub coefficient_excess: f64,
    pub holds: bool,
}

/// Slack for rounding in the pointwise comparisons.
const FLOAT_SLACK: f64 = 1e-12;

pub fn check_properties(pair: &SelbergPair, grid: usize) -> PropertyReport {
    let beta = pair.interval.length();
    let half = beta / 2.0;
    let k1 = (pair.k + 1) as f64;
    let chi = |x: f64| if x.abs() <= half { 1.0 } else { 0.0 };

    let mut points: Vec<f64> = (0..grid).map(|i| -0.5 + i as f64 / grid as f64).collect();
    for s in [-1.0, 1.0] {
        for off in [-1e-9, 0.0, 1e-9] {
            points.push(s * half + off);
        }
    }

    let mut majorant_gap = f64::INFINITY;
    let mut minorant_gap = f64::INFINITY;
    let mut max_imaginary: f64 = 0.0;
    for (i, &x) in points.iter().enumerate() {
        majorant_gap = majorant_gap.min(pair.eval(Sign::Plus, x) - chi(x));
        minorant_gap = minorant_gap.min(chi(x) - pair.eval(Sign::Minus, x));
        if i % 97 == 0 || i >= grid {
            for s in Sign::both() {
                max_imaginary = max_imaginary.max(pair.eval_complex(s, x).im.abs());
            }
        }
    }

    let mass_error = (pair.coeff(Sign::Plus, 0) - (beta + 1.0 / k1))
        .abs()
        .max((pair.coeff(Sign::Minus, 0) - (beta - 1.0 / k1)).abs());

    let mut coefficient_excess = f64::NEG_INFINITY;
    for k in 1..=pair.k as i64 {
        let target = (PI * k as f64 * beta).sin() / (PI * k as f64);
        for s in Sign::both() {
            coefficient_excess =
                coefficient_excess.max((pair.coeff(s, k) - target).abs() - 1.0 / k1);
        }
    }

    let holds = majorant_gap >= -FLOAT_SLACK
        && minorant_gap >= -FLOAT_SLACK
        && mass_error <= FLOAT_SLACK
        && max_imaginary <= FLOAT_SLACK
        && coefficient_excess <= FLOAT_SLACK;
    PropertyReport {
        majorant_gap,
        minorant_gap,
        mass_error,
        max_imaginary,
        coefficient_excess,
        holds,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSums {
    /// Σ_{k>=1} Î^+(2k)
    pub sum_even_plus: f64,
    /// Σ_{k>=1} Î^-(2k)
    pub sum_even_minus: f64,
    /// Σ Î^+(k)^2 k
    pub sum_sq_plus: f64,
    /// Σ Î^-(k)^2 k
    pub sum_sq_minus: f64,
    /// Σ Î^+(k) Î^-(k) k
    pub sum_cross: f64,
    /// (1/2π²) log(K|I|)
    pub main_term: f64,
}

impl CoefficientSums {
    /// Largest deviation of the three quadratic sums from the main term.
    pub fn max_deviation(&self) -> f64 {
        [self.sum_sq_plus, self.sum_sq_minus, self.sum_cross]
            .iter()
            .map(|s| (s - self.main_term).abs())
            .fold(0.0, f64::max)
    }
}

pub fn coefficient_sums(pair: &SelbergPair) -> Result<CoefficientSums> {
    let kb = pair.k as f64 * pair.interval.length();
    if kb <= 1.0 {
        return Err(Error::Precondition(format!(
            "K|I| = {kb} must exceed 1"
        )));
    }
    let k = pair.k as i64;
    let even = |s| (1..=k / 2).map(|j| pair.coeff(s, 2 * j)).sum::<f64>();
    let quad = |a: Sign, b: Sign| {
        (1..=k)
            .map(|j| pair.coeff(a, j) * pair.coeff(b, j) * j as f64)
            .sum::<f64>()
    };
    Ok(CoefficientSums {
        sum_even_plus: even(Sign::Plus),
        sum_even_minus: even(Sign::Minus),
        sum_sq_plus: quad(Sign::Plus, Sign::Plus),
        sum_sq_minus: quad(Sign::Minus, Sign::Minus),
        sum_cross: quad(Sign::Plus, Sign::Minus),
        main_term: kb.ln() / (2.0 * PI * PI),
    })
}

/// Σ_{k=1}^K |Î^±(k)|^a k^b q^{-ck}.
pub fn geometric_sum(pair: &SelbergPair, sign: Sign, a: f64, b: f64, c: f64, q: f64) -> f64 {
    (1..=pair.k as i64)
        .map(|k| pair.coeff(sign, k).abs().powf(a) * (k as f64).powf(b) * q.powf(-c * k as f64))
        .sum()
}

/// q^{-(1/2 - 1/p)}, the decay rate of the first-moment series.
fn decay(p: u32, q: u64) -> f64 {
    (q as f64).powf(-(0.5 - 1.0 / p as f64))
}

/// C(K) = Σ_{k<=K} Î^±(k) e_{p,k} q^{-(1/2-1/p)k}.
pub fn constant_c_k(pair: &SelbergPair, sign: Sign, p: u32, q: u64) -> f64 {
    let rho = decay(p, q);
    (1..=pair.k as i64)
        .filter(|k| k % p as i64 == 0)
        .map(|k| pair.coeff(sign, k) * rho.powi(k as i32))
        .sum()
}

/// C = Σ_{k>=1} sin(πk|I|)/(πk) e_{p,k} q^{-(1/2-1/p)k}, stopped once the
/// geometric tail bound drops below 1e-12.
pub fn limit_c(interval: Interval, p: u32, q: u64) -> f64 {
    let rho = decay(p, q);
    let beta = interval.length();
    let mut total = 0.0;
    let mut k: u64 = 0;
    loop {
        k += p as u64;
        let x = PI * k as f64;
        total += (x * beta).sin() / x * rho.powf(k as f64);
        let tail = rho.powf((k + 1) as f64) / (1.0 - rho);
        if tail < 1e-12 {
            break;
        }
    }
    total
}
