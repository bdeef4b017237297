//! Monic irreducibles over F_q and the sums over them.
//!
//! An irreducible of degree m is the minimal polynomial of a Frobenius
//! orbit of size m in F_{q^m}, so enumeration walks the orbits of F_{q^m}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{evaluate, PolyOverFq};
use crate::field_tower::{Elem, FieldTower};

use super::{check_character, root_of_unity, LPolynomial, SumEngine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonicIrreducible {
    /// F_q vector indices, constant term first, leading 1
    pub coeffs: Vec<u32>,
    /// one root, in F_{q^m}
    pub root: Elem,
}

impl MonicIrreducible {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// The monic irreducibles of degree m, sorted by coefficient tuple.
pub fn enumerate_monic_irreducibles(tower: &FieldTower, m: u32) -> Result<Vec<MonicIrreducible>> {
    let field = tower.field(m)?;
    let mut seen = vec![false; field.order() as usize];
    let mut out = Vec::new();
    for x in field.elements() {
        if seen[x.raw() as usize] {
            continue;
        }
        let mut y = x;
        let mut size = 0;
        loop {
            seen[y.raw() as usize] = true;
            size += 1;
            y = field.frobenius_q(y, 1);
            if y == x {
                break;
            }
        }
        if size == m {
            out.push(MonicIrreducible {
                coeffs: field.minimal_polynomial(x),
                root: x,
            });
        }
    }
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

fn mobius(mut n: u64) -> i32 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// π(m) = (1/m) Σ_{e | m} μ(e) q^{m/e}.
pub fn prime_count(q: u64, m: u32) -> u128 {
    let mut total: i128 = 0;
    for e in (1..=m).filter(|e| m.is_multiple_of(*e)) {
        total += mobius(e as u64) as i128 * (q as i128).pow(m / e);
    }
    (total / m as i128) as u128
}

/// tr_m(f(root)) for each irreducible of degree m.
fn traces(
    tower: &FieldTower,
    f: &PolyOverFq,
    m: u32,
) -> Result<Vec<u32>> {
    let field = tower.field(m)?;
    Ok(enumerate_monic_irreducibles(tower, m)?
        .iter()
        .map(|pr| field.trace(evaluate(&field, f, pr.root)))
        .collect())
}

/// Σ_{deg M = n} Λ(M) ψ_f^h(M) / q^{n/2}.
pub fn von_mangoldt_sum(engine: &SumEngine, f: &PolyOverFq, h: i64, n: u32) -> Result<Complex64> {
    let p = engine.p();
    check_character(p, h)?;
    f.check_field(engine.q())?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for m in (1..=n).filter(|m| n.is_multiple_of(*m)) {
        let power = (n / m) as i64;
        for t in traces(engine.tower(), f, m)? {
            total += m as f64 * root_of_unity(h * t as i64 * power, p as i64);
        }
    }
    Ok(total / (engine.q() as f64).powf(n as f64 / 2.0))
}

/// Π_{deg P <= bound} (1 - ψ_f^h(P) u^{deg P})^{-1}, truncated after u^bound.
pub fn l_polynomial_euler(
    engine: &SumEngine,
    f: &PolyOverFq,
    h: i64,
    bound: usize,
) -> Result<LPolynomial> {
    let d = f.check_artin_schreier(engine.p(), engine.q())?;
    check_character(engine.p(), h)?;
    if bound + 1 > d {
        return Err(Error::Precondition(format!(
            "degree bound {bound} exceeds d - 1 = {}",
            d - 1
        )));
    }
    let p = engine.p() as i64;
    let mut series = vec![Complex64::new(0.0, 0.0); bound + 1];
    series[0] = Complex64::new(1.0, 0.0);
    for m in 1..=bound {
        for t in traces(engine.tower(), f, m as u32)? {
            let chi = root_of_unity(h * t as i64, p);
            // multiply by 1 / (1 - chi u^m) = Σ_k chi^k u^{mk}, in place from the top
            for i in (m..=bound).rev() {
                let mut add = Complex64::new(0.0, 0.0);
                let mut w = chi;
                let mut k = 1;
                while k * m <= i {
                    add += w * series[i - k * m];
                    w *= chi;
                    k += 1;
                }
                series[i] += add;
            }
        }
    }
    Ok(LPolynomial {
        coefficients: series,
        q: engine.q() as u64,
        f: f.clone(),
        h,
    })
}
