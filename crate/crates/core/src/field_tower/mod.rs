//! Finite fields F_p ⊂ F_q ⊂ F_{q^n} backed by discrete-log (Zech) tables.
//!
//! F_q is built as a degree-r extension of F_p and F_{q^n} as a degree-n
//! extension of F_q, each modulo the lexicographically least monic
//! irreducible polynomial. Elements of F_{q^n} have a *vector index*
//! `Σ c_j q^j` where `c_j` is the vector index of the F_q coordinate of t^j
//! (and F_q indices are `Σ a_i p^i` over F_p). F_q therefore embeds as the
//! indices `0..q`. Arithmetic runs on [`Elem`], a logarithm representation
//! where addition is a Zech table lookup and multiplication adds logs.

mod poly;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use poly::{PrimeScalars, Scalars};

/// Largest field order the tables are built for.
pub const TABLE_LIMIT: u64 = 1 << 20;

pub(crate) use poly::prime_factors;

/// `p`, `r` (q = p^r) and the extension degree `n` over F_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub r: u32,
    pub n: u32,
}

impl FieldParams {
    pub fn new(p: u32, r: u32, n: u32) -> Result<Self> {
        let params = FieldParams { p, r, n };
        params.validate()?;
        Ok(params)
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.r)
    }

    /// q^n, saturating far above the table limit.
    pub fn order(&self) -> u128 {
        (self.p as u128)
            .checked_pow(self.r * self.n)
            .unwrap_or(u128::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_odd_prime(self.p as u64) {
            return Err(Error::NotOddPrime(self.p as u64));
        }
        if self.r == 0 || self.n == 0 {
            return Err(Error::InvalidParameter(
                "r and n must be positive".to_string(),
            ));
        }
        let order = self.order();
        if order > TABLE_LIMIT as u128 {
            return Err(Error::FieldTooLarge {
                order,
                limit: TABLE_LIMIT,
            });
        }
        Ok(())
    }
}

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Splits a prime power q into (p, r).
pub fn split_prime_power(q: u64) -> Result<(u32, u32)> {
    if q > TABLE_LIMIT {
        return Err(Error::FieldTooLarge {
            order: q as u128,
            limit: TABLE_LIMIT,
        });
    }
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "{q} is not a prime power"
        )));
    }
    let p = factors[0];
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let mut r = 0;
    let mut rest = q;
    while rest > 1 {
        rest /= p;
        r += 1;
    }
    Ok((p as u32, r))
}

/// A field element in log representation: 0 is the zero element, `k + 1`
/// stands for g^k with g the field's fixed generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw table index, stable for a given field.
    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }
}

/// A finite field F_{q^n} together with the F_q it is built over.
#[derive(Debug)]
pub struct ExtField {
    params: FieldParams,
    q: u32,
    order: u32,
    /// q^n - 1
    group: u32,
    /// monic modulus over F_q (vector indices), constant term first
    modulus: Vec<u32>,
    /// monic modulus over F_p defining F_q
    base_modulus: Vec<u32>,
    /// vector index of g^k
    exp: Vec<u32>,
    /// log of each vector index (entry 0 unused)
    log: Vec<u32>,
    /// 1 + g^k as an element
    zech: Vec<Elem>,
    /// absolute trace of each element, indexed by raw value
    trace: Vec<u8>,
    generator_vector: u32,
    /// F_q when n > 1; F_q arithmetic uses `self` when n = 1
    base: Option<Arc<ExtField>>,
}

impl ExtField {
    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Extension degree over F_q.
    pub fn degree(&self) -> u32 {
        self.params.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Defining polynomial over F_q, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Polynomial over F_p defining F_q, constant term first.
    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }

    /// The subfield F_q as its own field.
    pub fn base_field(&self) -> &ExtField {
        self.base.as_deref().unwrap_or(self)
    }

    pub fn generator(&self) -> Elem {
        Elem(1 + 1 % self.group.max(1))
    }

    /// Vector index of the generator.
    pub fn generator_vector(&self) -> u32 {
        self.generator_vector
    }

    #[inline]
    pub fn from_vector(&self, v: u32) -> Elem {
        debug_assert!(v < self.order);
        if v == 0 {
            Elem::ZERO
        } else {
            Elem(self.log[v as usize] + 1)
        }
    }

    #[inline]
    pub fn to_vector(&self, x: Elem) -> u32 {
        if x.is_zero() {
            0
        } else {
            self.exp[(x.0 - 1) as usize]
        }
    }

    /// Embeds an F_q element given by its vector index.
    #[inline]
    pub fn from_base(&self, c: u32) -> Elem {
        self.from_vector(c)
    }

    /// Discrete log with respect to [`ExtField::generator`].
    pub fn log(&self, x: Elem) -> Option<u32> {
        (!x.is_zero()).then(|| x.0 - 1)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let mut s = (a.0 - 1) + (b.0 - 1);
        if s >= self.group {
            s -= self.group;
        }
        Elem(s + 1)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        // a + b = a (1 + b/a)
        let la = a.0 - 1;
        let lb = b.0 - 1;
        let diff = if lb >= la { lb - la } else { lb + self.group - la };
        let z = self.zech[diff as usize];
        self.mul(a, z)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a.is_zero() {
            return a;
        }
        // -1 = g^{(Q-1)/2} since the characteristic is odd
        let mut s = (a.0 - 1) + self.group / 2;
        if s >= self.group {
            s -= self.group;
        }
        Elem(s + 1)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return None;
        }
        let l = a.0 - 1;
        Some(Elem(if l == 0 { 1 } else { self.group - l + 1 }))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let l = ((a.0 - 1) as u128 * e as u128 % self.group as u128) as u32;
        Elem(l + 1)
    }

    /// x^(p^k) computed in the log domain.
    pub fn frobenius(&self, a: Elem, k: u32) -> Elem {
        if a.is_zero() {
            return a;
        }
        let factor = mod_pow(self.params.p as u64, k as u64, self.group as u64);
        Elem(((a.0 - 1) as u64 * factor % self.group as u64) as u32 + 1)
    }

    /// x^(q^k).
    pub fn frobenius_q(&self, a: Elem, k: u32) -> Elem {
        self.frobenius(a, k * self.params.r)
    }

    /// Absolute trace tr_n: F_{q^n} → F_p, as a residue in `0..p`.
    #[inline]
    pub fn trace(&self, a: Elem) -> u32 {
        self.trace[a.0 as usize] as u32
    }

    /// Σ x^{p^i} for i < rn, by iterated Frobenius. Used to fill the
    /// memoized trace table; exposed for cross-checks.
    pub fn trace_by_frobenius(&self, a: Elem) -> u32 {
        let steps = self.params.r * self.params.n;
        let mut acc = Elem::ZERO;
        let mut cur = a;
        for _ in 0..steps {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur, 1);
        }
        let v = self.to_vector(acc);
        debug_assert!(v < self.params.p, "trace left the prime field");
        v
    }

    /// True iff x lies in F_{q^m}; `m` must divide n.
    pub fn subfield_member(&self, x: Elem, m: u32) -> Result<bool> {
        if m == 0 || !self.params.n.is_multiple_of(m) {
            return Err(Error::NotADivisor {
                m,
                n: self.params.n,
            });
        }
        Ok(self.frobenius_q(x, m) == x)
    }

    /// Least u | n with x^{q^u} = x: the degree of x's minimal polynomial over F_q.
    pub fn minimal_degree(&self, x: Elem) -> u32 {
        let n = self.params.n;
        (1..=n)
            .filter(|u| n.is_multiple_of(*u))
            .find(|&u| self.frobenius_q(x, u) == x)
            .unwrap_or(n)
    }

    /// Every element once, in vector-index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order).map(move |v| self.from_vector(v))
    }

    /// Minimal polynomial of x over F_q as F_q vector indices, monic,
    /// constant term first.
    pub fn minimal_polynomial(&self, x: Elem) -> Vec<u32> {
        let u = self.minimal_degree(x);
        let mut coeffs = vec![Elem::ONE];
        let mut root = x;
        for _ in 0..u {
            // multiply by (X - root)
            let neg_root = self.neg(root);
            let mut next = vec![Elem::ZERO; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] = self.add(next[i + 1], c);
                next[i] = self.add(next[i], self.mul(c, neg_root));
            }
            coeffs = next;
            root = self.frobenius_q(root, 1);
        }
        coeffs
            .into_iter()
            .map(|c| {
                let v = self.to_vector(c);
                debug_assert!(v < self.q, "minimal polynomial left F_q");
                v
            })
            .collect()
    }
}

impl Scalars for ExtField {
    fn order(&self) -> u32 {
        self.order
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        self.to_vector(ExtField::add(self, self.from_vector(a), self.from_vector(b)))
    }

    fn neg(&self, a: u32) -> u32 {
        self.to_vector(ExtField::neg(self, self.from_vector(a)))
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        self.to_vector(ExtField::mul(self, self.from_vector(a), self.from_vector(b)))
    }

    fn inv(&self, a: u32) -> u32 {
        let x = ExtField::inv(self, self.from_vector(a)).expect("inverse of zero");
        self.to_vector(x)
    }
}

fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    let mut b = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Log/exp/Zech/trace tables for `base[t] / (modulus)`.
struct Tables {
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<Elem>,
    generator_vector: u32,
}

impl Tables {
    fn build<S: Scalars>(s: &S, modulus: &[u32]) -> Result<Tables> {
        let b = s.order();
        let deg = modulus.len() - 1;
        let order = b.pow(deg as u32);
        let group = order - 1;

        let decode = |v: u32| -> Vec<u32> {
            let mut digits = Vec::with_capacity(deg);
            let mut rest = v;
            for _ in 0..deg {
                digits.push(rest % b);
                rest /= b;
            }
            poly::trim(&mut digits);
            digits
        };
        let encode = |digits: &[u32]| -> u32 {
            digits.iter().rev().fold(0u32, |acc, &d| acc * b + d)
        };

        // generator search: order exactly Q - 1
        let factors = prime_factors(group as u64);
        let generator_vector = (1..order)
            .find(|&v| {
                let g = decode(v);
                factors.iter().all(|&l| {
                    let r = poly::pow_mod(s, &g, (group as u64 / l) as u128, modulus);
                    r != [1]
                })
            })
            .ok_or_else(|| Error::Numerical("no multiplicative generator".into()))?;
        let g = decode(generator_vector);

        let mut exp = vec![0u32; group as usize];
        let mut log = vec![u32::MAX; order as usize];
        let mut cur: Vec<u32> = vec![1];
        for (k, slot) in exp.iter_mut().enumerate() {
            let v = encode(&cur);
            if log[v as usize] != u32::MAX {
                return Err(Error::Numerical(format!(
                    "generator cycle closed early at {k}"
                )));
            }
            *slot = v;
            log[v as usize] = k as u32;
            cur = poly::mul_mod(s, &cur, &g, modulus);
        }
        log[0] = 0;

        // 1 + g^k only changes the constant coordinate
        let zech = exp
            .iter()
            .map(|&v| {
                let c0 = v % b;
                let w = v - c0 + s.add(c0, 1);
                if w == 0 {
                    Elem::ZERO
                } else {
                    Elem(log[w as usize] + 1)
                }
            })
            .collect();

        Ok(Tables {
            order,
            exp,
            log,
            zech,
            generator_vector,
        })
    }
}

fn assemble(
    params: FieldParams,
    q: u32,
    modulus: Vec<u32>,
    base_modulus: Vec<u32>,
    tables: Tables,
    base: Option<Arc<ExtField>>,
) -> ExtField {
    let mut field = ExtField {
        params,
        q,
        order: tables.order,
        group: tables.order - 1,
        modulus,
        base_modulus,
        exp: tables.exp,
        log: tables.log,
        zech: tables.zech,
        trace: Vec::new(),
        generator_vector: tables.generator_vector,
        base,
    };
    let trace: Vec<u8> = (0..=field.group)
        .map(|raw| field.trace_by_frobenius(Elem(raw)) as u8)
        .collect();
    field.trace = trace;
    field
}

fn build_base(p: u32, r: u32) -> Result<ExtField> {
    let params = FieldParams::new(p, r, 1)?;
    let prime = PrimeScalars { p };
    let base_modulus =
        poly::least_irreducible(&prime, r as usize).ok_or(Error::NoIrreducible(r))?;
    let tables = Tables::build(&prime, &base_modulus)?;
    let q = tables.order;
    Ok(assemble(params, q, vec![0, 1], base_modulus, tables, None))
}

fn build_over(base: Arc<ExtField>, n: u32) -> Result<ExtField> {
    let bp = base.params();
    let params = FieldParams::new(bp.p, bp.r, n)?;
    if n == 1 {
        return Err(Error::InvalidParameter(
            "degree-1 extension is the base field itself".into(),
        ));
    }
    let modulus =
        poly::least_irreducible(&*base, n as usize).ok_or(Error::NoIrreducible(n))?;
    let tables = Tables::build(&*base, &modulus)?;
    let q = base.order();
    let base_modulus = base.base_modulus.clone();
    Ok(assemble(params, q, modulus, base_modulus, tables, Some(base)))
}

/// Builds F_{q^n} from scratch. Deterministic in `params`.
pub fn build_field(params: FieldParams) -> Result<ExtField> {
    params.validate()?;
    let base = build_base(params.p, params.r)?;
    if params.n == 1 {
        return Ok(base);
    }
    build_over(Arc::new(base), params.n)
}

/// Lazily built fields F_{q^n}, n = 1, 2, ..., sharing one F_q.
/// Safe to share between threads.
#[derive(Debug)]
pub struct FieldTower {
    p: u32,
    r: u32,
    base: Arc<ExtField>,
    fields: Vec<OnceLock<Arc<ExtField>>>,
}

impl FieldTower {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        let base = Arc::new(build_base(p, r)?);
        let q = base.order() as u64;
        let mut max_n = 1;
        while q.pow(max_n + 1) <= TABLE_LIMIT {
            max_n += 1;
        }
        let fields = (0..max_n).map(|_| OnceLock::new()).collect();
        Ok(FieldTower { p, r, base, fields })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.base.order()
    }

    /// Largest n with q^n under the table limit.
    pub fn max_degree(&self) -> u32 {
        self.fields.len() as u32
    }

    pub fn base(&self) -> &Arc<ExtField> {
        &self.base
    }

    pub fn field(&self, n: u32) -> Result<Arc<ExtField>> {
        if n == 0 {
            return Err(Error::InvalidParameter("extension degree 0".into()));
        }
        let slot = self.fields.get(n as usize - 1).ok_or(Error::FieldTooLarge {
            order: (self.q() as u128).saturating_pow(n),
            limit: TABLE_LIMIT,
        })?;
        if let Some(f) = slot.get() {
            return Ok(f.clone());
        }
        let built = if n == 1 {
            self.base.clone()
        } else {
            Arc::new(build_over(self.base.clone(), n)?)
        };
        Ok(slot.get_or_init(|| built).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> ExtField {
        build_field(FieldParams::new(3, 1, 2).unwrap()).unwrap()
    }

    /// t, the class of X in F_3[t]/(t^2 + 1)
    fn t(field: &ExtField) -> Elem {
        field.from_vector(3)
    }

    #[test]
    fn prime_field_f3() {
        let f = build_field(FieldParams::new(3, 1, 1).unwrap()).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.elements().count(), 3);
        let two = f.from_vector(2);
        assert_eq!(f.to_vector(f.add(two, two)), 1);
        assert_eq!(f.to_vector(f.mul(two, two)), 1);
    }

    #[test]
    fn f9_modulus_is_x2_plus_1() {
        let f = f9();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let x = t(&f);
        // t^2 = -1
        assert_eq!(f.to_vector(f.mul(x, x)), 2);
    }

    #[test]
    fn too_large_is_rejected() {
        assert!(matches!(
            FieldParams::new(3, 1, 30),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(matches!(FieldParams::new(9, 1, 1), Err(Error::NotOddPrime(9))));
        assert!(matches!(FieldParams::new(2, 1, 1), Err(Error::NotOddPrime(2))));
    }

    #[test]
    fn traces_in_f9() {
        let f = f9();
        assert_eq!(f.trace(Elem::ZERO), 0);
        assert_eq!(f.trace(Elem::ONE), 2);
        assert_eq!(f.trace(t(&f)), 0);
    }

    #[test]
    fn subfields_in_f9() {
        let f = f9();
        assert!(f.subfield_member(Elem::ONE, 1).unwrap());
        assert!(!f.subfield_member(t(&f), 1).unwrap());
        assert!(f.subfield_member(t(&f), 2).unwrap());
        assert!(matches!(
            f.subfield_member(Elem::ONE, 3),
            Err(Error::NotADivisor { m: 3, n: 2 })
        ));
    }

    #[test]
    fn minimal_degrees() {
        let f = f9();
        assert_eq!(f.minimal_degree(Elem::ZERO), 1);
        assert_eq!(f.minimal_degree(t(&f)), 2);
        assert_eq!(f.minimal_degree(f.generator()), 2);
        assert_eq!(f.minimal_polynomial(t(&f)), vec![1, 0, 1]);
    }

    #[test]
    fn elements_of_f243_sum_to_zero() {
        let f = build_field(FieldParams::new(3, 1, 5).unwrap()).unwrap();
        let all: Vec<Elem> = f.elements().collect();
        assert_eq!(all.len(), 243);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 243);
        let sum = all.iter().fold(Elem::ZERO, |acc, &x| f.add(acc, x));
        assert!(sum.is_zero());
    }

    #[test]
    fn frobenius_fixes_everything() {
        let f = build_field(FieldParams::new(5, 1, 3).unwrap()).unwrap();
        for x in f.elements() {
            assert_eq!(f.frobenius_q(x, 3), x);
        }
    }

    #[test]
    fn generator_has_full_order() {
        let f = build_field(FieldParams::new(3, 2, 2).unwrap()).unwrap();
        assert_eq!(f.order(), 81);
        let g = f.generator();
        assert_eq!(f.minimal_degree(g), 2);
        assert_eq!(f.pow(g, 80), Elem::ONE);
        assert_ne!(f.pow(g, 40), Elem::ONE);
        assert_ne!(f.pow(g, 16), Elem::ONE);
    }

    #[test]
    fn arithmetic_agrees_with_polynomial_model() {
        // F_9 = F_3[t]/(t^2+1): (a + bt)(c + dt) = (ac - bd) + (ad + bc)t
        let f = f9();
        for u in 0..9u32 {
            for v in 0..9u32 {
                let (a, b, c, d) = (u % 3, u / 3, v % 3, v / 3);
                let re = (a * c + 2 * b * d) % 3;
                let im = (a * d + b * c) % 3;
                let prod = f.mul(f.from_vector(u), f.from_vector(v));
                assert_eq!(f.to_vector(prod), re + 3 * im);
                let sum = f.add(f.from_vector(u), f.from_vector(v));
                assert_eq!(f.to_vector(sum), (a + c) % 3 + 3 * ((b + d) % 3));
            }
        }
    }

    #[test]
    fn inverse_and_negation() {
        let f = build_field(FieldParams::new(7, 1, 2).unwrap()).unwrap();
        for x in f.elements().skip(1) {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), Elem::ONE);
            assert!(f.add(x, f.neg(x)).is_zero());
        }
        assert!(f.inv(Elem::ZERO).is_none());
    }

    #[test]
    fn tower_shares_base() {
        let tower = FieldTower::new(3, 1).unwrap();
        assert_eq!(tower.max_degree(), 12);
        let f4 = tower.field(4).unwrap();
        assert_eq!(f4.order(), 81);
        assert!(Arc::ptr_eq(&tower.field(4).unwrap(), &f4));
        assert!(tower.field(13).is_err());
        assert_eq!(tower.field(1).unwrap().order(), 3);
    }

    #[test]
    fn split_prime_powers() {
        assert_eq!(split_prime_power(3).unwrap(), (3, 1));
        assert_eq!(split_prime_power(25).unwrap(), (5, 2));
        assert!(split_prime_power(12).is_err());
        assert!(split_prime_power(8).is_err());
        assert!(split_prime_power(4_294_967_311).is_err());
        assert_eq!(split_prime_power(3u64.pow(12)).unwrap(), (3, 12));
        assert!(split_prime_power(3u64.pow(13)).is_err());
    }
}
