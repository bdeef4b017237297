//! Polynomials over F_q and the Artin-Schreier families they range over.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_tower::{is_odd_prime, Elem, ExtField};

/// Default cap on exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// A polynomial over F_q with coefficients stored as F_q vector indices,
/// constant term first. Trailing zeros are never stored, so the zero
/// polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyOverFq {
    coeffs: Vec<u32>,
}

impl PolyOverFq {
    pub fn new(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyOverFq { coeffs }
    }

    /// Like [`PolyOverFq::new`] but rejects coefficients outside F_q.
    pub fn with_field_order(coeffs: Vec<u32>, q: u32) -> Result<Self> {
        if let Some(&c) = coeffs.iter().find(|&&c| c >= q) {
            return Err(Error::InvalidPolynomial(format!(
                "coefficient {c} is not an element of F_{q}"
            )));
        }
        Ok(Self::new(coeffs))
    }

    pub fn monomial(c: u32, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of X^i (zero past the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Checks every coefficient is an F_q index.
    pub fn check_field(&self, q: u32) -> Result<()> {
        Self::with_field_order(self.coeffs.clone(), q).map(|_| ())
    }

    /// Requirements for an Artin-Schreier defining polynomial: nonzero,
    /// coefficients in F_q, degree prime to p.
    pub fn check_artin_schreier(&self, p: u32, q: u32) -> Result<usize> {
        self.check_field(q)?;
        let d = self
            .degree()
            .ok_or_else(|| Error::InvalidPolynomial("zero polynomial".into()))?;
        if d % p as usize == 0 {
            return Err(Error::PDividesDegree { p, d });
        }
        Ok(d)
    }
}

impl fmt::Display for PolyOverFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PolyOverFq {
    type Err = Error;

    /// Parses a constant-first comma-separated list such as `0,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty coefficient list".into()));
        }
        let coeffs = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("coefficient {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyOverFq::new(coeffs))
    }
}

impl Serialize for PolyOverFq {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolyOverFq {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Horner evaluation of f at x, coefficients lifted from F_q.
pub fn evaluate(field: &ExtField, f: &PolyOverFq, x: Elem) -> Elem {
    f.coeffs()
        .iter()
        .rev()
        .fold(Elem::ZERO, |acc, &c| field.add(field.mul(acc, x), field.from_base(c)))
}

/// The reduction map: folds each a_{i p^j} into a_i via the inverse
/// Frobenius, leaving a polynomial with no X^{pk} terms (k >= 1) that has
/// the same trace at every point. `fq` must be F_q itself.
pub fn mu_reduce(f: &PolyOverFq, fq: &ExtField) -> Result<PolyOverFq> {
    if fq.degree() != 1 {
        return Err(Error::InvalidParameter(
            "mu_reduce needs the base field F_q".into(),
        ));
    }
    let p = fq.p() as usize;
    let r = fq.params().r;
    f.check_artin_schreier(fq.p(), fq.q())?;
    let d = f.degree().unwrap_or(0);
    let mut out = vec![0u32; d + 1];
    out[0] = f.coeff(0);
    for i in (1..=d).filter(|i| i % p != 0) {
        let mut acc = Elem::ZERO;
        let mut idx = i;
        let mut j = 0u32;
        while idx <= d {
            let a = fq.from_vector(f.coeff(idx));
            // x^{p^{-j}} = x^{p^{r - j mod r}} on F_q
            let back = (r - j % r) % r;
            acc = fq.add(acc, fq.frobenius(a, back));
            idx *= p;
            j += 1;
        }
        out[i] = fq.to_vector(acc);
    }
    Ok(PolyOverFq::new(out))
}

/// Which family of degree-d polynomials is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// every polynomial of degree d
    Full,
    /// a_{pk} = 0 for 1 <= k <= d/p
    PrimeToP,
    /// additionally a_0 = 0
    Twisted,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(Variant::Full),
            "prime-to-p" => Ok(Variant::PrimeToP),
            "twisted" => Ok(Variant::Twisted),
            other => Err(Error::Parse(format!("unknown family variant {other:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::PrimeToP => "prime-to-p",
            Variant::Twisted => "twisted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub p: u32,
    pub r: u32,
    pub d: usize,
    pub variant: Variant,
}

impl FamilySpec {
    pub fn new(p: u32, r: u32, d: usize, variant: Variant) -> Result<Self> {
        if !is_odd_prime(p as u64) {
            return Err(Error::NotOddPrime(p as u64));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("r must be positive".into()));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("degree must be positive".into()));
        }
        if d.is_multiple_of(p as usize) {
            return Err(Error::PDividesDegree { p, d });
        }
        Ok(FamilySpec { p, r, d, variant })
    }

    pub fn q(&self) -> u32 {
        self.p.pow(self.r)
    }

    /// Non-leading coefficient slots that are free to vary.
    pub fn free_slots(&self) -> Vec<usize> {
        let p = self.p as usize;
        (0..self.d)
            .filter(|&i| match self.variant {
                Variant::Full => true,
                Variant::PrimeToP => i == 0 || i % p != 0,
                Variant::Twisted => i != 0 && i % p != 0,
            })
            .collect()
    }

    /// (q - 1) q^{#free slots}.
    pub fn family_size(&self) -> u128 {
        let q = self.q() as u128;
        let slots = self.free_slots().len() as u32;
        q.checked_pow(slots)
            .and_then(|v| v.checked_mul(q - 1))
            .unwrap_or(u128::MAX)
    }

    pub fn contains(&self, f: &PolyOverFq) -> bool {
        if f.degree() != Some(self.d) || f.coeffs().iter().any(|&c| c >= self.q()) {
            return false;
        }
        let free = self.free_slots();
        (0..self.d).all(|i| f.coeff(i) == 0 || free.binary_search(&i).is_ok())
    }

    /// Member number `index` in the enumeration order: the leading
    /// coefficient cycles fastest, then the free slots as base-q digits
    /// from the lowest slot up.
    pub fn member(&self, index: u128) -> PolyOverFq {
        let q = self.q() as u128;
        let mut coeffs = vec![0u32; self.d + 1];
        coeffs[self.d] = 1 + (index % (q - 1)) as u32;
        let mut rest = index / (q - 1);
        for slot in self.free_slots() {
            coeffs[slot] = (rest % q) as u32;
            rest /= q;
        }
        PolyOverFq::new(coeffs)
    }

    /// Every member once, in [`FamilySpec::member`] order.
    pub fn enumerate(&self) -> Result<impl Iterator<Item = PolyOverFq> + '_> {
        self.enumerate_with_limit(EXHAUSTIVE_LIMIT)
    }

    pub fn enumerate_with_limit(
        &self,
        limit: u128,
    ) -> Result<impl Iterator<Item = PolyOverFq> + '_> {
        let size = self.family_size();
        if size > limit {
            return Err(Error::FamilyTooLarge { size, limit });
        }
        Ok((0..size).map(move |i| self.member(i)))
    }

    /// A uniform member, a deterministic function of `seed`.
    pub fn sample(&self, seed: u64) -> PolyOverFq {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.q();
        let mut coeffs = vec![0u32; self.d + 1];
        coeffs[self.d] = rng.random_range(1..q);
        for slot in self.free_slots() {
            coeffs[slot] = rng.random_range(0..q);
        }
        PolyOverFq::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_tower::{build_field, FieldParams};
    use std::collections::HashSet;

    fn spec(d: usize, variant: Variant) -> FamilySpec {
        FamilySpec::new(3, 1, d, variant).unwrap()
    }

    #[test]
    fn sizes() {
        assert_eq!(spec(5, Variant::PrimeToP).family_size(), 162);
        assert_eq!(spec(4, Variant::Full).family_size(), 162);
        assert_eq!(spec(4, Variant::PrimeToP).family_size(), 54);
        assert_eq!(spec(4, Variant::Twisted).family_size(), 18);
        assert_eq!(spec(2, Variant::Full).family_size(), 18);
    }

    #[test]
    fn p_divides_d_is_rejected() {
        for v in [Variant::Full, Variant::PrimeToP, Variant::Twisted] {
            assert_eq!(
                FamilySpec::new(3, 1, 3, v),
                Err(Error::PDividesDegree { p: 3, d: 3 })
            );
        }
    }

    #[test]
    fn enumeration_of_prime_to_p_quartics() {
        let s = spec(4, Variant::PrimeToP);
        let all: Vec<_> = s.enumerate().unwrap().collect();
        assert_eq!(all.len(), 54);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 54);
        for f in &all {
            assert_eq!(f.coeff(3), 0);
            assert_ne!(f.coeff(4), 0);
            assert!(s.contains(f));
        }
    }

    #[test]
    fn enumeration_limit() {
        let s = spec(4, Variant::Full);
        assert!(matches!(
            s.enumerate_with_limit(100).map(|it| it.count()),
            Err(Error::FamilyTooLarge { size: 162, limit: 100 })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let s = spec(20, Variant::PrimeToP);
        assert_eq!(s.sample(42), s.sample(42));
        for seed in 0..200 {
            assert!(s.contains(&s.sample(seed)));
        }
        let t = spec(7, Variant::Twisted);
        assert!((0..50).all(|seed| t.contains(&t.sample(seed))));
    }

    #[test]
    fn parse_and_display() {
        let f: PolyOverFq = "0,0,1".parse().unwrap();
        assert_eq!(f.degree(), Some(2));
        assert_eq!(f.to_string(), "0,0,1");
        assert_eq!("1, 2 ,0".parse::<PolyOverFq>().unwrap().to_string(), "1,2");
        assert!("".parse::<PolyOverFq>().is_err());
        assert!("1,,2".parse::<PolyOverFq>().is_err());
        assert!("1,-2".parse::<PolyOverFq>().is_err());
        assert!(PolyOverFq::with_field_order(vec![0, 3], 3).is_err());
        assert!("0".parse::<PolyOverFq>().unwrap().is_zero());
    }

    #[test]
    fn evaluation() {
        let f3 = build_field(FieldParams::new(3, 1, 1).unwrap()).unwrap();
        let sq: PolyOverFq = "0,0,1".parse().unwrap();
        assert_eq!(f3.to_vector(evaluate(&f3, &sq, f3.from_vector(2))), 1);

        let f9 = build_field(FieldParams::new(3, 1, 2).unwrap()).unwrap();
        let g: PolyOverFq = "0,1,0,0,1".parse().unwrap();
        let t = f9.from_vector(3);
        // t^4 + t = 1 + t
        assert_eq!(f9.to_vector(evaluate(&f9, &g, t)), 1 + 3);

        let c = PolyOverFq::new(vec![2]);
        for x in f9.elements() {
            assert_eq!(f9.to_vector(evaluate(&f9, &c, x)), 2);
        }
    }

    #[test]
    fn mu_folds_cubes() {
        let f3 = build_field(FieldParams::new(3, 1, 1).unwrap()).unwrap();
        let f: PolyOverFq = "0,0,0,1,1".parse().unwrap();
        assert_eq!(mu_reduce(&f, &f3).unwrap().to_string(), "0,1,0,0,1");
        let g: PolyOverFq = "2,1,1,0,1".parse().unwrap();
        assert_eq!(mu_reduce(&g, &f3).unwrap(), g);
    }

    #[test]
    fn mu_uses_inverse_frobenius_over_f9() {
        // over F_9, a X^3 folds to a^{1/3} X
        let f9 = build_field(FieldParams::new(3, 2, 1).unwrap()).unwrap();
        for a in 1..9u32 {
            let f = PolyOverFq::new(vec![0, 0, 0, a, 1]);
            let g = mu_reduce(&f, &f9).unwrap();
            let b = f9.from_vector(g.coeff(1));
            assert_eq!(f9.to_vector(f9.pow(b, 3)), a);
            assert_eq!(g.coeff(3), 0);
        }
    }

    #[test]
    fn variant_round_trip() {
        for v in [Variant::Full, Variant::PrimeToP, Variant::Twisted] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
    }
}
