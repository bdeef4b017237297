//! Dense polynomial arithmetic over a small base field, used only while
//! constructing extension fields (modulus search and generator search).
//!
//! Polynomials are coefficient vectors, constant term first, with scalars
//! given as vector indices of the base field.

/// Arithmetic on the vector indices `0..order` of a finite field.
pub(crate) trait Scalars {
    fn order(&self) -> u32;
    fn add(&self, a: u32, b: u32) -> u32;
    fn neg(&self, a: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;
    fn inv(&self, a: u32) -> u32;

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }
}

/// The prime field, indices are residues mod p.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PrimeScalars {
    pub p: u32,
}

impl Scalars for PrimeScalars {
    fn order(&self) -> u32 {
        self.p
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    fn inv(&self, a: u32) -> u32 {
        debug_assert!(!a.is_multiple_of(self.p));
        // a^(p-2) by square and multiply
        let mut base = a as u64 % self.p as u64;
        let mut exp = self.p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p as u64;
            }
            base = base * base % self.p as u64;
            exp >>= 1;
        }
        acc as u32
    }
}

pub(crate) fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn mul<S: Scalars>(s: &S, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = s.add(out[i + j], s.mul(x, y));
            }
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo `m` (m nonzero).
pub(crate) fn rem<S: Scalars>(s: &S, a: &[u32], m: &[u32]) -> Vec<u32> {
    let dm = degree(m).expect("division by the zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    let lead_inv = s.inv(m[dm]);
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let factor = s.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &c) in m[..=dm].iter().enumerate() {
            if c != 0 {
                r[shift + i] = s.sub(r[shift + i], s.mul(factor, c));
            }
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn mul_mod<S: Scalars>(s: &S, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    rem(s, &mul(s, a, b), m)
}

pub(crate) fn pow_mod<S: Scalars>(s: &S, a: &[u32], mut exp: u128, m: &[u32]) -> Vec<u32> {
    let mut acc = rem(s, &[1], m);
    let mut base = rem(s, a, m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(s, &acc, &base, m);
        }
        exp >>= 1;
        if exp > 0 {
            base = mul_mod(s, &base, &base, m);
        }
    }
    acc
}

pub(crate) fn gcd<S: Scalars>(s: &S, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(s, &x, &y);
        x = y;
        y = r;
    }
    // normalize to monic
    if let Some(d) = degree(&x) {
        let inv = s.inv(x[d]);
        for c in x.iter_mut() {
            *c = s.mul(*c, inv);
        }
    }
    x
}

/// Irreducibility test: `m` (degree n) is irreducible iff it shares no
/// factor with X^{b^k} - X for every k <= n/2, where b is the base order.
pub(crate) fn is_irreducible<S: Scalars>(s: &S, m: &[u32]) -> bool {
    let n = match degree(m) {
        Some(n) => n,
        None => return false,
    };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let b = s.order() as u128;
    let x = vec![0, 1];
    let mut frob = rem(s, &x, m);
    for _ in 1..=n / 2 {
        frob = pow_mod(s, &frob, b, m);
        let mut diff = frob.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = s.sub(diff[1], 1);
        trim(&mut diff);
        let g = gcd(s, m, &diff);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree `n`, comparing the
/// coefficient tuple (a_0, a_1, ..., a_{n-1}) from the constant term up.
pub(crate) fn least_irreducible<S: Scalars>(s: &S, n: usize) -> Option<Vec<u32>> {
    let b = s.order() as u128;
    let total = b.checked_pow(n as u32)?;
    let mut candidate = vec![0u32; n + 1];
    candidate[n] = 1;
    for idx in 0..total {
        // a_0 is the most significant digit of idx
        let mut rest = idx;
        for i in (0..n).rev() {
            candidate[i] = (rest % b) as u32;
            rest /= b;
        }
        if is_irreducible(s, &candidate) {
            return Some(candidate);
        }
    }
    None
}

/// Distinct prime factors by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= n / d {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
