//! Exact family averages: brute-force M-quantities from joint trace
//! tables, and the closed forms they are compared against.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{evaluate, FamilySpec, PolyOverFq};
use crate::field_tower::{Elem, FieldTower};
use crate::lfun::{enumerate_monic_irreducibles, prime_count, root_of_unity, SumEngine, TraceHistogram};

/// e_{p,m}: 1 iff p | m, for any integer m.
pub fn e_p(p: u32, m: i64) -> bool {
    m.rem_euclid(p as i64) == 0
}

/// Trace histograms of every member of an exhaustive family, n = 1..=n_max.
#[derive(Debug, Clone)]
pub struct FamilyHistograms {
    pub spec: FamilySpec,
    pub q: u64,
    pub n_max: u32,
    pub members: Vec<PolyOverFq>,
    /// hists[i][n - 1] belongs to members[i]
    pub hists: Vec<Vec<TraceHistogram>>,
}

impl FamilyHistograms {
    pub fn build(engine: &SumEngine, spec: &FamilySpec, n_max: u32) -> Result<FamilyHistograms> {
        if engine.p() != spec.p || engine.q() != spec.q() {
            return Err(Error::InvalidParameter("engine and family disagree on q".into()));
        }
        let members: Vec<PolyOverFq> = spec.enumerate()?.collect();
        // warm the kernel cache once so workers only read it
        for n in 1..=n_max {
            engine.kernel(n, spec.d)?;
        }
        let hists = members
            .par_iter()
            .map(|f| engine.histograms(f, n_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(FamilyHistograms {
            spec: spec.clone(),
            q: engine.q() as u64,
            n_max,
            members,
            hists,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn check_ks(&self, ks: &[u32]) -> Result<()> {
        let total: u32 = ks.iter().sum();
        if ks.contains(&0) {
            return Err(Error::Precondition("every k must be positive".into()));
        }
        if total as usize >= self.spec.d {
            return Err(Error::Precondition(format!(
                "k sum {total} must be below d = {}",
                self.spec.d
            )));
        }
        if let Some(&k) = ks.iter().find(|&&k| k > self.n_max) {
            return Err(Error::Precondition(format!(
                "k = {k} beyond the tabulated range {}",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Σ_f #{α-tuples : Σ_i m_i tr_{k_i} f(α_i) ≡ s} for each residue s.
    pub fn joint_counts(&self, ks: &[u32], mults: &[i64]) -> Vec<u128> {
        let p = self.spec.p as usize;
        let mut total = vec![0u128; p];
        for member in &self.hists {
            let mut dist = vec![0u128; p];
            dist[0] = 1;
            for (&k, &m) in ks.iter().zip(mults) {
                let hist = &member[k as usize - 1];
                let mut next = vec![0u128; p];
                for (s, &a) in dist.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (t, &c) in hist.counts.iter().enumerate() {
                        let idx = (s as i64 + m * t as i64).rem_euclid(p as i64) as usize;
                        next[idx] += a * c as u128;
                    }
                }
                dist = next;
            }
            for (acc, v) in total.iter_mut().zip(dist) {
                *acc += v;
            }
        }
        total
    }

    /// M_n^{k,e,h} = q^{-Σk/2} ⟨Σ_α ψ(Σ e_i h_i tr_{k_i} f(α_i))⟩ by brute force.
    pub fn m_bruteforce(&self, ks: &[u32], es: &[i8], hs: &[i64]) -> Result<Complex64> {
        check_shapes(ks, es, hs, self.spec.p)?;
        self.check_ks(ks)?;
        let mults: Vec<i64> = es.iter().zip(hs).map(|(&e, &h)| e as i64 * h).collect();
        let joint = self.joint_counts(ks, &mults);
        let p = self.spec.p as i64;
        let sum: Complex64 = joint
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * root_of_unity(s as i64, p))
            .sum();
        let k_total: u32 = ks.iter().sum();
        Ok(sum / self.len() as f64 / (self.q as f64).powf(k_total as f64 / 2.0))
    }
}

fn check_shapes(ks: &[u32], es: &[i8], hs: &[i64], p: u32) -> Result<()> {
    if ks.len() != es.len() || ks.len() != hs.len() || ks.is_empty() {
        return Err(Error::InvalidParameter("k, e, h must have equal nonzero length".into()));
    }
    if es.iter().any(|&e| e != 1 && e != -1) {
        return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
    }
    if let Some(&h) = hs.iter().find(|&&h| e_p(p, h)) {
        return Err(Error::PDividesCharacter { p, h });
    }
    Ok(())
}

/// e_{p,k} q^{-(1/2 - 1/p)k}.
pub fn m1_structural(k: u32, p: u32, q: u64) -> f64 {
    if e_p(p, k as i64) {
        (q as f64).powf(-(0.5 - 1.0 / p as f64) * k as f64)
    } else {
        0.0
    }
}

/// q^{-(k1+k2)/2} (Σ π(m) m² + e_{p,k1} e_{p,k2} q^{(k1+k2)/p}), the sum
/// over m | (k1, k2) with mp ∤ k1, mp ∤ k2 and mp | (e1h1k1 + e2h2k2).
pub fn m2_structural(ks: [u32; 2], es: [i8; 2], hs: [i64; 2], p: u32, q: u64) -> f64 {
    let [k1, k2] = ks;
    let pi = p as i64;
    let combo = es[0] as i64 * hs[0] * k1 as i64 + es[1] as i64 * hs[1] * k2 as i64;
    let mut conj: u128 = 0;
    for m in (1..=k1.min(k2)).filter(|m| k1 % m == 0 && k2 % m == 0) {
        let mp = m as i64 * pi;
        if k1 as i64 % mp != 0 && k2 as i64 % mp != 0 && combo.rem_euclid(mp) == 0 {
            conj += prime_count(q, m) * (m as u128).pow(2);
        }
    }
    let mut total = conj as f64;
    if e_p(p, k1 as i64) && e_p(p, k2 as i64) {
        total += (q as f64).powf((k1 + k2) as f64 / p as f64);
    }
    total / (q as f64).powf((k1 + k2) as f64 / 2.0)
}

/// One Galois class of elements of F_{q^k}: the roots of an irreducible.
#[derive(Debug, Clone)]
pub struct ElementClass {
    pub minpoly: Vec<u32>,
    pub degree: u32,
}

/// Classes of F_{q^k} by minimal polynomial; each has `degree` elements.
#[derive(Debug)]
pub struct ClassTable<'a> {
    tower: &'a FieldTower,
    cache: HashMap<u32, Vec<ElementClass>>,
    ids: HashMap<Vec<u32>, usize>,
}

impl<'a> ClassTable<'a> {
    pub fn new(tower: &'a FieldTower) -> Self {
        ClassTable {
            tower,
            cache: HashMap::new(),
            ids: HashMap::new(),
        }
    }

    pub fn classes(&mut self, k: u32) -> Result<Vec<ElementClass>> {
        if let Some(c) = self.cache.get(&k) {
            return Ok(c.clone());
        }
        let mut out = Vec::new();
        for u in (1..=k).filter(|u| k.is_multiple_of(*u)) {
            for irr in enumerate_monic_irreducibles(self.tower, u)? {
                out.push(ElementClass {
                    minpoly: irr.coeffs,
                    degree: u,
                });
            }
        }
        self.cache.insert(k, out.clone());
        Ok(out)
    }

    /// A small integer naming a minimal polynomial.
    pub fn id(&mut self, minpoly: &[u32]) -> usize {
        let next = self.ids.len();
        *self.ids.entry(minpoly.to_vec()).or_insert(next)
    }
}

/// The general criterion: with ε_g = (1/u_g) Σ_{α_j root of g} k_j e_j h_j
/// over the distinct minimal polynomials g, the average is 1 iff p | ε_g
/// for every g. `ids[j]` names α_j's minimal polynomial, `us[j]` its degree.
pub fn generalcase_criterion(ids: &[usize], us: &[u32], ks: &[u32], es: &[i8], hs: &[i64], p: u32) -> bool {
    let mut eps: HashMap<usize, (i64, u32)> = HashMap::new();
    for j in 0..ids.len() {
        let entry = eps.entry(ids[j]).or_insert((0, us[j]));
        entry.0 += ks[j] as i64 * es[j] as i64 * hs[j];
    }
    eps.values().all(|&(total, u)| {
        debug_assert_eq!(total % u as i64, 0);
        e_p(p, total / u as i64)
    })
}

/// The three-point case table: 1 iff one of
/// - g1 = g2 = g3, p | Σ e_i h_i k_i / u, p ∤ k1k2k3 / u³
/// - g_a = g_b, p | (e_a h_a k_a + e_b h_b k_b) / u_a, p ∤ k_a k_b / (u_a u_b), p | k_c / u_c
/// - p | k_i / u_i for every i
pub fn lemm3_criterion(ids: [usize; 3], us: [u32; 3], ks: [u32; 3], es: [i8; 3], hs: [i64; 3], p: u32) -> bool {
    let pi = p as i64;
    let ratio = |i: usize| (ks[i] / us[i]) as i64;
    let w = |i: usize| es[i] as i64 * hs[i] * ks[i] as i64;
    let divides = |v: i64| v.rem_euclid(pi) == 0;

    if ids[0] == ids[1] && ids[1] == ids[2] {
        let u = us[0] as i64;
        let total = w(0) + w(1) + w(2);
        if total % u == 0
            && divides(total / u)
            && !divides(ratio(0) * ratio(1) * ratio(2))
        {
            return true;
        }
    }
    for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        if ids[a] == ids[b] {
            let u = us[a] as i64;
            let pair = w(a) + w(b);
            if pair % u == 0
                && divides(pair / u)
                && !divides(ratio(a) * ratio(b))
                && divides(ratio(c))
            {
                return true;
            }
        }
    }
    (0..3).all(|i| divides(ratio(i)))
}

/// M_3 from the case table, summed over Galois classes of α-triples.
pub fn m3_structural(tower: &FieldTower, ks: [u32; 3], es: [i8; 3], hs: [i64; 3]) -> Result<f64> {
    let p = tower.p();
    check_shapes(&ks, &es, &hs, p)?;
    let mut table = ClassTable::new(tower);
    let classes: Vec<Vec<(usize, u32)>> = ks
        .iter()
        .map(|&k| {
            let cs = table.classes(k)?;
            Ok(cs.iter().map(|c| (table.id(&c.minpoly), c.degree)).collect())
        })
        .collect::<Result<_>>()?;
    let mut total: u128 = 0;
    for &(i0, u0) in &classes[0] {
        for &(i1, u1) in &classes[1] {
            for &(i2, u2) in &classes[2] {
                if lemm3_criterion([i0, i1, i2], [u0, u1, u2], ks, es, hs, p) {
                    total += (u0 * u1 * u2) as u128;
                }
            }
        }
    }
    let q = tower.q() as f64;
    Ok(total as f64 / q.powf(ks.iter().sum::<u32>() as f64 / 2.0))
}

/// M_n from the general criterion, summed over Galois classes of α-tuples.
pub fn m_structural(tower: &FieldTower, ks: &[u32], es: &[i8], hs: &[i64]) -> Result<f64> {
    let p = tower.p();
    check_shapes(ks, es, hs, p)?;
    let mut table = ClassTable::new(tower);
    let classes: Vec<Vec<(usize, u32)>> = ks
        .iter()
        .map(|&k| {
            let cs = table.classes(k)?;
            Ok(cs.iter().map(|c| (table.id(&c.minpoly), c.degree)).collect())
        })
        .collect::<Result<_>>()?;
    let n = ks.len();
    let mut idx = vec![0usize; n];
    let mut total: u128 = 0;
    let mut ids = vec![0usize; n];
    let mut us = vec![0u32; n];
    'outer: loop {
        for j in 0..n {
            (ids[j], us[j]) = classes[j][idx[j]];
        }
        if generalcase_criterion(&ids, &us, ks, es, hs, p) {
            total += us.iter().map(|&u| u as u128).product::<u128>();
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < classes[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    let q = tower.q() as f64;
    Ok(total as f64 / q.powf(ks.iter().sum::<u32>() as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    /// family average of ψ(Σ e_i h_i tr_{k_i} f(α_i))
    pub brute: Complex64,
    /// the ε criterion's prediction, 0 or 1
    pub criterion: u8,
}

/// Averages ψ(Σ e_i h_i tr_{k_i} f(α_i)) over every member of the family
/// and evaluates the ε criterion for the same tuple. `alphas[i]` lives in
/// F_{q^{k_i}}.
pub fn pointwise_average_check(
    engine: &SumEngine,
    spec: &FamilySpec,
    alphas: &[Elem],
    ks: &[u32],
    es: &[i8],
    hs: &[i64],
) -> Result<PointwiseReport> {
    let p = spec.p;
    check_shapes(ks, es, hs, p)?;
    if alphas.len() != ks.len() {
        return Err(Error::InvalidParameter("one α per k is required".into()));
    }
    if ks.iter().sum::<u32>() as usize >= spec.d {
        return Err(Error::Precondition("k sum must be below d".into()));
    }
    let fields = ks.iter().map(|&k| engine.field(k)).collect::<Result<Vec<_>>>()?;
    for (field, &a) in fields.iter().zip(alphas) {
        if a.raw() >= field.order() {
            return Err(Error::InvalidParameter("α outside its field".into()));
        }
    }
    let mut table = ClassTable::new(engine.tower());
    let mut ids = Vec::new();
    let mut us = Vec::new();
    for (field, &a) in fields.iter().zip(alphas) {
        ids.push(table.id(&field.minimal_polynomial(a)));
        us.push(field.minimal_degree(a));
    }
    let criterion = generalcase_criterion(&ids, &us, ks, es, hs, p) as u8;

    let mut counts = vec![0u64; p as usize];
    let mut size = 0u64;
    for f in spec.enumerate()? {
        let mut s: i64 = 0;
        for i in 0..ks.len() {
            let t = fields[i].trace(evaluate(&fields[i], &f, alphas[i])) as i64;
            s += es[i] as i64 * hs[i] * t;
        }
        counts[s.rem_euclid(p as i64) as usize] += 1;
        size += 1;
    }
    let brute: Complex64 = counts
        .iter()
        .enumerate()
        .map(|(s, &c)| c as f64 * root_of_unity(s as i64, p as i64))
        .sum::<Complex64>()
        / size as f64;
    Ok(PointwiseReport { brute, criterion })
}

/// Δ(h_1..h_n) for even n: the sum over perfect matchings of {1..n} of the
/// product over pairs {i, j} of #{(e_i, e_j) : e_i h_i + e_j h_j ≡ 0 mod p}.
pub fn delta_count(hs: &[i64], p: u32) -> Result<u64> {
    if hs.len() % 2 == 1 {
        return Err(Error::Precondition("Δ is defined here for even n".into()));
    }
    fn rec(rest: &[i64], p: i64) -> u64 {
        if rest.is_empty() {
            return 1;
        }
        let first = rest[0];
        let mut total = 0;
        for j in 1..rest.len() {
            let ways = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
                .iter()
                .filter(|(a, b)| (a * first + b * rest[j]).rem_euclid(p) == 0)
                .count() as u64;
            if ways == 0 {
                continue;
            }
            let mut remaining = rest[1..].to_vec();
            remaining.remove(j - 1);
            total += ways * rec(&remaining, p);
        }
        total
    }
    Ok(rec(hs, p as i64))
}

/// The displayed definition taken literally: sign vectors times
/// permutations σ with e_{2i-1} h_{σ(2i-1)} + e_{2i} h_{σ(2i)} ≡ 0 for
/// every pair. Equals 2^ℓ ℓ! Δ for even n = 2ℓ.
pub fn delta_count_signs_permutations(hs: &[i64], p: u32) -> u64 {
    let n = hs.len();
    let pairs = n / 2;
    let pi = p as i64;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0u64;
    loop {
        for mask in 0..(1u32 << n) {
            let sign = |i: usize| if mask >> i & 1 == 1 { -1 } else { 1 };
            if (0..pairs).all(|t| {
                let (a, b) = (2 * t, 2 * t + 1);
                (sign(a) * hs[perm[a]] + sign(b) * hs[perm[b]]).rem_euclid(pi) == 0
            }) {
                total += 1;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    total
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
