//! Zero angles of L-polynomials, interval counts and the explicit-formula
//! identities that tie the angles back to character sums.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::PolyOverFq;
use crate::lfun::{l_polynomial, von_mangoldt_sum, LPolynomial, SumEngine};

/// Slack for counting an angle as inside a closed interval.
pub const ENDPOINT_SLACK: f64 = 1e-9;
/// Newton steps applied to each eigenvalue.
pub const POLISH_STEPS: usize = 3;
/// Roots closer than this times √q are treated as one repeated root.
pub const CLUSTER_RADIUS: f64 = 1e-5;
/// Classical Erdős–Turán constants used for the pass/fail audit.
pub const ERDOS_TURAN_B1: f64 = 1.0;
pub const ERDOS_TURAN_B2: f64 = 3.0;

/// The closed symmetric interval [-β/2, β/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    beta: f64,
}

impl Interval {
    pub fn new(beta: f64) -> Result<Interval> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "interval length {beta} must lie in (0, 1)"
            )));
        }
        Ok(Interval { beta })
    }

    /// |I|
    pub fn length(&self) -> f64 {
        self.beta
    }

    pub fn half_width(&self) -> f64 {
        self.beta / 2.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta.abs() <= self.half_width() + ENDPOINT_SLACK
    }
}

/// Sorted angles θ_j in [-1/2, 1/2) with α_j = √q e(θ_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub angles: Vec<f64>,
    /// max_j ||α_j| - √q| / √q
    pub rh_residual: f64,
}

impl AngleSet {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Σ_j e(n θ_j)
    pub fn power_sum(&self, n: i64) -> Complex64 {
        self.angles.iter().map(|&t| e(n as f64 * t)).sum()
    }

    pub fn union(sets: &[AngleSet]) -> AngleSet {
        let mut angles: Vec<f64> = sets.iter().flat_map(|s| s.angles.iter().copied()).collect();
        angles.sort_by(f64::total_cmp);
        let rh_residual = sets.iter().map(|s| s.rh_residual).fold(0.0, f64::max);
        AngleSet {
            angles,
            rh_residual,
        }
    }
}

/// e(x) = e^{2πix}
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// Maps an argument to [-1/2, 1/2).
pub fn canonical_angle(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re) / (2.0 * PI);
    if t >= 0.5 {
        t - 1.0
    } else {
        t
    }
}

/// The reciprocal roots α_j of L, i.e. the roots of u^D L(1/u).
pub fn reciprocal_roots(l: &LPolynomial) -> Result<Vec<Complex64>> {
    let c = &l.coefficients;
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[0];
    if lead.norm() == 0.0 {
        return Err(Error::Numerical("L(0) = 0".into()));
    }
    // R(z) = Σ c_k z^{D-k} / c_0, monic; companion has -R's coefficients in the last column
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        // coefficient of z^i in R is c_{D-i}
        m[(i, deg - 1)] = -c[deg - i] / lead;
    }
    let schur = Schur::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("eigenvalue iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur form not triangular".into()))?;

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &ck in c.iter() {
            dv = dv * z + v;
            v = v * z + ck;
        }
        (v, dv)
    };
    let raw: Vec<Complex64> = eig.iter().copied().collect();
    let clusters = cluster_labels(&raw, CLUSTER_RADIUS * (l.q as f64).sqrt());
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); raw.len()];
    for (z, &c) in raw.iter().zip(&clusters) {
        sums[c].0 += z;
        sums[c].1 += 1;
    }
    Ok(clusters
        .iter()
        .map(|&c| {
            let (total, m) = sums[c];
            let mut z = total / m as f64;
            if m > 1 {
                return z;
            }
            let mut best = eval(z).0.norm();
            for _ in 0..POLISH_STEPS {
                let (v, dv) = eval(z);
                if dv.norm() == 0.0 {
                    break;
                }
                let next = z - v / dv;
                let err = eval(next).0.norm();
                if err.is_nan() || err >= best {
                    break;
                }
                z = next;
                best = err;
            }
            z
        })
        .collect())
}

/// Single-linkage cluster representatives at distance `radius`. A root of
/// multiplicity m leaves the eigenvalue solver split by about eps^{1/m},
/// while the centroid of the split group is accurate to about eps.
fn cluster_labels(roots: &[Complex64], radius: f64) -> Vec<usize> {
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() < radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|i| find(&mut label, i)).collect()
}

pub fn find_angles(l: &LPolynomial) -> Result<AngleSet> {
    let sqrt_q = (l.q as f64).sqrt();
    let roots = reciprocal_roots(l)?;
    let rh_residual = roots
        .iter()
        .map(|a| (a.norm() - sqrt_q).abs() / sqrt_q)
        .fold(0.0, f64::max);
    let mut angles: Vec<f64> = roots.into_iter().map(canonical_angle).collect();
    angles.sort_by(f64::total_cmp);
    Ok(AngleSet {
        angles,
        rh_residual,
    })
}

/// N_I: the number of angles in the closed interval.
pub fn count_in_interval(angles: &AngleSet, interval: Interval) -> usize {
    angles.angles.iter().filter(|&&t| interval.contains(t)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub k: usize,
    pub count: usize,
    pub expected: f64,
    /// |N_I - (d-1)|I||
    pub lhs: f64,
    /// Erdős–Turán right-hand side with B1 = B2 = 1
    pub rhs: f64,
    /// the same with the classical constants
    pub rhs_classical: f64,
    pub holds: bool,
}

/// K = max(1, ⌊log d / log q⌋).
pub fn default_discrepancy_k(d: usize, q: u64) -> usize {
    (((d as f64).ln() / (q as f64).ln()).floor() as usize).max(1)
}

pub fn discrepancy_from_angles(angles: &AngleSet, interval: Interval, k: usize) -> DiscrepancyReport {
    let n = angles.len();
    let count = count_in_interval(angles, interval);
    let expected = n as f64 * interval.length();
    let lhs = (count as f64 - expected).abs();
    let tail: f64 = (1..=k)
        .map(|j| angles.power_sum(j as i64).norm() / j as f64)
        .sum();
    let main = n as f64 / (k as f64 + 1.0);
    let rhs = main + tail;
    let rhs_classical = ERDOS_TURAN_B1 * main + ERDOS_TURAN_B2 * tail;
    DiscrepancyReport {
        k,
        count,
        expected,
        lhs,
        rhs,
        rhs_classical,
        holds: lhs <= rhs_classical + 1e-9,
    }
}

pub fn discrepancy_check(
    engine: &SumEngine,
    f: &PolyOverFq,
    h: i64,
    interval: Interval,
    k: usize,
) -> Result<DiscrepancyReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let angles = find_angles(&l_polynomial(engine, f, h)?)?;
    Ok(discrepancy_from_angles(&angles, interval, k))
}

/// A trigonometric polynomial Σ_{|k|<=K} ĥ(k) e(kθ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    /// ĥ(-K), ..., ĥ(K)
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    /// From ĥ(-K..=K); the length must be odd.
    pub fn new(coeffs: Vec<Complex64>) -> Result<TrigPoly> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "trigonometric coefficients need odd length".into(),
            ));
        }
        Ok(TrigPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.degree() as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let k_max = self.degree() as i64;
        (-k_max..=k_max).map(|k| self.coeff(k) * e(k as f64 * theta)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl IdentityReport {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        IdentityReport {
            lhs,
            rhs,
            residual: (lhs - rhs).norm(),
        }
    }

    /// residual / (1 + |lhs|)
    pub fn relative(&self) -> f64 {
        self.residual / (1.0 + self.lhs.norm())
    }
}

/// Σ_j h(θ_j) against (d-1)ĥ(0) - Σ_k [ĥ(k)S_k(ψ^h) + ĥ(-k)S_k(ψ^{-h})] / q^{k/2}.
pub fn explicit_formula_check(
    engine: &SumEngine,
    f: &PolyOverFq,
    h: i64,
    trig: &TrigPoly,
) -> Result<IdentityReport> {
    let l = l_polynomial(engine, f, h)?;
    let angles = find_angles(&l)?;
    let lhs: Complex64 = angles.angles.iter().map(|&t| trig.eval(t)).sum();
    let q = engine.q() as f64;
    let mut rhs = trig.coeff(0) * l.degree() as f64;
    for k in 1..=trig.degree() {
        let hist = engine.trace_histogram(f, k as u32)?;
        let s = hist.weighted(h);
        let s_bar = hist.weighted(-h);
        rhs -= (trig.coeff(k as i64) * s + trig.coeff(-(k as i64)) * s_bar) / q.powf(k as f64 / 2.0);
    }
    Ok(IdentityReport::new(lhs, rhs))
}

/// -Σ_j e(nθ_j) against the prime-power sum Σ Λ(M) ψ_f(M) / q^{n/2}.
pub fn prime_power_check(
    engine: &SumEngine,
    f: &PolyOverFq,
    h: i64,
    n: u32,
) -> Result<IdentityReport> {
    let angles = find_angles(&l_polynomial(engine, f, h)?)?;
    let lhs = -angles.power_sum(n as i64);
    let rhs = von_mangoldt_sum(engine, f, h, n)?;
    Ok(IdentityReport::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> SumEngine {
        SumEngine::new(3, 1).unwrap()
    }

    fn x2() -> PolyOverFq {
        "0,0,1".parse().unwrap()
    }

    #[test]
    fn angle_of_x2() {
        let l = l_polynomial(&engine(), &x2(), 1).unwrap();
        let a = find_angles(&l).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a.angles[0] + 0.25).abs() < 1e-12);
        assert!(a.rh_residual < 1e-12);

        let b = find_angles(&l_polynomial(&engine(), &x2(), 2).unwrap()).unwrap();
        let both = AngleSet::union(&[a, b]);
        assert!((both.angles[0] + 0.25).abs() < 1e-12);
        assert!((both.angles[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_l_has_no_angles() {
        let l = l_polynomial(&engine(), &"0,1".parse().unwrap(), 1).unwrap();
        assert!(find_angles(&l).unwrap().is_empty());
    }

    #[test]
    fn canonical_range() {
        assert_eq!(canonical_angle(Complex64::new(-1.0, 0.0)), -0.5);
        assert_eq!(canonical_angle(Complex64::new(1.0, 0.0)), 0.0);
        assert!((canonical_angle(Complex64::new(0.0, 1.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn interval_counts() {
        let a = AngleSet {
            angles: vec![-0.25, 0.25],
            rh_residual: 0.0,
        };
        assert_eq!(count_in_interval(&a, Interval::new(0.6).unwrap()), 2);
        assert_eq!(count_in_interval(&a, Interval::new(0.4).unwrap()), 0);
        // endpoints are inside
        assert_eq!(count_in_interval(&a, Interval::new(0.5).unwrap()), 2);
        assert!(Interval::new(0.0).is_err());
        assert!(Interval::new(1.0).is_err());
        assert!(Interval::new(f64::NAN).is_err());
    }

    #[test]
    fn reciprocal_roots_rebuild_polynomial() {
        let f: PolyOverFq = "1,2,0,1,2,0,0,1".parse().unwrap();
        let l = l_polynomial(&engine(), &f, 1).unwrap();
        let roots = reciprocal_roots(&l).unwrap();
        let mut prod = vec![Complex64::new(1.0, 0.0)];
        for a in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
            for (i, &c) in prod.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * a;
            }
            prod = next;
        }
        for (x, y) in prod.iter().zip(&l.coefficients) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn explicit_formula_on_x2() {
        let trig = TrigPoly::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        let rep = explicit_formula_check(&engine(), &x2(), 1, &trig).unwrap();
        assert!(rep.lhs.norm() < 1e-12);
        assert!(rep.residual < 1e-12);

        let constant = TrigPoly::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let f: PolyOverFq = "2,1,0,0,1".parse().unwrap();
        let rep = explicit_formula_check(&engine(), &f, 1, &constant).unwrap();
        assert!((rep.lhs - 3.0).norm() < 1e-12 && rep.residual < 1e-12);
    }

    #[test]
    fn prime_powers_on_x2() {
        let rep = prime_power_check(&engine(), &x2(), 1, 1).unwrap();
        assert!((rep.lhs - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(rep.residual < 1e-12);
        let rep = prime_power_check(&engine(), &x2(), 1, 2).unwrap();
        assert!((rep.lhs - 1.0).norm() < 1e-12);
        assert!(rep.residual < 1e-12);
    }

    #[test]
    fn discrepancy_of_single_zero() {
        let r = discrepancy_check(&engine(), &x2(), 1, Interval::new(0.3).unwrap(), 1).unwrap();
        assert!(r.lhs <= 1.0);
        assert!(r.holds);
        assert_eq!(default_discrepancy_k(4, 3), 1);
        assert_eq!(default_discrepancy_k(41, 3), 3);
    }
}
