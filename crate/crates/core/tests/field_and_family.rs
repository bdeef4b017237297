use std::collections::HashMap;

use proptest::prelude::*;

use aszeta::family::{evaluate, mu_reduce, FamilySpec, PolyOverFq, Variant};
use aszeta::field_tower::{Elem, FieldTower};

fn tower(q: u32) -> FieldTower {
    match q {
        3 => FieldTower::new(3, 1).unwrap(),
        5 => FieldTower::new(5, 1).unwrap(),
        9 => FieldTower::new(3, 2).unwrap(),
        _ => unreachable!(),
    }
}

fn field_cases() -> impl Strategy<Value = (u32, u32)> {
    prop_oneof![
        (Just(3u32), 1u32..=7),
        (Just(5u32), 1u32..=4),
        (Just(9u32), 1u32..=3),
    ]
}

proptest! {
    #[test]
    fn trace_is_additive_and_frobenius_invariant((q, n) in field_cases(), a in any::<u32>(), b in any::<u32>()) {
        let t = tower(q);
        let field = t.field(n).unwrap();
        let x = field.from_vector(a % field.order());
        let y = field.from_vector(b % field.order());
        let p = field.p();
        prop_assert_eq!(field.trace(field.add(x, y)), (field.trace(x) + field.trace(y)) % p);
        prop_assert_eq!(field.trace(field.frobenius(x, 1)), field.trace(x));
        prop_assert_eq!(field.trace(x), field.trace_by_frobenius(x));
    }

    #[test]
    fn conjugates_share_minimal_polynomial((q, n) in field_cases(), a in any::<u32>()) {
        let t = tower(q);
        let field = t.field(n).unwrap();
        let x = field.from_vector(a % field.order());
        let g = field.minimal_polynomial(x);
        prop_assert_eq!(g.len() as u32 - 1, field.minimal_degree(x));
        prop_assert_eq!(field.minimal_polynomial(field.frobenius_q(x, 1)), g.clone());
        // x is a root of its minimal polynomial
        let lifted = PolyOverFq::new(g);
        prop_assert!(evaluate(&field, &lifted, x).is_zero());
    }

    #[test]
    fn mu_reduction_preserves_traces(seed in any::<u64>(), d in prop::sample::select(vec![4usize, 5, 7, 8, 10])) {
        let t = tower(3);
        let full = FamilySpec::new(3, 1, d, Variant::Full).unwrap();
        let reduced = FamilySpec::new(3, 1, d, Variant::PrimeToP).unwrap();
        let f = full.sample(seed);
        let g = mu_reduce(&f, t.base()).unwrap();
        prop_assert!(reduced.contains(&g));
        prop_assert_eq!(mu_reduce(&g, t.base()).unwrap(), g.clone());
        for n in 1..=4 {
            let field = t.field(n).unwrap();
            for x in field.elements() {
                prop_assert_eq!(field.trace(evaluate(&field, &f, x)), field.trace(evaluate(&field, &g, x)));
            }
        }
    }
}

#[test]
fn trace_is_balanced() {
    for (q, n) in [(3, 1), (3, 4), (5, 3), (9, 2)] {
        let t = tower(q);
        let field = t.field(n).unwrap();
        let mut counts = vec![0u32; field.p() as usize];
        for x in field.elements() {
            counts[field.trace(x) as usize] += 1;
        }
        let expected = field.order() / field.p();
        assert!(counts.iter().all(|&c| c == expected), "{q} {n}: {counts:?}");
    }
}

#[test]
fn subfield_sizes() {
    let t = tower(3);
    for n in [4u32, 6] {
        let field = t.field(n).unwrap();
        for m in (1..=n).filter(|m| n % m == 0) {
            let members = field
                .elements()
                .filter(|&x| field.subfield_member(x, m).unwrap())
                .count();
            assert_eq!(members as u32, 3u32.pow(m));
        }
        assert!(field.subfield_member(Elem::ONE, 5).is_err());
    }
}

#[test]
fn mu_fibres_over_f9() {
    let t = tower(9);
    let full = FamilySpec::new(3, 2, 4, Variant::Full).unwrap();
    let mut fibres: HashMap<PolyOverFq, u32> = HashMap::new();
    for f in full.enumerate().unwrap() {
        *fibres.entry(mu_reduce(&f, t.base()).unwrap()).or_default() += 1;
    }
    let reduced = FamilySpec::new(3, 2, 4, Variant::PrimeToP).unwrap();
    assert_eq!(fibres.len() as u128, reduced.family_size());
    assert!(fibres.values().all(|&c| c == 9));
}

#[test]
fn samples_are_uniform() {
    // chi-square over the 27 values of (a_0, a_1, a_2) and the 2 leading coefficients
    let spec = FamilySpec::new(3, 1, 4, Variant::PrimeToP).unwrap();
    let mut counts = vec![0u32; 54];
    let n = 27_000;
    for seed in 0..n {
        let f = spec.sample(seed);
        let idx = (f.coeff(4) - 1) * 27 + f.coeff(2) * 9 + f.coeff(1) * 3 + f.coeff(0);
        counts[idx as usize] += 1;
    }
    let expected = n as f64 / 54.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 53 degrees of freedom; the 0.999 quantile is about 90.6
    assert!(chi2 < 90.6, "chi-square {chi2}");
}

#[test]
fn family_size_and_membership() {
    let spec = FamilySpec::new(3, 1, 8, Variant::PrimeToP).unwrap();
    assert_eq!(spec.family_size(), 1458);
    let twisted = FamilySpec::new(3, 1, 8, Variant::Twisted).unwrap();
    assert_eq!(twisted.family_size(), 486);
    let f: PolyOverFq = "1,0,0,1,0,0,0,0,2".parse().unwrap();
    assert!(!spec.contains(&f));
    assert!(FamilySpec::new(3, 1, 8, Variant::Full).unwrap().contains(&f));
}
