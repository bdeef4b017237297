#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::family::{FamilySpec, Variant};

fuzz_target!(|input: (u8, u8, u8, u8, u64)| {
    let (p, r, d, v, seed) = input;
    let variant = [Variant::Full, Variant::PrimeToP, Variant::Twisted][v as usize % 3];
    let Ok(spec) = FamilySpec::new(p as u32, r as u32 % 3, d as usize % 64, variant) else {
        return;
    };
    let f = spec.sample(seed);
    assert!(spec.contains(&f));
    assert_eq!(f.degree(), Some(spec.d));
});
