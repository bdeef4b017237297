#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::field_tower::split_prime_power;

fuzz_target!(|q: u64| {
    if let Ok((p, r)) = split_prime_power(q) {
        assert_eq!((p as u64).checked_pow(r), Some(q));
    }
});
