#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::family::PolyOverFq;

fuzz_target!(|data: &str| {
    if let Ok(f) = data.parse::<PolyOverFq>() {
        if f.is_zero() {
            return;
        }
        let back: PolyOverFq = f.to_string().parse().unwrap();
        assert_eq!(back, f);
        let _ = f.check_artin_schreier(3, 9);
    }
});
