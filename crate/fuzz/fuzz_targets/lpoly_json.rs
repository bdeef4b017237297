#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::lfun::LPolynomial;

fuzz_target!(|data: &str| {
    if let Ok(l) = LPolynomial::from_json(data) {
        let again = LPolynomial::from_json(&l.to_json().to_string()).unwrap();
        assert_eq!(again, l);
    }
});
