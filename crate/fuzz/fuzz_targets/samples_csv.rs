#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::statistics::read_samples_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_samples_csv(data);
});
