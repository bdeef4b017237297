#![no_main]
use libfuzzer_sys::fuzz_target;

use aszeta::audit::AuditFixture;

fuzz_target!(|data: &str| {
    if let Ok(fixture) = AuditFixture::from_json(data) {
        let _ = fixture.within_bands();
    }
});
