#![no_main]

use libfuzzer_sys::fuzz_target;
use longsync::framing::Sidecar;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(meta) = Sidecar::parse(text) {
        // Whatever parses must survive a write/parse round trip.
        let again = Sidecar::parse(&meta.to_string()).expect("rendered sidecar reparses");
        assert_eq!(again, meta);
        let _ = meta.packed_bit_count();
    }
});
