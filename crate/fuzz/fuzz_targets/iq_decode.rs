#![no_main]

use libfuzzer_sys::fuzz_target;
use longsync::modem::{decode_iq, encode_iq};

fuzz_target!(|data: &[u8]| {
    match decode_iq(data) {
        Ok(x) => {
            assert_eq!(x.len() * 8, data.len());
            assert!(x.iter().all(|s| s.re.is_finite() && s.im.is_finite()));
            assert_eq!(encode_iq(&x), data);
        }
        Err(_) => assert!(
            data.len() % 8 != 0
                || data
                    .chunks_exact(4)
                    .any(|c| !f32::from_le_bytes([c[0], c[1], c[2], c[3]]).is_finite())
        ),
    }
});
