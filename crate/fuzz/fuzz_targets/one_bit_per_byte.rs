#![no_main]

use libfuzzer_sys::fuzz_target;
use longsync::framing::{decode_one_bit_per_byte, encode_one_bit_per_byte};

fuzz_target!(|data: &[u8]| {
    match decode_one_bit_per_byte(data) {
        Ok(bs) => assert_eq!(encode_one_bit_per_byte(&bs), data),
        Err(_) => assert!(data.iter().any(|&b| b > 1)),
    }
});
