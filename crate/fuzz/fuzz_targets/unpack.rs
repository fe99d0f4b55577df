#![no_main]

use libfuzzer_sys::fuzz_target;
use longsync::framing::{pack, unpack};

fuzz_target!(|data: &[u8]| {
    if data.len() < 4 {
        return;
    }
    let bits = u32::from_le_bytes([data[0], data[1], data[2], data[3]]) as usize;
    let bytes = &data[4..];
    if let Ok(bs) = unpack(bytes, bits) {
        assert_eq!(bs.len(), bits);
        let packed = pack(&bs);
        assert_eq!(packed.len(), bits.div_ceil(8));
        assert_eq!(unpack(&packed, bits).unwrap(), bs);
    }
});
