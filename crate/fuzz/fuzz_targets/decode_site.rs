#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::chain::{decode_site, encode_site};

fuzz_target!(|data: &[u8]| {
    for &byte in data {
        if let Ok(site) = decode_site(byte) {
            assert_eq!(site.index(), byte);
            assert_eq!(encode_site(site.qubit, site.pointer, site.program).unwrap(), byte);
        }
    }
});
