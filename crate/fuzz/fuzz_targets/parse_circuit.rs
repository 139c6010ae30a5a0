#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::assembler::{compile, Circuit};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(circuit) = Circuit::from_json(text) {
        if circuit.gates.len() <= 64 {
            let _ = compile(&circuit, 0);
        }
    }
});
