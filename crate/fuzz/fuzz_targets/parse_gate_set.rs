#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::hamiltonian::GateSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(gates) = GateSet::from_json(text) {
        GateSet::from_json(&gates.to_json()).expect("round trip");
    }
});
