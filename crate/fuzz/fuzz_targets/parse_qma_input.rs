#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::qma::InputHamiltonian;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = InputHamiltonian::from_json(text) {
        InputHamiltonian::from_json(&h.to_json()).expect("round trip");
    }
});
