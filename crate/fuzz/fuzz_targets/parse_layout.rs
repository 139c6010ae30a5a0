#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::chain::InitialConditions;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ic) = InitialConditions::from_json(text) {
        // a layout that parses must build its state and round-trip
        if ic.layout.n_sites <= 64 {
            ic.initial_state().expect("validated layout builds a state");
        }
        let again = InitialConditions::from_json(&ic.to_json()).expect("round trip");
        assert_eq!(again, ic);
    }
});
