#![no_main]

use libfuzzer_sys::fuzz_target;
use tiqca::assembler::CommandProgram;
use tiqca::chain::parse_bits;
use tiqca::evolver::CommandConfiguration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = CommandProgram::parse(text) {
        assert_eq!(CommandProgram::parse(&p.real_string()).unwrap(), p);
    }
    if let Ok(c) = CommandConfiguration::parse(text) {
        assert_eq!(CommandConfiguration::parse(&c.label()).unwrap(), c);
    }
    let _ = parse_bits(text);
});
