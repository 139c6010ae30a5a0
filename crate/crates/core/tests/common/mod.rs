#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tiqca::assembler::CommandProgram;
use tiqca::chain::{Boundary, ChainLayout, ChainState, ChainVector, InitialConditions};

pub fn random_vector(rng: &mut ChaCha8Rng, n_sites: usize, components: usize) -> ChainVector {
    let mut v = ChainVector::zero(n_sites);
    for _ in 0..components {
        let sites = (0..n_sites).map(|_| rng.random_range(0..30u8)).collect();
        v.add(sites, Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    }
    v
}

pub fn setup(program: &str, qubits: &str, left: usize, right: usize, padding: usize, boundary: Boundary) -> InitialConditions {
    let program = CommandProgram::parse(program).unwrap().padded(padding);
    let qubits: Vec<u8> = qubits.bytes().map(|b| b - b'0').collect();
    let layout = ChainLayout::for_program(qubits.len(), &program, left, right, boundary).unwrap();
    InitialConditions { layout, qubits, program }
}

pub fn initial(ic: &InitialConditions) -> ChainState {
    ic.initial_state().unwrap()
}
