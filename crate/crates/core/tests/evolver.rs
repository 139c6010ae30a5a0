mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiqca::assembler::{interpret, CommandProgram};
use tiqca::chain::{encode_site, Boundary, ChainState, Command, PointerState, RegisterState};
use tiqca::evolver::*;
use tiqca::hamiltonian::{build_chain_hamiltonian, default_g_gate, GateSet};
use tiqca::transport::{HoppingModel, Statistics};
use tiqca::Error;

fn site(q: u8, p: PointerState, c: Command) -> u8 {
    encode_site(q, p, c).unwrap()
}

fn registers_of(state: &ChainState) -> RegisterState {
    let (sites, _) = state.iter().next().unwrap();
    RegisterState::basis(sites.iter().map(|s| s / 5).collect())
}

#[test]
fn zero_time_is_identity() {
    let ic = common::setup("RSG", "01", 1, 1, 0, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    let s = common::initial(&ic);
    assert!(evolve(&s, &h, 0.0).unwrap().max_abs_diff(&s) < 1e-15);
}

#[test]
fn empty_program_is_stationary() {
    let a = PointerState::Absent;
    let s = ChainState::basis(vec![site(1, PointerState::P0, Command::E), site(0, a, Command::E), site(1, a, Command::E)]);
    let h = build_chain_hamiltonian(3, Boundary::Open, GateSet::default()).unwrap();
    assert!(evolve(&s, &h, 3.7).unwrap().max_abs_diff(&s) < 1e-15);
}

#[test]
fn two_site_rabi_oscillation() {
    let a = PointerState::Absent;
    let s = ChainState::basis(vec![site(0, a, Command::E), site(0, a, Command::R)]);
    for (boundary, rate) in [(Boundary::Open, 1.0), (Boundary::Periodic, 2.0)] {
        let h = build_chain_hamiltonian(2, boundary, GateSet::default()).unwrap();
        for t in [0.3, 1.1, 2.9] {
            let dist = configuration_distribution(&evolve(&s, &h, t).unwrap());
            let stay = dist[&CommandConfiguration::parse("eR").unwrap()];
            assert!((stay - (rate * t as f64).cos().powi(2)).abs() < 1e-12);
        }
    }
}

#[test]
fn negative_time_is_rejected() {
    let ic = common::setup("R", "0", 1, 0, 0, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    assert!(matches!(evolve(&common::initial(&ic), &h, -1.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn subspace_agrees_with_full_space_evolution() {
    for (program, qubits, boundary) in [("SRGL", "10", Boundary::Open), ("LLL", "00", Boundary::Periodic)] {
        let ic = common::setup(program, qubits, 1, 1, 1, boundary);
        let h = build_chain_hamiltonian(ic.layout.n_sites, boundary, GateSet::default()).unwrap();
        let s = common::initial(&ic);
        let opts = EvolveOptions::default();
        let (fast, report) = evolve_with(&s, &h, 1.7, &opts).unwrap();
        assert_eq!(report.methods, vec![Method::Dense]);
        let full = evolve_full(&s, &h, 1.7, &opts).unwrap();
        assert!(fast.max_abs_diff(&full) < 1e-9, "{boundary:?}");
    }
}

#[test]
fn winding_on_a_ring_falls_back_to_the_full_space() {
    let ic = common::setup("SRG", "10", 1, 1, 1, Boundary::Periodic);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Periodic, GateSet::default()).unwrap();
    let s = common::initial(&ic);
    let start = CommandConfiguration::from_sites(s.iter().next().unwrap().0);
    let err = SubspaceDynamics::build(&h, &start, &registers_of(&s), 10_000).unwrap_err();
    assert!(err.is_numerical());
    let (out, report) = evolve_with(&s, &h, 0.8, &EvolveOptions::default()).unwrap();
    assert_eq!(report.methods, vec![Method::FullSpace]);
    assert!((out.norm() - 1.0).abs() < 1e-10);
    assert!((h.expectation(&out) - h.expectation(&s)).norm() < 1e-8);
}

#[test]
fn krylov_agrees_with_dense() {
    let ic = common::setup("SRGL", "10", 2, 1, 1, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    let s = common::initial(&ic);
    let dense = evolve_with(&s, &h, 4.0, &EvolveOptions::default()).unwrap();
    let mut opts = EvolveOptions::default();
    opts.dense_threshold = 0;
    let krylov = evolve_with(&s, &h, 4.0, &opts).unwrap();
    assert_eq!(dense.1.methods, vec![Method::Dense]);
    assert_eq!(krylov.1.methods, vec![Method::Krylov]);
    assert!(dense.0.max_abs_diff(&krylov.0) < 1e-9);
}

#[test]
fn re_evolving_an_evolved_state_composes() {
    let ic = common::setup("RSL", "01", 1, 1, 0, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    let s = common::initial(&ic);
    let once = evolve(&s, &h, 2.5).unwrap();
    let twice = evolve(&evolve(&s, &h, 1.0).unwrap(), &h, 1.5).unwrap();
    assert!(once.max_abs_diff(&twice) < 1e-9);
}

#[test]
fn open_chain_marginals_match_hopping_model() {
    let ic = common::setup("RSG", "01", 1, 1, 0, Boundary::Open);
    let n = ic.layout.n_sites;
    let h = build_chain_hamiltonian(n, Boundary::Open, GateSet::default()).unwrap();
    let s = common::initial(&ic);
    let start: Vec<usize> = ic.layout.program_interval().collect();
    let model = HoppingModel::new(n, 3, Boundary::Open, Statistics::Fermion).unwrap();
    let times = [0.5, 1.0, 3.0];
    let reference = model.evolve_distribution(&start, &times).unwrap();
    for (t, want) in times.iter().zip(reference) {
        let mut got: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (c, p) in configuration_distribution(&evolve(&s, &h, *t).unwrap()) {
            *got.entry(c.positions().iter().map(|x| x.0).collect()).or_default() += p;
        }
        for (k, p) in want {
            assert!((got.get(&k).copied().unwrap_or(0.0) - p).abs() < 1e-10);
        }
    }
}

#[test]
fn registers_follow_replay() {
    let ic = common::setup("SRGLS", "10", 1, 1, 1, Boundary::Open);
    let gates = GateSet::default();
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, gates.clone()).unwrap();
    let s = common::initial(&ic);
    let start = CommandConfiguration::from_sites(s.iter().next().unwrap().0);
    let regs0 = registers_of(&s);
    let evolved = evolve(&s, &h, 2.0).unwrap();
    let mut blocks: BTreeMap<CommandConfiguration, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
    for (sites, a) in evolved.iter() {
        blocks
            .entry(CommandConfiguration::from_sites(sites))
            .or_default()
            .insert(sites.iter().map(|x| x / 5).collect(), *a);
    }
    assert!(blocks.len() > 10);
    for (config, block) in blocks {
        assert_eq!(config.tags(), start.tags());
        let block = RegisterState::from_map(block);
        let predicted = replay(&start, &config, &regs0, &gates, Boundary::Open).unwrap();
        let overlap = predicted.inner(&block);
        let residual: f64 = block
            .iter()
            .map(|(k, a)| (a - overlap * predicted.get(k)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(residual < 1e-12 * block.norm().max(1e-300) + 1e-15, "{config}");
    }
}

#[test]
fn measurement_of_basis_state_is_certain() {
    let ic = common::setup("RS", "0", 1, 0, 0, Boundary::Open);
    let s = common::initial(&ic);
    let outcome = measure_program(&s, 3).unwrap();
    assert_eq!(outcome.probability, 1.0);
    assert_eq!(outcome.collapsed, s);
}

#[test]
fn measurement_distribution_sums_to_one_and_is_reproducible() {
    let ic = common::setup("RSG", "01", 1, 1, 0, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    let evolved = evolve(&common::initial(&ic), &h, 1.3).unwrap();
    let dist = configuration_distribution(&evolved);
    assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-8);
    let mut direct: BTreeMap<CommandConfiguration, f64> = BTreeMap::new();
    for (sites, a) in evolved.iter() {
        *direct.entry(CommandConfiguration::from_sites(sites)).or_default() += a.norm_sqr();
    }
    assert_eq!(direct, dist);
    let a = measure_program(&evolved, 99).unwrap();
    let b = measure_program(&evolved, 99).unwrap();
    assert_eq!(a, b);
    assert!((a.probability - dist[&a.configuration]).abs() < 1e-15);
    assert!((a.collapsed.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn success_predicate_cases() {
    let ic = common::setup("RS", "00", 1, 2, 2, Boundary::Open);
    let layout = &ic.layout;
    // chain: margin(1) qc(2) program(4) right(2) = 9 sites
    assert_eq!(layout.n_sites, 9);
    let start = CommandConfiguration::from_sites(common::initial(&ic).iter().next().unwrap().0);
    assert!(!success_predicate(&start, layout));
    assert!(success_predicate(&CommandConfiguration::parse("RSeeeeeLL").unwrap(), layout) == false);
    let all_left = CommandConfiguration::parse("RSLLeeeee").unwrap();
    assert!(!success_predicate(&all_left, layout));
    let ic = common::setup("RS", "00", 2, 2, 2, Boundary::Open);
    let layout = &ic.layout;
    assert!(success_predicate(&CommandConfiguration::parse("RSeeeeeeLL").unwrap(), layout));
    assert!(!success_predicate(&CommandConfiguration::parse("ReSeeeeeLL").unwrap(), layout));
}

#[test]
fn readout_of_empty_program_returns_initial_qubits() {
    let ic = common::setup("", "101", 1, 1, 0, Boundary::Open);
    let s = common::initial(&ic);
    let outcome = measure_program(&s, 0).unwrap();
    let dist = readout(&s, &ic.layout, &outcome).unwrap();
    assert_eq!(dist, BTreeMap::from([("101".to_string(), 1.0)]));
}

#[test]
fn readout_of_failed_configuration_is_a_precondition_error() {
    let ic = common::setup("G", "1", 1, 0, 0, Boundary::Open);
    let s = common::initial(&ic);
    let outcome = measure_program(&s, 0).unwrap();
    assert!(matches!(readout(&s, &ic.layout, &outcome), Err(Error::Precondition(_))));
}

#[test]
fn single_g_readout_matches_gate_arithmetic() {
    let g = default_g_gate();
    for q in ["0", "1"] {
        let ic = common::setup("G", q, 2, 1, 0, Boundary::Open);
        let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
        let evolved = evolve(&common::initial(&ic), &h, 2.0).unwrap();
        let post = postselected_readout(&evolved, &ic.layout).unwrap();
        assert!(post.success_probability > 0.05);
        // G on |internal = 0> (x) |q>
        let b = (q == "1") as usize;
        let p1: f64 = (0..2).map(|i| g[(2 * i + 1, b)].norm_sqr()).sum();
        assert!((post.distribution.get("1").copied().unwrap_or(0.0) - p1).abs() < 1e-10);
        let machine = interpret(&CommandProgram::parse("G").unwrap(), &ic.qubits, 0, &g).unwrap();
        let want = machine.qubit_distribution();
        for (k, p) in &want {
            assert!((post.distribution.get(k).copied().unwrap_or(0.0) - p).abs() < 1e-10);
        }
    }
}

#[test]
fn repeat_until_success_reaches_success() {
    let ic = common::setup("R", "0", 2, 1, 0, Boundary::Open);
    let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
    let out = repeat_until_success(&common::initial(&ic), &h, &ic.layout, 3.0, 50, 5, &EvolveOptions::default()).unwrap();
    assert!(out.success);
    assert!(out.rounds >= 1);
}

#[test]
fn random_small_evolutions_conserve_norm_and_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let symbols = ['L', 'R', 'S', 'G'];
    for _ in 0..10 {
        let len = rng.random_range(1..4);
        let program: String = (0..len).map(|_| symbols[rng.random_range(0..4)]).collect();
        let qubits: String = (0..2).map(|_| if rng.random_bool(0.5) { '1' } else { '0' }).collect();
        let ic = common::setup(&program, &qubits, 1, 1, 0, Boundary::Open);
        let h = build_chain_hamiltonian(ic.layout.n_sites, Boundary::Open, GateSet::default()).unwrap();
        let s = common::initial(&ic);
        let t = rng.random_range(0.0..5.0);
        let (out, report) = evolve_with(&s, &h, t, &EvolveOptions::default()).unwrap();
        assert!((report.norm - 1.0).abs() < 1e-10);
        assert!((h.expectation(&out) - h.expectation(&s)).norm() < 1e-8);
    }
}
