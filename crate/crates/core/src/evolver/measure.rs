//! Program-register measurement, success detection and qubit readout.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::CommandConfiguration;
use super::replay::{canonical_interleaving, SlotTracker};
use super::subspace::{evolve_with, split_by_configuration, EvolveOptions};
use crate::assembler::bitstring;
use crate::chain::{Boundary, ChainLayout, ChainState, ChainVector, RegisterState};
use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub configuration: CommandConfiguration,
    pub probability: f64,
    pub collapsed: ChainState,
}

/// Probability of each program configuration.
pub fn configuration_distribution(state: &ChainVector) -> BTreeMap<CommandConfiguration, f64> {
    let mut out = BTreeMap::new();
    for (sites, a) in state.iter() {
        *out.entry(CommandConfiguration::from_sites(sites)).or_insert(0.0) += a.norm_sqr();
    }
    out
}

/// Samples a configuration from the exact marginal and collapses onto it.
pub fn measure_program(state: &ChainState, seed: u64) -> Result<MeasurementOutcome> {
    let dist = configuration_distribution(state);
    let total: f64 = dist.values().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("cannot measure the zero vector"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (c, &p) in &dist {
        acc += p;
        if p > 0.0 {
            chosen = Some((c, p));
        }
        if x < acc && p > 0.0 {
            break;
        }
    }
    let (config, p) = chosen.expect("a nonzero distribution has a positive entry");
    let mut collapsed = ChainVector::zero(state.n_sites());
    for (sites, &a) in state.iter() {
        if &CommandConfiguration::from_sites(sites) == config {
            collapsed.add(sites.clone(), a);
        }
    }
    Ok(MeasurementOutcome {
        configuration: config.clone(),
        probability: p / total,
        collapsed: ChainState::from_vector(collapsed)?,
    })
}

/// Number of real (non-padding) commands in the layout.
pub fn real_program_len(layout: &ChainLayout) -> usize {
    layout.program_len - layout.padding_length
}

/// True iff the first `l_p` commands, read left to right, sit strictly left
/// of the quantum computer.
pub fn success_predicate(config: &CommandConfiguration, layout: &ChainLayout) -> bool {
    let l_p = real_program_len(layout);
    let positions = config.positions();
    positions.len() >= l_p && positions[..l_p].iter().all(|&(site, _)| site < layout.qc_window.0)
}

pub fn success_probability(state: &ChainVector, layout: &ChainLayout) -> f64 {
    configuration_distribution(state)
        .iter()
        .filter(|(c, _)| success_predicate(c, layout))
        .map(|(_, p)| p)
        .fold(0.0, |a, b| a + b)
}

/// Configuration the layout starts in, with the command order of `config`.
fn initial_configuration(config: &CommandConfiguration, layout: &ChainLayout) -> Result<CommandConfiguration> {
    let positions = config.positions();
    if positions.len() != layout.program_len {
        return Err(Error::invalid(format!(
            "configuration holds {} commands, the layout's program has {}",
            positions.len(),
            layout.program_len
        )));
    }
    let placed: Vec<_> = positions
        .iter()
        .enumerate()
        .map(|(k, &(_, c))| (layout.program_start + k, c))
        .collect();
    CommandConfiguration::from_positions(layout.n_sites, &placed)
}

/// Unnormalised distribution of the logical qubits in one configuration block.
fn block_readout(
    config: &CommandConfiguration,
    registers: &RegisterState,
    layout: &ChainLayout,
) -> Result<BTreeMap<String, f64>> {
    if layout.boundary == Boundary::Periodic {
        return Err(Error::invalid("qubit readout is defined for open chains only"));
    }
    let initial = initial_configuration(config, layout)?;
    let l_q = layout.l_q();
    let mut tracker = SlotTracker::new(layout.n_sites, layout.qc_window.0, l_q, layout.pointer_site);
    for m in canonical_interleaving(&initial, config)? {
        tracker.apply(&m);
    }
    let slots: Vec<Option<usize>> = (0..l_q)
        .map(|k| tracker.locate(k).expect("every logical qubit has a slot"))
        .collect();
    let p = tracker.pointer_site;
    let mut out = BTreeMap::new();
    for (regs, a) in registers.iter() {
        let mut index = 0usize;
        for (k, slot) in slots.iter().enumerate() {
            let bit = match slot {
                Some(site) => regs[*site] / 3,
                None => match regs[p] % 3 {
                    0 => return Err(Error::numerical("pointer missing from its tracked site")),
                    s => s - 1,
                },
            };
            index |= (bit as usize) << k;
        }
        *out.entry(bitstring(index, l_q)).or_insert(0.0) += a.norm_sqr();
    }
    Ok(out)
}

fn normalise(mut dist: BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let total: f64 = dist.values().sum();
    if total > 0.0 {
        dist.values_mut().for_each(|p| *p /= total);
    }
    dist
}

/// Distribution of the logical qubits (keyed `q0 q1 ...`) after a successful
/// program measurement.
pub fn readout(
    state: &ChainState,
    layout: &ChainLayout,
    outcome: &MeasurementOutcome,
) -> Result<BTreeMap<String, f64>> {
    if !success_predicate(&outcome.configuration, layout) {
        return Err(Error::Precondition(format!(
            "configuration {} is not a success",
            outcome.configuration
        )));
    }
    let blocks = split_by_configuration(state);
    let registers = blocks.get(&outcome.configuration).ok_or_else(|| {
        Error::Precondition(format!("state has no weight on {}", outcome.configuration))
    })?;
    Ok(normalise(block_readout(&outcome.configuration, registers, layout)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostselectedReadout {
    pub success_probability: f64,
    pub distribution: BTreeMap<String, f64>,
}

/// Qubit distribution conditioned on success, mixing every successful configuration.
pub fn postselected_readout(state: &ChainVector, layout: &ChainLayout) -> Result<PostselectedReadout> {
    let mut mixed = BTreeMap::new();
    let mut success = 0.0;
    for (config, regs) in split_by_configuration(state) {
        if !success_predicate(&config, layout) {
            continue;
        }
        for (bits, p) in block_readout(&config, &regs, layout)? {
            success += p;
            *mixed.entry(bits).or_insert(0.0) += p;
        }
    }
    if success <= 0.0 {
        return Err(Error::Precondition("no successful configuration in the state".into()));
    }
    let total = state.norm().powi(2);
    Ok(PostselectedReadout {
        success_probability: success / total,
        distribution: normalise(mixed),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatOutcome {
    pub rounds: usize,
    pub outcome: MeasurementOutcome,
    pub success: bool,
}

/// Evolve for `t`, measure, and on failure evolve the collapsed state again,
/// up to `max_rounds` rounds.
pub fn repeat_until_success(
    state: &ChainState,
    h: &ChainHamiltonian,
    layout: &ChainLayout,
    t: f64,
    max_rounds: usize,
    seed: u64,
    opts: &EvolveOptions,
) -> Result<RepeatOutcome> {
    if max_rounds == 0 {
        return Err(Error::invalid("max_rounds must be positive"));
    }
    let mut current = state.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for round in 1..=max_rounds {
        let (evolved, _) = evolve_with(&current, h, t, opts)?;
        let outcome = measure_program(&evolved, rng.random())?;
        let success = success_predicate(&outcome.configuration, layout);
        if success || round == max_rounds {
            return Ok(RepeatOutcome { rounds: round, outcome, success });
        }
        current = outcome.collapsed;
    }
    unreachable!()
}
