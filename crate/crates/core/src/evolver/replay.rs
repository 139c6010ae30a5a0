//! Replaying command displacements on an open chain.
//!
//! Any sequence of single-site moves from one configuration to another
//! applies the same register unitary; the canonical order moves every
//! left-going command in program order, then every right-going command in
//! reverse order.

use rand::Rng;

use super::config::{CommandConfiguration, ConfigMove};
use crate::chain::{Boundary, Command, RegisterState};
use crate::error::{Error, Result};
use crate::hamiltonian::GateSet;

fn check_compatible(initial: &CommandConfiguration, final_: &CommandConfiguration) -> Result<()> {
    if initial.n_sites() != final_.n_sites() {
        return Err(Error::invalid("configurations have different lengths"));
    }
    if initial.tags() != final_.tags() {
        return Err(Error::invalid(format!(
            "configuration {final_} is not reachable from {initial}: command order differs"
        )));
    }
    Ok(())
}

fn step(positions: &mut [usize], k: usize, cmd: Command, leftward: bool) -> ConfigMove {
    let from = positions[k];
    if leftward {
        positions[k] = from - 1;
        ConfigMove { bond: (from - 1, from), command: cmd, leftward }
    } else {
        positions[k] = from + 1;
        ConfigMove { bond: (from, from + 1), command: cmd, leftward }
    }
}

/// Left-goers in program order, then right-goers in reverse program order.
pub fn canonical_interleaving(
    initial: &CommandConfiguration,
    final_: &CommandConfiguration,
) -> Result<Vec<ConfigMove>> {
    check_compatible(initial, final_)?;
    let start = initial.positions();
    let target: Vec<usize> = final_.positions().iter().map(|p| p.0).collect();
    let mut pos: Vec<usize> = start.iter().map(|p| p.0).collect();
    let mut moves = Vec::new();
    for k in 0..pos.len() {
        while pos[k] > target[k] {
            moves.push(step(&mut pos, k, start[k].1, true));
        }
    }
    for k in (0..pos.len()).rev() {
        while pos[k] < target[k] {
            moves.push(step(&mut pos, k, start[k].1, false));
        }
    }
    Ok(moves)
}

/// A uniformly chosen admissible move at every step, with up to `detours`
/// extra steps away from the target that are undone later.
pub fn random_interleaving<R: Rng>(
    initial: &CommandConfiguration,
    final_: &CommandConfiguration,
    rng: &mut R,
    detours: usize,
) -> Result<Vec<ConfigMove>> {
    check_compatible(initial, final_)?;
    let n = initial.n_sites();
    let start = initial.positions();
    let target: Vec<usize> = final_.positions().iter().map(|p| p.0).collect();
    let mut pos: Vec<usize> = start.iter().map(|p| p.0).collect();
    let mut moves = Vec::new();
    let mut detours_left = detours;
    let free = |pos: &[usize], site: usize| !pos.contains(&site);
    loop {
        let mut towards = Vec::new();
        let mut away = Vec::new();
        for k in 0..pos.len() {
            let p = pos[k];
            let left_ok = p > 0 && free(&pos, p - 1);
            let right_ok = p + 1 < n && free(&pos, p + 1);
            if left_ok {
                if p > target[k] { towards.push((k, true)) } else { away.push((k, true)) }
            }
            if right_ok {
                if p < target[k] { towards.push((k, false)) } else { away.push((k, false)) }
            }
        }
        if towards.is_empty() {
            if pos == target {
                break;
            }
            return Err(Error::numerical("interleaving stalled before reaching the target"));
        }
        let (k, leftward) = if detours_left > 0 && !away.is_empty() && rng.random_bool(0.3) {
            detours_left -= 1;
            away[rng.random_range(0..away.len())]
        } else {
            towards[rng.random_range(0..towards.len())]
        };
        moves.push(step(&mut pos, k, start[k].1, leftward));
    }
    Ok(moves)
}

/// Applies `U^C` for every leftward move and `U^C^dagger` for every rightward one.
pub fn replay_moves(moves: &[ConfigMove], registers: &RegisterState, gates: &GateSet) -> RegisterState {
    moves.iter().fold(registers.clone(), |r, m| {
        gates.apply_bond(m.command, !m.leftward, m.bond.0, m.bond.1, &r)
    })
}

/// Registers carried by `final_` when the chain starts in `initial` with
/// `initial_registers`. Open chains only.
pub fn replay(
    initial: &CommandConfiguration,
    final_: &CommandConfiguration,
    initial_registers: &RegisterState,
    gates: &GateSet,
    boundary: Boundary,
) -> Result<RegisterState> {
    if boundary == Boundary::Periodic {
        return Err(Error::invalid("replay is defined for open chains only"));
    }
    let moves = canonical_interleaving(initial, final_)?;
    Ok(replay_moves(&moves, initial_registers, gates))
}

/// Where each logical qubit ends up after a sequence of moves.
///
/// Qubit slots are tracked classically: `L` exchanges the qubit registers of
/// its bond, `S` exchanges the qubit at the pointer with the pointer's
/// internal qubit, `R` moves the pointer across its bond. `G` keeps every
/// label in place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTracker {
    /// Logical label held by the qubit register of each site.
    pub sites: Vec<Option<usize>>,
    /// Logical label held by the pointer's internal qubit.
    pub internal: Option<usize>,
    pub pointer_site: usize,
}

impl SlotTracker {
    pub fn new(n_sites: usize, window_start: usize, n_logical: usize, pointer_site: usize) -> Self {
        let mut sites = vec![None; n_sites];
        for k in 0..n_logical {
            sites[window_start + k] = Some(k);
        }
        SlotTracker {
            sites,
            internal: None,
            pointer_site,
        }
    }

    pub fn apply(&mut self, m: &ConfigMove) {
        let (i, j) = m.bond;
        match m.command {
            Command::L => self.sites.swap(i, j),
            Command::R => {
                if self.pointer_site == i {
                    self.pointer_site = j;
                } else if self.pointer_site == j {
                    self.pointer_site = i;
                }
            }
            Command::S => {
                if self.pointer_site == i {
                    std::mem::swap(&mut self.sites[i], &mut self.internal);
                }
            }
            Command::G | Command::E => {}
        }
    }

    /// Physical location of logical qubit `k`: `Some(site)` or `None` for
    /// the internal pointer qubit.
    pub fn locate(&self, k: usize) -> Option<Option<usize>> {
        if self.internal == Some(k) {
            return Some(None);
        }
        self.sites.iter().position(|&l| l == Some(k)).map(Some)
    }
}
