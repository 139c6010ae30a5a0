//! Command configurations and the reachable configuration subspace.

use std::collections::HashMap;
use std::fmt;

use crate::chain::{Boundary, Command};
use crate::error::{Error, Result};
use crate::hamiltonian::chain_bonds;

/// Default cap on the number of configurations in a subspace.
pub const DEFAULT_MAX_CONFIGURATIONS: usize = 2_000_000;

/// Contents of every program register, `E` for empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommandConfiguration {
    cells: Vec<Command>,
}

impl CommandConfiguration {
    pub fn new(cells: Vec<Command>) -> Self {
        CommandConfiguration { cells }
    }

    /// Places commands at the given sites of an `n_sites` chain.
    pub fn from_positions(n_sites: usize, positions: &[(usize, Command)]) -> Result<Self> {
        let mut cells = vec![Command::E; n_sites];
        for &(site, cmd) in positions {
            if site >= n_sites {
                return Err(Error::invalid(format!("site {site} outside {n_sites} sites")));
            }
            if cmd.is_empty() || !cells[site].is_empty() {
                return Err(Error::invalid(format!("site {site} given twice or with E")));
            }
            cells[site] = cmd;
        }
        Ok(CommandConfiguration { cells })
    }

    /// Program part of a chain basis configuration.
    pub fn from_sites(sites: &[u8]) -> Self {
        CommandConfiguration {
            cells: sites.iter().map(|&s| Command::from_index(s % 5).unwrap()).collect(),
        }
    }

    /// Parses a label like `eeLSe`.
    pub fn parse(label: &str) -> Result<Self> {
        let cells = label
            .chars()
            .map(|c| Command::from_symbol(c).ok_or_else(|| Error::invalid(format!("bad configuration symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(CommandConfiguration { cells })
    }

    pub fn n_sites(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Command] {
        &self.cells
    }

    pub fn get(&self, site: usize) -> Command {
        self.cells[site]
    }

    /// `(site, command)` for every occupied register, left to right.
    pub fn positions(&self) -> Vec<(usize, Command)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, &c)| (i, c))
            .collect()
    }

    /// Command symbols read left to right.
    pub fn tags(&self) -> String {
        self.cells.iter().filter(|c| !c.is_empty()).map(|c| c.symbol()).collect()
    }

    pub fn command_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn label(&self) -> String {
        self.cells.iter().map(|c| c.symbol()).collect()
    }

    /// Single-command moves allowed by the bonds of the chain.
    pub fn moves(&self, boundary: Boundary) -> Vec<ConfigMove> {
        let mut out = Vec::new();
        for (i, j) in chain_bonds(self.cells.len(), boundary) {
            let (a, b) = (self.cells[i], self.cells[j]);
            if a.is_empty() && !b.is_empty() {
                out.push(ConfigMove { bond: (i, j), command: b, leftward: true });
            } else if !a.is_empty() && b.is_empty() {
                out.push(ConfigMove { bond: (i, j), command: a, leftward: false });
            }
        }
        out
    }

    /// Configuration after `m`.
    pub fn apply(&self, m: &ConfigMove) -> CommandConfiguration {
        let mut cells = self.cells.clone();
        let (i, j) = m.bond;
        if m.leftward {
            cells[i] = m.command;
            cells[j] = Command::E;
        } else {
            cells[j] = m.command;
            cells[i] = Command::E;
        }
        CommandConfiguration { cells }
    }
}

impl fmt::Display for CommandConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One command hopping across bond `(i, j)`; leftward means `j -> i`,
/// which applies `U^C` to the registers, rightward applies `U^C^dagger`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigMove {
    pub bond: (usize, usize),
    pub command: Command,
    pub leftward: bool,
}

/// Configurations reachable from an initial one, in breadth-first order.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    configurations: Vec<CommandConfiguration>,
    index: HashMap<CommandConfiguration, usize>,
}

impl SubspaceBasis {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    pub fn configurations(&self) -> &[CommandConfiguration] {
        &self.configurations
    }

    pub fn index_of(&self, c: &CommandConfiguration) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub(crate) fn push(&mut self, c: CommandConfiguration, cap: usize) -> Result<usize> {
        if self.configurations.len() >= cap {
            return Err(Error::ResourceLimit {
                what: "configuration subspace",
                requested: self.configurations.len() + 1,
                cap,
            });
        }
        let k = self.configurations.len();
        self.index.insert(c.clone(), k);
        self.configurations.push(c);
        Ok(k)
    }

    pub(crate) fn empty() -> Self {
        SubspaceBasis {
            configurations: Vec::new(),
            index: HashMap::new(),
        }
    }
}

pub fn enumerate_subspace(
    initial: &CommandConfiguration,
    boundary: Boundary,
) -> Result<SubspaceBasis> {
    enumerate_subspace_capped(initial, boundary, DEFAULT_MAX_CONFIGURATIONS)
}

pub fn enumerate_subspace_capped(
    initial: &CommandConfiguration,
    boundary: Boundary,
    cap: usize,
) -> Result<SubspaceBasis> {
    let mut basis = SubspaceBasis::empty();
    basis.push(initial.clone(), cap)?;
    let mut head = 0;
    while head < basis.len() {
        let current = basis.configurations[head].clone();
        for m in current.moves(boundary) {
            let next = current.apply(&m);
            if basis.index_of(&next).is_none() {
                basis.push(next, cap)?;
            }
        }
        head += 1;
    }
    Ok(basis)
}
