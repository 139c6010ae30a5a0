//! Exact evolution inside the configuration-labelled invariant subspace.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::config::{CommandConfiguration, SubspaceBasis, DEFAULT_MAX_CONFIGURATIONS};
use crate::chain::{ChainState, ChainVector, RegisterState};
use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::linalg::{expm_multiply, CsrMatrix, DensePropagator, KrylovOptions, KrylovStats};

/// Overlaps of modulus further than this from 1 mean the registers reached
/// along different paths disagree.
const HOLONOMY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub krylov: KrylovOptions,
    /// Subspaces up to this dimension are exponentiated densely.
    pub dense_threshold: usize,
    pub max_configurations: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            krylov: KrylovOptions::default(),
            dense_threshold: 2048,
            max_configurations: DEFAULT_MAX_CONFIGURATIONS,
        }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut o = EvolveOptions::default();
        o.krylov.tol = tol;
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    Krylov,
    /// Closure of the support in the full chain basis, used when the
    /// configuration labels do not determine the registers.
    FullSpace,
}

#[derive(Debug, Clone, Default)]
pub struct EvolveReport {
    /// Sum of the dimensions of the subspaces that were evolved.
    pub subspace_dim: usize,
    pub subspaces: usize,
    pub methods: Vec<Method>,
    pub krylov: KrylovStats,
    /// Norm of the evolved vector before it is wrapped as a state.
    pub norm: f64,
}

/// `H` restricted to the span of `|c> (x) |R(c)>` over the configurations `c`
/// reachable from a product of one configuration and one register state.
#[derive(Debug)]
pub struct SubspaceDynamics {
    n_sites: usize,
    basis: SubspaceBasis,
    registers: Vec<RegisterState>,
    matrix: CsrMatrix,
    dense: OnceLock<DensePropagator>,
}

fn normalised(r: &RegisterState) -> Result<RegisterState> {
    let n = r.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("register state has zero norm"));
    }
    Ok(RegisterState::from_map(
        r.iter().map(|(k, a)| (k.clone(), a / n)).collect(),
    ))
}

impl SubspaceDynamics {
    pub fn build(
        h: &ChainHamiltonian,
        initial: &CommandConfiguration,
        registers: &RegisterState,
        max_configurations: usize,
    ) -> Result<Self> {
        if initial.n_sites() != h.n_sites() {
            return Err(Error::invalid("configuration and Hamiltonian sizes differ"));
        }
        let gates = h.gates();
        let mut basis = SubspaceBasis::empty();
        let mut regs = vec![normalised(registers)?];
        basis.push(initial.clone(), max_configurations)?;
        let mut triplets = Vec::new();
        let mut head = 0;
        while head < basis.len() {
            let current = basis.configurations()[head].clone();
            for m in current.moves(h.boundary()) {
                let next = current.apply(&m);
                let moved = gates.apply_bond(m.command, !m.leftward, m.bond.0, m.bond.1, &regs[head]);
                let k = match basis.index_of(&next) {
                    Some(k) => k,
                    None => {
                        regs.push(moved.clone());
                        basis.push(next, max_configurations)?
                    }
                };
                let overlap = regs[k].inner(&moved);
                if (overlap.norm() - 1.0).abs() > HOLONOMY_TOL {
                    return Err(Error::numerical(format!(
                        "subspace not closed: registers of configuration {} depend on the path (overlap modulus {})",
                        basis.configurations()[k],
                        overlap.norm()
                    )));
                }
                triplets.push((k, head, overlap));
            }
            head += 1;
        }
        let matrix = CsrMatrix::from_triplets(basis.len(), triplets);
        Ok(SubspaceDynamics {
            n_sites: h.n_sites(),
            basis,
            registers: regs,
            matrix,
            dense: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Register state attached to basis element `k`.
    pub fn registers(&self, k: usize) -> &RegisterState {
        &self.registers[k]
    }

    /// `exp(-iHt)` on subspace coefficients.
    pub fn propagate(
        &self,
        amps: &[Complex64],
        t: f64,
        opts: &EvolveOptions,
    ) -> Result<(Vec<Complex64>, Method, KrylovStats)> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
        }
        if self.dim() <= opts.dense_threshold {
            let prop = self.dense.get_or_init(|| DensePropagator::new(self.matrix.to_dense()));
            Ok((prop.apply(amps, t), Method::Dense, KrylovStats::default()))
        } else {
            let (v, stats) = expm_multiply(&self.matrix, amps, t, &opts.krylov)?;
            Ok((v, Method::Krylov, stats))
        }
    }

    /// Coefficients are `amps[k]` on `|c_k> (x) |R(c_k)>`.
    pub fn to_chain_vector(&self, amps: &[Complex64]) -> ChainVector {
        let mut out = ChainVector::zero(self.n_sites);
        for (k, &a) in amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let cells = self.basis.configurations()[k].cells();
            for (regs, &r) in self.registers[k].iter() {
                let sites = regs
                    .iter()
                    .zip(cells)
                    .map(|(&reg, c)| reg * 5 + c.index())
                    .collect();
                out.add(sites, a * r);
            }
        }
        out
    }

    /// Coefficient of `registers` against `R(c)` if it is parallel to it.
    fn coefficient(&self, c: &CommandConfiguration, registers: &RegisterState) -> Option<(usize, Complex64)> {
        let k = self.basis.index_of(c)?;
        let overlap = self.registers[k].inner(registers);
        let n = registers.norm();
        if (overlap.norm() - n).abs() <= 1e-12 * n.max(1.0) {
            Some((k, overlap))
        } else {
            None
        }
    }
}

/// Splits a chain vector into configuration blocks of register states.
pub(crate) fn split_by_configuration(v: &ChainVector) -> BTreeMap<CommandConfiguration, RegisterState> {
    let mut blocks: BTreeMap<CommandConfiguration, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
    for (sites, &a) in v.iter() {
        let config = CommandConfiguration::from_sites(sites);
        let regs = sites.iter().map(|&s| s / 5).collect();
        *blocks.entry(config).or_default().entry(regs).or_insert(Complex64::new(0.0, 0.0)) += a;
    }
    blocks
        .into_iter()
        .map(|(c, m)| (c, RegisterState::from_map(m)))
        .collect()
}

pub fn evolve(state: &ChainState, h: &ChainHamiltonian, t: f64) -> Result<ChainState> {
    Ok(evolve_with(state, h, t, &EvolveOptions::default())?.0)
}

/// Evolves each invariant subspace touched by `state` separately.
pub fn evolve_with(
    state: &ChainState,
    h: &ChainHamiltonian,
    t: f64,
    opts: &EvolveOptions,
) -> Result<(ChainState, EvolveReport)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    if state.n_sites() != h.n_sites() {
        return Err(Error::invalid("state and Hamiltonian sizes differ"));
    }
    let mut report = EvolveReport::default();
    if t == 0.0 {
        report.norm = state.norm();
        return Ok((state.clone(), report));
    }
    let mut remaining = split_by_configuration(state);
    let mut out = ChainVector::zero(h.n_sites());
    while let Some((config, regs)) = remaining.pop_first() {
        let weight = regs.norm();
        if weight == 0.0 {
            continue;
        }
        let dynamics = match SubspaceDynamics::build(h, &config, &regs, opts.max_configurations) {
            Ok(d) => d,
            Err(e) if e.is_numerical() => {
                let full = evolve_full(state, h, t, opts)?;
                let report = EvolveReport {
                    subspace_dim: 0,
                    subspaces: 0,
                    methods: vec![Method::FullSpace],
                    krylov: KrylovStats::default(),
                    norm: full.norm(),
                };
                return Ok((full, report));
            }
            Err(e) => return Err(e),
        };
        let mut amps = vec![Complex64::new(0.0, 0.0); dynamics.dim()];
        amps[0] = Complex64::new(weight, 0.0);
        remaining.retain(|c, r| match dynamics.coefficient(c, r) {
            Some((k, a)) => {
                amps[k] += a;
                false
            }
            None => true,
        });
        let (evolved, method, stats) = dynamics.propagate(&amps, t, opts)?;
        report.subspace_dim += dynamics.dim();
        report.subspaces += 1;
        report.methods.push(method);
        report.krylov.accepted_steps += stats.accepted_steps;
        report.krylov.halvings += stats.halvings;
        report.krylov.error_estimate += stats.error_estimate;
        let part = dynamics.to_chain_vector(&evolved);
        for (k, &a) in part.iter() {
            out.add(k.clone(), a);
        }
    }
    report.norm = out.norm();
    Ok((ChainState::assume_normalised(out), report))
}

/// Reference evolution on the closure of the support under `H` in the full
/// chain basis, without using the configuration structure.
pub fn evolve_full(
    state: &ChainState,
    h: &ChainHamiltonian,
    t: f64,
    opts: &EvolveOptions,
) -> Result<ChainState> {
    let mut keys: Vec<Vec<u8>> = state.iter().map(|(k, _)| k.clone()).collect();
    let mut index: HashMap<Vec<u8>, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let mut triplets = Vec::new();
    let mut head = 0;
    while head < keys.len() {
        let image = h.apply(&ChainVector::basis(keys[head].clone()));
        for (k, &a) in image.iter() {
            let row = match index.get(k) {
                Some(&r) => r,
                None => {
                    if keys.len() >= opts.max_configurations {
                        return Err(Error::ResourceLimit {
                            what: "full-space closure",
                            requested: keys.len() + 1,
                            cap: opts.max_configurations,
                        });
                    }
                    keys.push(k.clone());
                    index.insert(k.clone(), keys.len() - 1);
                    keys.len() - 1
                }
            };
            triplets.push((row, head, a));
        }
        head += 1;
    }
    let matrix = CsrMatrix::from_triplets(keys.len(), triplets);
    let mut v = vec![Complex64::new(0.0, 0.0); keys.len()];
    for (k, &a) in state.iter() {
        v[index[k]] = a;
    }
    let w = if keys.len() <= opts.dense_threshold {
        DensePropagator::new(matrix.to_dense()).apply(&v, t)
    } else {
        expm_multiply(&matrix, &v, t, &opts.krylov)?.0
    };
    let mut out = ChainVector::zero(state.n_sites());
    for (k, a) in keys.into_iter().zip(w) {
        out.add(k, a);
    }
    Ok(ChainState::assume_normalised(out))
}
