//! The fixed nearest-neighbour Hamiltonian of the automaton.
//!
//! Each bond `(i, i+1)` carries
//! `sum_C |C_i e_{i+1}><e_i C_{i+1}| (x) U^C + h.c.`: moving a command one
//! site to the left applies `U^C` to the qubit and pointer registers of the
//! two sites, moving it back applies `U^C^dagger`. All couplings are 1.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{
    join_site, split_site, Boundary, ChainVector, Command, PointerState, RegisterState,
    REGISTER_DIM, SCHEMA_VERSION, SITE_DIM,
};
use crate::cjson::MatrixJson;
use crate::error::{Error, Result};

/// Two-qubit gate acting on `|internal pointer qubit> (x) |site qubit>`,
/// basis index `2 * internal + qubit`.
pub type TwoQubitGate = Matrix4<Complex64>;

const UNITARY_TOL: f64 = 1e-12;

pub fn two_qubit_from_rows(rows: [[Complex64; 4]; 4]) -> TwoQubitGate {
    Matrix4::from_fn(|r, c| rows[r][c])
}

/// Controlled phase `diag(1, 1, 1, i)` after `exp(-i pi/8 Y)` on the first
/// (control) qubit.
pub fn default_g_gate() -> TwoQubitGate {
    let (s, c) = (std::f64::consts::FRAC_PI_8.sin(), std::f64::consts::FRAC_PI_8.cos());
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    // exp(-i theta Y) = [[cos, -sin], [sin, cos]] on the control, identity on the target
    let rot = two_qubit_from_rows([
        [re(c), z, re(-s), z],
        [z, re(c), z, re(-s)],
        [re(s), z, re(c), z],
        [z, re(s), z, re(c)],
    ]);
    let mut cphase = TwoQubitGate::identity();
    cphase[(3, 3)] = Complex64::new(0.0, 1.0);
    cphase * rot
}

/// Largest entry of `U^dagger U - 1`.
pub fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = prod.nrows();
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - want).norm());
        }
    }
    worst
}

fn gate_to_dmatrix(g: &TwoQubitGate) -> DMatrix<Complex64> {
    DMatrix::from_fn(4, 4, |r, c| g[(r, c)])
}

fn reg(qubit: u8, pointer: PointerState) -> usize {
    qubit as usize * 3 + pointer.index() as usize
}

fn unreg(r: usize) -> (u8, PointerState) {
    ((r / 3) as u8, PointerState::from_index((r % 3) as u8).unwrap())
}

/// `U^C` on the 36-dim register space of sites `(i, i+1)`, index
/// `reg_i * 6 + reg_{i+1}`.
pub fn gate_unitary(cmd: Command, g: &TwoQubitGate) -> Result<DMatrix<Complex64>> {
    let gd = gate_to_dmatrix(g);
    if unitarity_defect(&gd) > UNITARY_TOL {
        return Err(Error::invalid("g_gate is not unitary"));
    }
    let mut u = DMatrix::<Complex64>::zeros(36, 36);
    let one = Complex64::new(1.0, 0.0);
    for col in 0..36 {
        let (qi, pi) = unreg(col / 6);
        let (qj, pj) = unreg(col % 6);
        match cmd {
            Command::L => u[(reg(qj, pi) * 6 + reg(qi, pj), col)] = one,
            Command::R => u[(reg(qi, pj) * 6 + reg(qj, pi), col)] = one,
            Command::S => match pi.internal() {
                None => u[(col, col)] = one,
                Some(b) => u[(reg(b, PointerState::with_internal(qi)) * 6 + col % 6, col)] = one,
            },
            Command::G => match pi.internal() {
                None => u[(col, col)] = one,
                Some(b) => {
                    let input = 2 * b as usize + qi as usize;
                    for out in 0..4 {
                        let (nb, nq) = ((out / 2) as u8, (out % 2) as u8);
                        u[(reg(nq, PointerState::with_internal(nb)) * 6 + col % 6, col)] += g[(out, input)];
                    }
                }
            },
            Command::E => return Err(Error::invalid("the empty register has no unitary")),
        }
    }
    Ok(u)
}

/// Column-sparse form of a 36x36 register unitary.
#[derive(Debug, Clone)]
struct BondUnitary {
    cols: Vec<Vec<(u8, Complex64)>>,
}

impl BondUnitary {
    fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let cols = (0..m.ncols())
            .map(|c| {
                (0..m.nrows())
                    .filter(|&r| m[(r, c)] != Complex64::new(0.0, 0.0))
                    .map(|r| (r as u8, m[(r, c)]))
                    .collect()
            })
            .collect();
        BondUnitary { cols }
    }
}

/// The four command unitaries built from a chosen `g`.
#[derive(Debug, Clone)]
pub struct GateSet {
    g: TwoQubitGate,
    dense: [DMatrix<Complex64>; 4],
    forward: [BondUnitary; 4],
    adjoint: [BondUnitary; 4],
}

fn slot(cmd: Command) -> usize {
    match cmd {
        Command::L => 0,
        Command::R => 1,
        Command::S => 2,
        Command::G => 3,
        Command::E => panic!("the empty register has no unitary"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSetDocument {
    #[serde(default = "schema_default")]
    pub schema_version: u32,
    pub g_gate: MatrixJson,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

impl Default for GateSet {
    fn default() -> Self {
        GateSet::new(default_g_gate()).expect("default gate is unitary")
    }
}

impl GateSet {
    pub fn new(g: TwoQubitGate) -> Result<Self> {
        let dense = [
            gate_unitary(Command::L, &g)?,
            gate_unitary(Command::R, &g)?,
            gate_unitary(Command::S, &g)?,
            gate_unitary(Command::G, &g)?,
        ];
        let forward = [0, 1, 2, 3].map(|k| BondUnitary::from_dense(&dense[k]));
        let adjoint = [0, 1, 2, 3].map(|k| BondUnitary::from_dense(&dense[k].adjoint()));
        Ok(GateSet {
            g,
            dense,
            forward,
            adjoint,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GateSetDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        let m = doc.g_gate.to_matrix(4)?;
        GateSet::new(Matrix4::from_fn(|r, c| m[(r, c)]))
    }

    pub fn to_json(&self) -> String {
        let doc = GateSetDocument {
            schema_version: SCHEMA_VERSION,
            g_gate: MatrixJson::from_matrix(&gate_to_dmatrix(&self.g)),
        };
        serde_json::to_string_pretty(&doc).expect("gate set serialises")
    }

    pub fn g_gate(&self) -> &TwoQubitGate {
        &self.g
    }

    pub fn unitary(&self, cmd: Command) -> &DMatrix<Complex64> {
        &self.dense[slot(cmd)]
    }

    /// Applies `U^cmd` (or its adjoint) to the registers of sites `(i, j)`.
    pub fn apply_bond(
        &self,
        cmd: Command,
        adjoint: bool,
        i: usize,
        j: usize,
        regs: &RegisterState,
    ) -> RegisterState {
        let u = if adjoint {
            &self.adjoint[slot(cmd)]
        } else {
            &self.forward[slot(cmd)]
        };
        let mut out = std::collections::BTreeMap::new();
        for (key, amp) in regs.iter() {
            let local = key[i] as usize * REGISTER_DIM + key[j] as usize;
            for &(r, v) in &u.cols[local] {
                let mut k = key.clone();
                k[i] = r / REGISTER_DIM as u8;
                k[j] = r % REGISTER_DIM as u8;
                *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v * amp;
            }
        }
        out.retain(|_, a: &mut Complex64| *a != Complex64::new(0.0, 0.0));
        RegisterState::from_map(out)
    }
}

/// Sparse 900x900 two-site term, stored by column.
#[derive(Debug, Clone)]
pub struct TwoSiteTerm {
    cols: Vec<Vec<(u16, Complex64)>>,
}

pub fn build_two_site_term(gates: &GateSet) -> TwoSiteTerm {
    let mut cols: Vec<Vec<(u16, Complex64)>> = vec![Vec::new(); SITE_DIM * SITE_DIM];
    for cmd in Command::MOVING {
        let u = gates.unitary(cmd);
        for rin in 0..36 {
            for rout in 0..36 {
                let v = u[(rout, rin)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (ri, rj) = ((rin / 6) as u8, (rin % 6) as u8);
                let (oi, oj) = ((rout / 6) as u8, (rout % 6) as u8);
                // (e, C) -> (C, e) with U^C
                let from = join_site(ri, Command::E) as usize * SITE_DIM + join_site(rj, cmd) as usize;
                let to = join_site(oi, cmd) as usize * SITE_DIM + join_site(oj, Command::E) as usize;
                cols[from].push((to as u16, v));
                // hermitian conjugate: (C, e) -> (e, C) with U^C^dagger
                cols[to].push((from as u16, v.conj()));
            }
        }
    }
    TwoSiteTerm { cols }
}

impl TwoSiteTerm {
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = SITE_DIM * SITE_DIM;
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r as usize, c)] += v;
            }
        }
        m
    }

    /// Entries of column `local = s_i * 30 + s_{i+1}`.
    pub fn column(&self, local: usize) -> &[(u16, Complex64)] {
        &self.cols[local]
    }
}

/// `H = sum_i H_i` over the bonds of a finite chain, applied matrix-free.
#[derive(Debug, Clone)]
pub struct ChainHamiltonian {
    n_sites: usize,
    boundary: Boundary,
    term: Arc<TwoSiteTerm>,
    gates: Arc<GateSet>,
    bonds: Vec<(usize, usize)>,
}

/// Bonds `(i, i+1)` of the chain; a periodic chain of two sites has both
/// `(0, 1)` and `(1, 0)`.
pub fn chain_bonds(n_sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && n_sites >= 2 {
        bonds.push((n_sites - 1, 0));
    }
    bonds
}

pub fn build_chain_hamiltonian(
    n_sites: usize,
    boundary: Boundary,
    gates: GateSet,
) -> Result<ChainHamiltonian> {
    if n_sites < 2 {
        return Err(Error::invalid("a chain needs at least two sites"));
    }
    let term = build_two_site_term(&gates);
    Ok(ChainHamiltonian {
        n_sites,
        boundary,
        term: Arc::new(term),
        gates: Arc::new(gates),
        bonds: chain_bonds(n_sites, boundary),
    })
}

impl ChainHamiltonian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn gates(&self) -> &GateSet {
        &self.gates
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    /// Every bond with its (shared) two-site term.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), &TwoSiteTerm)> {
        self.bonds.iter().map(move |&b| (b, self.term.as_ref()))
    }

    /// `H v`.
    pub fn apply(&self, v: &ChainVector) -> ChainVector {
        assert_eq!(v.n_sites(), self.n_sites, "state and Hamiltonian sizes differ");
        let mut out = ChainVector::zero(self.n_sites);
        for (sites, &amp) in v.iter() {
            for &(i, j) in &self.bonds {
                let local = sites[i] as usize * SITE_DIM + sites[j] as usize;
                for &(to, val) in self.term.column(local) {
                    let mut next = sites.clone();
                    next[i] = (to as usize / SITE_DIM) as u8;
                    next[j] = (to as usize % SITE_DIM) as u8;
                    out.add(next, val * amp);
                }
            }
        }
        out
    }

    /// `<v|H|v>`.
    pub fn expectation(&self, v: &ChainVector) -> Complex64 {
        v.inner(&self.apply(v))
    }
}

/// Number of occupied program registers in a basis configuration.
pub fn command_count(sites: &[u8]) -> usize {
    sites.iter().filter(|&&s| !split_site(s).1.is_empty()).count()
}

/// Number of occupied pointer registers in a basis configuration.
pub fn pointer_count(sites: &[u8]) -> usize {
    sites.iter().filter(|&&s| (s / 5) % 3 != 0).count()
}
