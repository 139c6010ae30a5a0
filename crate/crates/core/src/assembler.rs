//! Pointer-machine programs, circuit compilation and the abstract machine.
//!
//! The abstract machine has `n` qubits, a pointer at an integer position and
//! one internal pointer qubit. `L`/`R` move the pointer, `S` swaps the qubit
//! under the pointer with the internal qubit and `G` applies the two-qubit
//! gate to `|internal> (x) |qubit under pointer>` (internal qubit first).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::Command;
use crate::error::{Error, Result};
use crate::hamiltonian::TwoQubitGate;

/// Largest register the abstract machine and the circuit simulator accept.
pub const MAX_MACHINE_QUBITS: usize = 20;

/// A command string plus trailing padding `L`s.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandProgram {
    real: Vec<Command>,
    pub padding: usize,
}

impl CommandProgram {
    pub fn new(real: Vec<Command>) -> Result<Self> {
        if real.iter().any(|c| c.is_empty()) {
            return Err(Error::invalid("a program cannot contain the empty command"));
        }
        Ok(CommandProgram { real, padding: 0 })
    }

    /// Parses a string over `{L, R, S, G}`; whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let real = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match Command::from_symbol(c) {
                Some(cmd) if !cmd.is_empty() => Ok(cmd),
                _ => Err(Error::invalid(format!("unknown command {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CommandProgram { real, padding: 0 })
    }

    pub fn real(&self) -> &[Command] {
        &self.real
    }

    /// Length of the real program.
    pub fn l_p(&self) -> usize {
        self.real.len()
    }

    pub fn total_len(&self) -> usize {
        self.real.len() + self.padding
    }

    pub fn real_string(&self) -> String {
        self.real.iter().map(|c| c.symbol()).collect()
    }

    /// Real commands followed by the padding.
    pub fn commands(&self) -> impl Iterator<Item = Command> + '_ {
        self.real
            .iter()
            .copied()
            .chain(std::iter::repeat_n(Command::L, self.padding))
    }

    /// Appends `n_pad` padding `L`s.
    pub fn padded(mut self, n_pad: usize) -> Self {
        self.padding += n_pad;
        self
    }
}

pub fn pad(program: &CommandProgram, n_pad: usize) -> CommandProgram {
    program.clone().padded(n_pad)
}

/// Padding that brings the total command count to `(l_p + l_q)^2`.
pub fn recommended_padding(l_p: usize, l_q: usize) -> usize {
    let total = (l_p + l_q) * (l_p + l_q);
    total.saturating_sub(l_p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    /// Gate kind; only `"G"` exists.
    pub g: String,
    /// One qubit (gate against the internal pointer qubit) or two distinct qubits.
    pub q: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_MACHINE_QUBITS {
            return Err(Error::invalid(format!(
                "n_qubits = {} outside 1..={MAX_MACHINE_QUBITS}",
                self.n_qubits
            )));
        }
        for (k, gate) in self.gates.iter().enumerate() {
            if gate.g != "G" {
                return Err(Error::invalid(format!("gate {k}: unknown kind {:?}", gate.g)));
            }
            match gate.q.as_slice() {
                [a] if *a < self.n_qubits => {}
                [a, b] if *a < self.n_qubits && *b < self.n_qubits && a != b => {}
                other => {
                    return Err(Error::invalid(format!(
                        "gate {k}: qubits {other:?} invalid for {} qubits",
                        self.n_qubits
                    )))
                }
            }
        }
        Ok(())
    }
}

fn move_pointer(out: &mut Vec<Command>, from: usize, to: usize) {
    let cmd = if to > from { Command::R } else { Command::L };
    out.extend(std::iter::repeat_n(cmd, from.abs_diff(to)));
}

/// Compiles a circuit into a command string.
///
/// A two-qubit gate on `(a, b)` uses: move to `a`, `S`, move to `b`, `G`,
/// move back to `a`, `S`. Every qubit returns to its home site and `g` acts
/// on `|a> (x) |b>`. A one-qubit gate on `a` moves to `a` and applies `G`
/// against the internal pointer qubit.
pub fn compile(circuit: &Circuit, pointer_start: usize) -> Result<CommandProgram> {
    circuit.validate()?;
    if pointer_start >= circuit.n_qubits {
        return Err(Error::invalid(format!(
            "pointer start {pointer_start} outside {} qubits",
            circuit.n_qubits
        )));
    }
    let mut out = Vec::new();
    let mut p = pointer_start;
    for gate in &circuit.gates {
        match *gate.q.as_slice() {
            [a] => {
                move_pointer(&mut out, p, a);
                out.push(Command::G);
                p = a;
            }
            [a, b] => {
                move_pointer(&mut out, p, a);
                out.push(Command::S);
                move_pointer(&mut out, a, b);
                out.push(Command::G);
                move_pointer(&mut out, b, a);
                out.push(Command::S);
                p = a;
            }
            _ => unreachable!("validated"),
        }
    }
    CommandProgram::new(out)
}

/// State of the abstract machine. Qubit `j` is bit `j` of the amplitude
/// index; the internal pointer qubit is bit `n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    pub n_qubits: usize,
    pub pointer: i64,
    pub amplitudes: Vec<Complex64>,
}

impl MachineState {
    pub fn new(qubit_init: &[u8], pointer: i64, internal: u8) -> Result<Self> {
        let n = qubit_init.len();
        if n == 0 || n > MAX_MACHINE_QUBITS {
            return Err(Error::invalid(format!("{n} qubits outside 1..={MAX_MACHINE_QUBITS}")));
        }
        let mut index = 0usize;
        for (j, &b) in qubit_init.iter().enumerate() {
            if b > 1 {
                return Err(Error::invalid(format!("qubit value {b} is not 0 or 1")));
            }
            index |= (b as usize) << j;
        }
        index |= ((internal & 1) as usize) << n;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << (n + 1)];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(MachineState {
            n_qubits: n,
            pointer,
            amplitudes,
        })
    }

    /// Applies `g` to the ordered bit pair `(first, second)`.
    pub fn apply_two_qubit(&mut self, g: &TwoQubitGate, first: usize, second: usize) {
        let (fm, sm) = (1usize << first, 1usize << second);
        for base in 0..self.amplitudes.len() {
            if base & (fm | sm) != 0 {
                continue;
            }
            let idx = [base, base | sm, base | fm, base | fm | sm];
            let old = idx.map(|i| self.amplitudes[i]);
            for r in 0..4 {
                self.amplitudes[idx[r]] = (0..4).map(|c| g[(r, c)] * old[c]).sum();
            }
        }
    }

    pub fn swap_bits(&mut self, a: usize, b: usize) {
        let (am, bm) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & am != 0 && i & bm == 0 {
                self.amplitudes.swap(i, (i & !am) | bm);
            }
        }
    }

    fn site_under_pointer(&self, what: Command) -> Result<usize> {
        if self.pointer < 0 || self.pointer >= self.n_qubits as i64 {
            return Err(Error::Range(format!(
                "{what} executed with the pointer at {} outside qubits 0..{}",
                self.pointer, self.n_qubits
            )));
        }
        Ok(self.pointer as usize)
    }

    pub fn step(&mut self, cmd: Command, g: &TwoQubitGate) -> Result<()> {
        match cmd {
            Command::L => self.pointer -= 1,
            Command::R => self.pointer += 1,
            Command::S => {
                let q = self.site_under_pointer(cmd)?;
                self.swap_bits(q, self.n_qubits);
            }
            Command::G => {
                let q = self.site_under_pointer(cmd)?;
                self.apply_two_qubit(g, self.n_qubits, q);
            }
            Command::E => {}
        }
        Ok(())
    }

    /// Marginal distribution of the logical qubits, keyed by `q0 q1 ...`.
    pub fn qubit_distribution(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            *out.entry(bitstring(i, self.n_qubits)).or_insert(0.0) += p;
        }
        out
    }
}

pub(crate) fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|j| if index >> j & 1 == 1 { '1' } else { '0' }).collect()
}

/// Runs `program` sequentially on the abstract machine.
pub fn interpret(
    program: &CommandProgram,
    qubit_init: &[u8],
    pointer_start: i64,
    g: &TwoQubitGate,
) -> Result<MachineState> {
    let mut state = MachineState::new(qubit_init, pointer_start, 0)?;
    for cmd in program.commands() {
        state.step(cmd, g)?;
    }
    Ok(state)
}

/// Direct gate-level simulation of a circuit, with the internal pointer
/// qubit as an explicit ancilla starting in `|0>`.
pub fn simulate_circuit(circuit: &Circuit, g: &TwoQubitGate, qubit_init: &[u8]) -> Result<MachineState> {
    circuit.validate()?;
    if qubit_init.len() != circuit.n_qubits {
        return Err(Error::invalid("initial qubit string does not match n_qubits"));
    }
    let mut state = MachineState::new(qubit_init, 0, 0)?;
    let anc = circuit.n_qubits;
    for gate in &circuit.gates {
        match *gate.q.as_slice() {
            [a] => state.apply_two_qubit(g, anc, a),
            [a, b] => state.apply_two_qubit(g, a, b),
            _ => unreachable!("validated"),
        }
    }
    Ok(state)
}

/// Total variation distance between two distributions over bitstrings.
pub fn total_variation(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}
