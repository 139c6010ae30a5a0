//! Site encoding, chain states and the initial layout of the automaton.
//!
//! A site is a 30-level system factorised as qubit (2) x pointer (3) x
//! program (5). The flat site index is `qubit * 15 + pointer * 5 + program`,
//! so the program register varies fastest and `qubit * 3 + pointer` is the
//! combined register index used by the gate unitaries.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembler::CommandProgram;
use crate::error::{Error, Result};

pub const SITE_DIM: usize = 30;
pub const PROGRAM_DIM: usize = 5;
/// Dimension of the qubit x pointer registers of one site.
pub const REGISTER_DIM: usize = 6;

/// Upper bound on chain length accepted from external input.
pub const MAX_SITES: usize = 4096;

/// Content of a program register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    /// Empty register.
    E,
    L,
    R,
    S,
    G,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::E, Command::L, Command::R, Command::S, Command::G];
    /// The four commands that move.
    pub const MOVING: [Command; 4] = [Command::L, Command::R, Command::S, Command::G];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Command> {
        Command::ALL.get(i as usize).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            Command::E => 'e',
            Command::L => 'L',
            Command::R => 'R',
            Command::S => 'S',
            Command::G => 'G',
        }
    }

    pub fn from_symbol(c: char) -> Option<Command> {
        match c {
            'e' => Some(Command::E),
            'L' => Some(Command::L),
            'R' => Some(Command::R),
            'S' => Some(Command::S),
            'G' => Some(Command::G),
            _ => None,
        }
    }

    pub fn is_empty(self) -> bool {
        self == Command::E
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Pointer register: absent, or present carrying an internal qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointerState {
    Absent,
    P0,
    P1,
}

impl PointerState {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<PointerState> {
        match i {
            0 => Some(PointerState::Absent),
            1 => Some(PointerState::P0),
            2 => Some(PointerState::P1),
            _ => None,
        }
    }

    /// Internal qubit value, if a pointer is present.
    pub fn internal(self) -> Option<u8> {
        match self {
            PointerState::Absent => None,
            PointerState::P0 => Some(0),
            PointerState::P1 => Some(1),
        }
    }

    pub fn with_internal(bit: u8) -> PointerState {
        if bit == 0 {
            PointerState::P0
        } else {
            PointerState::P1
        }
    }

    pub fn is_present(self) -> bool {
        self != PointerState::Absent
    }
}

/// Decoded basis state of a single site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteBasis {
    pub qubit: u8,
    pub pointer: PointerState,
    pub program: Command,
}

impl SiteBasis {
    pub fn index(&self) -> u8 {
        self.qubit * 15 + self.pointer.index() * 5 + self.program.index()
    }

    /// `qubit * 3 + pointer`, the index into the 6-dim register space.
    pub fn register_index(&self) -> u8 {
        self.qubit * 3 + self.pointer.index()
    }
}

pub fn encode_site(qubit: u8, pointer: PointerState, program: Command) -> Result<u8> {
    if qubit > 1 {
        return Err(Error::invalid(format!("qubit value {qubit} is not 0 or 1")));
    }
    Ok(SiteBasis {
        qubit,
        pointer,
        program,
    }
    .index())
}

pub fn decode_site(index: u8) -> Result<SiteBasis> {
    if index as usize >= SITE_DIM {
        return Err(Error::invalid(format!("site index {index} outside 0..30")));
    }
    let register = index / 5;
    Ok(SiteBasis {
        qubit: register / 3,
        pointer: PointerState::from_index(register % 3).unwrap(),
        program: Command::from_index(index % 5).unwrap(),
    })
}

/// Splits a site index into (register index, program command).
pub(crate) fn split_site(index: u8) -> (u8, Command) {
    (index / 5, Command::from_index(index % 5).unwrap())
}

pub(crate) fn join_site(register: u8, program: Command) -> u8 {
    register * 5 + program.index()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Unnormalised sparse vector over chain basis configurations.
///
/// Keys are site-index strings of length `n_sites`. Ordered storage keeps
/// iteration, and therefore every floating point reduction, deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainVector {
    n_sites: usize,
    amplitudes: BTreeMap<Vec<u8>, Complex64>,
}

impl ChainVector {
    pub fn zero(n_sites: usize) -> Self {
        ChainVector {
            n_sites,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn basis(sites: Vec<u8>) -> Self {
        let mut v = ChainVector::zero(sites.len());
        v.amplitudes.insert(sites, Complex64::new(1.0, 0.0));
        v
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn add(&mut self, sites: Vec<u8>, amp: Complex64) {
        debug_assert_eq!(sites.len(), self.n_sites);
        *self.amplitudes.entry(sites).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    pub fn get(&self, sites: &[u8]) -> Complex64 {
        self.amplitudes.get(sites).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u8>, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &ChainVector) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(k, a)| a.conj() * other.get(k))
            .sum()
    }

    /// Drops entries with `|amp| <= cutoff`.
    pub fn prune(&mut self, cutoff: f64) {
        self.amplitudes.retain(|_, a| a.norm() > cutoff);
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amplitudes.values_mut().for_each(|a| *a *= factor);
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &ChainVector) -> f64 {
        let mut worst = 0.0_f64;
        for (k, a) in &self.amplitudes {
            worst = worst.max((a - other.get(k)).norm());
        }
        for (k, b) in &other.amplitudes {
            if !self.amplitudes.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }
}

/// A normalised chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState(ChainVector);

impl ChainState {
    /// Normalises `v`; fails on the zero vector.
    pub fn from_vector(mut v: ChainVector) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("cannot normalise a zero or non-finite vector"));
        }
        v.scale(Complex64::new(1.0 / n, 0.0));
        Ok(ChainState(v))
    }

    pub fn basis(sites: Vec<u8>) -> Self {
        ChainState(ChainVector::basis(sites))
    }

    /// Wraps a vector that is already normalised up to numerical error.
    pub(crate) fn assume_normalised(v: ChainVector) -> Self {
        ChainState(v)
    }

    pub fn into_vector(self) -> ChainVector {
        self.0
    }

    /// Number of sites whose pointer register is occupied, per support element.
    pub fn pointer_counts(&self) -> Vec<usize> {
        self.0
            .iter()
            .map(|(k, _)| k.iter().filter(|&&s| (s / 5) % 3 != 0).count())
            .collect()
    }
}

impl Deref for ChainState {
    type Target = ChainVector;

    fn deref(&self) -> &ChainVector {
        &self.0
    }
}

/// Sparse vector over the qubit/pointer registers of the whole chain.
///
/// Keys hold one register index (`qubit * 3 + pointer`) per site.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    amplitudes: BTreeMap<Vec<u8>, Complex64>,
}

impl RegisterState {
    pub fn basis(registers: Vec<u8>) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(registers, Complex64::new(1.0, 0.0));
        RegisterState { amplitudes }
    }

    pub fn from_map(amplitudes: BTreeMap<Vec<u8>, Complex64>) -> Self {
        RegisterState { amplitudes }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u8>, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn get(&self, key: &[u8]) -> Complex64 {
        self.amplitudes.get(key).copied().unwrap_or_default()
    }

    pub fn inner(&self, other: &RegisterState) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(k, a)| a.conj() * other.get(k))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &RegisterState) -> f64 {
        let mut worst = 0.0_f64;
        for (k, a) in &self.amplitudes {
            worst = worst.max((a - other.get(k)).norm());
        }
        for (k, b) in &other.amplitudes {
            if !self.amplitudes.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }
}

/// Where the quantum computer, pointer and program sit on the chain.
///
/// Intervals are inclusive-exclusive except `qc_window`, which is the
/// inclusive pair `(lo, hi)` as in the JSON document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLayout {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub qc_window: (usize, usize),
    pub pointer_site: usize,
    /// Initial internal qubit of the pointer.
    pub pointer_qubit: u8,
    pub program_start: usize,
    /// Length of the program interval, real commands plus padding.
    pub program_len: usize,
    pub padding_length: usize,
}

impl ChainLayout {
    /// QC window at `[left_margin, left_margin + l_q)`, program directly to its right.
    pub fn for_program(
        l_q: usize,
        program: &CommandProgram,
        left_margin: usize,
        right_margin: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        if l_q == 0 {
            return Err(Error::Layout("quantum computer needs at least one qubit".into()));
        }
        let lo = left_margin;
        let hi = lo + l_q - 1;
        let layout = ChainLayout {
            n_sites: hi + 1 + program.total_len() + right_margin,
            boundary,
            qc_window: (lo, hi),
            pointer_site: lo,
            pointer_qubit: 0,
            program_start: hi + 1,
            program_len: program.total_len(),
            padding_length: program.padding,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn l_q(&self) -> usize {
        self.qc_window.1 + 1 - self.qc_window.0
    }

    pub fn program_interval(&self) -> std::ops::Range<usize> {
        self.program_start..self.program_start + self.program_len
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.qc_window;
        if self.n_sites < 2 || self.n_sites > MAX_SITES {
            return Err(Error::Layout(format!(
                "n_sites = {} outside 2..={MAX_SITES}",
                self.n_sites
            )));
        }
        if lo > hi || hi >= self.n_sites {
            return Err(Error::Layout(format!(
                "qc_window [{lo}, {hi}] is not an interval inside {} sites",
                self.n_sites
            )));
        }
        if self.pointer_site >= self.n_sites {
            return Err(Error::Layout(format!(
                "pointer_site {} outside the chain",
                self.pointer_site
            )));
        }
        if self.pointer_qubit > 1 {
            return Err(Error::Layout("pointer_qubit must be 0 or 1".into()));
        }
        if self.program_start <= hi {
            return Err(Error::Layout(format!(
                "program interval starting at {} overlaps or precedes qc_window [{lo}, {hi}]",
                self.program_start
            )));
        }
        if self.program_start + self.program_len > self.n_sites {
            return Err(Error::Layout(format!(
                "program interval {}..{} does not fit in {} sites",
                self.program_start,
                self.program_start + self.program_len,
                self.n_sites
            )));
        }
        if self.padding_length > self.program_len {
            return Err(Error::Layout("padding longer than the program interval".into()));
        }
        Ok(())
    }
}

/// Builds the product basis state: program in its interval, qubits in the
/// QC window, a single pointer.
pub fn make_initial_state(
    layout: &ChainLayout,
    qubit_init: &[u8],
    program: &CommandProgram,
) -> Result<ChainState> {
    Ok(ChainState::basis(initial_sites(layout, qubit_init, program)?))
}

pub(crate) fn initial_sites(
    layout: &ChainLayout,
    qubit_init: &[u8],
    program: &CommandProgram,
) -> Result<Vec<u8>> {
    layout.validate()?;
    if qubit_init.len() != layout.l_q() {
        return Err(Error::Layout(format!(
            "{} initial qubits for a quantum computer of {} sites",
            qubit_init.len(),
            layout.l_q()
        )));
    }
    if program.total_len() > layout.program_len {
        return Err(Error::Layout(format!(
            "program of {} commands does not fit the {}-site program interval",
            program.total_len(),
            layout.program_len
        )));
    }
    if program.padding != layout.padding_length {
        return Err(Error::Layout(format!(
            "program padding {} disagrees with layout padding {}",
            program.padding, layout.padding_length
        )));
    }
    let mut sites = vec![0u8; layout.n_sites];
    for (k, &b) in qubit_init.iter().enumerate() {
        if b > 1 {
            return Err(Error::invalid(format!("qubit value {b} is not 0 or 1")));
        }
        sites[layout.qc_window.0 + k] = encode_site(b, PointerState::Absent, Command::E)?;
    }
    for (k, c) in program.commands().enumerate() {
        let s = &mut sites[layout.program_start + k];
        *s = join_site(*s / 5, c);
    }
    let p = &mut sites[layout.pointer_site];
    let qubit = *p / 15;
    *p = encode_site(qubit, PointerState::with_internal(layout.pointer_qubit), Command::from_index(*p % 5).unwrap())?;
    Ok(sites)
}

pub const SCHEMA_VERSION: u32 = 1;

/// JSON form of a layout together with the program and qubit string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    #[serde(default = "schema_default")]
    pub schema_version: u32,
    pub n_sites: usize,
    #[serde(default)]
    pub boundary: Boundary,
    pub qc_window: [usize; 2],
    #[serde(default)]
    pub pointer_site: Option<usize>,
    #[serde(default)]
    pub pointer_qubit: u8,
    #[serde(default)]
    pub program_start: Option<usize>,
    pub program: String,
    pub qubits: String,
    #[serde(default)]
    pub padding: usize,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

/// A parsed and validated layout document.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditions {
    pub layout: ChainLayout,
    pub qubits: Vec<u8>,
    pub program: CommandProgram,
}

impl InitialConditions {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LayoutDocument = serde_json::from_str(text)?;
        doc.resolve()
    }

    pub fn to_document(&self) -> LayoutDocument {
        LayoutDocument {
            schema_version: SCHEMA_VERSION,
            n_sites: self.layout.n_sites,
            boundary: self.layout.boundary,
            qc_window: [self.layout.qc_window.0, self.layout.qc_window.1],
            pointer_site: Some(self.layout.pointer_site),
            pointer_qubit: self.layout.pointer_qubit,
            program_start: Some(self.layout.program_start),
            program: self.program.real_string(),
            qubits: self.qubits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect(),
            padding: self.program.padding,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("layout serialises")
    }

    pub fn initial_state(&self) -> Result<ChainState> {
        make_initial_state(&self.layout, &self.qubits, &self.program)
    }
}

impl LayoutDocument {
    pub fn resolve(&self) -> Result<InitialConditions> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let [lo, hi] = self.qc_window;
        let program = CommandProgram::parse(&self.program)?.padded(self.padding);
        let qubits = parse_bits(&self.qubits)?;
        let program_start = match self.program_start {
            Some(s) => s,
            None => hi.checked_add(1).ok_or_else(|| Error::Layout("qc_window overflow".into()))?,
        };
        let layout = ChainLayout {
            n_sites: self.n_sites,
            boundary: self.boundary,
            qc_window: (lo, hi),
            pointer_site: self.pointer_site.unwrap_or(lo),
            pointer_qubit: self.pointer_qubit,
            program_start,
            program_len: program.total_len(),
            padding_length: self.padding,
        };
        layout.validate()?;
        if qubits.len() != layout.l_q() {
            return Err(Error::Layout(format!(
                "qubits string has {} entries, qc_window holds {}",
                qubits.len(),
                layout.l_q()
            )));
        }
        Ok(InitialConditions {
            layout,
            qubits,
            program,
        })
    }
}

/// Parses a string of '0'/'1' characters.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::invalid(format!("bad qubit character {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn origin_encodes_to_zero() {
        assert_eq!(encode_site(0, PointerState::Absent, Command::E).unwrap(), 0);
    }

    #[test]
    fn encoding_is_a_bijection_onto_0_30() {
        let mut seen = HashSet::new();
        for q in 0..2 {
            for p in [PointerState::Absent, PointerState::P0, PointerState::P1] {
                for c in Command::ALL {
                    let i = encode_site(q, p, c).unwrap();
                    assert!((i as usize) < SITE_DIM);
                    assert!(seen.insert(i), "collision at {i}");
                    assert_eq!(
                        decode_site(i).unwrap(),
                        SiteBasis {
                            qubit: q,
                            pointer: p,
                            program: c
                        }
                    );
                }
            }
        }
        assert_eq!(seen.len(), 30);
    }

    #[test]
    fn round_trip_example() {
        let i = encode_site(1, PointerState::P1, Command::G).unwrap();
        let d = decode_site(i).unwrap();
        assert_eq!((d.qubit, d.pointer, d.program), (1, PointerState::P1, Command::G));
    }

    #[test]
    fn out_of_range_fields_are_rejected() {
        assert!(encode_site(2, PointerState::Absent, Command::E).is_err());
        assert!(decode_site(30).is_err());
    }

    #[test]
    fn empty_program_gives_normalised_product_state() {
        let program = CommandProgram::parse("").unwrap();
        let layout = ChainLayout::for_program(2, &program, 1, 1, Boundary::Open).unwrap();
        let state = make_initial_state(&layout, &[0, 0], &program).unwrap();
        assert_eq!(state.len(), 1);
        assert!((state.norm() - 1.0).abs() < 1e-15);
        let (sites, _) = state.iter().next().unwrap();
        assert!(sites.iter().all(|&s| s % 5 == 0));
        assert_eq!(state.pointer_counts(), vec![1]);
    }

    #[test]
    fn seven_qubit_figure_layout() {
        // 7-qubit computer, pointer on its leftmost site, program to the right
        let program = CommandProgram::parse("RRSGLLS").unwrap();
        let layout = ChainLayout::for_program(7, &program, 2, 2, Boundary::Open).unwrap();
        let qubits = [1, 0, 1, 1, 0, 0, 1];
        let state = make_initial_state(&layout, &qubits, &program).unwrap();
        assert_eq!(state.len(), 1);
        let (sites, amp) = state.iter().next().unwrap();
        assert_eq!(*amp, Complex64::new(1.0, 0.0));
        let decoded: Vec<SiteBasis> = sites.iter().map(|&s| decode_site(s).unwrap()).collect();
        let qubit_row: Vec<u8> = decoded.iter().map(|d| d.qubit).collect();
        assert_eq!(qubit_row, vec![0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let pointer_row: Vec<u8> = decoded.iter().map(|d| d.pointer.index()).collect();
        let mut expect_pointer = vec![0u8; 18];
        expect_pointer[2] = 1;
        assert_eq!(pointer_row, expect_pointer);
        let program_row: String = decoded.iter().map(|d| d.program.symbol()).collect();
        assert_eq!(program_row, "eeeeeeeeeRRSGLLSee");
    }

    #[test]
    fn overlapping_intervals_are_layout_errors() {
        let doc = r#"{"n_sites":10,"qc_window":[2,4],"program_start":4,"program":"RS","qubits":"000"}"#;
        assert!(matches!(InitialConditions::from_json(doc), Err(Error::Layout(_))));
        let doc = r#"{"n_sites":6,"qc_window":[2,4],"program":"RS","qubits":"000"}"#;
        assert!(matches!(InitialConditions::from_json(doc), Err(Error::Layout(_))));
    }

    #[test]
    fn layout_json_round_trip() {
        let doc = r#"{"n_sites":12,"qc_window":[2,3],"pointer_site":3,"program":"SRG","qubits":"01","padding":2}"#;
        let ic = InitialConditions::from_json(doc).unwrap();
        assert_eq!(ic.layout.program_start, 4);
        assert_eq!(ic.layout.program_len, 5);
        let again = InitialConditions::from_json(&ic.to_json()).unwrap();
        assert_eq!(again, ic);
        let state = ic.initial_state().unwrap();
        assert_eq!(state.pointer_counts(), vec![1]);
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        let doc = r#"{"n_sites":12,"qc_window":[2,3],"program":"","qubits":"01","bogus":1}"#;
        assert!(InitialConditions::from_json(doc).is_err());
        let doc = r#"{"schema_version":9,"n_sites":12,"qc_window":[2,3],"program":"","qubits":"01"}"#;
        assert!(InitialConditions::from_json(doc).is_err());
    }
}
