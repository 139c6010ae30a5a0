//! Translationally invariant wrapper around a nearest-neighbour input
//! Hamiltonian, and numerical checks of its ground-energy promise.
//!
//! The wrapped chain is a ring of `n + 1` sites. Each site holds a control
//! qubit and a `d`-level system, local index `control * d + level`, site 0
//! least significant. With the control of site `i` set, the input
//! Hamiltonian acts on ring sites `i+1, ..., i+n` in that order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::SCHEMA_VERSION;
use crate::cjson::MatrixJson;
use crate::error::{Error, Result};
use crate::linalg::{
    dense_from_operator, hermitian_eigen, lanczos_min_eigen, HermitianOperator,
};

/// Largest operator dimension handled densely.
pub const MAX_DENSE_DIM: usize = 4096;
/// Largest operator dimension accepted at all.
pub const MAX_QMA_DIM: usize = 1 << 22;
const HERMITIAN_TOL: f64 = 1e-12;

/// Diagonal penalty on `qubits` control qubits:
/// `prefactor * [1 - sum_k n_k + sum_{k' != k''} n_k' n_k'']` over ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyOperator {
    pub qubits: usize,
    pub prefactor: f64,
}

/// The penalty on `n` qubits with prefactor `1 / (n (n - 1))`.
pub fn build_h_prime(n: usize) -> Result<PenaltyOperator> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    Ok(PenaltyOperator {
        qubits: n,
        prefactor: 1.0 / (n * (n - 1)) as f64,
    })
}

impl PenaltyOperator {
    /// Value on the control configuration whose bit `k` is qubit `k`.
    pub fn eigenvalue(&self, config: usize) -> f64 {
        let w = (config & ((1usize << self.qubits) - 1)).count_ones() as f64;
        self.prefactor * (1.0 - w + w * (w - 1.0))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.qubits;
        DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(self.eigenvalue(r), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `h = sum_j bond_j` on an open chain of `n` sites of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputHamiltonian {
    n: usize,
    d: usize,
    bonds: Vec<DMatrix<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default = "schema_default")]
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub bonds: Vec<MatrixJson>,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

impl InputHamiltonian {
    /// `bonds[j]` acts on sites `(j, j+1)`, index `a_j * d + a_{j+1}`.
    pub fn new(n: usize, d: usize, bonds: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if n < 2 || d < 1 {
            return Err(Error::invalid(format!("need n >= 2 and d >= 1, got n={n}, d={d}")));
        }
        if bonds.len() != n - 1 {
            return Err(Error::invalid(format!(
                "{} bonds given for an open chain of {n} sites",
                bonds.len()
            )));
        }
        let total = (d as f64).powi(n as i32 + 1) * 2f64.powi(n as i32 + 1);
        if total > MAX_QMA_DIM as f64 {
            return Err(Error::ResourceLimit {
                what: "wrapped Hamiltonian dimension",
                requested: total.min(usize::MAX as f64) as usize,
                cap: MAX_QMA_DIM,
            });
        }
        for (j, b) in bonds.iter().enumerate() {
            if b.nrows() != d * d || b.ncols() != d * d {
                return Err(Error::invalid(format!("bond {j} is not {0}x{0}", d * d)));
            }
            let defect = (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > HERMITIAN_TOL {
                return Err(Error::invalid(format!("bond {j} is not Hermitian (defect {defect:e})")));
            }
        }
        Ok(InputHamiltonian { n, d, bonds })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InputDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!("unsupported schema_version {}", doc.schema_version)));
        }
        if doc.d == 0 || doc.d > 64 {
            return Err(Error::invalid(format!("local dimension {} outside 1..=64", doc.d)));
        }
        let bonds = doc
            .bonds
            .iter()
            .map(|b| b.to_matrix(doc.d * doc.d))
            .collect::<Result<Vec<_>>>()?;
        InputHamiltonian::new(doc.n, doc.d, bonds)
    }

    pub fn to_json(&self) -> String {
        let doc = InputDocument {
            schema_version: SCHEMA_VERSION,
            n: self.n,
            d: self.d,
            bonds: self.bonds.iter().map(MatrixJson::from_matrix).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("input serialises")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bonds(&self) -> &[DMatrix<Complex64>] {
        &self.bonds
    }

    /// Dense `h` on `d^n` levels, site 0 least significant.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.d.pow(self.n as u32);
        if dim > MAX_DENSE_DIM {
            return Err(Error::ResourceLimit {
                what: "input Hamiltonian dimension",
                requested: dim,
                cap: MAX_DENSE_DIM,
            });
        }
        let sites: Vec<usize> = (0..self.n).collect();
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, b) in self.bonds.iter().enumerate() {
                acc += bond_element(b, self.d, &sites, j, r, c);
            }
            acc
        }))
    }

    pub fn lambda_min(&self) -> Result<f64> {
        Ok(hermitian_eigen(self.to_dense()?).0[0])
    }
}

/// `<r| bond on (pos[j], pos[j+1]) |c>` for plain `d`-level digits.
fn bond_element(b: &DMatrix<Complex64>, d: usize, pos: &[usize], j: usize, r: usize, c: usize) -> Complex64 {
    let digit = |x: usize, s: usize| (x / d.pow(s as u32)) % d;
    let (s1, s2) = (pos[j], pos[j + 1]);
    let mut rr = r;
    let mut cc = c;
    for s in [s1, s2] {
        let w = d.pow(s as u32);
        rr -= digit(r, s) * w;
        cc -= digit(c, s) * w;
    }
    if rr != cc {
        return Complex64::new(0.0, 0.0);
    }
    b[(digit(r, s1) * d + digit(r, s2), digit(c, s1) * d + digit(c, s2))]
}

/// One three-site piece `|1><1|_control (x) bond` of a controlled term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ControlledBond {
    pub control: usize,
    /// Ring sites `(a, b)` the bond acts on, in the input's order.
    pub sites: (usize, usize),
    pub bond: usize,
}

/// `H_n = H' + (1/n) sum_i |1><1|_i (x) h^(i+1, ..., i+n)` on the ring.
#[derive(Debug, Clone)]
pub struct TiQmaHamiltonian {
    input: InputHamiltonian,
    penalty: PenaltyOperator,
    terms: Vec<ControlledBond>,
    ring: usize,
    local: usize,
}

pub fn build_ti_qma(h: &InputHamiltonian) -> Result<TiQmaHamiltonian> {
    let n = h.n;
    let ring = n + 1;
    let mut terms = Vec::new();
    for i in 0..ring {
        for j in 0..n - 1 {
            terms.push(ControlledBond {
                control: i,
                sites: ((i + 1 + j) % ring, (i + 2 + j) % ring),
                bond: j,
            });
        }
    }
    Ok(TiQmaHamiltonian {
        input: h.clone(),
        penalty: PenaltyOperator {
            qubits: ring,
            prefactor: 1.0 / (n * (n - 1)) as f64,
        },
        terms,
        ring,
        local: 2 * h.d,
    })
}

impl TiQmaHamiltonian {
    pub fn ring_sites(&self) -> usize {
        self.ring
    }

    pub fn local_dim(&self) -> usize {
        self.local
    }

    pub fn penalty(&self) -> &PenaltyOperator {
        &self.penalty
    }

    pub fn terms(&self) -> &[ControlledBond] {
        &self.terms
    }

    /// Control bits of a basis index, bit `s` for ring site `s`.
    pub fn control_config(&self, index: usize) -> usize {
        let d = self.input.d;
        let mut x = index;
        let mut config = 0;
        for s in 0..self.ring {
            if (x % self.local) / d == 1 {
                config |= 1 << s;
            }
            x /= self.local;
        }
        config
    }

    fn digit(&self, x: usize, s: usize) -> usize {
        (x / self.local.pow(s as u32)) % self.local
    }

    fn row(&self, r: usize, x: &[Complex64]) -> Complex64 {
        let d = self.input.d;
        let config = self.control_config(r);
        let mut acc = Complex64::new(self.penalty.eigenvalue(config), 0.0) * x[r];
        let scale = 1.0 / self.input.n as f64;
        for t in &self.terms {
            if config >> t.control & 1 == 0 {
                continue;
            }
            let (sa, sb) = t.sites;
            let (da, db) = (self.digit(r, sa), self.digit(r, sb));
            let (ca, cb) = (da / d, db / d);
            let row_local = (da % d) * d + db % d;
            let (wa, wb) = (self.local.pow(sa as u32), self.local.pow(sb as u32));
            let base = r - da * wa - db * wb;
            let b = &self.input.bonds[t.bond];
            for a2 in 0..d {
                for b2 in 0..d {
                    let v = b[(row_local, a2 * d + b2)];
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let c = base + (ca * d + a2) * wa + (cb * d + b2) * wb;
                    acc += scale * v * x[c];
                }
            }
        }
        acc
    }

    /// Minimal eigenvalue of each control-configuration block, by dense
    /// diagonalisation of the `d^(n+1)`-dim system part.
    pub fn block_minima(&self) -> Result<Vec<(usize, f64)>> {
        let d = self.input.d;
        let sys_dim = d.pow(self.ring as u32);
        if sys_dim > MAX_DENSE_DIM {
            return Err(Error::ResourceLimit {
                what: "system block dimension",
                requested: sys_dim,
                cap: MAX_DENSE_DIM,
            });
        }
        (0..1usize << self.ring)
            .into_par_iter()
            .map(|config| {
                let mut m = DMatrix::<Complex64>::zeros(sys_dim, sys_dim);
                for t in self.terms.iter().filter(|t| config >> t.control & 1 == 1) {
                    let pos: Vec<usize> = vec![t.sites.0, t.sites.1];
                    for r in 0..sys_dim {
                        for c in 0..sys_dim {
                            let v = bond_element(&self.input.bonds[t.bond], d, &pos, 0, r, c);
                            m[(r, c)] += v / self.input.n as f64;
                        }
                    }
                }
                let shift = self.penalty.eigenvalue(config);
                let low = if self.terms.iter().any(|t| config >> t.control & 1 == 1) {
                    hermitian_eigen(m).0[0]
                } else {
                    0.0
                };
                Ok((config, shift + low))
            })
            .collect()
    }

    /// Cyclic shift by one site, `|x_0 ... x_L-1> -> |x_L-1 x_0 ...>`, as an index map.
    pub fn shift_index(&self, index: usize) -> usize {
        let top = self.local.pow(self.ring as u32 - 1);
        let last = index / top;
        (index % top) * self.local + last
    }
}

impl HermitianOperator for TiQmaHamiltonian {
    fn dim(&self) -> usize {
        self.local.pow(self.ring as u32)
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| *out = self.row(r, x));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    Dense,
    Iterative,
}

/// Smallest eigenvalue of `op`.
pub fn min_eigenvalue<A: HermitianOperator + ?Sized>(op: &A, method: EigenMethod) -> Result<f64> {
    match method {
        EigenMethod::Dense => {
            if op.dim() > MAX_DENSE_DIM {
                return Err(Error::ResourceLimit {
                    what: "dense eigensolver dimension",
                    requested: op.dim(),
                    cap: MAX_DENSE_DIM,
                });
            }
            Ok(hermitian_eigen(dense_from_operator(op)).0[0])
        }
        EigenMethod::Iterative => Ok(lanczos_min_eigen(op, 1e-10, 60, 500, 0)?.eigenvalue),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ZeroEnergy,
    GappedAboveBound,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub lambda_min: f64,
    pub e0: f64,
    pub gap_bound: f64,
    pub verdict: Verdict,
    pub method: EigenMethod,
}

/// `min(lambda_min / n, 1 / (n^2 (n - 1)))`.
pub fn gap_bound(lambda_min: f64, n: usize) -> f64 {
    let n = n as f64;
    (lambda_min / n).min(1.0 / (n * n * (n - 1.0)))
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub method: EigenMethod,
    /// Energies below this count as zero.
    pub zero_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            method: EigenMethod::Dense,
            zero_tol: 1e-9,
        }
    }
}

pub fn verify_promise(h: &InputHamiltonian) -> Result<SpectrumResult> {
    verify_promise_with(h, &VerifyOptions::default())
}

pub fn verify_promise_with(h: &InputHamiltonian, opts: &VerifyOptions) -> Result<SpectrumResult> {
    let lambda_min = h.lambda_min()?;
    if lambda_min < -opts.zero_tol {
        return Err(Error::Precondition(format!(
            "input Hamiltonian must be positive semidefinite, lambda_min = {lambda_min:e}"
        )));
    }
    let big = build_ti_qma(h)?;
    // the operator is block diagonal in the control configuration
    let e0 = match opts.method {
        EigenMethod::Dense => big
            .block_minima()?
            .into_iter()
            .map(|(_, e)| e)
            .fold(f64::INFINITY, f64::min),
        EigenMethod::Iterative => min_eigenvalue(&big, opts.method)?,
    };
    let bound = gap_bound(lambda_min, h.n);
    let verdict = if lambda_min.abs() < opts.zero_tol && e0.abs() < opts.zero_tol {
        Verdict::ZeroEnergy
    } else if e0 >= bound - opts.zero_tol {
        Verdict::GappedAboveBound
    } else {
        Verdict::Violation
    };
    Ok(SpectrumResult {
        schema_version: SCHEMA_VERSION,
        n: h.n,
        d: h.d,
        dim: big.dim(),
        lambda_min,
        e0,
        gap_bound: bound,
        verdict,
        method: opts.method,
    })
}

/// Largest `|(H_c - e0) P_c v|` over the ground vectors `v` of `H_n` and the
/// control-configuration projectors `P_c`; zero when every ground vector is a
/// sum of product states `|config> (x) |phi>` that are each eigenvectors.
pub fn ground_block_defect(big: &TiQmaHamiltonian, tol: f64) -> Result<f64> {
    let dim = big.dim();
    if dim > MAX_DENSE_DIM {
        return Err(Error::ResourceLimit {
            what: "dense eigensolver dimension",
            requested: dim,
            cap: MAX_DENSE_DIM,
        });
    }
    let (values, vectors) = hermitian_eigen(dense_from_operator(big));
    let e0 = values[0];
    let configs: Vec<usize> = (0..dim).map(|r| big.control_config(r)).collect();
    let mut worst = 0.0_f64;
    for (k, &ev) in values.iter().enumerate() {
        if ev > e0 + tol {
            break;
        }
        let v: Vec<Complex64> = vectors.column(k).iter().copied().collect();
        for config in 0..1usize << big.ring_sites() {
            let part: Vec<Complex64> = v
                .iter()
                .zip(&configs)
                .map(|(&a, &c)| if c == config { a } else { Complex64::new(0.0, 0.0) })
                .collect();
            let mut hv = vec![Complex64::new(0.0, 0.0); dim];
            big.apply(&part, &mut hv);
            let res: f64 = hv
                .iter()
                .zip(&part)
                .map(|(a, b)| (a - e0 * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_values() {
        let p2 = build_h_prime(2).unwrap();
        assert_eq!(p2.eigenvalue(0b01), 0.0);
        assert_eq!(p2.eigenvalue(0b00), 0.5);
        let p3 = build_h_prime(3).unwrap();
        assert!((p3.eigenvalue(0b111) - 4.0 / 6.0).abs() < 1e-15);
        assert!(build_h_prime(1).is_err());
    }

    #[test]
    fn penalty_n2_minimum_is_zero() {
        assert_eq!(min_eigenvalue(&build_h_prime(2).unwrap().to_dense(), EigenMethod::Dense).unwrap(), 0.0);
    }

    #[test]
    fn identity_min_eigenvalue() {
        let id = DMatrix::<Complex64>::identity(5, 5);
        assert!((min_eigenvalue(&id, EigenMethod::Dense).unwrap() - 1.0).abs() < 1e-14);
        assert!((min_eigenvalue(&id, EigenMethod::Iterative).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn input_validation() {
        let bad = DMatrix::from_fn(4, 4, |r, c| Complex64::new(0.0, (r as f64) - (c as f64) + 1.0));
        assert!(InputHamiltonian::new(2, 2, vec![bad]).is_err());
        assert!(InputHamiltonian::new(3, 2, vec![DMatrix::zeros(4, 4)]).is_err());
        assert!(InputHamiltonian::new(2, 2, vec![DMatrix::zeros(9, 9)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = InputHamiltonian::new(2, 2, vec![DMatrix::identity(4, 4)]).unwrap();
        assert_eq!(InputHamiltonian::from_json(&h.to_json()).unwrap(), h);
    }
}
