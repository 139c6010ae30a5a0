//! Many-particle configuration probabilities of the hopping model.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::p1::p1;
use super::propagator::propagator_table;
use crate::chain::Boundary;
use crate::error::{Error, Result};
use crate::hamiltonian::chain_bonds;
use crate::linalg::{CsrMatrix, DensePropagator};

/// Largest number of configurations enumerated for a full distribution.
pub const MAX_HOPPING_CONFIGURATIONS: usize = 200_000;

fn check_sites(sites: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &s in sites {
        if s >= m {
            return Err(Error::invalid(format!("site {s} outside the {m}-site ring")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::invalid(format!("site {s} repeated")));
        }
    }
    Ok(())
}

fn slater_with_table(initial: &[usize], final_: &[usize], table: &[Complex64]) -> f64 {
    let m = table.len() as i64;
    let n = initial.len();
    let a = DMatrix::from_fn(n, n, |j, k| {
        table[(final_[j] as i64 - initial[k] as i64).rem_euclid(m) as usize]
    });
    a.determinant().norm_sqr()
}

/// `|det A|^2` with `A_jk = K_t(final_j - initial_k)` on an `M`-site ring.
pub fn slater_config_probability(initial: &[usize], final_: &[usize], t: f64, m: usize) -> Result<f64> {
    if initial.len() != final_.len() {
        return Err(Error::invalid("initial and final configurations differ in size"));
    }
    check_sites(initial, m)?;
    check_sites(final_, m)?;
    Ok(slater_with_table(initial, final_, &propagator_table(t, m)))
}

fn subsets(m: usize, n: usize) -> Result<Vec<Vec<usize>>> {
    let count = binomial(m, n);
    if count > MAX_HOPPING_CONFIGURATIONS as f64 {
        return Err(Error::ResourceLimit {
            what: "hopping configurations",
            requested: count as usize,
            cap: MAX_HOPPING_CONFIGURATIONS,
        });
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next combination in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < m - n + i {
                break;
            }
            if i == 0 {
                return Ok(out);
            }
        }
        cur[i] += 1;
        for j in i + 1..n {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn binomial(m: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Slater probabilities of every final configuration.
pub fn slater_distribution(initial: &[usize], t: f64, m: usize) -> Result<BTreeMap<Vec<usize>, f64>> {
    check_sites(initial, m)?;
    let mut init = initial.to_vec();
    init.sort_unstable();
    let table = propagator_table(t, m);
    if init.is_empty() {
        return Ok(BTreeMap::from([(Vec::new(), 1.0)]));
    }
    Ok(subsets(m, init.len())?
        .into_iter()
        .map(|f| {
            let p = slater_with_table(&init, &f, &table);
            (f, p)
        })
        .collect())
}

/// `sum_k |K_t(x - initial_k)|^2` at every site `x`.
pub fn one_body_density(initial: &[usize], t: f64, m: usize) -> Result<Vec<f64>> {
    check_sites(initial, m)?;
    let table = propagator_table(t, m);
    Ok((0..m)
        .map(|x| {
            initial
                .iter()
                .map(|&y| table[(x as i64 - y as i64).rem_euclid(m as i64) as usize].norm_sqr())
                .sum()
        })
        .collect())
}

/// `N (1 - p1)`.
pub fn expected_departures(n: usize, m: usize, t: f64) -> Result<f64> {
    Ok(n as f64 * (1.0 - p1(n, m, t)?))
}

/// Density summed over the sites outside the initial block `0..N`.
pub fn departures_from_density(n: usize, m: usize, t: f64) -> Result<f64> {
    if n == 0 || n > m {
        return Err(Error::invalid(format!("need 1 <= N <= M, got N={n}, M={m}")));
    }
    let block: Vec<usize> = (0..n).collect();
    Ok(one_body_density(&block, t, m)?[n..].iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    /// Fermions: a hop across the periodic seam passes the other `N - 1`
    /// particles and picks up `(-1)^(N-1)`.
    Fermion,
    /// Hard-core particles that keep their order, no signs.
    HardCore,
}

/// `sum_bonds |1 0><0 1| + h.c.` on `N`-particle occupation configurations.
#[derive(Debug, Clone)]
pub struct HoppingModel {
    m: usize,
    boundary: Boundary,
    configurations: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    matrix: CsrMatrix,
}

impl HoppingModel {
    pub fn new(m: usize, n: usize, boundary: Boundary, statistics: Statistics) -> Result<Self> {
        if m < 2 || n > m {
            return Err(Error::invalid(format!("need M >= 2 and N <= M, got M={m}, N={n}")));
        }
        let configurations = if n == 0 { vec![Vec::new()] } else { subsets(m, n)? };
        let index: HashMap<Vec<usize>, usize> =
            configurations.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let seam_sign = if statistics == Statistics::Fermion && n % 2 == 0 { -1.0 } else { 1.0 };
        let mut triplets = Vec::new();
        for (col, conf) in configurations.iter().enumerate() {
            let mut occ = vec![false; m];
            conf.iter().for_each(|&s| occ[s] = true);
            for (i, j) in chain_bonds(m, boundary) {
                if occ[i] == occ[j] {
                    continue;
                }
                let mut next: Vec<usize> = conf
                    .iter()
                    .map(|&s| if s == i { j } else if s == j { i } else { s })
                    .collect();
                next.sort_unstable();
                let sign = if j < i { seam_sign } else { 1.0 };
                triplets.push((index[&next], col, Complex64::new(sign, 0.0)));
            }
        }
        let matrix = CsrMatrix::from_triplets(configurations.len(), triplets);
        Ok(HoppingModel {
            m,
            boundary,
            configurations,
            index,
            matrix,
        })
    }

    pub fn sites(&self) -> usize {
        self.m
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.configurations.len()
    }

    pub fn configurations(&self) -> &[Vec<usize>] {
        &self.configurations
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Configuration probabilities at time `t` from one occupied configuration.
    pub fn evolve_distribution(&self, initial: &[usize], times: &[f64]) -> Result<Vec<BTreeMap<Vec<usize>, f64>>> {
        let mut init = initial.to_vec();
        init.sort_unstable();
        let start = *self
            .index
            .get(&init)
            .ok_or_else(|| Error::invalid("initial configuration has the wrong particle number"))?;
        let prop = DensePropagator::new(self.matrix.to_dense());
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[start] = Complex64::new(1.0, 0.0);
        Ok(times
            .iter()
            .map(|&t| {
                let w = prop.apply(&v, t);
                self.configurations
                    .iter()
                    .cloned()
                    .zip(w.iter().map(|a| a.norm_sqr()))
                    .collect()
            })
            .collect())
    }
}
