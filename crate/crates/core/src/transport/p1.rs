//! Probability that a particle of the initial block stays inside it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::propagator::{dispersion, propagator};
use crate::error::{Error, Result};
use crate::special::bessel_j;

fn check_geometry(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > m {
        return Err(Error::invalid(format!("need 1 <= N <= M, got N={n}, M={m}")));
    }
    Ok(())
}

/// `p1 = (1/N) sum_{|d|<N} (N - |d|) |K_t(d)|^2`.
pub fn p1(n: usize, m: usize, t: f64) -> Result<f64> {
    check_geometry(n, m)?;
    let weights: Vec<f64> = (0..n as i64)
        .into_par_iter()
        .map(|d| {
            let w = (n as i64 - d) as f64;
            let plus = propagator(d, t, m).norm_sqr();
            if d == 0 {
                w * plus
            } else {
                w * (plus + propagator(-d, t, m).norm_sqr())
            }
        })
        .collect();
    Ok(weights.iter().sum::<f64>() / n as f64)
}

/// The double sum over start and end sites, one propagator per pair.
pub fn p1_literal(n: usize, m: usize, t: f64) -> Result<f64> {
    check_geometry(n, m)?;
    let mut total = 0.0;
    for y in 1..=n as i64 {
        for x in 1..=n as i64 {
            total += propagator(x - y, t, m).norm_sqr();
        }
    }
    Ok(total / n as f64)
}

/// Cosine form `(1/(N M^2)) sum_{x,y,q,q'} cos((q-q')(x-y) 2pi/M + (eps(q)-eps(q')) t)`.
pub fn p1_cosine_form(n: usize, m: usize, t: f64) -> Result<f64> {
    check_geometry(n, m)?;
    let mm = m as i64;
    let mut total = 0.0;
    for x in 1..=n as i64 {
        for y in 1..=n as i64 {
            for q in 1..=mm {
                for qq in 1..=mm {
                    let k = ((q - qq) * (x - y)).rem_euclid(mm);
                    total += (2.0 * PI * k as f64 / m as f64 + (dispersion(q, m) - dispersion(qq, m)) * t).cos();
                }
            }
        }
    }
    Ok(total / (n as f64 * (m * m) as f64))
}

/// `p1` on the infinite line, `|K_t(d)| = |J_d(2t)|`.
pub fn p1_line(n: usize, t: f64) -> f64 {
    let s: f64 = (1..n as i64)
        .map(|d| 2.0 * (n as i64 - d) as f64 * bessel_j(d, 2.0 * t).powi(2))
        .sum();
    (s + n as f64 * bessel_j(0, 2.0 * t).powi(2)) / n as f64
}

/// Worst-case lower bound `(1 - k + N p) / (1 - k + N)` on finding at least
/// `k` of `N` particles outside the block.
pub fn success_bound(p1: f64, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= N, got k={k}, N={n}")));
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::invalid(format!("p1 = {p1} is not a probability")));
    }
    let p = 1.0 - p1;
    let (k, n) = (k as f64, n as f64);
    Ok((1.0 - k + n * p) / (1.0 - k + n))
}

/// Default number of required departures, `floor(sqrt(N))`.
pub fn default_departures(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportReport {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub p1: f64,
    pub p: f64,
    /// `N (1 - p1)`, departures to either side.
    pub departures: f64,
    /// Half of `departures`, the count on one side by symmetry.
    pub departures_one_sided: f64,
    pub k: usize,
    pub bound: f64,
    /// `2t / M`: ring lengths covered by the fastest mode.
    pub ballistic_crossing: f64,
    /// The fastest mode has come round the ring into the block.
    pub wraps: bool,
    /// `p1` on the infinite line for comparison.
    pub p1_line: f64,
}

pub fn transport_report(n: usize, m: usize, t: f64, k: usize) -> Result<TransportReport> {
    if !(t.is_finite()) {
        return Err(Error::invalid("t must be finite"));
    }
    let p1v = p1(n, m, t)?.clamp(0.0, 1.0);
    let p = 1.0 - p1v;
    Ok(TransportReport {
        t,
        n,
        m,
        p1: p1v,
        p,
        departures: n as f64 * p,
        departures_one_sided: n as f64 * p / 2.0,
        k,
        bound: success_bound(p1v, n, k)?,
        ballistic_crossing: 2.0 * t.abs() / m as f64,
        wraps: 2.0 * t.abs() > (m - n) as f64,
        p1_line: p1_line(n, t),
    })
}
