//! Three-region estimate of `p1` through the mode-pair series
//! `p1 ~ (1/(N pi^2)) sum_delta g(delta) f(delta)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::p1::p1;
use super::propagator::dispersion;
use crate::error::{Error, Result};
use crate::special::bessel_j0;

/// `sin^2(N pi delta / M) / delta^2`.
pub fn g_weight(delta: usize, n: usize, m: usize) -> f64 {
    let d = delta as f64;
    (n as f64 * PI * d / m as f64).sin().powi(2) / (d * d)
}

/// `2 sum_{q=1}^{M-delta} cos((eps(q) - eps(q+delta)) t)`.
pub fn f_exact(delta: usize, m: usize, t: f64) -> f64 {
    let mut s = 0.0;
    for q in 1..=(m.saturating_sub(delta)) as i64 {
        s += ((dispersion(q, m) - dispersion(q + delta as i64, m)) * t).cos();
    }
    2.0 * s
}

/// `2 M J0(4 t delta pi / M)`.
pub fn f_bessel(delta: usize, m: usize, t: f64) -> f64 {
    2.0 * m as f64 * bessel_j0(4.0 * t * delta as f64 * PI / m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub t: f64,
    pub eps: f64,
    /// First region is `delta < eps M / N`.
    pub split_low: f64,
    /// Third region is `delta >= 2 M / N`.
    pub split_high: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    /// `term1 + term2 + term3` with the exact `f`.
    pub series_total: f64,
    /// First region with `f = 2M`.
    pub term1_bound: f64,
    /// `2 eps`.
    pub term1_nominal: f64,
    /// `max |f_bessel| / 2M` over the second region.
    pub term2_bound: f64,
    /// `max |f_exact| / 2M` over the second region.
    pub term2_bound_exact: f64,
    /// Third region with `f = 2(M - delta)`.
    pub term3_bound_free: f64,
    /// `2 eps + term2_bound + term3`.
    pub bound_total: f64,
    /// `max |f_exact - f_bessel| / 2M` for `delta < 2M/N`.
    pub bessel_discrepancy: f64,
    /// Dropped `q = q'` contribution, `N / M`.
    pub diagonal_term: f64,
    pub p1_exact: f64,
}

pub fn appendix_estimate(n: usize, m: usize, t: f64, eps: f64) -> Result<AppendixEstimate> {
    if n == 0 || n >= m {
        return Err(Error::invalid(format!("need 1 <= N < M, got N={n}, M={m}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t must be finite and >= 0"));
    }
    let split_low = eps * m as f64 / n as f64;
    let split_high = 2.0 * m as f64 / n as f64;
    let two_m = 2.0 * m as f64;
    let prefactor = 1.0 / (n as f64 * PI * PI);

    struct Row {
        region: u8,
        g: f64,
        f: f64,
        fb: f64,
        free: f64,
    }
    let rows: Vec<Row> = (1..=m)
        .into_par_iter()
        .map(|delta| {
            let d = delta as f64;
            let region = if d < split_low {
                1
            } else if d < split_high {
                2
            } else {
                3
            };
            let fb = if region < 3 { f_bessel(delta, m, t) } else { 0.0 };
            Row {
                region,
                g: g_weight(delta, n, m),
                f: f_exact(delta, m, t),
                fb,
                free: 2.0 * (m - delta) as f64,
            }
        })
        .collect();

    let (mut term1, mut term2, mut term3) = (0.0, 0.0, 0.0);
    let (mut term1_bound, mut term3_bound_free) = (0.0, 0.0);
    let (mut term2_bound, mut term2_bound_exact, mut bessel_discrepancy) = (0.0_f64, 0.0_f64, 0.0_f64);
    for r in &rows {
        let contribution = prefactor * r.g * r.f;
        match r.region {
            1 => {
                term1 += contribution;
                term1_bound += prefactor * r.g * two_m;
            }
            2 => {
                term2 += contribution;
                term2_bound = term2_bound.max(r.fb.abs() / two_m);
                term2_bound_exact = term2_bound_exact.max(r.f.abs() / two_m);
            }
            _ => {
                term3 += contribution;
                term3_bound_free += prefactor * r.g * r.free;
            }
        }
        if r.region < 3 {
            bessel_discrepancy = bessel_discrepancy.max((r.f - r.fb).abs() / two_m);
        }
    }
    Ok(AppendixEstimate {
        n,
        m,
        t,
        eps,
        split_low,
        split_high,
        term1,
        term2,
        term3,
        series_total: term1 + term2 + term3,
        term1_bound,
        term1_nominal: 2.0 * eps,
        term2_bound,
        term2_bound_exact,
        term3_bound_free,
        bound_total: 2.0 * eps + term2_bound + term3,
        bessel_discrepancy,
        diagonal_term: n as f64 / m as f64,
        p1_exact: p1(n, m, t)?,
    })
}
