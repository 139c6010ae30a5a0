//! Single-particle propagator of the hopping model on a ring.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::special::bessel_j;

/// `2 cos(2 pi q / M)`.
pub fn dispersion(q: i64, m: usize) -> f64 {
    2.0 * (2.0 * PI * q.rem_euclid(m as i64) as f64 / m as f64).cos()
}

/// `K_t(d) = (1/M) sum_q exp(i 2 pi q d / M + i eps(q) t)`.
pub fn propagator(d: i64, t: f64, m: usize) -> Complex64 {
    assert!(m >= 1, "ring needs at least one site");
    let mm = m as i64;
    let d = d.rem_euclid(mm);
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 1..=mm {
        // reduce q d mod M before scaling so the phase stays accurate for large rings
        let phase = 2.0 * PI * ((q * d) % mm) as f64 / m as f64 + dispersion(q, m) * t;
        acc += Complex64::from_polar(1.0, phase);
    }
    acc / m as f64
}

/// `K_t(d)` for `d = 0..M`.
pub fn propagator_table(t: f64, m: usize) -> Vec<Complex64> {
    (0..m as i64).into_par_iter().map(|d| propagator(d, t, m)).collect()
}

/// Infinite-line propagator modulus `|J_d(2t)|`.
pub fn line_propagator_modulus(d: i64, t: f64) -> f64 {
    bessel_j(d, 2.0 * t).abs()
}
