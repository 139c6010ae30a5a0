//! Bessel functions of the first kind, integer order.
//!
//! Small and moderate arguments use Miller's backward recurrence normalised
//! with `J0 + 2 * sum J_{2k} = 1`. Large arguments use the Hankel asymptotic
//! expansion for orders 0 and 1 and upward recurrence for `n < x`.
//! Absolute error is below 1e-13 over the tested range.

use std::f64::consts::PI;

const ASYMPTOTIC_FROM: f64 = 25.0;

/// `J_0(x)`.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x)
    let order = n.unsigned_abs();
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    if ax == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    sign * bessel_j_nonneg(order, ax)
}

fn bessel_j_nonneg(n: u64, x: f64) -> f64 {
    if x >= ASYMPTOTIC_FROM && (n as f64) < x {
        let j0 = hankel(0.0, x);
        if n == 0 {
            return j0;
        }
        let j1 = hankel(1.0, x);
        if n == 1 {
            return j1;
        }
        // upward recurrence is stable while k < x
        let (mut prev, mut cur) = (j0, j1);
        for k in 1..n {
            let next = 2.0 * k as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    miller(n, x)
}

fn miller(n: u64, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as u64;
    m += m % 2;

    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-300_f64; // J_k
    let mut result = 0.0;
    let mut norm = 0.0;
    if m == n {
        result = cur;
    }
    let mut k = m;
    while k > 0 {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k == n {
            result = cur;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    result / norm
}

/// Hankel expansion for orders 0 and 1, truncated at its smallest term.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    // term_k = a_k(nu) / x^k with a_k = prod_{j<=k} (mu - (2j-1)^2) / (k! 8^k)
    let mut term = 1.0_f64;
    for k in 0..200u32 {
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        let odd = (2 * k + 1) as f64;
        let next = term * (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-18 {
            break;
        }
        term = next;
    }
    let phase = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * phase.cos() - q * phase.sin())
}
