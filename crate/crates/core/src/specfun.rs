//! Integer-order Bessel and Hankel functions of real argument.
//!
//! `J_0, J_1, Y_0, Y_1` come from their power series for small arguments,
//! from Miller's recurrence with Neumann series in a middle band, and from
//! the Hankel asymptotic expansion for large arguments.
//! Higher orders use upward recurrence for `Y_n`, and for `J_n` either the
//! power series (small argument relative to the order), upward recurrence
//! (`n <= x`) or Miller's downward recurrence normalised through the
//! Wronskian `J_{n+1} Y_n - J_n Y_{n+1} = 2 / (pi x)`.
//!
//! Logarithmic derivatives of the Hankel functions are computed from ratio
//! recurrences so that large orders never overflow.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use thiserror::Error;

/// Largest order accepted by [`bessel_j`] and [`bessel_y`].
pub const MAX_ORDER: u32 = 200;

/// Orders 0 and 1 use power series below this argument.
const SERIES_LIMIT: f64 = 8.0;
/// Orders 0 and 1 use Hankel's asymptotic expansion from this argument on;
/// in between, Miller recurrence with Neumann series for `Y`.
const ASYMPTOTIC_LIMIT: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {x} outside the domain of {func}")]
    Domain { func: &'static str, x: f64 },
    #[error("order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(u32),
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// Values and first derivatives of `J_n` and `Y_n` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

impl BesselPair {
    /// `j * yp - jp * y`, which equals `2 / (pi x)` exactly.
    pub fn wronskian(&self) -> f64 {
        self.j * self.yp - self.jp * self.y
    }
}

fn check_order(n: u32) -> Result<()> {
    if n > MAX_ORDER {
        Err(SpecFunError::OrderTooLarge(n))
    } else {
        Ok(())
    }
}

/// Bessel function of the first kind `J_n(x)`, `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    check_order(n)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_j", x });
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    Ok(j_positive(n, x))
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y(n: u32, x: f64) -> Result<f64> {
    check_order(n)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_y", x });
    }
    let (y0, y1) = y01(x);
    Ok(y_upward(n, x, y0, y1).0)
}

/// `J_n, Y_n` and their derivatives at `x > 0`.
pub fn bessel_pair(n: u32, x: f64) -> Result<BesselPair> {
    check_order(n)?;
    if n == MAX_ORDER {
        return Err(SpecFunError::OrderTooLarge(n + 1));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_pair", x });
    }
    let (y0, y1) = y01(x);
    let (y, y_next) = y_upward(n, x, y0, y1);
    let j = j_positive(n, x);
    let j_next = j_positive(n + 1, x);
    // f_n' = (n/x) f_n - f_{n+1}
    let nx = n as f64 / x;
    Ok(BesselPair {
        j,
        y,
        jp: nx * j - j_next,
        yp: nx * y - y_next,
    })
}

/// `x H_n'(x) / H_n(x)` for the Hankel function `H_n = J_n + i Y_n`.
pub fn hankel1_log_deriv(n: u32, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "hankel1_log_deriv", x });
    }
    let (j0, j1) = j01(x);
    let (y0, y1) = y01(x);
    let h0 = Complex64::new(j0, y0);
    let h1 = Complex64::new(j1, y1);
    // ratio[m] = H_m / H_{m-1}; the recurrence multiplies the imaginary part
    // only by positive quantities, so Im z > 0 survives rounding.
    let mut ratio = h1 / h0;
    if n == 0 {
        return Ok(-x * ratio);
    }
    for m in 1..n {
        ratio = Complex64::new(2.0 * m as f64 / x, 0.0) - ratio.inv();
    }
    Ok(Complex64::new(x, 0.0) / ratio - n as f64)
}

/// `x h_l'(x) / h_l(x)` for the spherical Hankel function of the first kind.
pub fn sph_hankel1_log_deriv(l: u32, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "sph_hankel1_log_deriv", x });
    }
    if l == 0 {
        return Ok(Complex64::new(-1.0, x));
    }
    // h_1 / h_0 = (1 - i x) / x
    let mut ratio = Complex64::new(1.0 / x, -1.0);
    for m in 1..l {
        ratio = Complex64::new((2 * m + 1) as f64 / x, 0.0) - ratio.inv();
    }
    Ok(Complex64::new(x, 0.0) / ratio - (l + 1) as f64)
}

fn j_positive(n: u32, x: f64) -> f64 {
    match n {
        0 => j01(x).0,
        1 => j01(x).1,
        _ => {
            let nf = n as f64;
            if x * x <= 4.0 * (nf + 1.0) {
                j_series(n, x)
            } else if x >= nf {
                let (mut jm, mut j) = j01(x);
                for m in 1..n {
                    let next = 2.0 * m as f64 / x * j - jm;
                    jm = j;
                    j = next;
                }
                j
            } else {
                j_miller(n, x)
            }
        }
    }
}

/// `sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)`, with the prefactor in log form.
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let log_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
    let prefactor = (n as f64 * half.ln() - log_fact).exp();
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    prefactor * sum
}

/// Downward recurrence for `n > x`, normalised with the Wronskian of
/// `(J_n, Y_n)`.
fn j_miller(n: u32, x: f64) -> f64 {
    let start = n + 20 + (40.0 * n as f64).sqrt() as u32;
    let mut above = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut at_n = 0.0;
    let mut at_n1 = 0.0;
    for m in (1..=start).rev() {
        // cur ~ J_m, above ~ J_{m+1}
        let below = 2.0 * m as f64 / x * cur - above;
        above = cur;
        cur = below;
        if m - 1 == n + 1 {
            at_n1 = cur;
        }
        if m - 1 == n {
            at_n = cur;
            break;
        }
        if cur.abs() > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            at_n1 *= 1e-250;
        }
    }
    let (y0, y1) = y01(x);
    let (yn, yn1) = y_upward(n, x, y0, y1);
    let scale = (at_n1 * yn - at_n * yn1) / (FRAC_2_PI / x);
    at_n / scale
}

/// Returns `(Y_n, Y_{n+1})` by upward recurrence.
fn y_upward(n: u32, x: f64, y0: f64, y1: f64) -> (f64, f64) {
    let mut prev = y0;
    let mut cur = y1;
    for m in 1..=n {
        let next = 2.0 * m as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

fn j01(x: f64) -> (f64, f64) {
    if x < SERIES_LIMIT {
        (j_series_small(0, x), j_series_small(1, x))
    } else if x < ASYMPTOTIC_LIMIT {
        let seq = miller_sequence(x);
        (seq[0], seq[1])
    } else {
        let (p0, q0) = hankel_pq(0, x);
        let (p1, q1) = hankel_pq(1, x);
        let amp = (FRAC_2_PI / x).sqrt();
        let c0 = x - 0.25 * PI;
        let c1 = x - 0.75 * PI;
        (
            amp * (p0 * c0.cos() - q0 * c0.sin()),
            amp * (p1 * c1.cos() - q1 * c1.sin()),
        )
    }
}

fn y01(x: f64) -> (f64, f64) {
    if x < SERIES_LIMIT {
        (y0_series(x), y1_series(x))
    } else if x < ASYMPTOTIC_LIMIT {
        y01_neumann(x)
    } else {
        let (p0, q0) = hankel_pq(0, x);
        let (p1, q1) = hankel_pq(1, x);
        let amp = (FRAC_2_PI / x).sqrt();
        let c0 = x - 0.25 * PI;
        let c1 = x - 0.75 * PI;
        (
            amp * (p0 * c0.sin() + q0 * c0.cos()),
            amp * (p1 * c1.sin() + q1 * c1.cos()),
        )
    }
}

/// `J_0 .. J_N` by downward recurrence, normalised by
/// `J_0 + 2 sum_k J_{2k} = 1`.
fn miller_sequence(x: f64) -> Vec<f64> {
    let mut top = (x + 30.0 + (40.0 * x).sqrt()) as usize;
    top += top % 2;
    let mut seq = vec![0.0; top + 2];
    seq[top] = 1e-30;
    for m in (1..=top).rev() {
        seq[m - 1] = 2.0 * m as f64 / x * seq[m] - seq[m + 1];
        if seq[m - 1].abs() > 1e250 {
            for v in seq[m - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = seq[0] + 2.0 * seq.iter().skip(2).step_by(2).sum::<f64>();
    for v in seq.iter_mut() {
        *v /= norm;
    }
    seq
}

/// Neumann expansions
/// `Y_0 = (2/pi)(ln(x/2) + gamma) J_0 - (4/pi) sum_k (-1)^k J_{2k} / k` and its
/// negated derivative for `Y_1`.
fn y01_neumann(x: f64) -> (f64, f64) {
    let seq = miller_sequence(x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < seq.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * seq[2 * k] / k as f64;
        s1 += sign * (seq[2 * k - 1] - seq[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * seq[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * seq[0] / x + FRAC_2_PI * log_term * seq[1] + FRAC_2_PI * s1;
    (y0, y1)
}

fn j_series_small(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = if n == 0 { 1.0 } else { half };
    let mut sum = term;
    for m in 1..120 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    sum
}

/// `Y_0 = (2/pi) [ (ln(x/2) + gamma) J_0 - sum_{m>=1} (-1)^m H_m (x^2/4)^m / (m!)^2 ]`
fn y0_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for m in 1..120 {
        term *= q / (m as f64 * m as f64);
        harmonic += 1.0 / m as f64;
        let t = harmonic * term;
        tail += t;
        if t.abs() < 1e-18 * tail.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    FRAC_2_PI * ((half.ln() + EULER_GAMMA) * j_series_small(0, x) - tail)
}

/// `Y_1 = -2/(pi x) + (2/pi) ln(x/2) J_1
///        - (1/pi) (x/2) sum_m (psi(m+1) + psi(m+2)) (-x^2/4)^m / (m! (m+1)!)`
fn y1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    // psi(m+1) = -gamma + H_m
    let mut h_m = 0.0;
    let mut h_m1 = 1.0;
    let mut sum = (h_m + h_m1) - 2.0 * EULER_GAMMA;
    for m in 1..120 {
        term *= q / (m as f64 * (m + 1) as f64);
        h_m += 1.0 / m as f64;
        h_m1 += 1.0 / (m + 1) as f64;
        let t = (h_m + h_m1 - 2.0 * EULER_GAMMA) * term;
        sum += t;
        if t.abs() < 1e-18 * sum.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j_series_small(1, x) - half * sum / PI
}

/// Hankel's asymptotic `P_n(x), Q_n(x)`, summed until the terms stop
/// decreasing.
fn hankel_pq(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        // k odd -> Q gets (-1)^((k-1)/2) a_k ; k even -> P gets (-1)^(k/2) a_k
        if k % 2 == 1 {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}
