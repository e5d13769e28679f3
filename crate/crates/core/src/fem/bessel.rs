//! Integer-order Bessel functions of real argument.
//!
//! `J_n` by Miller's backward recurrence normalized with
//! `J_0 + 2 sum J_{2k} = 1`; `Y_0`, `Y_1` by their ascending series (Hankel
//! asymptotics for large argument) and `Y_n` by forward recurrence.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument `Y_0`, `Y_1` switch to the asymptotic expansion.
const ASYMPTOTIC_FROM: f64 = 12.0;

/// `J_0(x), ..., J_{n_max}(x)` for `x > 0`.
pub fn bessel_j_all(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "bessel_j_all needs x > 0");
    let start = {
        let m = (n_max as f64).max(x) + 20.0 + (40.0 * (n_max as f64).max(x)).sqrt();
        2 * ((m as usize) / 2 + 1)
    };
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(n_max + 1);
    j.iter().map(|v| v / norm).collect()
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    bessel_j_all(n, x)[n]
}

/// Hankel asymptotic `(P, Q)` with `J = sqrt(2/(pi x)) (P cos w - Q sin w)`,
/// `Y = sqrt(2/(pi x)) (P sin w + Q cos w)`, `w = x - (n/2 + 1/4) pi`.
fn hankel_pq(n: usize, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term: f64 = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        // The expansion is asymptotic: stop at its smallest term.
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        if k % 2 == 1 {
            let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += s * term;
        } else {
            let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            p += s * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn y01(x: f64) -> (f64, f64) {
    if x > ASYMPTOTIC_FROM {
        let amp = (2.0 / (PI * x)).sqrt();
        let (p0, q0) = hankel_pq(0, x);
        let (p1, q1) = hankel_pq(1, x);
        let w0 = x - FRAC_PI_4;
        let w1 = x - 3.0 * FRAC_PI_4;
        return (
            amp * (p0 * w0.sin() + q0 * w0.cos()),
            amp * (p1 * w1.sin() + q1 * w1.cos()),
        );
    }
    let j = bessel_j_all(1, x);
    let l = (x / 2.0).ln();
    let z = x * x / 4.0;
    // Y0 = (2/pi)(ln(x/2) + gamma) J0 + (2/pi) sum_{m>=1} (-1)^{m+1} H_m z^m / (m!)^2
    let mut s0 = 0.0;
    let mut t = 1.0;
    let mut h = 0.0;
    for m in 1..200 {
        let mf = m as f64;
        t *= -z / (mf * mf);
        h += 1.0 / mf;
        let add = -t * h;
        s0 += add;
        if add.abs() < 1e-18 * s0.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    let y0 = 2.0 / PI * ((l + EULER_GAMMA) * j[0] + s0);
    // Y1 = (2/pi) J1 ln(x/2) - 2/(pi x) - (1/pi) sum_k (-1)^k (psi(k+1) + psi(k+2)) (x/2)^{2k+1} / (k!(k+1)!)
    let mut s1 = 0.0;
    let mut t = x / 2.0;
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    for k in 0..200 {
        if k > 0 {
            let kf = k as f64;
            t *= -z / (kf * (kf + 1.0));
            psi1 += 1.0 / kf;
            psi2 += 1.0 / (kf + 1.0);
        }
        let add = t * (psi1 + psi2);
        s1 += add;
        if add.abs() < 1e-18 * s1.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    let y1 = 2.0 / PI * j[1] * l - 2.0 / (PI * x) - s1 / PI;
    (y0, y1)
}

/// `Y_0(x), ..., Y_{n_max}(x)` for `x > 0`.
pub fn bessel_y_all(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0, "bessel_y_all needs x > 0");
    let (y0, y1) = y01(x);
    let mut y = vec![y0, y1];
    for n in 1..n_max {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y.truncate(n_max + 1);
    y
}

pub fn bessel_y(n: usize, x: f64) -> f64 {
    bessel_y_all(n.max(1), x)[n]
}

/// `H_n^{(2)}(x) = J_n(x) - i Y_n(x)`.
pub fn hankel2(n: usize, x: f64) -> C64 {
    C64::new(bessel_j(n, x), -bessel_y(n, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_y(0, 1.0) - 0.088_256_964_215_676_96).abs() < 1e-14);
        assert!((bessel_y(1, 1.0) - -0.781_212_821_300_288_7).abs() < 1e-14);
        assert!((bessel_j(5, 2.5) - 0.019_501_625_134_503_22).abs() < 1e-14);
        assert!((bessel_y(3, 4.7) - 0.056_290_832_758_230_4).abs() < 1e-13);
        assert!((bessel_y(0, 20.0) - 0.062_640_596_809_383_86).abs() < 1e-13);
        assert!((bessel_j(0, 20.0) - 0.167_024_664_340_583_22).abs() < 1e-13);
    }

    #[test]
    fn wronskian() {
        for &x in &[0.3, 1.0, 4.7, 11.9, 12.1, 25.0] {
            let j = bessel_j_all(8, x);
            let y = bessel_y_all(8, x);
            for n in 0..8 {
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                assert!(
                    (w - 2.0 / (PI * x)).abs() < 1e-12 * (2.0 / (PI * x)).max(1.0),
                    "x {x} n {n}"
                );
            }
        }
    }

    #[test]
    fn series_and_asymptotic_agree_near_switch() {
        let x = 12.0;
        let (a0, a1) = y01(x);
        let (b0, b1) = y01(x + 1e-9);
        assert!((a0 - b0).abs() < 1e-9 && (a1 - b1).abs() < 1e-9);
    }
}
