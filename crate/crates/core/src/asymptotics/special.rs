//! Gamma and zeta for positive real arguments at arbitrary precision.
//!
//! Gamma uses Spouge's approximation, whose error bound
//! `eps(a) <= a^(-1/2) (2pi)^(-(a+1/2))` lets the term count `a` be chosen
//! from the requested precision. Zeta uses the alternating (eta-function)
//! series accelerated with Borwein's Chebyshev weights, with error
//! `~ 3 / (3 + sqrt(8))^n`.

use astro_float::BigFloat;

use crate::hp::{self, RM};

/// Relative accuracy target used across the asymptotics module:
/// `10^-(p/4)` for precision `p` in bits.
pub(crate) fn target_digits(p: usize) -> f64 {
    0.25 * p as f64
}

/// `Gamma(x)` for `x > 0` via Spouge's approximation, accurate to
/// `10^-(p/4)` relative.
pub fn special_gamma(x: f64, p: usize) -> BigFloat {
    assert!(x > 0.0, "gamma implemented for positive arguments only");
    // error (2pi)^-(a+1/2) below 10^-(digits + 6)
    let digits = target_digits(p);
    let a = (((digits + 6.0) * std::f64::consts::LN_10)
        / (2.0 * std::f64::consts::PI).ln())
    .ceil() as usize
        + 2;
    // the alternating c_k reach ~2^(1.9 a) before cancelling back down
    let wp = p + 2 * a + 64;

    // Gamma(x) = Gamma(x+1)/x for x < 1 keeps z = x-1 nonnegative
    let (z, divide_by_x) = if x < 1.0 { (x, true) } else { (x - 1.0, false) };

    let zf = hp::from_f64(z, wp);
    let af = hp::from_u64(a as u64, wp);
    let e1 = hp::exp(&hp::one(wp), wp);

    // sum = sqrt(2 pi) + sum_k c_k / (z + k),
    // c_k = (-1)^(k-1) (a-k)^(k-1/2) e^(a-k) / (k-1)!
    let two_pi = hp::pi(wp).mul(&hp::from_u64(2, wp), wp, RM);
    let mut sum = hp::sqrt(&two_pi, wp);
    let mut factorial = hp::one(wp); // (k-1)!
    let mut e_pow = hp::exp(&hp::from_u64(a as u64 - 1, wp), wp); // e^(a-k)
    for k in 1..a {
        if k > 1 {
            factorial = factorial.mul(&hp::from_u64(k as u64 - 1, wp), wp, RM);
        }
        let amk = hp::from_u64((a - k) as u64, wp);
        let power = hp::pow(&amk, &hp::from_f64(k as f64 - 0.5, wp), wp);
        let mut ck = power.mul(&e_pow, wp, RM).div(&factorial, wp, RM);
        if k % 2 == 0 {
            ck = ck.neg();
        }
        sum = sum.add(&ck.div(&zf.add(&hp::from_u64(k as u64, wp), wp, RM), wp, RM), wp, RM);
        e_pow = e_pow.div(&e1, wp, RM);
    }

    let za = zf.add(&af, wp, RM);
    let prefactor = hp::pow(&za, &zf.add(&hp::from_f64(0.5, wp), wp, RM), wp)
        .mul(&hp::exp(&za.neg(), wp), wp, RM);
    let g = prefactor.mul(&sum, wp, RM);
    let g = if divide_by_x { g.div(&hp::from_f64(x, wp), wp, RM) } else { g };
    hp::with_precision(&g, p)
}

/// `zeta(s)` for real `s > 1` via the accelerated alternating series
/// `zeta(s) = 1/(1 - 2^(1-s)) * sum_k (-1)^k (d_k - d_n) / (d_n (k+1)^s)`.
pub fn special_zeta(s: f64, p: usize) -> BigFloat {
    assert!(s > 1.0, "zeta implemented for s > 1");
    let digits = target_digits(p);
    // error ~ 3 (3+sqrt 8)^-n / |1 - 2^(1-s)|
    let denom_margin = (1.0 - 2f64.powf(1.0 - s)).abs().log10().min(0.0);
    let n = (((digits + 8.0 - denom_margin) * std::f64::consts::LN_10)
        / (3.0 + 8f64.sqrt()).ln())
    .ceil() as usize
        + 2;
    let wp = p + 64;

    // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), all terms positive
    let mut d = Vec::with_capacity(n + 1);
    let mut term = hp::one(wp).div(&hp::from_u64(n as u64, wp), wp, RM); // i = 0
    let mut acc = term.clone();
    d.push(acc.clone());
    for i in 1..=n {
        // t_i / t_(i-1) = 4 (n+i-1)(n-i+1) / ((2i)(2i-1))
        let num = 4 * (n as u64 + i as u64 - 1) * (n as u64 - i as u64 + 1);
        let den = (2 * i as u64) * (2 * i as u64 - 1);
        term = term.mul(&hp::from_u64(num, wp), wp, RM).div(&hp::from_u64(den, wp), wp, RM);
        acc = acc.add(&term, wp, RM);
        d.push(acc.clone());
    }
    let nf = hp::from_u64(n as u64, wp);
    for dk in &mut d {
        *dk = dk.mul(&nf, wp, RM);
    }

    let sf = hp::from_f64(s, wp);
    let mut sum = hp::zero();
    for k in 0..n {
        let mut t = d[k].sub(&d[n], wp, RM);
        if k % 2 == 1 {
            t = t.neg();
        }
        let kp = hp::pow(&hp::from_u64(k as u64 + 1, wp), &sf, wp);
        sum = sum.add(&t.div(&kp, wp, RM), wp, RM);
    }
    // 1 - 2^(1-s)
    let two_pow = hp::pow(&hp::from_u64(2, wp), &hp::from_f64(1.0 - s, wp), wp);
    let scale = hp::one(wp).sub(&two_pow, wp, RM).mul(&d[n], wp, RM);
    hp::with_precision(&sum.div(&scale, wp, RM).neg(), p)
}

/// f64 gamma (Lanczos, g = 7) for solver initial guesses.
pub fn special_gamma_f64(x: f64) -> f64 {
    const P: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * special_gamma_f64(1.0 - x))
    } else {
        let xm = x - 1.0;
        let mut t = P[0];
        for (i, c) in P.iter().enumerate().skip(1) {
            t += c / (xm + i as f64);
        }
        let w = xm + 7.5;
        (2.0 * std::f64::consts::PI).sqrt() * w.powf(xm + 0.5) * (-w).exp() * t
    }
}
