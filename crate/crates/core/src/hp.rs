//! Thin wrappers around [`astro_float`] fixing the rounding mode, sharing a
//! per-thread constants cache for the transcendental functions, and adding
//! the integer/float conversions the rest of the crate needs.
//!
//! All arithmetic in this crate goes through explicit-precision calls; `p`
//! is always a mantissa length in bits.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

/// Rounding mode used for every operation in the crate.
pub const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn ln2(p: usize) -> BigFloat {
    with_consts(|cc| cc.ln_2(p, RM))
}

pub fn exp(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.exp(p, RM, cc))
}

pub fn ln(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.ln(p, RM, cc))
}

/// `base ^ exponent` for a real exponent (via exp/ln).
pub fn pow(base: &BigFloat, exponent: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| base.pow(exponent, p, RM, cc))
}

pub fn cos(x: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| x.cos(p, RM, cc))
}

/// `ln(1 + u)`, accurate even when `|u|` is far below one ulp of 1
/// (where forming `1 + u` first would round the perturbation away).
pub fn ln_1p(u: &BigFloat, p: usize) -> BigFloat {
    if u.is_zero() {
        return zero();
    }
    if log2_approx(&u.abs()) > -(p as f64) / 3.0 {
        return ln(&one(p).add(u, p, RM), p);
    }
    // u below 2^-(p/3): three series terms leave error under 2^-(4p/3)
    let u2 = u.mul(u, p, RM);
    let u3 = u2.mul(u, p, RM);
    u.sub(&u2.div(&from_u64(2, p), p, RM), p, RM)
        .add(&u3.div(&from_u64(3, p), p, RM), p, RM)
}

/// `ln(1 - u)`; see [`ln_1p`].
pub fn ln_1m(u: &BigFloat, p: usize) -> BigFloat {
    ln_1p(&u.neg(), p)
}

pub fn sqrt(x: &BigFloat, p: usize) -> BigFloat {
    x.sqrt(p, RM)
}

pub fn from_u64(v: u64, p: usize) -> BigFloat {
    BigFloat::from_u64(v, p)
}

pub fn from_i64(v: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(v, p)
}

pub fn from_f64(v: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(v, p)
}

pub fn zero() -> BigFloat {
    BigFloat::from_i8(0, 64)
}

pub fn one(p: usize) -> BigFloat {
    BigFloat::from_i8(1, p)
}

/// Parses a decimal string (scientific notation allowed) at precision `p`.
pub fn parse_dec(s: &str, p: usize) -> BigFloat {
    with_consts(|cc| BigFloat::parse(s, astro_float::Radix::Dec, p, RM, cc))
}

/// Full-precision decimal rendering; round-trips through [`parse_dec`].
pub fn format_dec(x: &BigFloat) -> String {
    format!("{x}")
}

/// Exact conversion of a big natural number; the result carries as many
/// mantissa bits as the input needs (round afterwards if required).
pub fn from_biguint(v: &BigUint) -> BigFloat {
    if v.is_zero() {
        return zero();
    }
    let words = v.to_u64_digits();
    let e = (words.len() * 64) as i64;
    assert!(e <= i32::MAX as i64, "integer too large for float exponent");
    BigFloat::from_words(&words, Sign::Pos, e as astro_float::Exponent)
}

pub fn from_bigint(v: &BigInt) -> BigFloat {
    let m = from_biguint(v.magnitude());
    if v.sign() == num_bigint::Sign::Minus {
        m.neg()
    } else {
        m
    }
}

/// Rounds `v` to precision `p` (no-op when `v` already fits).
pub fn with_precision(v: &BigFloat, p: usize) -> BigFloat {
    let mut out = v.clone();
    if out.set_precision(p, RM).is_err() {
        out = BigFloat::nan(None);
    }
    out
}

/// Natural log of a big natural number at precision `p`; `-inf` for zero.
pub fn ln_biguint(v: &BigUint, p: usize) -> BigFloat {
    if v.is_zero() {
        return astro_float::INF_NEG;
    }
    ln(&with_precision(&from_biguint(v), p + 32), p)
}

/// Nearest integer (half away from zero) of a nonnegative float.
pub fn to_biguint_nearest(x: &BigFloat) -> Option<BigUint> {
    if x.is_nan() || x.is_inf() || x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(BigUint::zero());
    }
    let (words, n, _sign, e, _inexact) = x.as_raw_parts()?;
    let e = e as i64;
    // value = m * 2^(e - n) with m the n-bit little-endian mantissa
    let m = BigUint::new(words.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect());
    let shift = n as i64 - e;
    if shift <= 0 {
        Some(m << ((-shift) as usize))
    } else if shift as usize > n + 1 {
        Some(BigUint::zero()) // value < 1/2
    } else {
        let s = shift as usize;
        let floor = &m >> s;
        let half_up = m.bit((s - 1) as u64);
        Some(if half_up { floor + 1u32 } else { floor })
    }
}

/// Lossy conversion for reports and fits; saturates to `±inf` out of range.
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, n, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = words[words.len() - 1];
    let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
    // mantissa bits live in the top of the word array: value = frac * 2^e
    let frac = (top as f64) / 2f64.powi(64) + (next as f64) / 2f64.powi(128);
    let _ = n;
    let mag = frac * 2f64.powi(e);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// `a < b` (false when either side is NaN).
pub fn lt(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c < 0)
}

/// `a <= b` (false when either side is NaN).
pub fn le(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c <= 0)
}

/// `a > b` (false when either side is NaN).
pub fn gt(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c > 0)
}

/// Numeric equality (false when either side is NaN).
pub fn eq(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(0))
}

/// Approximate `log2 |x|` without leaving the float's exponent range
/// (`to_f64` overflows for the magnitudes the saddle sums reach).
pub fn log2_approx(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if x.is_inf() {
        return f64::INFINITY;
    }
    let Some((words, _n, _s, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = words[words.len() - 1];
    let frac = (top as f64) / 2f64.powi(64);
    e as f64 + frac.log2()
}

/// `|exp(log_a - log_b) - 1|` as f64; relative error of magnitudes stored in
/// log space.
pub fn relerr_from_logs(log_a: &BigFloat, log_b: &BigFloat, p: usize) -> f64 {
    let d = log_a.sub(log_b, p, RM);
    let r = exp(&d, p).sub(&one(p), p, RM).abs();
    to_f64(&r)
}
