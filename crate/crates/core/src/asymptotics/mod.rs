//! Asymptotic estimates of the counts: the saddle-point formula evaluated
//! at the numerically solved tilt, the explicit closed form for sequences
//! with `a_j = K j^(r-1) y^j + O(y^(nu j))`, `y > 1`, and the
//! Hardy-Ramanujan formula for integer partitions.
//!
//! Counts grow like `exp(kappa2 n^(r/(r+1))) y^n`, far beyond any fixed
//! float range, so estimates are carried as natural logs ([`LogValue`]).

mod special;

pub use special::{special_gamma, special_gamma_f64, special_zeta};

use astro_float::BigFloat;
use num_bigint::BigUint;

use crate::hp::{self, RM};
use crate::saddle::{log_weight_sum, solve_saddle};
use crate::sequences::ComponentSequence;
use crate::{Error, Kind, Result};

/// A positive magnitude stored as its natural log.
#[derive(Debug, Clone)]
pub struct LogValue {
    pub log_e: BigFloat,
}

impl LogValue {
    pub fn log10(&self, p: usize) -> BigFloat {
        self.log_e.div(&hp::ln(&hp::from_u64(10, p), p), p, RM)
    }

    /// `|exp(log self - log other) - 1|`: the relative error between the
    /// two magnitudes.
    pub fn relerr(&self, other: &LogValue, p: usize) -> f64 {
        hp::relerr_from_logs(&self.log_e, &other.log_e, p)
    }

    /// Relative error against an exact positive integer.
    pub fn relerr_vs_count(&self, count: &BigUint, p: usize) -> f64 {
        hp::relerr_from_logs(&self.log_e, &hp::ln_biguint(count, p), p)
    }

    pub fn to_json(&self, formula: &str, n: u64) -> serde_json::Value {
        let p = 64.max(self.log_e.precision().unwrap_or(64));
        serde_json::json!({
            "schema_version": 1,
            "n": n,
            "log_e": hp::format_dec(&self.log_e),
            "log10": hp::format_dec(&self.log10(p)),
            "formula": formula,
        })
    }
}

/// Saddle-point estimate of the count:
/// `e^{n sigma_n} (2 pi B_n^2)^(-1/2) prod_{j<=n} (1 -+ e^{-j sigma_n})^(-+ a_j)`
/// at the solved saddle.
pub fn theorem1_estimate(
    seq: &ComponentSequence,
    n: u64,
    kind: Kind,
    p: usize,
) -> Result<LogValue> {
    let wp = p + 32;
    let sol = solve_saddle(seq, n, kind, p, &[])?;
    let sigma = hp::with_precision(&sol.sigma, wp);
    let ns = sigma.mul(&hp::from_u64(n, wp), wp, RM);
    let two_pi_b2 = hp::pi(wp).mul(&hp::from_u64(2, wp), wp, RM).mul(&sol.b2, wp, RM);
    let half_log = hp::ln(&two_pi_b2, wp).div(&hp::from_u64(2, wp), wp, RM);
    let weights = log_weight_sum(seq, n, &sigma, kind, wp)?;
    let log = ns.sub(&half_log, wp, RM).add(&weights, wp, RM);
    Ok(LogValue { log_e: hp::with_precision(&log, p) })
}

/// `kappa2 = (r+1)/r * (K Gamma(r+1))^(1/(r+1))`, the coefficient of
/// `n^(r/(r+1))` in the log of the counts.
pub fn kappa2(big_k: f64, r: f64, p: usize) -> BigFloat {
    assert!(big_k > 0.0 && r > 0.0);
    let wp = p + 32;
    let kg = hp::from_f64(big_k, wp).mul(&special_gamma(r + 1.0, wp), wp, RM);
    let root = hp::pow(&kg, &hp::from_f64(1.0 / (r + 1.0), wp), wp);
    let ratio = hp::from_f64(r + 1.0, wp).div(&hp::from_f64(r, wp), wp, RM);
    hp::with_precision(&ratio.mul(&root, wp, RM), p)
}

/// The constant term `C_l` in
/// `sum_{j>=1} j^l e^{-j delta} = Gamma(l+1) delta^(-l-1) + C_l + O(delta)`.
///
/// For `l > 0` the closed form
/// `C_l = 2 Gamma(l+1) (2 pi)^(-l-1) zeta(l+1) cos(pi (l+1)/2)` applies;
/// for `-1 < l <= 0` the limit is taken numerically by Richardson
/// extrapolation over `delta = 2^-i`.
pub fn poisson_constant_c(l: f64, p: usize) -> Result<BigFloat> {
    assert!(l > -1.0, "C_l defined for l > -1");
    if l > 0.0 {
        let wp = p + 32;
        let two_pi = hp::pi(wp).mul(&hp::from_u64(2, wp), wp, RM);
        let g = special_gamma(l + 1.0, wp);
        let z = special_zeta(l + 1.0, wp);
        let pw = hp::pow(&two_pi, &hp::from_f64(-(l + 1.0), wp), wp);
        let angle = hp::pi(wp).mul(&hp::from_f64((l + 1.0) / 2.0, wp), wp, RM);
        let c = hp::from_u64(2, wp)
            .mul(&g, wp, RM)
            .mul(&pw, wp, RM)
            .mul(&z, wp, RM)
            .mul(&hp::cos(&angle, wp), wp, RM);
        Ok(hp::with_precision(&c, p))
    } else {
        c_l_extrapolated(l, p)
    }
}

/// `sum_{j>=1} j^l e^{-j delta} - Gamma(l+1) delta^(-l-1)` for one node.
fn poisson_remainder(l: f64, delta: &BigFloat, gamma_l1: &BigFloat, wp: usize) -> BigFloat {
    let q = hp::exp(&delta.neg(), wp);
    let main = if l == 0.0 {
        // geometric series in closed form
        q.div(&hp::one(wp).sub(&q, wp, RM), wp, RM)
    } else {
        let mut sum = hp::zero();
        let mut qj = hp::one(wp);
        let lf = hp::from_f64(l, wp);
        for j in 1u64.. {
            qj = qj.mul(&q, wp, RM);
            let jl = if l == -0.5 {
                hp::one(wp).div(&hp::sqrt(&hp::from_u64(j, wp), wp), wp, RM)
            } else {
                hp::pow(&hp::from_u64(j, wp), &lf, wp)
            };
            let term = qj.mul(&jl, wp, RM);
            sum = sum.add(&term, wp, RM);
            if j > 8 && hp::log2_approx(&term) < hp::log2_approx(&sum) - (wp as f64 + 40.0) {
                break;
            }
        }
        sum
    };
    let dpow = hp::pow(delta, &hp::from_f64(-l - 1.0, wp), wp);
    main.sub(&gamma_l1.mul(&dpow, wp, RM), wp, RM)
}

/// Richardson extrapolation of [`poisson_remainder`] at `delta = 2^-i`.
fn c_l_extrapolated(l: f64, p: usize) -> Result<BigFloat> {
    // the node budget caps the reachable accuracy near 1e-22 for
    // fractional l, so evaluating those nodes beyond ~160 bits is waste;
    // the closed-form l = 0 remainder is cheap and keeps full precision
    let wp = if l == 0.0 { p + 32 } else { (p + 32).min(160) };
    let gamma_l1 = special_gamma(l + 1.0, wp);
    let tol = 10f64.powf(-special::target_digits(p));
    let (i0, max_nodes) = if l == 0.0 { (6, 16) } else { (3, 9) };

    let mut rows: Vec<Vec<BigFloat>> = Vec::new();
    let mut best_err = f64::INFINITY;
    for node in 0..max_nodes {
        let i = i0 + node;
        let delta = hp::one(wp).div(&hp::from_u64(1u64 << i, wp), wp, RM);
        let mut row = vec![poisson_remainder(l, &delta, &gamma_l1, wp)];
        // R[i][m] = R[i][m-1] + (R[i][m-1] - R[i-1][m-1]) / (2^m - 1)
        for m in 1..=rows.len() {
            let prev = &rows[rows.len() - 1][m - 1];
            let cur = &row[m - 1];
            let denom = hp::from_u64((1u64 << m) - 1, wp);
            row.push(cur.add(&cur.sub(prev, wp, RM).div(&denom, wp, RM), wp, RM));
        }
        if row.len() >= 2 {
            let last = &row[row.len() - 1];
            let est = hp::to_f64(&last.sub(&row[row.len() - 2], wp, RM).abs());
            let scale = hp::to_f64(&last.abs()).max(1.0);
            best_err = best_err.min(est / scale);
            if est / scale < tol {
                return Ok(hp::with_precision(last, p));
            }
        }
        rows.push(row);
    }
    Err(Error::ExtrapolationNotConverged { achieved: format!("{best_err:.3e}") })
}

/// The assembled constants of the explicit asymptotic formula
/// `c_n ~ kappa1 y^n n^(-(r+2)/(2(r+1))) exp(kappa2 n^(r/(r+1)))`.
#[derive(Debug, Clone)]
pub struct ClosedFormConstants {
    pub kind: Kind,
    pub kappa1: BigFloat,
    pub kappa2: BigFloat,
    pub y: f64,
    pub r: f64,
    /// `r/(r+1)`, the exponent of `n` inside the exponential.
    pub exponent_poly: f64,
    /// `-(r+2)/(2(r+1))`, the exponent of the power-law factor.
    pub exponent_power: f64,
    pub provenance: ConstantsProvenance,
    pub precision_bits: usize,
}

/// The pieces `kappa1` was assembled from, kept for inspection.
#[derive(Debug, Clone)]
pub struct ConstantsProvenance {
    /// `C_{r-1}` (Poisson-summation constant).
    pub c_rm1: BigFloat,
    /// `sum_j y^-j (a_j - K j^(r-1))`.
    pub s1: BigFloat,
    /// `sum_j sum_{k>=2} (+-1)^(k+1) a_j y^(-jk) / k`.
    pub s2: BigFloat,
    /// Variance scale: `B_n^2 ~ b_bar n^((r+2)/(r+1))`.
    pub b_bar: BigFloat,
    /// `D_r = (1/r) (K Gamma(r+1))^(1/(r+1))`; `kappa2 = D_r + r D_r`.
    pub d_r: BigFloat,
}

/// Assembles `kappa1`, `kappa2` for a sequence with declared
/// `(K, r, y, nu)` metadata and `y > 1`:
///
/// ```text
/// kappa1 = (2 pi b_bar)^(-1/2) exp(K C_{r-1} + S1 + S2)
/// b_bar  = K^(-1/(r+1)) Gamma(r+1)^(-(r+2)/(r+1)) Gamma(r+2)
/// ```
///
/// For selections, `S2` carries the alternating signs of `log(1+u)` in
/// place of `-log(1-u)`; everything else is unchanged (same `kappa2`).
pub fn closed_form_constants(
    seq: &ComponentSequence,
    kind: Kind,
    p: usize,
) -> Result<ClosedFormConstants> {
    let params = seq.declared_params().ok_or(Error::NotExpansive)?.clone();
    if params.nu.is_none() {
        return Err(Error::NotExpansive);
    }
    if params.y <= 1.0 {
        return Err(Error::YEqualsOne(params.y));
    }
    let (big_k, r, y, nu) = (params.big_k, params.r, params.y, params.nu.unwrap());
    let wp = p + 32;

    let k2 = kappa2(big_k, r, wp);
    let g_r1 = special_gamma(r + 1.0, wp);
    let g_r2 = special_gamma(r + 2.0, wp);
    let kf = hp::from_f64(big_k, wp);
    // b_bar = K^(-1/(r+1)) Gamma(r+1)^(-(r+2)/(r+1)) Gamma(r+2)
    let b_bar = hp::pow(&kf, &hp::from_f64(-1.0 / (r + 1.0), wp), wp)
        .mul(&hp::pow(&g_r1, &hp::from_f64(-(r + 2.0) / (r + 1.0), wp), wp), wp, RM)
        .mul(&g_r2, wp, RM);
    // D_r = (1/r)(K Gamma(r+1))^(1/(r+1))
    let d_r = hp::pow(&kf.mul(&g_r1, wp, RM), &hp::from_f64(1.0 / (r + 1.0), wp), wp)
        .div(&hp::from_f64(r, wp), wp, RM);
    let c_rm1 = poisson_constant_c(r - 1.0, wp)?;

    let tol_log2 = -(special::target_digits(p) + 4.0) * std::f64::consts::LOG2_10;
    let s1 = series_s1(seq, big_k, r, y, nu, wp, tol_log2)?;
    let s2 = series_s2(seq, y, kind, wp, tol_log2)?;

    // kappa1 = (2 pi b_bar)^(-1/2) exp(K C_{r-1} + S1 + S2)
    let two_pi_b = hp::pi(wp).mul(&hp::from_u64(2, wp), wp, RM).mul(&b_bar, wp, RM);
    let expo = kf.mul(&c_rm1, wp, RM).add(&s1, wp, RM).add(&s2, wp, RM);
    let kappa1 =
        hp::exp(&expo, wp).div(&hp::sqrt(&two_pi_b, wp), wp, RM);

    Ok(ClosedFormConstants {
        kind,
        kappa1: hp::with_precision(&kappa1, p),
        kappa2: hp::with_precision(&k2, p),
        y,
        r,
        exponent_poly: r / (r + 1.0),
        exponent_power: -(r + 2.0) / (2.0 * (r + 1.0)),
        provenance: ConstantsProvenance {
            c_rm1: hp::with_precision(&c_rm1, p),
            s1: hp::with_precision(&s1, p),
            s2: hp::with_precision(&s2, p),
            b_bar: hp::with_precision(&b_bar, p),
            d_r: hp::with_precision(&d_r, p),
        },
        precision_bits: p,
    })
}

/// `S1 = sum_{j>=1} (a_j y^-j - K j^(r-1))`; the summand is
/// `O(y^-(1-nu) j)` by the declared error term, so the tail is geometric.
fn series_s1(
    seq: &ComponentSequence,
    big_k: f64,
    r: f64,
    y: f64,
    nu: f64,
    wp: usize,
    tol_log2: f64,
) -> Result<BigFloat> {
    let yf = hp::from_f64(y, wp);
    let kf = hp::from_f64(big_k, wp);
    let rm1 = hp::from_f64(r - 1.0, wp);
    let mut ypow = hp::one(wp);
    let mut sum = hp::zero();
    let mut terms = seq.float_terms(wp);
    let mut small_streak = 0;
    // tail after j0 is bounded by a geometric series with this ratio
    let ratio = y.powf(-(1.0 - nu));
    let ratio_margin = (1.0 - ratio).log2();
    for j in 1..4096u64 {
        ypow = ypow.mul(&yf, wp, RM);
        let a = terms.next_term()?;
        let jr = if r == 1.0 {
            hp::one(wp)
        } else {
            hp::pow(&hp::from_u64(j, wp), &rm1, wp)
        };
        let term = a.div(&ypow, wp, RM).sub(&kf.mul(&jr, wp, RM), wp, RM);
        sum = sum.add(&term, wp, RM);
        let small = hp::log2_approx(&term.abs())
            < tol_log2 + ratio_margin + hp::log2_approx(&sum.abs()).max(0.0);
        small_streak = if small { small_streak + 1 } else { 0 };
        if j >= 16 && small_streak >= 8 {
            return Ok(sum);
        }
    }
    Err(Error::ExtrapolationNotConverged {
        achieved: "S1 series did not settle within 4096 terms".into(),
    })
}

/// `S2 = sum_j a_j sum_{k>=2} (+-1)^(k+1) (y^-j)^k / k` (all signs positive
/// for multisets; alternating for selections).
fn series_s2(
    seq: &ComponentSequence,
    y: f64,
    kind: Kind,
    wp: usize,
    tol_log2: f64,
) -> Result<BigFloat> {
    let yf = hp::from_f64(y, wp);
    let mut ypow = hp::one(wp); // y^-j via division
    let mut sum = hp::zero();
    let mut terms = seq.float_terms(wp);
    let mut small_streak = 0;
    for j in 1..4096u64 {
        ypow = ypow.div(&yf, wp, RM);
        let a = terms.next_term()?;
        if a.is_zero() {
            small_streak += 1;
            if j >= 16 && small_streak >= 8 {
                break;
            }
            continue;
        }
        // inner: sum_{k>=2} (+-)^{k+1} u^k / k, u = y^-j
        let mut inner = hp::zero();
        let mut upow = ypow.clone(); // u^k starting at k=1
        for k in 2u64.. {
            upow = upow.mul(&ypow, wp, RM);
            let mut t = upow.div(&hp::from_u64(k, wp), wp, RM);
            if kind == Kind::Selection && k % 2 == 0 {
                t = t.neg();
            }
            inner = inner.add(&t, wp, RM);
            if hp::log2_approx(&t) < hp::log2_approx(&inner) - (wp as f64 + 16.0) {
                break;
            }
        }
        let term = a.mul(&inner, wp, RM);
        sum = sum.add(&term, wp, RM);
        let small =
            hp::log2_approx(&term.abs()) < tol_log2 + hp::log2_approx(&sum.abs()).max(0.0) - 2.0;
        small_streak = if small { small_streak + 1 } else { 0 };
        if j >= 16 && small_streak >= 8 {
            break;
        }
    }
    Ok(sum)
}

/// Evaluates the closed form at `n`:
/// `log kappa1 + n log y + exponent_power * log n + kappa2 n^(r/(r+1))`.
pub fn closed_form_estimate(constants: &ClosedFormConstants, y: f64, n: u64) -> LogValue {
    let p = constants.precision_bits;
    let wp = p + 32;
    let nf = hp::from_u64(n, wp);
    let ln_n = hp::ln(&nf, wp);
    let ln_y = hp::ln(&hp::from_f64(y, wp), wp);
    let poly = hp::pow(&nf, &hp::from_f64(constants.exponent_poly, wp), wp);
    let log = hp::ln(&constants.kappa1, wp)
        .add(&nf.mul(&ln_y, wp, RM), wp, RM)
        .add(&hp::from_f64(constants.exponent_power, wp).mul(&ln_n, wp, RM), wp, RM)
        .add(&hp::with_precision(&constants.kappa2, wp).mul(&poly, wp, RM), wp, RM);
    LogValue { log_e: hp::with_precision(&log, p) }
}

/// Hardy-Ramanujan estimate for integer partitions:
/// `log p(n) ~ C sqrt(n) - log(4 n sqrt 3)`, `C = pi sqrt(2/3)`.
pub fn hardy_ramanujan(n: u64, p: usize) -> LogValue {
    assert!(n >= 1);
    let wp = p + 32;
    let c = hp::pi(wp).mul(
        &hp::sqrt(&hp::from_u64(2, wp).div(&hp::from_u64(3, wp), wp, RM), wp),
        wp,
        RM,
    );
    let nf = hp::from_u64(n, wp);
    let sqrt3 = hp::sqrt(&hp::from_u64(3, wp), wp);
    let log = c
        .mul(&hp::sqrt(&nf, wp), wp, RM)
        .sub(&hp::ln(&nf.mul(&sqrt3, wp, RM).mul(&hp::from_u64(4, wp), wp, RM), wp), wp, RM);
    LogValue { log_e: hp::with_precision(&log, p) }
}
