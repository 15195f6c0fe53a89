//! The saddle equation, moment quantities, tilted component distributions,
//! and the exact probabilistic counting identity.
//!
//! For a tilt `sigma > 0`, size-`j` components contribute a lattice random
//! variable `X_j` on `{0, j, 2j, ...}`: `X_j / j` is negative binomial
//! `(a_j, e^{-j sigma})` for multisets and binomial
//! `(a_j, e^{-j sigma} / (1 + e^{-j sigma}))` for selections. With
//! `Y_n = X_1 + ... + X_n` independent, the counts satisfy, for every
//! `sigma > 0`,
//!
//! ```text
//! c_n = e^{n sigma} * prod_{j<=n} (1 - e^{-j sigma})^{-a_j} * P(Y_n = n)
//! ```
//!
//! (with `(1 + e^{-j sigma})^{+a_j}` for selections). The saddle point
//! `sigma_n` is the unique tilt with `E[Y_n] = M_n(sigma) = n`; there the
//! point probability is governed by the local limit law
//! `P(Y_n = n) ~ (2 pi B_n^2)^{-1/2}`.
//!
//! `P(Y_n = n)` is computed by exact dynamic-programming convolution of the
//! tilted lattice distributions restricted to totals `<= n`, which replaces
//! any oscillatory-integral evaluation of the inversion formula.

use astro_float::BigFloat;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::asymptotics::LogValue;
use crate::hp::{self, RM};
use crate::sequences::ComponentSequence;
use crate::{Error, Kind, Result};

/// A solved saddle point together with the moment quantities evaluated
/// there.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub n: u64,
    pub kind: Kind,
    pub sigma: BigFloat,
    /// `sigma - log y` when the sequence declares `y`.
    pub delta: Option<BigFloat>,
    /// `M_n(sigma) - n` at the returned `sigma`.
    pub residual: BigFloat,
    pub b2: BigFloat,
    /// Requested higher cumulant sums `rho_l`, keyed by `l`.
    pub rho: Vec<(u32, BigFloat)>,
    pub precision_bits: usize,
}

impl SaddleSolution {
    pub fn to_json(&self) -> serde_json::Value {
        let rho: serde_json::Map<String, serde_json::Value> = self
            .rho
            .iter()
            .map(|(l, v)| (l.to_string(), serde_json::Value::String(hp::format_dec(v))))
            .collect();
        serde_json::json!({
            "schema_version": 1,
            "n": self.n,
            "kind": self.kind.as_str(),
            "sigma": hp::format_dec(&self.sigma),
            "delta": self.delta.as_ref().map(hp::format_dec),
            "residual": hp::format_dec(&self.residual),
            "B2": hp::format_dec(&self.b2),
            "rho": rho,
            "precision_bits": self.precision_bits,
        })
    }
}

/// Residual tolerance for the saddle equation: `n * 2^-(p/2 + 2)`
/// (about `n * 1e-20` at 128 bits, scaling with the precision).
fn residual_tolerance(n: u64, p: usize) -> BigFloat {
    let two_pow = hp::from_u64(2, p).powi(p / 2 + 2, p, RM);
    hp::from_u64(n, p).div(&two_pow, p, RM)
}

/// Tail-truncation bookkeeping for sums over `j` of positive terms with a
/// `j^l`-weighted sequence factor: from the envelope of
/// [`ComponentSequence::growth_bound`], terms `i` past the current one are
/// at most `prefactor * t_j * (ratio * q)^i * ((j+i)/j)^(l + poly_degree)`.
struct TailGuard {
    /// `ratio * q` in f64 (upper estimate), or `None` when no bound is known
    gq: Option<f64>,
    degree: i32,
    prefactor_log2: f64,
    window_max_log2: f64,
    countdown: u32,
}

const TAIL_WINDOW: u32 = 16;

impl TailGuard {
    fn new(seq: &ComponentSequence, q: &BigFloat, l: i32) -> Self {
        let (gq, degree, prefactor_log2) = match seq.growth_bound() {
            Some(b) => {
                (Some(b.ratio * hp::to_f64(q) * 1.000001), l + b.poly_degree, b.prefactor.log2())
            }
            None => (None, l, 0.0),
        };
        TailGuard { gq, degree, prefactor_log2, window_max_log2: f64::NEG_INFINITY, countdown: TAIL_WINDOW }
    }

    /// Records the term for size `j`; returns true when the remaining tail
    /// is provably below `2^-(p+40)` of the accumulated sum.
    fn done(&mut self, j: u64, term_log2: f64, accum_log2: f64, p: usize) -> bool {
        self.window_max_log2 = self.window_max_log2.max(term_log2);
        self.countdown -= 1;
        if self.countdown > 0 {
            return false;
        }
        self.countdown = TAIL_WINDOW;
        let wmax = self.window_max_log2;
        self.window_max_log2 = f64::NEG_INFINITY;
        let Some(gq) = self.gq else { return false };
        if j < 2 * TAIL_WINDOW as u64 || accum_log2 == f64::NEG_INFINITY {
            return false;
        }
        // ((j+i)/j)^d <= (1+1/j)^(i d), so the polynomial drift folds into
        // a slightly larger geometric ratio
        let er = gq * (1.0 + 1.0 / j as f64).powi(self.degree.max(0));
        if er.is_nan() || er >= 1.0 - 1e-9 {
            return false;
        }
        // future terms <= prefactor * wmax * er^i
        let tail_log2 = wmax + self.prefactor_log2 + (er / (1.0 - er)).log2();
        tail_log2 < accum_log2 - (p as f64 + 40.0)
    }
}

/// One pass over `j = 1..=n` accumulating the mean `M_n(sigma)` and, when
/// requested, the variance `B_n^2(sigma)`.
fn mean_var_sum(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    p: usize,
    want_var: bool,
) -> Result<(BigFloat, BigFloat)> {
    assert!(!sigma.is_negative() && !sigma.is_zero(), "tilt must be positive");
    let one = hp::one(p);
    let q = hp::exp(&sigma.neg(), p);
    let mut qj = one.clone();
    let mut mean = hp::zero();
    let mut var = hp::zero();
    let mut guard = TailGuard::new(seq, &q, 2);
    let mut terms = seq.float_terms(p);
    let j_end = seq.support_end().unwrap_or(n).min(n);
    for j in 1..=j_end {
        qj = qj.mul(&q, p, RM);
        let a = terms.next_term()?;
        if a.is_zero() {
            continue;
        }
        let ja = a.mul(&hp::from_u64(j, p), p, RM);
        // for e^{-j sigma} below working precision, 1/(1 -+ e^{-j sigma})
        // rounds to 1
        let inv = if hp::log2_approx(&qj) < -(p as f64 + 8.0) {
            one.clone()
        } else {
            let d = match kind {
                Kind::Multiset => one.sub(&qj, p, RM),
                Kind::Selection => one.add(&qj, p, RM),
            };
            one.div(&d, p, RM)
        };
        let t1 = ja.mul(&qj, p, RM).mul(&inv, p, RM);
        mean = mean.add(&t1, p, RM);
        let mut tmax = hp::log2_approx(&t1);
        if want_var {
            let t2 = t1.mul(&hp::from_u64(j, p), p, RM).mul(&inv, p, RM);
            var = var.add(&t2, p, RM);
            tmax = tmax.max(hp::log2_approx(&t2));
        }
        if guard.done(j, tmax, hp::log2_approx(&mean), p) {
            break;
        }
    }
    Ok((mean, var))
}

/// Expected total size `M_n(sigma) = sum_{j<=n} j a_j e^{-j sigma} / (1 -+ e^{-j sigma})`
/// (`-` for multisets, `+` for selections). Strictly decreasing in `sigma`.
pub fn mean_m(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    p: usize,
) -> Result<BigFloat> {
    Ok(mean_var_sum(seq, n, sigma, kind, p, false)?.0)
}

/// Variance `B_n^2(sigma) = sum_{j<=n} j^2 a_j e^{-j sigma} / (1 -+ e^{-j sigma})^2`.
pub fn variance_b2(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    p: usize,
) -> Result<BigFloat> {
    Ok(mean_var_sum(seq, n, sigma, kind, p, true)?.1)
}

/// Higher cumulant sum `rho_l = sum_{j<=n} j^l a_j sum_{k>=1} k^{l-1} e^{-jk sigma}`.
///
/// The inner sum is truncated once the next term drops below 1e-30 of the
/// partial sum (terms are positive and eventually geometric).
pub fn rho_l(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    l: u32,
    p: usize,
) -> Result<BigFloat> {
    assert!(l >= 3, "rho_l is defined for l >= 3");
    assert!(!sigma.is_negative() && !sigma.is_zero());
    let q = hp::exp(&sigma.neg(), p);
    let mut qj = hp::one(p);
    let mut total = hp::zero();
    let mut guard = TailGuard::new(seq, &q, l as i32);
    let mut terms = seq.float_terms(p);
    let j_end = seq.support_end().unwrap_or(n).min(n);
    let inner_tol_log2 = -30.0 * std::f64::consts::LOG2_10;
    for j in 1..=j_end {
        qj = qj.mul(&q, p, RM);
        let a = terms.next_term()?;
        if a.is_zero() {
            continue;
        }
        // inner sum over k of k^{l-1} (q^j)^k
        let mut inner = hp::zero();
        let mut qjk = hp::one(p);
        let mut prev_log2 = f64::INFINITY;
        for k in 1u64.. {
            qjk = qjk.mul(&qj, p, RM);
            let term = qjk.mul(&int_pow(k, l - 1, p), p, RM);
            inner = inner.add(&term, p, RM);
            let t = hp::log2_approx(&term);
            if t <= prev_log2 && t < hp::log2_approx(&inner) + inner_tol_log2 {
                break;
            }
            prev_log2 = t;
        }
        let weight = a.mul(&int_pow(j, l, p), p, RM);
        let t = weight.mul(&inner, p, RM);
        total = total.add(&t, p, RM);
        if guard.done(j, hp::log2_approx(&t), hp::log2_approx(&total), p) {
            break;
        }
    }
    Ok(total)
}

/// `v^e` as a float.
fn int_pow(v: u64, e: u32, p: usize) -> BigFloat {
    if e as f64 * ((v.max(1)) as f64).log2() < 126.0 {
        BigFloat::from_u128((v as u128).pow(e), p)
    } else {
        hp::from_u64(v, p).powi(e as usize, p, RM)
    }
}

/// Solves `M_n(sigma) = n` for the unique positive tilt.
///
/// Bracketing and bisection run at reduced precision; a safeguarded Newton
/// polish (using `dM/dsigma = -B^2`) reaches the final tolerance
/// `|M - n| <= n * 2^-(p/2+2)` at full precision.
pub fn solve_saddle(
    seq: &ComponentSequence,
    n: u64,
    kind: Kind,
    precision_bits: usize,
    rho_orders: &[u32],
) -> Result<SaddleSolution> {
    assert!(n >= 1);
    let p = precision_bits;
    let wp = p + 32;

    feasibility_check(seq, n, kind)?;

    // initial guess: log y + (K Gamma(r+1) / n)^(1/(r+1)), else 1/n
    let params = seq.declared_params();
    let sigma0 = match params {
        Some(q) => {
            let g = crate::asymptotics::special_gamma_f64(q.r + 1.0);
            q.y.ln() + (q.big_k * g / n as f64).powf(1.0 / (q.r + 1.0))
        }
        None => 1.0 / n as f64,
    };
    let sigma0 = if sigma0.is_finite() && sigma0 > 0.0 { sigma0 } else { 1.0 / n as f64 };

    // bracket [lo, hi] with M(lo) >= n >= M(hi), expanding geometrically
    let pb = wp.min(96);
    let nf = hp::from_u64(n, wp);
    let two = hp::from_u64(2, wp);
    let mut lo = hp::from_f64(sigma0, wp);
    let mut hi = lo.clone();
    let mut expansions = 0;
    while hp::lt(&mean_m(seq, n, &lo, kind, pb)?, &nf) {
        lo = lo.div(&two, wp, RM);
        expansions += 1;
        if expansions > 400 {
            return Err(Error::NoSaddle(format!(
                "mean stays below n = {n} as sigma -> 0 (selection near feasibility boundary?)"
            )));
        }
    }
    while hp::gt(&mean_m(seq, n, &hi, kind, pb)?, &nf) {
        hi = hi.mul(&two, wp, RM);
        expansions += 1;
        if expansions > 400 {
            return Err(Error::NoSaddle(format!("mean stays above n = {n} as sigma grows")));
        }
    }

    // bisection until the bracket is ~2^-24 relative, Newton from there
    for _ in 0..200 {
        let width = hi.sub(&lo, wp, RM);
        let rel = hp::log2_approx(&width) - hp::log2_approx(&lo);
        if rel < -24.0 {
            break;
        }
        let mid = lo.add(&hi, wp, RM).div(&two, wp, RM);
        if hp::lt(&mean_m(seq, n, &mid, kind, pb)?, &nf) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let tol = residual_tolerance(n, wp);
    let mut sigma = lo.add(&hi, wp, RM).div(&two, wp, RM);
    let mut best: Option<(BigFloat, BigFloat, BigFloat)> = None; // (sigma, residual, b2)
    let mut stalls = 0;
    for _ in 0..60 {
        let (m, b2) = mean_var_sum(seq, n, &sigma, kind, wp, true)?;
        if b2.is_zero() {
            return Err(Error::NoSaddle("variance vanished during Newton polish".into()));
        }
        let res = m.sub(&nf, wp, RM);
        let improved = match &best {
            Some((_, r, _)) => hp::lt(&res.abs(), &r.abs()),
            None => true,
        };
        if improved {
            best = Some((sigma.clone(), res.clone(), b2.clone()));
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break; // converged to the precision floor
            }
        }
        if hp::le(&res.abs(), &tol) {
            break;
        }
        // M decreasing: sigma <- sigma + (M - n)/B^2
        let step = res.div(&b2, wp, RM);
        let next = sigma.add(&step, wp, RM);
        sigma = if next.is_negative() || next.is_zero() {
            sigma.div(&two, wp, RM)
        } else {
            next
        };
    }
    let (sigma, residual, b2) = best.expect("at least one Newton evaluation");
    if hp::gt(&residual.abs(), &tol) {
        return Err(Error::PrecisionExhausted { bits: p, achieved: hp::format_dec(&residual) });
    }

    let mut rho = Vec::new();
    for &l in rho_orders {
        rho.push((l, hp::with_precision(&rho_l(seq, n, &sigma, l, wp)?, p)));
    }
    let delta = params.map(|q| {
        let lny = hp::ln(&hp::from_f64(q.y, wp), wp);
        hp::with_precision(&sigma.sub(&lny, wp, RM), p)
    });
    Ok(SaddleSolution {
        n,
        kind,
        sigma: hp::with_precision(&sigma, p),
        delta,
        residual: hp::with_precision(&residual, p),
        b2: hp::with_precision(&b2, p),
        rho,
        precision_bits: p,
    })
}

/// Multiset: some `a_j > 0` for `j <= n`. Selection: additionally
/// `sum_{j<=n} j a_j > 2n` (the supremum of the tilted mean must exceed n).
fn feasibility_check(seq: &ComponentSequence, n: u64, kind: Kind) -> Result<()> {
    let bound = BigUint::from(2 * n);
    let mut weighted = BigUint::zero();
    let j_end = seq.support_end().unwrap_or(n).min(n);
    for j in 1..=j_end {
        let a = seq.eval(j)?;
        if a.is_zero() {
            continue;
        }
        match kind {
            Kind::Multiset => return Ok(()),
            Kind::Selection => {
                weighted += a * j;
                if weighted > bound {
                    return Ok(());
                }
            }
        }
    }
    match kind {
        Kind::Multiset => {
            Err(Error::NoSaddle(format!("all a_j vanish for j <= {n}; the mean is identically 0")))
        }
        Kind::Selection => Err(Error::NoSaddle(format!(
            "selection requires sum of j a_j over j <= n to exceed 2n = {}, got {weighted}",
            2 * n
        ))),
    }
}

/// The lattice distribution of one tilted component-count variable `X_j`,
/// truncated at total size `cutoff`.
#[derive(Debug, Clone)]
pub struct TiltedDistribution {
    pub j: u64,
    /// `pmf[l] = P(X_j = j*l)`.
    pub pmf: Vec<BigFloat>,
    /// Probability mass beyond the cutoff: `1 - sum(pmf)`.
    pub mass_deficit: BigFloat,
}

impl TiltedDistribution {
    /// The lattice points `0, j, 2j, ...` carrying the stored mass.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.pmf.len() as u64).map(move |l| l * self.j)
    }
}

/// PMF of `X_j` at tilt `sigma`.
///
/// Multiset (negative binomial on the lattice):
/// `P(X_j = jl) = C(a_j + l - 1, l) (1 - e^{-j sigma})^{a_j} e^{-l j sigma}`,
/// evaluated by the stable ratio recurrence
/// `p_{l+1} = p_l * e^{-j sigma} (a_j + l) / (l + 1)`.
/// Selection: binomial with success probability
/// `e^{-j sigma} / (1 + e^{-j sigma})` and at most `a_j + 1` atoms.
pub fn tilted_pmf(
    seq: &ComponentSequence,
    j: u64,
    sigma: &BigFloat,
    kind: Kind,
    cutoff: u64,
    p: usize,
) -> Result<TiltedDistribution> {
    assert!(!sigma.is_negative() && !sigma.is_zero());
    let a = seq.eval(j)?;
    if a.is_zero() {
        return Ok(TiltedDistribution {
            j,
            pmf: vec![hp::one(p)],
            mass_deficit: hp::zero(),
        });
    }
    let af = hp::with_precision(&hp::from_biguint(&a), p);
    let qj = hp::exp(&sigma.mul(&hp::from_u64(j, p), p, RM).neg(), p);
    let l_max = cutoff / j;
    // ln(1 -+ q^j) must keep its accuracy even when q^j is far below one
    // ulp of 1: the normalization (1 -+ q^j)^(-+a_j) carries mass a_j q^j,
    // which stays macroscopic for y > 1 however small q^j gets
    let (p0, l_stop) = match kind {
        Kind::Multiset => (hp::exp(&af.mul(&hp::ln_1m(&qj, p), p, RM), p), l_max),
        Kind::Selection => {
            let p0 = hp::exp(&af.mul(&hp::ln_1p(&qj, p), p, RM).neg(), p);
            let atoms = if a <= BigUint::from(l_max) {
                use num_traits::ToPrimitive;
                a.to_u64().unwrap()
            } else {
                l_max
            };
            (p0, atoms)
        }
    };
    let mut pmf = Vec::with_capacity(l_stop as usize + 1);
    let mut mass = p0.clone();
    pmf.push(p0);
    for l in 0..l_stop {
        let lf = hp::from_u64(l, p);
        let factor = match kind {
            Kind::Multiset => af.add(&lf, p, RM),
            Kind::Selection => af.sub(&lf, p, RM),
        };
        let next = pmf[l as usize]
            .mul(&qj, p, RM)
            .mul(&factor, p, RM)
            .div(&hp::from_u64(l + 1, p), p, RM);
        mass = mass.add(&next, p, RM);
        pmf.push(next);
    }
    Ok(TiltedDistribution { j, pmf, mass_deficit: hp::one(p).sub(&mass, p, RM) })
}

/// `P(Y_n = n)` by exact convolution of the `n` tilted PMFs over the states
/// `0..=n` (larger partial totals cannot reach `n` again).
///
/// Components whose entire non-zero mass is below `10^(-0.3 p)` contribute
/// only their `l = 0` atom, renormalized to probability one; the skipped
/// mass is accumulated and must stay below 1e-20 in total.
pub fn exact_point_prob(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    p: usize,
) -> Result<BigFloat> {
    assert!(!sigma.is_negative() && !sigma.is_zero());
    let skip_log2 = -0.3 * p as f64 * std::f64::consts::LOG2_10;
    let mut dist = vec![hp::zero(); n as usize + 1];
    dist[0] = hp::one(p);
    let mut scratch = vec![hp::zero(); n as usize + 1];
    let mut deficit = 0f64;
    let j_end = seq.support_end().unwrap_or(n).min(n);
    for j in 1..=j_end {
        let a = seq.eval(j)?;
        if a.is_zero() {
            continue;
        }
        // dropping all l >= 1 atoms loses at most a_j q^j (1 + q^j) mass;
        // estimate its log2 cheaply to decide whether to skip
        let aj_log2 = a.bits() as f64;
        let qj_log2 = -(j as f64) * hp::to_f64(sigma) * std::f64::consts::LOG2_E;
        if aj_log2 + qj_log2 + 1.0 < skip_log2 {
            deficit += 2f64.powf(aj_log2 + qj_log2 + 1.0);
            continue;
        }
        let td = tilted_pmf(seq, j, sigma, kind, n, p)?;
        // convolve dist with the atoms {0, j, 2j, ...}; selections carry
        // at most a_j + 1 atoms
        for t in 0..=n as usize {
            let mut acc = hp::zero();
            let mut l = 0usize;
            while l * (j as usize) <= t && l < td.pmf.len() {
                let pl = &td.pmf[l];
                if !pl.is_zero() {
                    let prev = &dist[t - l * j as usize];
                    if !prev.is_zero() {
                        acc = acc.add(&pl.mul(prev, p, RM), p, RM);
                    }
                }
                l += 1;
            }
            scratch[t] = acc;
        }
        std::mem::swap(&mut dist, &mut scratch);
    }
    assert!(deficit < 1e-20, "skipped tilted mass exceeded the 1e-20 budget");
    Ok(dist[n as usize].clone())
}

/// Rebuilds `log c_n` through the tilted identity at an arbitrary tilt:
/// `n sigma + sum_j (-+ a_j) log(1 -+ e^{-j sigma}) + log P(Y_n = n)`.
/// The result is independent of `sigma`, which is what makes it a powerful
/// end-to-end check of the whole tilted machinery.
pub fn khintchine_reconstruct(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    precision_bits: usize,
) -> Result<LogValue> {
    let mut p = precision_bits;
    loop {
        let wp = p + 32;
        let s = log_weight_sum(seq, n, sigma, kind, wp)?;
        // terms are all positive, so the sum's magnitude (not cancellation)
        // is what limits the fractional bits left; escalate when it eats
        // into the precision budget
        if hp::log2_approx(&s) > (p as f64) - 20.0 && p < 1 << 14 {
            p *= 2;
            continue;
        }
        let prob = exact_point_prob(seq, n, sigma, kind, wp)?;
        if prob.is_zero() {
            return Ok(LogValue { log_e: astro_float::INF_NEG });
        }
        let ns = sigma.mul(&hp::from_u64(n, wp), wp, RM);
        let log = ns.add(&s, wp, RM).add(&hp::ln(&prob, wp), wp, RM);
        return Ok(LogValue { log_e: hp::with_precision(&log, precision_bits.max(p)) });
    }
}

/// `sum_{j<=n} (-+ a_j) log(1 -+ e^{-j sigma})`, the log of the product
/// factor of the identity (positive for both kinds).
pub(crate) fn log_weight_sum(
    seq: &ComponentSequence,
    n: u64,
    sigma: &BigFloat,
    kind: Kind,
    p: usize,
) -> Result<BigFloat> {
    assert!(!sigma.is_negative() && !sigma.is_zero());
    let q = hp::exp(&sigma.neg(), p);
    let mut qj = hp::one(p);
    let mut sum = hp::zero();
    let mut guard = TailGuard::new(seq, &q, 0);
    let j_end = seq.support_end().unwrap_or(n).min(n);
    for j in 1..=j_end {
        qj = qj.mul(&q, p, RM);
        let a = hp::with_precision(&hp::from_biguint(&seq.eval(j)?), p);
        if a.is_zero() {
            continue;
        }
        // -a ln_1m and +a ln_1p are both in [a u (1 - u), 2 a u]; the
        // accurate log keeps terms with a_j q^j macroscopic even when q^j
        // is below one ulp of 1
        let term = match kind {
            Kind::Multiset => a.mul(&hp::ln_1m(&qj, p), p, RM).neg(),
            Kind::Selection => a.mul(&hp::ln_1p(&qj, p), p, RM),
        };
        sum = sum.add(&term, p, RM);
        if guard.done(j, hp::log2_approx(&term), hp::log2_approx(&sum), p) {
            break;
        }
    }
    Ok(sum)
}
