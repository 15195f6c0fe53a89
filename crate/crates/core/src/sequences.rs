//! Component-count sequences `a_j` and their expansive metadata.
//!
//! A sequence assigns to every component size `j >= 1` the number `a_j` of
//! distinct component types of that size. The built-in families cover the
//! classical cases (integer partitions `a_j = 1`, plane partitions
//! `a_j = j`, k-colored linear forests `a_j = k^j`, ...) plus arbitrary
//! explicit/callback-defined sequences.
//!
//! Exact evaluation returns big integers and is memoized (the divisor-sum
//! recurrences in [`crate::exact`] re-read `a_j` heavily). Saddle-point
//! kernels instead consume [`FloatTerms`], which streams `a_1, a_2, ...` as
//! arbitrary-precision floats in O(1) operations per step so that sums with
//! `n` up to `10^6` terms stay affordable.

use std::fmt;
use std::sync::{Arc, RwLock};

use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::hp::{self, RM};
use crate::{Error, Result};

/// Callback type for user-supplied sequences. Values must be nonnegative;
/// negative returns are reported as [`Error::InvalidSequenceValue`].
pub type SeqFn = Arc<dyn Fn(u64) -> BigInt + Send + Sync>;

/// The built-in and user-supplied families.
#[derive(Clone)]
pub enum Family {
    /// `a_j = c`
    Constant(u64),
    /// `a_j = round(K * j^(r-1) * y^j)`
    PowerExp { big_k: f64, r: f64, y: f64 },
    /// `a_j = 1` (integer partitions)
    Partitions,
    /// `a_j = j` (plane partitions)
    PlanePartitions,
    /// `a_j = k^j` (k-colored linear forests)
    ColoredForests(u64),
    /// `a_j = C(j, floor(j/2))`
    CentralBinomial,
    /// `a_j = C(m, floor(m/2)) * k^(j-m)` with `m = floor(j^alpha)`
    /// (two-colored lollipop graphs when `k = 2`)
    Lollipop { alpha: f64, k: u64 },
    /// `a_j = k^j` for even `j`, `k^(j-1)` for odd `j`
    ParityColored(u64),
    /// `a_j = list[j-1]`, zero beyond the list
    Explicit(Vec<BigUint>),
    /// `a_j = f(j)`
    Custom(SeqFn),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Constant(c) => write!(f, "Constant({c})"),
            Family::PowerExp { big_k, r, y } => {
                write!(f, "PowerExp {{ K: {big_k}, r: {r}, y: {y} }}")
            }
            Family::Partitions => write!(f, "Partitions"),
            Family::PlanePartitions => write!(f, "PlanePartitions"),
            Family::ColoredForests(k) => write!(f, "ColoredForests({k})"),
            Family::CentralBinomial => write!(f, "CentralBinomial"),
            Family::Lollipop { alpha, k } => write!(f, "Lollipop {{ alpha: {alpha}, k: {k} }}"),
            Family::ParityColored(k) => write!(f, "ParityColored({k})"),
            Family::Explicit(v) => write!(f, "Explicit({} terms)", v.len()),
            Family::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Expansive metadata: `a_j ~ K * j^(r-1) * y^j`, with optional error-term
/// exponent `nu` (meaning `a_j = K j^(r-1) y^j + O(y^(nu j))`) and optional
/// oscillation band exponents `r1 <= r2` for families that are only pinched
/// between `j^(r1-1) y^j` and `j^(r2-1) y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansiveParams {
    pub big_k: f64,
    pub r: f64,
    pub y: f64,
    pub nu: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

impl ExpansiveParams {
    pub fn new(big_k: f64, r: f64, y: f64) -> Result<Self> {
        if big_k <= 0.0 || r <= 0.0 || y < 1.0 || big_k.is_nan() || r.is_nan() || y.is_nan() {
            return Err(Error::InvalidFamilyParams(format!(
                "expansive parameters require K > 0, r > 0, y >= 1 (got K={big_k}, r={r}, y={y})"
            )));
        }
        Ok(ExpansiveParams { big_k, r, y, nu: None, r1: None, r2: None })
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidFamilyParams(format!("nu must lie in (0,1), got {nu}")));
        }
        self.nu = Some(nu);
        Ok(self)
    }

    pub fn with_band(mut self, r1: f64, r2: f64) -> Result<Self> {
        if !(0.0 < r1 && r1 <= r2) {
            return Err(Error::InvalidFamilyParams(format!(
                "band exponents require 0 < r1 <= r2 (got r1={r1}, r2={r2})"
            )));
        }
        self.r1 = Some(r1);
        self.r2 = Some(r2);
        Ok(self)
    }
}

/// Tail envelope of a sequence; see [`ComponentSequence::growth_bound`].
#[derive(Debug, Clone, Copy)]
pub struct GrowthBound {
    pub ratio: f64,
    pub poly_degree: i32,
    pub prefactor: f64,
}

/// A component-count sequence. Immutable after construction; the memo cache
/// is internally synchronized, so shared references can be used from
/// multiple threads.
pub struct ComponentSequence {
    family: Family,
    descriptor: String,
    expansive: Option<ExpansiveParams>,
    memo: RwLock<Vec<Option<BigUint>>>,
}

impl fmt::Debug for ComponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentSequence")
            .field("family", &self.family)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

/// Exact binomial coefficient with machine-word arguments.
fn binomial_u64(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl ComponentSequence {
    pub fn new(family: Family) -> Result<Self> {
        let descriptor = default_descriptor(&family);
        Self::with_descriptor(family, descriptor)
    }

    fn with_descriptor(family: Family, descriptor: String) -> Result<Self> {
        validate_family(&family)?;
        let expansive = implied_params(&family);
        Ok(ComponentSequence { family, descriptor, expansive, memo: RwLock::new(Vec::new()) })
    }

    /// Attaches (or overrides) expansive metadata; used for `Explicit` and
    /// `Custom` sequences whose asymptotics the caller knows.
    pub fn with_expansive(mut self, params: ExpansiveParams) -> Self {
        self.expansive = Some(params);
        self
    }

    pub fn partitions() -> Self {
        Self::new(Family::Partitions).expect("parameter-free family")
    }

    pub fn plane_partitions() -> Self {
        Self::new(Family::PlanePartitions).expect("parameter-free family")
    }

    pub fn central_binomial() -> Self {
        Self::new(Family::CentralBinomial).expect("parameter-free family")
    }

    pub fn colored_forests(k: u64) -> Result<Self> {
        Self::new(Family::ColoredForests(k))
    }

    pub fn parity_colored(k: u64) -> Result<Self> {
        Self::new(Family::ParityColored(k))
    }

    pub fn explicit(list: Vec<BigUint>) -> Self {
        Self::new(Family::Explicit(list)).expect("explicit lists are always valid")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Canonical text descriptor (`partitions`, `colored-forests:k=2`, ...).
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// The `(K, r, y, nu)` metadata implied by the family, or attached by
    /// the caller; `None` when nothing is known.
    pub fn declared_params(&self) -> Option<&ExpansiveParams> {
        self.expansive.as_ref()
    }

    /// Smallest `j` beyond which `a_j` is identically zero, if the family
    /// has finite support.
    pub fn support_end(&self) -> Option<u64> {
        match &self.family {
            Family::Explicit(list) => Some(list.len() as u64),
            Family::Constant(0) => Some(0),
            _ => None,
        }
    }

    /// Envelope for tail bounds: `a_{j+i} <= prefactor * a_j * ratio^i *
    /// ((j+i)/j)^poly_degree` for all `j >= 1` with `a_j > 0` and `i >= 1`.
    /// `None` means no bound is known (sums are never truncated).
    pub fn growth_bound(&self) -> Option<GrowthBound> {
        let plain = |ratio: f64| GrowthBound { ratio, poly_degree: 0, prefactor: 1.0 };
        match &self.family {
            Family::Constant(_) | Family::Partitions => Some(plain(1.0)),
            Family::PlanePartitions => {
                Some(GrowthBound { ratio: 1.0, poly_degree: 1, prefactor: 1.0 })
            }
            Family::ColoredForests(k) => Some(plain(*k as f64)),
            Family::CentralBinomial => Some(plain(2.0)),
            // binomial part at most doubles per step, color part contributes k
            Family::Lollipop { k, .. } => Some(plain((*k).max(2) as f64)),
            // a_{j+i}/a_j <= k^(i+1): geometric rate k with one extra factor
            Family::ParityColored(k) => {
                Some(GrowthBound { ratio: *k as f64, poly_degree: 0, prefactor: *k as f64 })
            }
            Family::PowerExp { big_k, r, y } => {
                // if the unrounded envelope K j^(r-1) y^j can dip near the
                // rounding threshold, zero terms may reappear and no ratio
                // bound from a current term is sound
                let j_dip = if *y > 1.0 { ((1.0 - r) / y.ln()).max(1.0) } else { 1.0 };
                let dip = big_k * j_dip.powf(r - 1.0) * y.powf(j_dip);
                let tail_ok = match (*y > 1.0, *r >= 1.0) {
                    (true, _) => dip >= 4.0,
                    (false, true) => true, // monotone in j (up to rounding)
                    (false, false) => true, // nonincreasing; zeros stay zero
                };
                if !tail_ok {
                    return None;
                }
                Some(GrowthBound {
                    ratio: *y,
                    poly_degree: (r - 1.0).max(0.0).ceil() as i32,
                    // integer rounding wobble on top of the envelope
                    prefactor: 4.0,
                })
            }
            Family::Explicit(_) | Family::Custom(_) => None,
        }
    }

    /// Exact value of `a_j` (`j >= 1`). Memoized.
    pub fn eval(&self, j: u64) -> Result<BigUint> {
        assert!(j >= 1, "component sizes start at 1");
        if let Some(idx) = usize::try_from(j - 1).ok().filter(|i| *i < usize::MAX / 2) {
            if let Some(Some(v)) = self.memo.read().unwrap().get(idx) {
                return Ok(v.clone());
            }
            let v = self.eval_uncached(j)?;
            let mut memo = self.memo.write().unwrap();
            if memo.len() <= idx {
                memo.resize(idx + 1, None);
            }
            memo[idx] = Some(v.clone());
            Ok(v)
        } else {
            self.eval_uncached(j)
        }
    }

    fn eval_uncached(&self, j: u64) -> Result<BigUint> {
        Ok(match &self.family {
            Family::Constant(c) => BigUint::from(*c),
            Family::PowerExp { big_k, r, y } => power_exp_exact(*big_k, *r, *y, j),
            Family::Partitions => BigUint::one(),
            Family::PlanePartitions => BigUint::from(j),
            Family::ColoredForests(k) => BigUint::from(*k).pow(j as u32),
            Family::CentralBinomial => binomial_u64(j, j / 2),
            Family::Lollipop { alpha, k } => {
                let m = lollipop_m(j, *alpha);
                binomial_u64(m, m / 2) * BigUint::from(*k).pow((j - m) as u32)
            }
            Family::ParityColored(k) => {
                let e = if j.is_multiple_of(2) { j } else { j - 1 };
                BigUint::from(*k).pow(e as u32)
            }
            Family::Explicit(list) => {
                usize::try_from(j - 1).ok().and_then(|i| list.get(i)).cloned().unwrap_or_default()
            }
            Family::Custom(f) => {
                let v = f(j);
                if v.sign() == num_bigint::Sign::Minus {
                    return Err(Error::InvalidSequenceValue {
                        j,
                        reason: format!("callback returned negative value {v}"),
                    });
                }
                v.magnitude().clone()
            }
        })
    }

    /// Streams `a_1, a_2, ...` as floats at precision `p`.
    pub fn float_terms(&self, p: usize) -> FloatTerms<'_> {
        FloatTerms::new(self, p)
    }
}

/// Size of the tree part of a lollipop component: `floor(j^alpha)`.
fn lollipop_m(j: u64, alpha: f64) -> u64 {
    ((j as f64).powf(alpha).floor() as u64).clamp(1, j)
}

/// `round(K * j^(r-1) * y^j)` computed with enough guard bits that the
/// nearest integer is determined.
fn power_exp_exact(big_k: f64, r: f64, y: f64, j: u64) -> BigUint {
    let bits_estimate = (j as f64) * y.log2() + (r - 1.0).abs() * (j as f64).log2().max(0.0)
        + big_k.log2().abs()
        + 16.0;
    let p = 96 + bits_estimate.max(0.0) as usize;
    let v = power_exp_float(big_k, r, y, j, p);
    hp::to_biguint_nearest(&v).unwrap_or_default()
}

fn power_exp_float(big_k: f64, r: f64, y: f64, j: u64, p: usize) -> BigFloat {
    let jf = hp::from_u64(j, p);
    let ypow = hp::from_f64(y, p).powi(j as usize, p, RM);
    let base = hp::from_f64(big_k, p).mul(&ypow, p, RM);
    if r == 1.0 {
        base
    } else {
        base.mul(&hp::pow(&jf, &hp::from_f64(r - 1.0, p), p), p, RM)
    }
}

fn validate_family(family: &Family) -> Result<()> {
    match family {
        Family::PowerExp { big_k, r, y } => {
            if *big_k <= 0.0 || *r <= 0.0 || *y < 1.0 || big_k.is_nan() || r.is_nan() || y.is_nan() {
                return Err(Error::InvalidFamilyParams(format!(
                    "power-exp requires K > 0, r > 0, y >= 1 (got K={big_k}, r={r}, y={y})"
                )));
            }
        }
        Family::ColoredForests(k) | Family::ParityColored(k) => {
            if *k == 0 {
                return Err(Error::InvalidFamilyParams("k must be >= 1".into()));
            }
        }
        Family::Lollipop { alpha, k } => {
            if !(0.0..=1.0).contains(alpha) {
                return Err(Error::InvalidFamilyParams(format!(
                    "lollipop alpha must lie in [0,1], got {alpha}"
                )));
            }
            if *k == 0 {
                return Err(Error::InvalidFamilyParams("k must be >= 1".into()));
            }
        }
        _ => {}
    }
    Ok(())
}

/// The `(K, r, y)` data each built-in family implies.
///
/// `nu` is set only where the remainder `a_j - K j^(r-1) y^j` really is
/// `O(y^(nu j))`: exact families (remainder zero) and rounded power-exp
/// families (remainder `O(1)`). Central-binomial and lollipop families have
/// polynomially decaying relative corrections, which satisfy the two-sided
/// bound but not the `O(y^(nu j))` error term, so they get `nu = None`.
fn implied_params(family: &Family) -> Option<ExpansiveParams> {
    let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    match family {
        Family::Constant(c) if *c > 0 => {
            Some(ExpansiveParams::new(*c as f64, 1.0, 1.0).unwrap().with_nu(0.5).unwrap())
        }
        Family::PowerExp { big_k, r, y } => {
            Some(ExpansiveParams::new(*big_k, *r, *y).unwrap().with_nu(0.5).unwrap())
        }
        Family::Partitions => {
            Some(ExpansiveParams::new(1.0, 1.0, 1.0).unwrap().with_nu(0.5).unwrap())
        }
        Family::PlanePartitions => {
            Some(ExpansiveParams::new(1.0, 2.0, 1.0).unwrap().with_nu(0.5).unwrap())
        }
        Family::ColoredForests(k) => {
            Some(ExpansiveParams::new(1.0, 1.0, *k as f64).unwrap().with_nu(0.5).unwrap())
        }
        Family::CentralBinomial => Some(ExpansiveParams::new(sqrt_2_over_pi, 0.5, 2.0).unwrap()),
        // alpha = 0 pins the tree part at one vertex: a_j = k^(j-1) exactly
        Family::Lollipop { alpha, k } if *alpha == 0.0 => {
            Some(ExpansiveParams::new(1.0 / *k as f64, 1.0, *k as f64).unwrap().with_nu(0.5).unwrap())
        }
        // the color-count factor (2/k)^(j^alpha) spoils expansiveness
        // unless k = 2
        Family::Lollipop { alpha, k } if *k == 2 => {
            Some(ExpansiveParams::new(sqrt_2_over_pi, 1.0 - alpha / 2.0, 2.0).unwrap())
        }
        // pinched between k^(j-1) and k^j: r = 1, band r1 = 2r/3 per the
        // oscillation class; K is a midpoint placeholder for solver guesses
        Family::ParityColored(k) => Some(
            ExpansiveParams::new(0.5 * (1.0 + 1.0 / *k as f64), 1.0, *k as f64)
                .unwrap()
                .with_band(2.0 / 3.0, 1.0)
                .unwrap(),
        ),
        _ => None,
    }
}

fn default_descriptor(family: &Family) -> String {
    match family {
        Family::Constant(c) => format!("constant:c={c}"),
        Family::PowerExp { big_k, r, y } => format!("power-exp:K={big_k},r={r},y={y}"),
        Family::Partitions => "partitions".into(),
        Family::PlanePartitions => "plane-partitions".into(),
        Family::ColoredForests(k) => format!("colored-forests:k={k}"),
        Family::CentralBinomial => "central-binomial".into(),
        Family::Lollipop { alpha, k } => format!("lollipop:alpha={alpha},k={k}"),
        Family::ParityColored(k) => format!("parity-colored:k={k}"),
        Family::Explicit(list) => {
            let head: Vec<String> = list.iter().take(8).map(|v| v.to_string()).collect();
            let ell = if list.len() > 8 { ",..." } else { "" };
            format!("explicit:list={}{}", head.join(","), ell)
        }
        Family::Custom(_) => "custom".into(),
    }
}

/// Builds a sequence from a text descriptor.
///
/// Grammar: `name` or `name:key=value,key=value`. Recognized names:
/// `partitions`, `plane-partitions`, `central-binomial`, `constant:c=C`,
/// `colored-forests:k=K`, `parity-colored:k=K`, `lollipop:alpha=A,k=K`,
/// `power-exp:K=..,r=..,y=..`, `explicit:list=a1,a2,...` and
/// `explicit:file=PATH` (one integer per line, line i = `a_i`).
pub fn parse_descriptor(descriptor: &str) -> Result<ComponentSequence> {
    let (name, args) = match descriptor.split_once(':') {
        Some((n, a)) => (n, a),
        None => (descriptor, ""),
    };
    let bad = |msg: String| Error::InvalidFamilyParams(msg);

    let mut kv = std::collections::BTreeMap::new();
    if !args.is_empty() && name != "explicit" {
        for part in args.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed parameter `{part}` in `{descriptor}`")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get_u64 = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<u64> {
        kv.get(key)
            .ok_or_else(|| bad(format!("missing parameter `{key}` in `{descriptor}`")))?
            .parse::<u64>()
            .map_err(|e| bad(format!("parameter `{key}`: {e}")))
    };
    let get_f64 = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<f64> {
        kv.get(key)
            .ok_or_else(|| bad(format!("missing parameter `{key}` in `{descriptor}`")))?
            .parse::<f64>()
            .map_err(|e| bad(format!("parameter `{key}`: {e}")))
    };

    let family = match name {
        "partitions" => Family::Partitions,
        "plane-partitions" => Family::PlanePartitions,
        "central-binomial" => Family::CentralBinomial,
        "constant" => Family::Constant(get_u64(&kv, "c")?),
        "colored-forests" => Family::ColoredForests(get_u64(&kv, "k")?),
        "parity-colored" => Family::ParityColored(get_u64(&kv, "k")?),
        "lollipop" => Family::Lollipop { alpha: get_f64(&kv, "alpha")?, k: get_u64(&kv, "k")? },
        "power-exp" => Family::PowerExp {
            big_k: get_f64(&kv, "K").or_else(|_| get_f64(&kv, "k"))?,
            r: get_f64(&kv, "r")?,
            y: get_f64(&kv, "y")?,
        },
        "explicit" => {
            let (key, value) = args
                .split_once('=')
                .ok_or_else(|| bad(format!("explicit requires `list=` or `file=`: `{descriptor}`")))?;
            let parse_list = |text: &str, sep: char| -> Result<Vec<BigUint>> {
                text.split(sep)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<BigUint>()
                            .map_err(|e| bad(format!("explicit entry `{s}`: {e} (entries must be nonnegative integers)")))
                    })
                    .collect()
            };
            match key {
                "list" => Family::Explicit(parse_list(value, ',')?),
                "file" => {
                    let text = std::fs::read_to_string(value)?;
                    Family::Explicit(parse_list(&text, '\n')?)
                }
                other => return Err(bad(format!("unknown explicit source `{other}`"))),
            }
        }
        other => return Err(bad(format!("unknown sequence family `{other}`"))),
    };
    ComponentSequence::with_descriptor(family, descriptor.to_string())
}

enum TermState {
    Constant(BigFloat),
    Linear,
    /// running `k^j`
    Geometric { k: BigFloat, cur: BigFloat },
    /// running `k^(j - j mod 2)`
    Parity { k2: BigFloat, cur: BigFloat },
    /// running `C(j, floor(j/2))`
    CentralBinom { cur: BigFloat },
    PowerExp { y: BigFloat, ypow: BigFloat, big_k: f64, r: f64, yf: f64 },
    Lollipop { alpha: f64, k: BigFloat, cur_m: u64, cb: BigFloat, kpow: BigFloat },
    /// fallback: exact evaluation, converted
    Exact,
}

/// Streaming float evaluation of `a_1, a_2, ...` (see
/// [`ComponentSequence::float_terms`]). Each step costs O(1) float
/// operations for the built-in families.
pub struct FloatTerms<'a> {
    seq: &'a ComponentSequence,
    p: usize,
    j: u64,
    state: TermState,
}

/// One step of the central-binomial ratio: `C(j+1, ..) / C(j, ..)`.
fn central_binom_step(cur: &BigFloat, j: u64, p: usize) -> BigFloat {
    if j.is_multiple_of(2) {
        // C(2m+1, m) = C(2m, m) * (2m+1)/(m+1)
        let m = j / 2;
        cur.mul(&hp::from_u64(j + 1, p), p, RM).div(&hp::from_u64(m + 1, p), p, RM)
    } else {
        // C(2m+2, m+1) = 2 * C(2m+1, m)
        cur.mul(&hp::from_u64(2, p), p, RM)
    }
}

impl<'a> FloatTerms<'a> {
    fn new(seq: &'a ComponentSequence, p: usize) -> Self {
        let state = match &seq.family {
            Family::Constant(c) => TermState::Constant(hp::from_u64(*c, p)),
            Family::Partitions => TermState::Constant(hp::one(p)),
            Family::PlanePartitions => TermState::Linear,
            Family::ColoredForests(k) => {
                TermState::Geometric { k: hp::from_u64(*k, p), cur: hp::one(p) }
            }
            Family::ParityColored(k) => {
                TermState::Parity { k2: hp::from_u64(k * k, p), cur: hp::one(p) }
            }
            Family::CentralBinomial => TermState::CentralBinom { cur: hp::one(p) },
            Family::PowerExp { big_k, r, y } => TermState::PowerExp {
                y: hp::from_f64(*y, p),
                ypow: hp::one(p),
                big_k: *big_k,
                r: *r,
                yf: *y,
            },
            Family::Lollipop { alpha, k } => {
                let kf = hp::from_u64(*k, p);
                TermState::Lollipop {
                    alpha: *alpha,
                    k: kf.clone(),
                    cur_m: 1,
                    cb: hp::one(p),
                    kpow: hp::one(p).div(&kf, p, RM), // k^(j - cur_m) at j = 0
                }
            }
            Family::Explicit(_) | Family::Custom(_) => TermState::Exact,
        };
        FloatTerms { seq, p, j: 0, state }
    }

    /// The next `a_j` (for `j = 1, 2, ...` in successive calls).
    pub fn next_term(&mut self) -> Result<BigFloat> {
        self.j += 1;
        let j = self.j;
        let p = self.p;
        Ok(match &mut self.state {
            TermState::Constant(c) => c.clone(),
            TermState::Linear => hp::from_u64(j, p),
            TermState::Geometric { k, cur } => {
                *cur = cur.mul(k, p, RM);
                cur.clone()
            }
            TermState::Parity { k2, cur } => {
                // a_1 = 1; crossing an odd j multiplies by k^2
                if j > 1 && j.is_multiple_of(2) {
                    *cur = cur.mul(k2, p, RM);
                }
                cur.clone()
            }
            TermState::CentralBinom { cur } => {
                if j > 1 {
                    *cur = central_binom_step(cur, j - 1, p);
                }
                cur.clone()
            }
            TermState::PowerExp { y, ypow, big_k, r, yf } => {
                *ypow = ypow.mul(y, p, RM);
                let bits = (j as f64) * yf.log2() + (*r - 1.0) * (j as f64).log2() + big_k.log2();
                if bits < p as f64 - 4.0 {
                    // small values: reproduce the exact integer rounding
                    hp::with_precision(&hp::from_biguint(&self.seq.eval(j)?), p)
                } else {
                    let kf = hp::from_f64(*big_k, p);
                    let base = kf.mul(ypow, p, RM);
                    let rm1 = *r - 1.0;
                    if rm1 == 0.0 {
                        base
                    } else if rm1 == rm1.trunc() && (1.0..=3.0).contains(&rm1) {
                        let jp = (j as u128).pow(rm1 as u32);
                        base.mul(&BigFloat::from_u128(jp, p), p, RM)
                    } else {
                        base.mul(&hp::pow(&hp::from_u64(j, p), &hp::from_f64(rm1, p), p), p, RM)
                    }
                }
            }
            TermState::Lollipop { alpha, k, cur_m, cb, kpow } => {
                *kpow = kpow.mul(k, p, RM);
                let m = lollipop_m(j, *alpha);
                while *cur_m < m {
                    *cb = central_binom_step(cb, *cur_m, p);
                    *kpow = kpow.div(k, p, RM);
                    *cur_m += 1;
                }
                cb.mul(kpow, p, RM)
            }
            TermState::Exact => hp::with_precision(&hp::from_biguint(&self.seq.eval(j)?), p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use crate::hp::to_f64;

    #[test]
    fn builtin_values() {
        let part = ComponentSequence::partitions();
        assert_eq!(part.eval(7).unwrap(), BigUint::one());

        let cf2 = ComponentSequence::colored_forests(2).unwrap();
        assert_eq!(cf2.eval(3).unwrap(), BigUint::from(8u32));

        let pc3 = ComponentSequence::parity_colored(3).unwrap();
        assert_eq!(pc3.eval(4).unwrap(), BigUint::from(81u32));
        assert_eq!(pc3.eval(5).unwrap(), BigUint::from(81u32));

        let cb = ComponentSequence::central_binomial();
        assert_eq!(cb.eval(4).unwrap(), BigUint::from(6u32));

        let pp = ComponentSequence::plane_partitions();
        assert_eq!(pp.eval(5).unwrap(), BigUint::from(5u32));

        let ex = ComponentSequence::explicit(vec![0u32.into(), 0u32.into(), 1u32.into()]);
        assert_eq!(ex.eval(9).unwrap(), BigUint::zero());
        assert_eq!(ex.eval(3).unwrap(), BigUint::one());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ComponentSequence::colored_forests(0).is_err());
        assert!(ComponentSequence::new(Family::Lollipop { alpha: 1.5, k: 2 }).is_err());
        assert!(ComponentSequence::new(Family::PowerExp { big_k: -1.0, r: 1.0, y: 2.0 }).is_err());
    }

    #[test]
    fn custom_negative_rejected() {
        let f: SeqFn = Arc::new(|j| BigInt::from(3i64 - j as i64));
        let seq = ComponentSequence::new(Family::Custom(f)).unwrap();
        assert_eq!(seq.eval(2).unwrap(), BigUint::one());
        assert!(matches!(seq.eval(5), Err(Error::InvalidSequenceValue { j: 5, .. })));
    }

    #[test]
    fn declared_params_examples() {
        let cf2 = ComponentSequence::colored_forests(2).unwrap();
        let p = cf2.declared_params().unwrap();
        assert_eq!((p.big_k, p.r, p.y), (1.0, 1.0, 2.0));

        let cb = ComponentSequence::central_binomial();
        let p = cb.declared_params().unwrap();
        assert!((p.big_k - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!((p.r, p.y), (0.5, 2.0));
        assert!(p.nu.is_none());

        let ex = ComponentSequence::explicit(vec![BigUint::one()]);
        assert!(ex.declared_params().is_none());
    }

    #[test]
    fn descriptor_round_trip() {
        for d in [
            "partitions",
            "plane-partitions",
            "central-binomial",
            "constant:c=3",
            "colored-forests:k=2",
            "parity-colored:k=2",
            "lollipop:alpha=0.5,k=2",
            "power-exp:K=1,r=0.5,y=1.5",
            "explicit:list=1,0,2",
        ] {
            let seq = parse_descriptor(d).unwrap();
            assert_eq!(seq.descriptor(), d);
            seq.eval(5).unwrap();
        }
        assert!(parse_descriptor("no-such-family").is_err());
        assert!(parse_descriptor("colored-forests:k=0").is_err());
        assert!(parse_descriptor("explicit:list=1,-2").is_err());
    }

    #[test]
    fn power_exp_rounding() {
        // K=1, r=1, y=2 reproduces a_j = 2^j exactly
        let seq = parse_descriptor("power-exp:K=1,r=1,y=2").unwrap();
        assert_eq!(seq.eval(10).unwrap(), BigUint::from(1024u32));
        // K=0.3, r=1, y=1: a_j = round(0.3) = 0
        let seq = parse_descriptor("power-exp:K=0.3,r=1,y=1").unwrap();
        assert_eq!(seq.eval(4).unwrap(), BigUint::zero());
    }

    #[test]
    fn float_terms_match_exact() {
        let p = 160;
        for d in [
            "partitions",
            "plane-partitions",
            "central-binomial",
            "constant:c=4",
            "colored-forests:k=3",
            "parity-colored:k=2",
            "lollipop:alpha=0.5,k=2",
            "lollipop:alpha=1,k=2",
            "power-exp:K=1,r=0.5,y=1.5",
            "power-exp:K=0.7,r=2,y=2",
            "explicit:list=5,0,7,1",
        ] {
            let seq = parse_descriptor(d).unwrap();
            let mut terms = seq.float_terms(p);
            for j in 1..=120u64 {
                let approx = terms.next_term().unwrap();
                let exact = hp::from_biguint(&seq.eval(j).unwrap());
                let diff = approx.sub(&exact, p, RM);
                if exact.is_zero() {
                    assert!(
                        hp::lt(&diff.abs(), &hp::from_f64(1e-20, p)),
                        "family {d}, j={j}: float {approx} vs exact 0"
                    );
                } else {
                    let rel = to_f64(&diff.div(&exact, p, RM).abs());
                    assert!(rel < 1e-25, "family {d}, j={j}: rel err {rel}");
                }
            }
        }
    }

    #[test]
    fn expansive_envelope_bounds() {
        // eval(j) / (j^(r-1) y^j) stays within explicit constants
        let cases: [(&str, f64, f64); 6] = [
            ("partitions", 1.0, 1.0),
            ("plane-partitions", 1.0, 1.0),
            ("colored-forests:k=2", 1.0, 1.0),
            ("central-binomial", 0.5, 1.0),
            ("parity-colored:k=2", 0.5, 1.0),
            ("lollipop:alpha=0.5,k=2", 0.4, 1.0),
        ];
        for (d, lo, hi) in cases {
            let seq = parse_descriptor(d).unwrap();
            let params = seq.declared_params().unwrap().clone();
            for j in 1..=1000u64 {
                let aj = seq.eval(j).unwrap();
                let envelope = (j as f64).powf(params.r - 1.0) * params.y.powi(j as i32);
                let ratio = if envelope.is_finite() {
                    aj.to_f64().unwrap_or(f64::INFINITY) / envelope
                } else {
                    // compare in log space once y^j overflows f64
                    let la = to_f64(&hp::ln_biguint(&aj, 96));
                    (la - (params.r - 1.0) * (j as f64).ln() - (j as f64) * params.y.ln()).exp()
                };
                assert!(
                    ratio >= lo - 1e-9 && ratio <= hi + 1e-9,
                    "family {d}, j={j}: ratio {ratio} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn parity_colored_paper_envelope() {
        // k^{-1} <= a_j / (j^0 k^j) <= 1
        for k in [2u64, 3] {
            let seq = ComponentSequence::parity_colored(k).unwrap();
            for j in 1..=200 {
                let aj = seq.eval(j).unwrap().to_f64().unwrap_or(f64::INFINITY);
                let env = (k as f64).powi(j as i32);
                if env.is_finite() && aj.is_finite() {
                    let ratio = aj / env;
                    assert!(ratio >= 1.0 / k as f64 - 1e-12 && ratio <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn memo_is_consistent() {
        let seq = ComponentSequence::central_binomial();
        let a = seq.eval(30).unwrap();
        let b = seq.eval(30).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, binomial_u64(30, 15));
    }
}
