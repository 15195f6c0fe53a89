//! Exact arbitrary-precision counting of multisets and selections.
//!
//! The main entry point is [`count`], which fills a table of counts
//! `c_0..c_N` from the logarithmic-derivative recurrence
//!
//! ```text
//! n c_n = sum_{m=1}^{n} b_m c_{n-m},
//!     b_m = sum_{d|m} d a_d                    (multisets)
//!     b_m = sum_{d|m} (-1)^{m/d+1} d a_d       (selections)
//! ```
//!
//! which needs `O(N^2)` big-integer multiply-adds regardless of how fast
//! `a_j` grows. The selection weights come from expanding
//! `log(1+x^j) = -sum_k (-x^j)^k / k`, which is where the alternating sign
//! `(-1)^{m/d+1}` originates.
//!
//! [`brute_force_count`] is the independent oracle: a direct sum over all
//! integer partitions of `n` of the product of per-size binomials. It is
//! capped because the partition count grows superpolynomially.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::sequences::ComponentSequence;
use crate::{Error, Kind, Result};

/// Default cap for the brute-force oracle (|Omega_40| = 37338 partitions).
pub const DEFAULT_ORACLE_CAP: u64 = 40;

/// Exact counts `c_0..c_N` for one sequence and one kind.
#[derive(Debug, Clone)]
pub struct CountTable {
    pub kind: Kind,
    pub seq_id: String,
    pub counts: Vec<BigUint>,
}

impl CountTable {
    pub fn n_max(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> &BigUint {
        &self.counts[n as usize]
    }

    /// CSV with header `n,count`, counts in decimal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count\n");
        for (n, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{n},{c}\n"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "seq": self.seq_id,
            "kind": self.kind.as_str(),
            "counts": self.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// A partition of `n` as a multiplicity vector: `eta[j-1]` components of
/// size `j`, with `sum_j j * eta[j-1] = n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionVector {
    eta: Vec<u64>,
}

impl PartitionVector {
    pub fn new(eta: Vec<u64>) -> Result<Self> {
        let total: u128 = eta.iter().enumerate().map(|(i, m)| (i as u128 + 1) * *m as u128).sum();
        if total != eta.len() as u128 {
            return Err(Error::RangeMismatch(format!(
                "partition vector weight {total} does not match length {}",
                eta.len()
            )));
        }
        Ok(PartitionVector { eta })
    }

    pub fn size(&self) -> u64 {
        self.eta.len() as u64
    }

    /// Multiplicity of parts of size `j`.
    pub fn multiplicity(&self, j: u64) -> u64 {
        self.eta.get(j as usize - 1).copied().unwrap_or(0)
    }

    /// The nonzero entries as `(part size, multiplicity)` pairs.
    pub fn parts(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.eta
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0)
            .map(|(i, m)| (i as u64 + 1, *m))
    }
}

/// Calls `visit` once for every partition of `n` (the set `Omega_n`).
pub fn for_each_partition(n: u64, mut visit: impl FnMut(&PartitionVector)) {
    let mut pv = PartitionVector { eta: vec![0; n as usize] };
    fn rec(j: u64, remaining: u64, pv: &mut PartitionVector, visit: &mut impl FnMut(&PartitionVector)) {
        if remaining == 0 {
            visit(pv);
            return;
        }
        if j == 0 {
            return;
        }
        if j == 1 {
            pv.eta[0] = remaining;
            visit(pv);
            pv.eta[0] = 0;
            return;
        }
        for m in 0..=remaining / j {
            pv.eta[j as usize - 1] = m;
            rec(j - 1, remaining - m * j, pv, visit);
        }
        pv.eta[j as usize - 1] = 0;
    }
    rec(n, n, &mut pv, &mut visit);
}

/// `b_m`: the weight of `x^m` in the logarithmic derivative of the
/// generating product. Nonnegative for multisets; may be negative for
/// selections.
pub fn divisor_weight(seq: &ComponentSequence, m: u64, kind: Kind) -> Result<BigInt> {
    assert!(m >= 1);
    let mut sum = BigInt::zero();
    for d in 1..=m {
        if m.is_multiple_of(d) {
            let term = BigInt::from(seq.eval(d)?) * d;
            match kind {
                Kind::Multiset => sum += term,
                Kind::Selection => {
                    if (m / d).is_multiple_of(2) {
                        sum -= term;
                    } else {
                        sum += term;
                    }
                }
            }
        }
    }
    Ok(sum)
}

/// Sieve version of [`divisor_weight`] for all `m <= n_max` at once
/// (O(N log N) sequence evaluations).
fn divisor_weights_upto(seq: &ComponentSequence, n_max: u64, kind: Kind) -> Result<Vec<BigInt>> {
    let mut w = vec![BigInt::zero(); n_max as usize + 1];
    let d_end = seq.support_end().unwrap_or(n_max).min(n_max);
    for d in 1..=d_end {
        let ad = seq.eval(d)?;
        if ad.is_zero() {
            continue;
        }
        let dad = BigInt::from(ad) * d;
        let mut k = 1u64;
        while k * d <= n_max {
            let m = (k * d) as usize;
            match kind {
                Kind::Multiset => w[m] += &dad,
                Kind::Selection => {
                    if k.is_multiple_of(2) {
                        w[m] -= &dad;
                    } else {
                        w[m] += &dad;
                    }
                }
            }
            k += 1;
        }
    }
    Ok(w)
}

/// Exact counts `c_0..c_{n_max}` via the Euler-transform recurrence.
pub fn count(seq: &ComponentSequence, n_max: u64, kind: Kind) -> Result<CountTable> {
    let w = divisor_weights_upto(seq, n_max, kind)?;
    let mut counts: Vec<BigInt> = Vec::with_capacity(n_max as usize + 1);
    counts.push(BigInt::one());
    for n in 1..=n_max as usize {
        let mut acc = BigInt::zero();
        for m in 1..=n {
            if !w[m].is_zero() && !counts[n - m].is_zero() {
                acc += &w[m] * &counts[n - m];
            }
        }
        let (q, rem) = num_integer::Integer::div_rem(&acc, &BigInt::from(n));
        if !rem.is_zero() {
            return Err(Error::InternalInconsistency(format!(
                "recurrence sum at n = {n} is not divisible by n"
            )));
        }
        if q.is_negative() {
            return Err(Error::InternalInconsistency(format!(
                "negative count at n = {n}"
            )));
        }
        counts.push(q);
    }
    Ok(CountTable {
        kind,
        seq_id: seq.descriptor().to_string(),
        counts: counts.into_iter().map(|c| c.to_biguint().unwrap()).collect(),
    })
}

/// `C(a + l - 1, l)` for big `a` (number of multisets of size `l` from `a`
/// types): `prod_{i=0}^{l-1} (a + i) / l!`.
fn multiset_binomial(a: &BigUint, l: u64) -> BigUint {
    if l == 0 {
        return BigUint::one();
    }
    if a.is_zero() {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    for i in 0..l {
        num *= a + i;
    }
    let mut den = BigUint::one();
    for i in 2..=l {
        den *= i;
    }
    num / den
}

/// `C(a, l)` for big `a`; zero when `l > a`.
fn selection_binomial(a: &BigUint, l: u64) -> BigUint {
    if BigUint::from(l) > *a {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    for i in 0..l {
        num *= a - i;
    }
    let mut den = BigUint::one();
    for i in 2..=l {
        den *= i;
    }
    num / den
}

/// Independent oracle: sums the product of per-size binomials over all
/// partitions of `n`. `O(|Omega_n|)`; refuses `n` beyond `cap`.
pub fn brute_force_count_with_cap(
    seq: &ComponentSequence,
    n: u64,
    kind: Kind,
    cap: u64,
) -> Result<BigUint> {
    if n > cap {
        return Err(Error::OracleCapExceeded { n, cap });
    }
    let mut a: Vec<BigUint> = Vec::with_capacity(n as usize);
    for j in 1..=n {
        a.push(seq.eval(j)?);
    }
    let mut total = BigUint::zero();
    for_each_partition(n, |pv| {
        let mut prod = BigUint::one();
        for (j, l) in pv.parts() {
            let aj = &a[j as usize - 1];
            let factor = match kind {
                Kind::Multiset => multiset_binomial(aj, l),
                Kind::Selection => selection_binomial(aj, l),
            };
            if factor.is_zero() {
                prod = BigUint::zero();
                break;
            }
            prod *= factor;
        }
        total += prod;
    });
    Ok(total)
}

/// [`brute_force_count_with_cap`] at the default cap.
pub fn brute_force_count(seq: &ComponentSequence, n: u64, kind: Kind) -> Result<BigUint> {
    brute_force_count_with_cap(seq, n, kind, DEFAULT_ORACLE_CAP)
}

/// The star transform `a*_j = sum_{lk=j} a_l / k` as exact rationals;
/// `exp(sum_j a*_j x^j)` equals the multiset generating product, i.e. the
/// star sequence presents the same counts as an assembly-style exponential.
#[derive(Debug, Clone)]
pub struct StarSequence {
    /// `terms[j-1] = a*_j`
    pub terms: Vec<BigRational>,
}

impl StarSequence {
    pub fn get(&self, j: u64) -> &BigRational {
        &self.terms[j as usize - 1]
    }
}

pub fn star_transform(seq: &ComponentSequence, n_max: u64) -> Result<StarSequence> {
    assert!(n_max >= 1);
    let mut terms = Vec::with_capacity(n_max as usize);
    for j in 1..=n_max {
        let mut sum = BigRational::zero();
        for l in 1..=j {
            if j.is_multiple_of(l) {
                let k = j / l;
                sum += BigRational::new(BigInt::from(seq.eval(l)?), BigInt::from(k));
            }
        }
        terms.push(sum);
    }
    Ok(StarSequence { terms })
}

/// Expands `exp(sum_j a*_j x^j)` to degree `n_max` with exact rational
/// arithmetic. Every coefficient must come out a nonnegative integer (they
/// are multiset counts); anything else reports an inconsistency.
pub fn assembly_counts(star: &StarSequence, n_max: u64) -> Result<Vec<BigUint>> {
    if (star.terms.len() as u64) < n_max {
        return Err(Error::RangeMismatch(format!(
            "star sequence has {} terms, need {n_max}",
            star.terms.len()
        )));
    }
    let mut coeffs: Vec<BigRational> = vec![BigRational::one()];
    for n in 1..=n_max as usize {
        let mut acc = BigRational::zero();
        for m in 1..=n {
            let sm = &star.terms[m - 1];
            if !sm.is_zero() {
                acc += sm.clone() * BigRational::from_integer(BigInt::from(m)) * coeffs[n - m].clone();
            }
        }
        coeffs.push(acc / BigRational::from_integer(BigInt::from(n)));
    }
    coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| {
            if c.is_integer() && !c.is_negative() {
                Ok(c.to_integer().to_biguint().unwrap())
            } else {
                Err(Error::InternalInconsistency(format!(
                    "assembly expansion coefficient at n = {n} is {c}, not a nonnegative integer"
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::parse_descriptor;
    use num_traits::FromPrimitive;

    fn seq(d: &str) -> ComponentSequence {
        parse_descriptor(d).unwrap()
    }

    #[test]
    fn divisor_weight_examples() {
        let part = seq("partitions");
        assert_eq!(divisor_weight(&part, 6, Kind::Multiset).unwrap(), BigInt::from(12));
        // divisors of 4: (d=1,k=4,-), (d=2,k=2,-), (d=4,k=1,+): -1-2+4 = 1
        assert_eq!(divisor_weight(&part, 4, Kind::Selection).unwrap(), BigInt::from(1));
        let cf2 = seq("colored-forests:k=2");
        assert_eq!(divisor_weight(&cf2, 1, Kind::Multiset).unwrap(), BigInt::from(2));
        assert_eq!(divisor_weight(&cf2, 1, Kind::Selection).unwrap(), BigInt::from(2));
    }

    #[test]
    fn partition_counts() {
        let t = count(&seq("partitions"), 10, Kind::Multiset).unwrap();
        let expect: Vec<u32> = vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        assert_eq!(t.counts, expect.into_iter().map(BigUint::from).collect::<Vec<_>>());
    }

    #[test]
    fn distinct_part_counts() {
        let t = count(&seq("partitions"), 5, Kind::Selection).unwrap();
        let expect: Vec<u32> = vec![1, 1, 1, 2, 2, 3];
        assert_eq!(t.counts, expect.into_iter().map(BigUint::from).collect::<Vec<_>>());
    }

    #[test]
    fn plane_partition_counts() {
        let t = count(&seq("plane-partitions"), 5, Kind::Multiset).unwrap();
        let expect: Vec<u32> = vec![1, 1, 3, 6, 13, 24];
        assert_eq!(t.counts, expect.into_iter().map(BigUint::from).collect::<Vec<_>>());
    }

    #[test]
    fn colored_forest_counts() {
        let t = count(&seq("colored-forests:k=2"), 3, Kind::Multiset).unwrap();
        let expect: Vec<u32> = vec![1, 2, 7, 20];
        assert_eq!(t.counts, expect.into_iter().map(BigUint::from).collect::<Vec<_>>());
    }

    #[test]
    fn brute_force_examples() {
        let part = seq("partitions");
        assert_eq!(brute_force_count(&part, 0, Kind::Multiset).unwrap(), BigUint::one());
        assert_eq!(brute_force_count(&part, 5, Kind::Multiset).unwrap(), BigUint::from(7u32));
        let cf2 = seq("colored-forests:k=2");
        assert_eq!(brute_force_count(&cf2, 2, Kind::Multiset).unwrap(), BigUint::from(7u32));
        assert!(matches!(
            brute_force_count(&part, 60, Kind::Multiset),
            Err(Error::OracleCapExceeded { n: 60, cap: 40 })
        ));
    }

    #[test]
    fn oracle_equivalence_small() {
        for d in ["partitions", "plane-partitions", "colored-forests:k=2", "central-binomial"] {
            let s = seq(d);
            for kind in [Kind::Multiset, Kind::Selection] {
                let table = count(&s, 12, kind).unwrap();
                for n in 0..=12 {
                    let b = brute_force_count(&s, n, kind).unwrap();
                    assert_eq!(*table.get(n), b, "family {d} {kind:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn star_examples() {
        let part = seq("partitions");
        let star = star_transform(&part, 6).unwrap();
        assert_eq!(*star.get(4), BigRational::from_f64(1.75).unwrap());
        assert_eq!(*star.get(1), BigRational::one());
        assert_eq!(*star.get(6), BigRational::from_integer(BigInt::from(2)));
        // j a*_j = divisor weight
        for j in 1..=6 {
            let lhs = star.get(j).clone() * BigRational::from_integer(BigInt::from(j));
            assert_eq!(lhs, BigRational::from_integer(divisor_weight(&part, j, Kind::Multiset).unwrap()));
        }
    }

    #[test]
    fn assembly_reproduces_counts() {
        let s = seq("colored-forests:k=2");
        let star = star_transform(&s, 15).unwrap();
        let via_exp = assembly_counts(&star, 15).unwrap();
        let direct = count(&s, 15, Kind::Multiset).unwrap();
        assert_eq!(via_exp, direct.counts);
    }

    #[test]
    fn multiset_monotone_when_a1_positive() {
        let s = seq("central-binomial");
        let t = count(&s, 40, Kind::Multiset).unwrap();
        for n in 0..40usize {
            assert!(t.counts[n] <= t.counts[n + 1]);
        }
    }

    #[test]
    fn selection_bounded_by_multiset() {
        let s = seq("plane-partitions");
        let ms = count(&s, 30, Kind::Multiset).unwrap();
        let sel = count(&s, 30, Kind::Selection).unwrap();
        for n in 0..=30usize {
            assert!(sel.counts[n] <= ms.counts[n]);
        }
    }

    #[test]
    fn custom_callback_counts() {
        use crate::sequences::{Family, SeqFn};
        use std::sync::Arc;
        // a_j = j^2 as a callback vs the same values listed explicitly
        let f: SeqFn = Arc::new(|j| BigInt::from(j * j));
        let custom = ComponentSequence::new(Family::Custom(f)).unwrap();
        let listed = ComponentSequence::explicit(
            (1..=20u64).map(|j| BigUint::from(j * j)).collect(),
        );
        for kind in [Kind::Multiset, Kind::Selection] {
            let a = count(&custom, 20, kind).unwrap();
            let b = count(&listed, 20, kind).unwrap();
            assert_eq!(a.counts, b.counts);
        }
        // a failing callback surfaces through the recurrence
        let bad: SeqFn = Arc::new(|j| BigInt::from(5i64 - j as i64));
        let seq = ComponentSequence::new(Family::Custom(bad)).unwrap();
        assert!(matches!(count(&seq, 10, Kind::Multiset), Err(Error::InvalidSequenceValue { .. })));
    }

    #[test]
    fn zero_sequence_counts() {
        let s = ComponentSequence::explicit(vec![]);
        let t = count(&s, 6, Kind::Multiset).unwrap();
        assert_eq!(t.counts[0], BigUint::one());
        assert!(t.counts[1..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn csv_format() {
        let t = count(&seq("partitions"), 10, Kind::Multiset).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "n,count");
        assert_eq!(lines.len(), 12);
        assert_eq!(*lines.last().unwrap(), "10,42");
    }

    #[test]
    fn partition_vector_invariant() {
        assert!(PartitionVector::new(vec![1, 2]).is_err());
        let pv = PartitionVector::new(vec![0, 1]).unwrap();
        assert_eq!(pv.size(), 2);
        assert_eq!(pv.multiplicity(2), 1);
        assert_eq!(pv.multiplicity(1), 0);
        assert!(PartitionVector::new(vec![]).is_ok());
    }

    #[test]
    fn partition_enumeration_sizes() {
        // |Omega_n| = p(n)
        let p: [u64; 11] = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for n in 0..=10u64 {
            let mut count = 0u64;
            for_each_partition(n, |pv| {
                count += 1;
                let weight: u64 = pv.parts().map(|(j, m)| j * m).sum();
                assert_eq!(weight, n);
            });
            assert_eq!(count, p[n as usize], "n = {n}");
        }
    }
}
