//! Property tests tying the independent computation routes together on
//! randomized sequences.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

use expanum::exact::{brute_force_count, count, divisor_weight, star_transform};
use expanum::saddle::{khintchine_reconstruct, mean_m};
use expanum::sequences::ComponentSequence;
use expanum::{hp, Kind};

fn explicit_seq(entries: &[u8]) -> ComponentSequence {
    ComponentSequence::explicit(entries.iter().map(|&v| BigUint::from(v)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The divisor-weight recurrence agrees with the partition-sum oracle
    /// on arbitrary small sequences, for both kinds.
    #[test]
    fn recurrence_matches_brute_force(entries in proptest::collection::vec(0u8..6, 1..8)) {
        let seq = explicit_seq(&entries);
        for kind in [Kind::Multiset, Kind::Selection] {
            let table = count(&seq, 12, kind).unwrap();
            for n in 0..=12 {
                let brute = brute_force_count(&seq, n, kind).unwrap();
                prop_assert_eq!(table.get(n), &brute);
            }
        }
    }

    /// The tilted reconstruction of log c_n does not depend on the tilt.
    #[test]
    fn khintchine_tilt_independence(
        entries in proptest::collection::vec(0u8..5, 1..6),
        sigma_a in 0.2f64..2.0,
        sigma_b in 0.2f64..2.0,
    ) {
        prop_assume!(entries.iter().any(|&v| v > 0));
        let seq = explicit_seq(&entries);
        let n = 8u64;
        let p = 192;
        for kind in [Kind::Multiset, Kind::Selection] {
            let table = count(&seq, n, kind).unwrap();
            if table.get(n) == &BigUint::from(0u32) {
                // reconstruction is -inf on both routes; skip the diff
                continue;
            }
            let la = khintchine_reconstruct(&seq, n, &hp::from_f64(sigma_a, p), kind, p).unwrap();
            let lb = khintchine_reconstruct(&seq, n, &hp::from_f64(sigma_b, p), kind, p).unwrap();
            let exact_log = hp::ln_biguint(table.get(n), p);
            let da = hp::to_f64(&la.log_e.sub(&exact_log, p, hp::RM).abs());
            let db = hp::to_f64(&lb.log_e.sub(&exact_log, p, hp::RM).abs());
            prop_assert!(da < 1e-35 && db < 1e-35, "tilt dependence: {da:.2e} vs {db:.2e}");
        }
    }

    /// j a*_j equals the multiset divisor weight.
    #[test]
    fn star_consistency(entries in proptest::collection::vec(0u8..200, 1..10)) {
        let seq = explicit_seq(&entries);
        let star = star_transform(&seq, 20).unwrap();
        for j in 1..=20u64 {
            let lhs = star.get(j).clone() * BigRational::from_integer(BigInt::from(j));
            let rhs = BigRational::from_integer(divisor_weight(&seq, j, Kind::Multiset).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    /// Multiset counts are nondecreasing once a_1 >= 1 (appending a
    /// size-1 component embeds size-n structures into size-(n+1) ones).
    #[test]
    fn multiset_counts_monotone(mut entries in proptest::collection::vec(0u8..4, 1..8)) {
        entries[0] = entries[0].max(1);
        let seq = explicit_seq(&entries);
        let table = count(&seq, 20, Kind::Multiset).unwrap();
        for n in 0..20usize {
            prop_assert!(table.counts[n] <= table.counts[n + 1]);
        }
    }

    /// The tilted mean is strictly decreasing in sigma (what makes the
    /// saddle bisection valid).
    #[test]
    fn mean_strictly_decreasing(
        entries in proptest::collection::vec(0u8..5, 1..6),
        lo in 0.05f64..1.5,
        gap in 0.01f64..1.0,
    ) {
        prop_assume!(entries.iter().any(|&v| v > 0));
        let seq = explicit_seq(&entries);
        for kind in [Kind::Multiset, Kind::Selection] {
            let m_lo = mean_m(&seq, 10, &hp::from_f64(lo, 128), kind, 128).unwrap();
            let m_hi = mean_m(&seq, 10, &hp::from_f64(lo + gap, 128), kind, 128).unwrap();
            prop_assert!(hp::lt(&m_hi, &m_lo));
        }
    }
}
