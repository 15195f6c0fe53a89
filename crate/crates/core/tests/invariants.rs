//! Cross-module invariants at scales between the unit tests and the
//! acceptance criteria.

use expanum::asymptotics::{closed_form_constants, closed_form_estimate, theorem1_estimate};
use expanum::diagnostics::saddle_samples;
use expanum::exact::count;
use expanum::sequences::parse_descriptor;
use expanum::{hp, Kind};

const P: usize = 128;

/// `n delta_n / ((K Gamma(r+1))^(1/(r+1)) n^(r/(r+1))) -> 1` for rounded
/// power-law families with y > 1.
#[test]
fn exponent_identity_power_exp() {
    for (d, big_k, r) in
        [("power-exp:K=1,r=1,y=2", 1.0, 1.0), ("power-exp:K=0.5,r=2,y=2", 0.5, 2.0)]
    {
        let seq = parse_descriptor(d).unwrap();
        let gamma = hp::to_f64(&expanum::asymptotics::special_gamma(r + 1.0, P));
        let scale = (big_k * gamma).powf(1.0 / (r + 1.0));
        let mut devs = Vec::new();
        for n in [1_000u64, 10_000, 100_000] {
            let sol = saddle_samples(&seq, Kind::Multiset, &[n], P, &[]).unwrap().remove(0);
            let delta = hp::to_f64(sol.delta.as_ref().unwrap());
            let normalized = (n as f64) * delta / (scale * (n as f64).powf(r / (r + 1.0)));
            devs.push((normalized - 1.0).abs());
        }
        assert!(
            devs[2] < 0.05,
            "{d}: normalized n delta deviations {devs:?} (final must be < 0.05)"
        );
        assert!(devs[2] < devs[0], "{d}: deviation should shrink, got {devs:?}");
    }
}

/// `sigma_n^3 B_n^2 -> pi^2 / 3` for integer partitions.
#[test]
fn partitions_sigma_cubed_variance() {
    let seq = parse_descriptor("partitions").unwrap();
    let expect = std::f64::consts::PI.powi(2) / 3.0;
    for (n, tol) in [(10_000u64, 0.01), (100_000, 0.01)] {
        let sol = saddle_samples(&seq, Kind::Multiset, &[n], P, &[]).unwrap().remove(0);
        let v = hp::to_f64(&sol.sigma).powi(3) * hp::to_f64(&sol.b2);
        assert!((v / expect - 1.0).abs() < tol, "n={n}: sigma^3 B^2 = {v}, want ~{expect}");
    }
}

/// The solved-saddle estimate and the explicit closed form approach each
/// other; at n = 5000 they agree within 5% for 2-colored forests, while
/// the oscillating parity-colored family has no closed form at all.
#[test]
fn theorem1_vs_closed_form() {
    let seq = parse_descriptor("colored-forests:k=2").unwrap();
    for kind in [Kind::Multiset, Kind::Selection] {
        let constants = closed_form_constants(&seq, kind, P).unwrap();
        let cf = closed_form_estimate(&constants, 2.0, 5000);
        let t1 = theorem1_estimate(&seq, 5000, kind, P).unwrap();
        let rel = cf.relerr(&t1, P);
        assert!(rel < 0.05, "{kind:?}: closed form vs saddle estimate relerr {rel}");
    }
    let pc = parse_descriptor("parity-colored:k=2").unwrap();
    assert!(matches!(
        closed_form_constants(&pc, Kind::Multiset, P),
        Err(expanum::Error::NotExpansive)
    ));
}

/// Every y > 1 built-in eventually satisfies `c_n/c_{n+1} <= 1/y`, with
/// the observed threshold inside the sampled range.
#[test]
fn eventual_ratio_threshold_for_growing_families() {
    for (d, y, n_max) in [
        ("central-binomial", 2.0, 800u64),
        ("lollipop:alpha=0.5,k=2", 2.0, 800),
        ("power-exp:K=1,r=0.5,y=1.5", 1.5, 800),
    ] {
        let seq = parse_descriptor(d).unwrap();
        let verdict = expanum::diagnostics::limit_law_check(&seq, y, n_max, P).unwrap();
        assert!(
            verdict.threshold_observed.is_some(),
            "{d}: no threshold observed up to {n_max}"
        );
        assert!(verdict.hypotheses_hold_over_sample, "{d}: ratio not converging to 1/y");
    }
}

/// Counts stay in lockstep with the tilted reconstruction for every
/// built-in family (the four acceptance families are checked far more
/// finely in the acceptance suite).
#[test]
fn khintchine_identity_all_builtins() {
    let p = 192;
    for d in [
        "partitions",
        "plane-partitions",
        "central-binomial",
        "constant:c=2",
        "colored-forests:k=2",
        "parity-colored:k=2",
        "lollipop:alpha=0.5,k=2",
        "power-exp:K=1,r=0.5,y=1.5",
    ] {
        let seq = parse_descriptor(d).unwrap();
        for kind in [Kind::Multiset, Kind::Selection] {
            let n = 12u64;
            let table = count(&seq, n, kind).unwrap();
            let sol = expanum::saddle::solve_saddle(&seq, n, kind, p, &[]).unwrap();
            for scale in [1.0f64, 0.8] {
                let sigma = sol.sigma.mul(&hp::from_f64(scale, p), p, hp::RM);
                let lv =
                    expanum::saddle::khintchine_reconstruct(&seq, n, &sigma, kind, p).unwrap();
                let err = hp::to_f64(
                    &lv.log_e.sub(&hp::ln_biguint(table.get(n), p), p, hp::RM).abs(),
                );
                assert!(err < 1e-40, "{d} {kind:?} scale {scale}: |dlog| = {err:.2e}");
            }
        }
    }
}

/// The ratio law in normalized form: `y e^{delta_n} c_n/c_{n+1}` is closer
/// to 1 at n = 1000 than at n = 100 for every built-in expansive family.
#[test]
fn normalized_ratio_convergence_all_builtins() {
    for d in [
        "partitions",
        "plane-partitions",
        "central-binomial",
        "constant:c=2",
        "colored-forests:k=2",
        "parity-colored:k=2",
        "lollipop:alpha=0.5,k=2",
        "power-exp:K=1,r=0.5,y=1.5",
    ] {
        let seq = parse_descriptor(d).unwrap();
        let y = seq.declared_params().unwrap().y;
        let counts = count(&seq, 1001, Kind::Multiset).unwrap();
        let saddles = saddle_samples(&seq, Kind::Multiset, &[100, 1000], P, &[]).unwrap();
        let rep = expanum::diagnostics::ratio_report(&counts, &saddles, y).unwrap();
        let d100 = (hp::to_f64(&rep.normalized[0]) - 1.0).abs();
        let d1000 = (hp::to_f64(&rep.normalized[1]) - 1.0).abs();
        assert!(d1000 < d100, "{d}: |norm-1| grew from {d100:.5} at n=100 to {d1000:.5} at n=1000");
    }
}

/// `sigma_n` strictly decreases and `B_n^2` does not decrease once n is
/// past the (small) threshold of these families.
#[test]
fn saddle_monotonicity() {
    for d in ["partitions", "colored-forests:k=2"] {
        let seq = parse_descriptor(d).unwrap();
        let ns: Vec<u64> = (40..=60).collect();
        let sols = saddle_samples(&seq, Kind::Multiset, &ns, P, &[3]).unwrap();
        for w in sols.windows(2) {
            assert!(
                hp::lt(&w[1].sigma, &w[0].sigma),
                "{d}: sigma must strictly decrease between n = {} and {}",
                w[0].n,
                w[1].n
            );
            assert!(
                !hp::gt(&w[0].b2, &w[1].b2),
                "{d}: B^2 must not decrease between n = {} and {}",
                w[0].n,
                w[1].n
            );
            let r0 = &w[0].rho[0].1;
            let r1 = &w[1].rho[0].1;
            assert!(!hp::gt(r0, r1), "{d}: rho_3 must not decrease");
        }
    }
}
