//! Empirical verification of the limit laws and scaling claims: the count
//! ratio law `c_n/c_{n+1} = y^-1 e^{-delta_n + o(delta_n)}`, the numeric
//! hypotheses behind the logical limit law (ratio convergence to `y^-1`
//! and, for `y > 1`, an eventual-threshold inequality), and the power-law
//! scalings of `delta_n`, `B_n^2` and `rho_l`.

use astro_float::BigFloat;
use rayon::prelude::*;

use crate::exact::CountTable;
use crate::hp::{self, RM};
use crate::saddle::{solve_saddle, SaddleSolution};
use crate::sequences::ComponentSequence;
use crate::{Error, Kind, Result};

/// Count ratios and their saddle-normalized form.
#[derive(Debug, Clone)]
pub struct RatioReport {
    /// The `n` values at which saddles were solved.
    pub n_values: Vec<u64>,
    /// Exact `c_n / c_{n+1}` at those `n`.
    pub ratios: Vec<BigFloat>,
    /// `y e^{delta_n} c_n / c_{n+1}`; tends to 1 under the ratio law.
    pub normalized: Vec<BigFloat>,
    /// Smallest `N` such that `c_n/c_{n+1} <= 1/y` for every `n > N` in the
    /// count table; `None` when the inequality still fails at the top.
    pub threshold_observed: Option<u64>,
}

impl RatioReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "n": self.n_values,
            "ratio": self.ratios.iter().map(hp::format_dec).collect::<Vec<_>>(),
            "normalized": self.normalized.iter().map(hp::format_dec).collect::<Vec<_>>(),
            "threshold_observed": self.threshold_observed,
        })
    }

    /// Two-column `n normalized` data for plotting.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("# n normalized_ratio\n");
        for (n, v) in self.n_values.iter().zip(&self.normalized) {
            out.push_str(&format!("{n} {}\n", hp::format_dec(v)));
        }
        out
    }
}

/// Exact `c_n / c_{n+1}` as a float at precision `p`.
fn count_ratio(counts: &CountTable, n: u64, p: usize) -> BigFloat {
    let num = hp::from_biguint(counts.get(n));
    let den = hp::from_biguint(counts.get(n + 1));
    hp::with_precision(&num, p + 32).div(&hp::with_precision(&den, p + 32), p, RM)
}

/// Builds a [`RatioReport`] from a count table and pre-solved saddles.
/// `counts` must reach one step beyond the largest saddle `n`.
pub fn ratio_report(
    counts: &CountTable,
    saddles: &[SaddleSolution],
    y: f64,
) -> Result<RatioReport> {
    let max_n = saddles.iter().map(|s| s.n).max().unwrap_or(0);
    if counts.n_max() < max_n + 1 {
        return Err(Error::RangeMismatch(format!(
            "counts reach n = {} but saddles need n = {}",
            counts.n_max(),
            max_n + 1
        )));
    }
    let p = saddles.first().map(|s| s.precision_bits).unwrap_or(crate::DEFAULT_PRECISION);
    let wp = p + 32;
    let yf = hp::from_f64(y, wp);
    let lny = hp::ln(&yf, wp);
    let mut n_values = Vec::new();
    let mut ratios = Vec::new();
    let mut normalized = Vec::new();
    for sol in saddles {
        let ratio = count_ratio(counts, sol.n, wp);
        let delta = sol.sigma.sub(&lny, wp, RM);
        let norm = yf.mul(&hp::exp(&delta, wp), wp, RM).mul(&ratio, wp, RM);
        n_values.push(sol.n);
        ratios.push(hp::with_precision(&ratio, p));
        normalized.push(hp::with_precision(&norm, p));
    }
    Ok(RatioReport {
        n_values,
        ratios,
        normalized,
        threshold_observed: ratio_threshold(counts, y, wp),
    })
}

/// Smallest `N` with `c_n/c_{n+1} <= 1/y` for all `N < n < n_max`, scanning
/// the whole table; `None` if the top of the table still violates it.
fn ratio_threshold(counts: &CountTable, y: f64, p: usize) -> Option<u64> {
    let inv_y = hp::one(p).div(&hp::from_f64(y, p), p, RM);
    let mut last_violation: Option<u64> = None;
    for n in 0..counts.n_max() {
        let r = count_ratio(counts, n, p);
        if hp::gt(&r, &inv_y) {
            last_violation = Some(n);
        }
    }
    match last_violation {
        None => Some(0),
        Some(v) if v + 1 >= counts.n_max() => None, // still failing at the top
        Some(v) => Some(v),
    }
}

/// Which quantity a scaling fit describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingQuantity {
    Delta,
    B2,
    Rho(u32),
}

impl ScalingQuantity {
    pub fn as_str(&self) -> String {
        match self {
            ScalingQuantity::Delta => "delta".into(),
            ScalingQuantity::B2 => "B2".into(),
            ScalingQuantity::Rho(l) => format!("rho_{l}"),
        }
    }
}

/// A least-squares log-log slope fit against an expected exponent.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub quantity: ScalingQuantity,
    pub samples: Vec<(u64, f64)>,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    pub deviation: f64,
}

impl ScalingReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "quantity": self.quantity.as_str(),
            "samples": self.samples.iter().map(|(n, v)| serde_json::json!([n, v])).collect::<Vec<_>>(),
            "fitted_slope": self.fitted_slope,
            "expected_slope": self.expected_slope,
            "deviation": self.deviation,
        })
    }

    pub fn to_plot_data(&self) -> String {
        let mut out = format!("# n {}\n", self.quantity.as_str());
        for (n, v) in &self.samples {
            out.push_str(&format!("{n} {v}\n"));
        }
        out
    }
}

/// Fits `log value ~ slope * log n` by least squares. Requires at least 4
/// positive samples spanning two decades of `n`.
pub fn scaling_exponent(
    quantity: ScalingQuantity,
    samples: &[(u64, f64)],
    expected: f64,
) -> Result<ScalingReport> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    let n_min = samples.iter().map(|(n, _)| *n).min().unwrap();
    let n_max = samples.iter().map(|(n, _)| *n).max().unwrap();
    if n_max < 100 * n_min {
        return Err(Error::InsufficientSamples(format!(
            "samples span n = {n_min}..{n_max}, less than two decades"
        )));
    }
    if samples.iter().any(|(_, v)| v.is_nan() || *v <= 0.0) {
        return Err(Error::InsufficientSamples("all sample values must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|(n, v)| ((*n as f64).ln(), v.ln())).collect();
    let len = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = (len * sxy - sx * sy) / (len * sxx - sx * sx);
    Ok(ScalingReport {
        quantity,
        samples: samples.to_vec(),
        fitted_slope: slope,
        expected_slope: expected,
        deviation: (slope - expected).abs(),
    })
}

/// Solves saddles for many `n` in parallel (order preserved).
pub fn saddle_samples(
    seq: &ComponentSequence,
    kind: Kind,
    ns: &[u64],
    p: usize,
    rho_orders: &[u32],
) -> Result<Vec<SaddleSolution>> {
    ns.par_iter().map(|&n| solve_saddle(seq, n, kind, p, rho_orders)).collect()
}

/// Outcome of checking the numeric hypotheses of the logical limit law.
#[derive(Debug, Clone)]
pub struct LimitLawVerdict {
    /// Ratio converging toward `1/y` over the sample and, when `y > 1`, an
    /// observed threshold beyond which `c_n/c_{n+1} <= 1/y` throughout.
    pub hypotheses_hold_over_sample: bool,
    pub threshold_observed: Option<u64>,
    /// `|y e^{delta} c_n/c_{n+1} - 1|` at the largest sampled `n`.
    pub final_normalized_deviation: f64,
}

impl LimitLawVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "hypotheses_hold_over_sample": self.hypotheses_hold_over_sample,
            "threshold_observed": self.threshold_observed,
            "final_normalized_deviation": self.final_normalized_deviation,
        })
    }
}

/// Checks the limit-law hypotheses for multisets of `seq` up to `n_max`:
/// `c_n/c_{n+1} -> 1/y`, and for `y > 1` an eventual `<= 1/y` inequality.
pub fn limit_law_check(
    seq: &ComponentSequence,
    y: f64,
    n_max: u64,
    p: usize,
) -> Result<LimitLawVerdict> {
    assert!(n_max >= 20, "need some room to compare two scales");
    let counts = crate::exact::count(seq, n_max + 1, Kind::Multiset)?;
    let wp = p + 32;

    let dev = |n: u64| -> f64 {
        let r = count_ratio(&counts, n, wp);
        (hp::to_f64(&r) * y - 1.0).abs()
    };
    let early = dev(n_max / 10);
    let late = dev(n_max - 1);
    let converging = late < early;

    let threshold = ratio_threshold(&counts, y, wp);
    let hold = converging && (y <= 1.0 || threshold.is_some());

    let sol = solve_saddle(seq, n_max - 1, Kind::Multiset, p, &[])?;
    let report = ratio_report(&counts, std::slice::from_ref(&sol), y)?;
    let final_dev =
        hp::to_f64(&report.normalized[0].sub(&hp::one(wp), wp, RM).abs());
    Ok(LimitLawVerdict {
        hypotheses_hold_over_sample: hold,
        threshold_observed: threshold,
        final_normalized_deviation: final_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::parse_descriptor;

    const P: usize = 128;

    #[test]
    fn slope_fit_recovers_power_law() {
        let samples: Vec<(u64, f64)> =
            [100u64, 1000, 10000, 100000].iter().map(|&n| (n, 3.0 * (n as f64).powf(-0.5))).collect();
        let rep = scaling_exponent(ScalingQuantity::Delta, &samples, -0.5).unwrap();
        assert!(rep.deviation < 1e-12, "deviation {}", rep.deviation);
    }

    #[test]
    fn slope_fit_preconditions() {
        let s = vec![(10u64, 1.0), (20, 0.5), (40, 0.25)];
        assert!(matches!(
            scaling_exponent(ScalingQuantity::Delta, &s, -1.0),
            Err(Error::InsufficientSamples(_))
        ));
        let s = vec![(10u64, 1.0), (20, 0.5), (40, 0.25), (80, 0.125)];
        assert!(matches!(
            scaling_exponent(ScalingQuantity::Delta, &s, -1.0),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn partitions_ratio_below_one() {
        let part = parse_descriptor("partitions").unwrap();
        let counts = crate::exact::count(&part, 120, Kind::Multiset).unwrap();
        let saddles = saddle_samples(&part, Kind::Multiset, &[40, 80, 100], P, &[]).unwrap();
        let rep = ratio_report(&counts, &saddles, 1.0).unwrap();
        // p(n) nondecreasing: every ratio <= 1, threshold 0 over the range
        assert_eq!(rep.threshold_observed, Some(0));
        for r in &rep.ratios {
            assert!(!hp::gt(r, &hp::one(P)));
        }
        // normalized ratio near 1 by n = 100
        let last = hp::to_f64(rep.normalized.last().unwrap());
        assert!((last - 1.0).abs() < 0.1, "normalized {last}");
    }

    #[test]
    fn colored_forests_ratio_near_half() {
        let cf2 = parse_descriptor("colored-forests:k=2").unwrap();
        let counts = crate::exact::count(&cf2, 130, Kind::Multiset).unwrap();
        let saddles = saddle_samples(&cf2, Kind::Multiset, &[128], P, &[]).unwrap();
        let rep = ratio_report(&counts, &saddles, 2.0).unwrap();
        let ratio = hp::to_f64(&rep.ratios[0]);
        assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
        let norm = hp::to_f64(&rep.normalized[0]);
        assert!((norm - 1.0).abs() < 0.1, "normalized {norm}");
    }

    #[test]
    fn ratio_report_range_mismatch() {
        let part = parse_descriptor("partitions").unwrap();
        let counts = crate::exact::count(&part, 30, Kind::Multiset).unwrap();
        let saddles = saddle_samples(&part, Kind::Multiset, &[30], P, &[]).unwrap();
        assert!(matches!(ratio_report(&counts, &saddles, 1.0), Err(Error::RangeMismatch(_))));
    }

    #[test]
    fn limit_law_small_scale() {
        let cf2 = parse_descriptor("colored-forests:k=2").unwrap();
        let verdict = limit_law_check(&cf2, 2.0, 150, P).unwrap();
        assert!(verdict.hypotheses_hold_over_sample);
        assert!(verdict.threshold_observed.is_some());
        assert!(verdict.final_normalized_deviation < 0.2);
    }

    #[test]
    fn plot_data_format() {
        let part = parse_descriptor("partitions").unwrap();
        let counts = crate::exact::count(&part, 60, Kind::Multiset).unwrap();
        let saddles = saddle_samples(&part, Kind::Multiset, &[20, 50], P, &[]).unwrap();
        let rep = ratio_report(&counts, &saddles, 1.0).unwrap();
        let plot = rep.to_plot_data();
        let lines: Vec<&str> = plot.trim_end().lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("20 "));
    }
}
