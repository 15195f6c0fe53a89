//! Command-line front end for the enumeration engine.
//!
//! Every subcommand emits machine-readable output (JSON objects with
//! `schema_version: 1`, or CSV / plot-data for tabular results), with all
//! numerics as decimal strings at full working precision. Exit codes:
//! 0 success, 1 domain error (no saddle, oracle cap exceeded, not
//! expansive, ...), 2 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use expanum::asymptotics::{
    closed_form_constants, closed_form_estimate, hardy_ramanujan, kappa2, theorem1_estimate,
};
use expanum::diagnostics::{
    limit_law_check, ratio_report, saddle_samples, scaling_exponent, ScalingQuantity,
};
use expanum::exact::{brute_force_count_with_cap, count, star_transform, DEFAULT_ORACLE_CAP};
use expanum::saddle::{khintchine_reconstruct, solve_saddle};
use expanum::sequences::{parse_descriptor, ComponentSequence};
use expanum::{hp, Error, Kind};

#[derive(Parser)]
#[command(name = "expanum", version, about = "Exact and asymptotic enumeration of multisets and selections")]
struct Cli {
    /// Working precision in bits (>= 64)
    #[arg(long, global = true, env = "EXPANUM_PRECISION", default_value_t = 128)]
    precision: usize,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Multiset,
    Selection,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Multiset => Kind::Multiset,
            KindArg::Selection => Kind::Selection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    PlotData,
}

#[derive(Args)]
struct SeqArg {
    /// Sequence descriptor: `partitions`, `plane-partitions`,
    /// `central-binomial`, `constant:c=C`, `colored-forests:k=K`,
    /// `parity-colored:k=K`, `lollipop:alpha=A,k=K`,
    /// `power-exp:K=..,r=..,y=..`, `explicit:list=..` or `explicit:file=..`
    #[arg(long)]
    seq: String,
}

impl SeqArg {
    fn build(&self) -> Result<ComponentSequence, Error> {
        parse_descriptor(&self.seq)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts c_0..c_n via the divisor-weight recurrence
    Count {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
    },
    /// Brute-force oracle count: sum over all partitions of n (capped)
    Brute {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        #[arg(long)]
        n: u64,
        /// Enumeration cap on n
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: u64,
    },
    /// Solve the saddle equation M_n(sigma) = n
    Saddle {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        #[arg(long)]
        n: u64,
        /// Cumulant orders rho_l to evaluate at the saddle, e.g. `3,4`
        #[arg(long, value_delimiter = ',')]
        rho: Vec<u32>,
    },
    /// Asymptotic estimates of the counts
    Estimate {
        #[arg(long, value_enum)]
        method: EstimateMethod,
        /// Sequence (required for all methods except kappa2)
        #[arg(long)]
        seq: Option<String>,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        #[arg(long)]
        n: Option<u64>,
        /// kappa2 inputs
        #[arg(long = "K")]
        big_k: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Khintchine identity: reconstruct log c_n at several tilts and
    /// report the worst absolute log-error against the exact count
    Identity {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        #[arg(long)]
        n: u64,
        /// Multiples of the saddle tilt to evaluate at
        #[arg(long, value_delimiter = ',', default_value = "1.0,1.5,0.7")]
        sigma_scales: Vec<f64>,
    },
    /// Count-ratio report: c_n/c_{n+1}, normalized by y e^{delta_n}
    Ratio {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long)]
        n_max: u64,
        /// Spacing of the n values at which saddles are solved
        #[arg(long, default_value_t = 100)]
        step: u64,
        /// Growth base y (defaults to the sequence's declared value)
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Log-log slope fit of a saddle quantity against n
    Scaling {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, value_enum, default_value = "multiset")]
        kind: KindArg,
        /// Quantity to fit: `delta`, `b2`, or `rhoL` (e.g. `rho3`)
        #[arg(long)]
        quantity: String,
        /// Sample points, e.g. `1000,10000,100000,1000000`
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<u64>,
        /// Expected slope (defaults to the value implied by declared r)
        #[arg(long)]
        expected: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Check the numeric hypotheses of the logical limit law
    LimitLaw {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long)]
        n_max: u64,
        /// Growth base y (defaults to the sequence's declared value)
        #[arg(long)]
        y: Option<f64>,
    },
    /// Star transform a*_j = sum_{lk=j} a_l / k (exact rationals)
    Star {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateMethod {
    Theorem1,
    ClosedForm,
    HardyRamanujan,
    Kappa2,
}

fn declared_y(seq: &ComponentSequence, flag: Option<f64>) -> Result<f64, Error> {
    flag.or_else(|| seq.declared_params().map(|p| p.y)).ok_or_else(|| {
        Error::InvalidFamilyParams(format!(
            "sequence `{}` declares no growth base y; pass --y",
            seq.descriptor()
        ))
    })
}

fn run(cli: Cli) -> Result<String, Error> {
    let p = cli.precision;
    if p < 64 {
        return Err(Error::InvalidFamilyParams(format!(
            "precision must be at least 64 bits, got {p}"
        )));
    }
    match cli.command {
        Command::Count { seq, kind, n, format } => {
            let table = count(&seq.build()?, n, kind.into())?;
            Ok(match format {
                TableFormat::Csv => table.to_csv(),
                TableFormat::Json => pretty(table.to_json()),
            })
        }
        Command::Brute { seq, kind, n, cap } => {
            let seq = seq.build()?;
            let value = brute_force_count_with_cap(&seq, n, kind.into(), cap)?;
            Ok(pretty(serde_json::json!({
                "schema_version": 1,
                "seq": seq.descriptor(),
                "kind": Kind::from(kind).as_str(),
                "n": n,
                "count": value.to_string(),
            })))
        }
        Command::Saddle { seq, kind, n, rho } => {
            let sol = solve_saddle(&seq.build()?, n, kind.into(), p, &rho)?;
            Ok(pretty(sol.to_json()))
        }
        Command::Estimate { method, seq, kind, n, big_k, r } => {
            let need_seq = || -> Result<ComponentSequence, Error> {
                parse_descriptor(seq.as_deref().ok_or_else(|| {
                    Error::InvalidFamilyParams("--seq is required for this method".into())
                })?)
            };
            let need_n = || -> Result<u64, Error> {
                n.ok_or_else(|| Error::InvalidFamilyParams("--n is required for this method".into()))
            };
            match method {
                EstimateMethod::Kappa2 => {
                    let (big_k, r) = big_k.zip(r).ok_or_else(|| {
                        Error::InvalidFamilyParams("kappa2 needs --K and --r".into())
                    })?;
                    if !(big_k > 0.0 && r > 0.0) {
                        return Err(Error::InvalidFamilyParams("kappa2 needs K > 0, r > 0".into()));
                    }
                    Ok(pretty(serde_json::json!({
                        "schema_version": 1,
                        "formula": "kappa2",
                        "K": big_k,
                        "r": r,
                        "kappa2": hp::format_dec(&kappa2(big_k, r, p)),
                    })))
                }
                EstimateMethod::Theorem1 => {
                    let lv = theorem1_estimate(&need_seq()?, need_n()?, kind.into(), p)?;
                    Ok(pretty(lv.to_json("theorem1", n.unwrap())))
                }
                EstimateMethod::ClosedForm => {
                    let sq = need_seq()?;
                    let constants = closed_form_constants(&sq, kind.into(), p)?;
                    let lv = closed_form_estimate(&constants, constants.y, need_n()?);
                    let mut j = lv.to_json("closed_form", n.unwrap());
                    j["kappa1"] = hp::format_dec(&constants.kappa1).into();
                    j["kappa2"] = hp::format_dec(&constants.kappa2).into();
                    Ok(pretty(j))
                }
                EstimateMethod::HardyRamanujan => {
                    Ok(pretty(hardy_ramanujan(need_n()?, p).to_json("hardy_ramanujan", n.unwrap())))
                }
            }
        }
        Command::Identity { seq, kind, n, sigma_scales } => {
            let seq = seq.build()?;
            let kind: Kind = kind.into();
            let table = count(&seq, n, kind)?;
            let log_exact = hp::ln_biguint(table.get(n), p);
            let sol = solve_saddle(&seq, n, kind, p, &[])?;
            let mut entries = Vec::new();
            let mut max_err = 0f64;
            for &scale in &sigma_scales {
                let sigma = sol.sigma.mul(&hp::from_f64(scale, p), p, hp::RM);
                let lv = khintchine_reconstruct(&seq, n, &sigma, kind, p)?;
                let err = hp::to_f64(&lv.log_e.sub(&log_exact, p, hp::RM).abs());
                max_err = max_err.max(err);
                entries.push(serde_json::json!({
                    "scale": scale,
                    "sigma": hp::format_dec(&sigma),
                    "log_reconstructed": hp::format_dec(&lv.log_e),
                    "abs_log_error": err,
                }));
            }
            Ok(pretty(serde_json::json!({
                "schema_version": 1,
                "seq": seq.descriptor(),
                "kind": kind.as_str(),
                "n": n,
                "log_exact": hp::format_dec(&log_exact),
                "entries": entries,
                "max_abs_log_error": max_err,
            })))
        }
        Command::Ratio { seq, n_max, step, y, format } => {
            if step == 0 || n_max < 2 {
                return Err(Error::InvalidFamilyParams(
                    "ratio requires --step >= 1 and --n-max >= 2".into(),
                ));
            }
            let seq = seq.build()?;
            let y = declared_y(&seq, y)?;
            let counts = count(&seq, n_max, Kind::Multiset)?;
            let mut ns: Vec<u64> = (step..n_max).step_by(step as usize).collect();
            if ns.last() != Some(&(n_max - 1)) {
                ns.push(n_max - 1);
            }
            let saddles = saddle_samples(&seq, Kind::Multiset, &ns, p, &[])?;
            let report = ratio_report(&counts, &saddles, y)?;
            Ok(match format {
                ReportFormat::Json => pretty(report.to_json()),
                ReportFormat::PlotData => report.to_plot_data(),
            })
        }
        Command::Scaling { seq, kind, quantity, n_list, expected, format } => {
            let seq = seq.build()?;
            let kind: Kind = kind.into();
            let quantity = parse_quantity(&quantity)?;
            let r = seq.declared_params().map(|q| q.r);
            let expected = expected
                .or_else(|| r.map(|r| default_slope(quantity, r)))
                .ok_or_else(|| {
                    Error::InvalidFamilyParams(
                        "no declared r to derive the expected slope from; pass --expected".into(),
                    )
                })?;
            let rho_orders: Vec<u32> = match quantity {
                ScalingQuantity::Rho(l) => vec![l],
                _ => vec![],
            };
            let saddles = saddle_samples(&seq, kind, &n_list, p, &rho_orders)?;
            let samples: Vec<(u64, f64)> = saddles
                .iter()
                .map(|s| {
                    let v = match quantity {
                        ScalingQuantity::Delta => {
                            s.delta.as_ref().map(hp::to_f64).unwrap_or(f64::NAN)
                        }
                        ScalingQuantity::B2 => hp::to_f64(&s.b2),
                        ScalingQuantity::Rho(_) => hp::to_f64(&s.rho[0].1),
                    };
                    (s.n, v)
                })
                .collect();
            let report = scaling_exponent(quantity, &samples, expected)?;
            Ok(match format {
                ReportFormat::Json => pretty(report.to_json()),
                ReportFormat::PlotData => report.to_plot_data(),
            })
        }
        Command::LimitLaw { seq, n_max, y } => {
            let seq = seq.build()?;
            let y = declared_y(&seq, y)?;
            let verdict = limit_law_check(&seq, y, n_max, p)?;
            Ok(pretty(verdict.to_json()))
        }
        Command::Star { seq, n, format } => {
            let seq = seq.build()?;
            let star = star_transform(&seq, n)?;
            Ok(match format {
                TableFormat::Csv => {
                    // exact fractions, one `j,numerator/denominator` row each
                    let mut out = String::from("j,star\n");
                    for j in 1..=n {
                        out.push_str(&format!("{j},{}\n", star.get(j)));
                    }
                    out
                }
                TableFormat::Json => pretty(serde_json::json!({
                    "schema_version": 1,
                    "seq": seq.descriptor(),
                    "star": (1..=n).map(|j| star.get(j).to_string()).collect::<Vec<_>>(),
                })),
            })
        }
    }
}

fn parse_quantity(s: &str) -> Result<ScalingQuantity, Error> {
    match s {
        "delta" => Ok(ScalingQuantity::Delta),
        "b2" | "B2" => Ok(ScalingQuantity::B2),
        _ => {
            if let Some(l) = s.strip_prefix("rho").and_then(|t| u32::from_str(t).ok()) {
                if l >= 3 {
                    return Ok(ScalingQuantity::Rho(l));
                }
            }
            Err(Error::InvalidFamilyParams(format!(
                "unknown quantity `{s}` (expected delta, b2, or rhoL with L >= 3)"
            )))
        }
    }
}

fn default_slope(q: ScalingQuantity, r: f64) -> f64 {
    match q {
        ScalingQuantity::Delta => -1.0 / (r + 1.0),
        ScalingQuantity::B2 => (r + 2.0) / (r + 1.0),
        ScalingQuantity::Rho(l) => (r + l as f64) / (r + 1.0),
    }
}

fn pretty(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(text) => {
            let result = match out_path {
                Some(path) => std::fs::write(path, text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(err) = result {
                eprintln!("error: {err}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
