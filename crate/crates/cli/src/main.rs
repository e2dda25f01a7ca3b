//! `crl` — exact computations on digit-restricted integer sets from the
//! command line.
//!
//! Every subcommand prints one report to standard output in the format
//! chosen by `--format` (text, json, or csv where the result is tabular)
//! and is byte-reproducible: the same invocation with the same `--seed`
//! always emits the same output. JSON reports carry `"schema": "crl/1"`,
//! and values that may exceed the 53-bit float range (members, steps,
//! block sums) are encoded as decimal strings.
//!
//! Exit codes: 0 success, 1 domain errors (a well-formed request whose
//! answer does not exist or overflows), 2 usage errors (unparsable flags
//! or malformed grammar inputs), 3 an exhausted search budget — partial
//! results are still printed to standard output.

mod input;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use num::{BigRational, ToPrimitive};
use serde::Serialize;

use crl_core::alpha::Alpha;
use crl_core::digits::{DeltaStructure, DigitSpec};
use crl_core::dynamics::{
    self, random_unit_sequence, vdc_check, Average, RecurrenceValue, VdcReport,
};
use crl_core::equidist;
use crl_core::intset::IntegerSet;
use crl_core::ramsey::{self, Coloring, CvdwOutcome, Direction, MonoProgression};
use crl_core::{Error, Result};

const SCHEMA: &str = "crl/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

impl DirectionArg {
    fn to_core(self) -> Direction {
        match self {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        }
    }

    fn name(self) -> &'static str {
        match self {
            DirectionArg::Forward => "forward",
            DirectionArg::Backward => "backward",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "crl",
    version,
    about = "Exact enumeration, equidistribution, and recurrence statistics of digit-restricted integer sets"
)]
struct Cli {
    /// Output format; csv is available for tabular reports only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for the randomized suites (vdc).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for summation-heavy operations (weyl).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the first members of the digit-restricted set in increasing order.
    Enumerate {
        /// Digit restriction, e.g. "b=3;D=0,2".
        #[arg(long)]
        spec: String,
        /// How many members to list.
        #[arg(long)]
        count: u64,
    },
    /// Index of an integer under the order-preserving member bijection.
    Rank {
        #[arg(long)]
        spec: String,
        /// The integer to locate; must be a member.
        #[arg(long)]
        value: u128,
    },
    /// Membership test by base-b digit inspection.
    Contains {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        value: u128,
    },
    /// Consecutive-difference classes k_{n+h} - k_n and their decomposition
    /// into arithmetic progressions with power-of-|D| steps.
    Deltas {
        #[arg(long)]
        spec: String,
        /// Index gap h of the differences.
        #[arg(long, default_value_t = 1)]
        h: u64,
        /// Number of leading members analysed.
        #[arg(long = "N")]
        n: u64,
    },
    /// Residue distribution of the first members modulo q.
    Residues {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        q: u64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Normalized Weyl exponential sum (1/N) sum of e(alpha * k_n).
    Weyl {
        #[arg(long)]
        spec: String,
        /// Frequency: a rational "p/q", a decimal, "sqrt2", or "golden".
        #[arg(long)]
        alpha: String,
        #[arg(long = "N")]
        n: u64,
    },
    /// Star discrepancy of the fractional parts {alpha * k_n}.
    Discrepancy {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        alpha: String,
        #[arg(long = "N")]
        n: u64,
    },
    /// Spectral coefficients at every reduced rational p/q up to a
    /// denominator bound.
    Spectra {
        #[arg(long)]
        spec: String,
        /// Largest denominator q to include.
        #[arg(long = "den-limit")]
        den_limit: u64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Ergodic average of an observable along the member sequence.
    Ergavg {
        /// System: "cyclic:m=..,r=..", "torus:<angle>", or "bernoulli".
        #[arg(long)]
        system: String,
        /// Observable: "vector:..", "trig:..", "cylinder:..", or "interval:..".
        #[arg(long)]
        observable: String,
        #[arg(long)]
        spec: String,
        #[arg(long = "N")]
        n: u64,
    },
    /// Ergodic average over the index window [from, to).
    Window {
        #[arg(long)]
        system: String,
        #[arg(long)]
        observable: String,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Average along the index progression start, start + |D|^power,
    /// start + 2|D|^power, ... below N.
    Progavg {
        #[arg(long)]
        system: String,
        #[arg(long)]
        observable: String,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        start: u64,
        /// Exponent of the |D|-power index stride.
        #[arg(long)]
        power: u32,
        #[arg(long = "N")]
        n: u64,
    },
    /// Multiple-recurrence average E_n E_x f(x) f(T^k x) ... f(T^((ell-1)k) x)
    /// with k running through the members.
    Recur {
        #[arg(long)]
        system: String,
        #[arg(long)]
        observable: String,
        #[arg(long)]
        spec: String,
        /// Number of factors in the product.
        #[arg(long)]
        ell: u32,
        #[arg(long = "N")]
        n: u64,
    },
    /// Van der Corput difference inequality on a seeded random unit-modulus
    /// sequence.
    Vdc {
        /// Sequence length.
        #[arg(long = "N")]
        n: u64,
        /// Largest difference span averaged over.
        #[arg(long = "H")]
        h: u64,
    },
    /// Find a monochromatic progression whose step is a nonzero member,
    /// inside a periodically colored interval.
    VdwFind {
        #[arg(long)]
        spec: String,
        /// Color pattern (letters A-Z or digits), tiled to the width.
        #[arg(long)]
        pattern: String,
        /// Right end of the colored interval [1, width].
        #[arg(long)]
        width: u64,
        /// Progression length.
        #[arg(long)]
        t: u32,
    },
    /// Restricted van der Waerden number: least width forcing a
    /// monochromatic member-step progression, by pruned exhaustive search.
    VdwNumber {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        t: u32,
        /// Number of colors.
        #[arg(long)]
        colors: u8,
        /// Width cap for the search.
        #[arg(long)]
        wmax: u64,
        /// Node budget; past it the search aborts with exit code 3 and a
        /// partial report.
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
    },
    /// Certify that every consecutive block sum of scale-separated members
    /// base^h * r is again a nonzero member.
    Closure {
        #[arg(long)]
        spec: String,
        /// Scale parts "h:r,h:r,...".
        #[arg(long)]
        parts: String,
    },
    /// Census of member steps that admit a full progression inside an
    /// integer set, with the recurrence density average.
    Census {
        #[arg(long)]
        spec: String,
        /// The ambient set, e.g. "3*Z & [1,3072]" or "1 4 9 16".
        #[arg(long)]
        set: String,
        /// Progression length inside the set.
        #[arg(long)]
        ell: u32,
        /// Number of leading member steps examined.
        #[arg(long = "N")]
        n: u64,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_status(&err))
        }
    }
}

fn exit_status(err: &Error) -> u8 {
    match err {
        Error::InvalidSpec(_) | Error::InvalidInput(_) => 2,
        Error::Domain(_) | Error::KindMismatch(_) | Error::Overflow => 1,
        Error::BudgetExhausted { .. } => 3,
    }
}

fn no_csv(command: &str) -> Error {
    Error::InvalidInput(format!("--format csv is not available for {command}"))
}

fn emit_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Enumerate { spec, count } => enumerate(cli, spec, *count),
        Command::Rank { spec, value } => rank(cli, spec, *value),
        Command::Contains { spec, value } => contains(cli, spec, *value),
        Command::Deltas { spec, h, n } => deltas(cli, spec, *h, *n),
        Command::Residues { spec, q, n } => residues(cli, spec, *q, *n),
        Command::Weyl { spec, alpha, n } => weyl(cli, spec, alpha, *n),
        Command::Discrepancy { spec, alpha, n } => discrepancy(cli, spec, alpha, *n),
        Command::Spectra { spec, den_limit, n } => spectra(cli, spec, *den_limit, *n),
        Command::Ergavg {
            system,
            observable,
            spec,
            n,
        } => {
            let avg = dynamics::ergodic_average(
                &input::parse_system(system)?,
                &input::parse_observable(observable)?,
                &DigitSpec::parse(spec)?,
                *n,
            )?;
            averaged(cli, "ergavg", spec, &avg)
        }
        Command::Window {
            system,
            observable,
            spec,
            from,
            to,
        } => {
            let avg = dynamics::window_average(
                &input::parse_system(system)?,
                &input::parse_observable(observable)?,
                &DigitSpec::parse(spec)?,
                *from,
                *to,
            )?;
            averaged(cli, "window", spec, &avg)
        }
        Command::Progavg {
            system,
            observable,
            spec,
            start,
            power,
            n,
        } => {
            let avg = dynamics::progression_average(
                &input::parse_system(system)?,
                &input::parse_observable(observable)?,
                &DigitSpec::parse(spec)?,
                *start,
                *power,
                *n,
            )?;
            averaged(cli, "progavg", spec, &avg)
        }
        Command::Recur {
            system,
            observable,
            spec,
            ell,
            n,
        } => recur(cli, system, observable, spec, *ell, *n),
        Command::Vdc { n, h } => vdc(cli, *n, *h),
        Command::VdwFind {
            spec,
            pattern,
            width,
            t,
        } => vdw_find(cli, spec, pattern, *width, *t),
        Command::VdwNumber {
            spec,
            t,
            colors,
            wmax,
            budget,
        } => vdw_number(cli, spec, *t, *colors, *wmax, *budget),
        Command::Closure { spec, parts } => closure(cli, spec, parts),
        Command::Census {
            spec,
            set,
            ell,
            n,
            direction,
        } => census(cli, spec, set, *ell, *n, *direction),
    }
}

// ---------------------------------------------------------------- reports

#[derive(Serialize)]
struct EnumerateReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    count: u64,
    members: Vec<String>,
}

fn enumerate(cli: &Cli, spec_text: &str, count: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    if count == 0 {
        return Err(Error::Domain("nothing to enumerate: count is 0".into()));
    }
    let mut members = Vec::with_capacity(count as usize);
    let mut sums = Vec::with_capacity(count as usize);
    let mut cursor = spec.cursor();
    for i in 0..count {
        members.push(cursor.value());
        sums.push(cursor.digit_sum());
        if i + 1 < count {
            cursor.advance()?;
        }
    }
    Ok(match cli.format {
        Format::Text => {
            let line: Vec<String> = members.iter().map(u128::to_string).collect();
            format!("{}\n", line.join(" "))
        }
        Format::Json => emit_json(&EnumerateReport {
            schema: SCHEMA,
            command: "enumerate",
            spec: spec.to_string(),
            count,
            members: members.iter().map(u128::to_string).collect(),
        }),
        Format::Csv => {
            let mut out = String::from("index,member,digit_sum\n");
            for (i, (member, sum)) in members.iter().zip(&sums).enumerate() {
                writeln!(out, "{i},{member},{sum}").expect("string write");
            }
            out
        }
    })
}

#[derive(Serialize)]
struct RankReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    value: String,
    rank: String,
}

fn rank(cli: &Cli, spec_text: &str, value: u128) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let rank = spec
        .rank(value)
        .ok_or_else(|| Error::Domain(format!("{value} is not a member of {spec}")))?;
    Ok(match cli.format {
        Format::Text => format!("{rank}\n"),
        Format::Json => emit_json(&RankReport {
            schema: SCHEMA,
            command: "rank",
            spec: spec.to_string(),
            value: value.to_string(),
            rank: rank.to_string(),
        }),
        Format::Csv => return Err(no_csv("rank")),
    })
}

#[derive(Serialize)]
struct ContainsReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    value: String,
    member: bool,
}

fn contains(cli: &Cli, spec_text: &str, value: u128) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let member = spec.contains(value);
    Ok(match cli.format {
        Format::Text => format!("{member}\n"),
        Format::Json => emit_json(&ContainsReport {
            schema: SCHEMA,
            command: "contains",
            spec: spec.to_string(),
            value: value.to_string(),
            member,
        }),
        Format::Csv => return Err(no_csv("contains")),
    })
}

#[derive(Serialize)]
struct RunOut {
    start: u64,
    step: u64,
}

#[derive(Serialize)]
struct DeltaClassOut {
    difference: String,
    sum_jump: i64,
    count: usize,
    runs: Vec<RunOut>,
}

#[derive(Serialize)]
struct DeltasReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    h: u64,
    n: u64,
    window: u64,
    classes: Vec<DeltaClassOut>,
}

fn deltas(cli: &Cli, spec_text: &str, h: u64, n: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let structure: DeltaStructure = crl_core::digits::delta_star(&spec, h, n)?;
    Ok(match cli.format {
        Format::Text => {
            let mut out = format!(
                "h={} N={} window={} classes={}\n",
                structure.h,
                structure.n_limit,
                structure.window(),
                structure.len()
            );
            for ((difference, sum_jump), class) in structure.classes() {
                let runs: Vec<String> = class
                    .runs
                    .iter()
                    .map(|r| format!("{}+{}n", r.start, r.step))
                    .collect();
                writeln!(
                    out,
                    "k={difference} s={sum_jump} count={} runs=[{}]",
                    class.indices.len(),
                    runs.join(", ")
                )
                .expect("string write");
            }
            out
        }
        Format::Json => emit_json(&DeltasReport {
            schema: SCHEMA,
            command: "deltas",
            spec: spec.to_string(),
            h: structure.h,
            n: structure.n_limit,
            window: structure.window(),
            classes: structure
                .classes()
                .map(|((difference, sum_jump), class)| DeltaClassOut {
                    difference: difference.to_string(),
                    sum_jump: *sum_jump,
                    count: class.indices.len(),
                    runs: class
                        .runs
                        .iter()
                        .map(|r| RunOut {
                            start: r.start,
                            step: r.step,
                        })
                        .collect(),
                })
                .collect(),
        }),
        Format::Csv => {
            let mut out = String::from("difference,sum_jump,count,run_start,run_step\n");
            for ((difference, sum_jump), class) in structure.classes() {
                for run in &class.runs {
                    writeln!(
                        out,
                        "{difference},{sum_jump},{},{},{}",
                        class.indices.len(),
                        run.start,
                        run.step
                    )
                    .expect("string write");
                }
            }
            out
        }
    })
}

#[derive(Serialize)]
struct ResiduesReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    q: u64,
    n: u64,
    counts: Vec<u64>,
}

fn residues(cli: &Cli, spec_text: &str, q: u64, n: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let dist = equidist::residue_distribution(&spec, q, n)?;
    Ok(match cli.format {
        Format::Text => {
            let mut out = format!("q={} N={}\n", dist.q, dist.n);
            for (a, count) in dist.counts.iter().enumerate() {
                writeln!(
                    out,
                    "residue {a}: count={count} frequency={}",
                    dist.frequency(a as u64)
                )
                .expect("string write");
            }
            out
        }
        Format::Json => emit_json(&ResiduesReport {
            schema: SCHEMA,
            command: "residues",
            spec: spec.to_string(),
            q: dist.q,
            n: dist.n,
            counts: dist.counts.clone(),
        }),
        Format::Csv => {
            let mut bytes = Vec::new();
            equidist::write_residue_csv(&dist, &mut bytes)
                .map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
            String::from_utf8(bytes).expect("csv is utf-8")
        }
    })
}

#[derive(Serialize)]
struct WeylReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    alpha: String,
    n: u64,
    real: f64,
    imag: f64,
    modulus: f64,
}

fn weyl(cli: &Cli, spec_text: &str, alpha_text: &str, n: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let alpha = Alpha::parse(alpha_text)?;
    let sum = equidist::weyl_sum_window_threaded(&spec, &alpha, 0, n, cli.threads.max(1))?;
    Ok(match cli.format {
        Format::Text => format!(
            "alpha={alpha} N={n}\nreal={}\nimag={}\nmodulus={}\n",
            sum.re,
            sum.im,
            sum.norm()
        ),
        Format::Json => emit_json(&WeylReport {
            schema: SCHEMA,
            command: "weyl",
            spec: spec.to_string(),
            alpha: alpha.to_string(),
            n,
            real: sum.re,
            imag: sum.im,
            modulus: sum.norm(),
        }),
        Format::Csv => {
            let mut bytes = Vec::new();
            equidist::write_decay_csv(&alpha.to_string(), &[(n, sum)], &mut bytes)
                .map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
            String::from_utf8(bytes).expect("csv is utf-8")
        }
    })
}

#[derive(Serialize)]
struct DiscrepancyReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    alpha: String,
    n: u64,
    star_discrepancy: f64,
}

fn discrepancy(cli: &Cli, spec_text: &str, alpha_text: &str, n: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let alpha = Alpha::parse(alpha_text)?;
    let value = equidist::star_discrepancy(&spec, &alpha, n)?;
    Ok(match cli.format {
        Format::Text => format!("star_discrepancy={value}\n"),
        Format::Json => emit_json(&DiscrepancyReport {
            schema: SCHEMA,
            command: "discrepancy",
            spec: spec.to_string(),
            alpha: alpha.to_string(),
            n,
            star_discrepancy: value,
        }),
        Format::Csv => return Err(no_csv("discrepancy")),
    })
}

#[derive(Serialize)]
struct SpectralLineOut {
    numerator: u64,
    denominator: u64,
    real: f64,
    imag: f64,
    modulus: f64,
}

#[derive(Serialize)]
struct SpectraReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    den_limit: u64,
    n: u64,
    lines: Vec<SpectralLineOut>,
}

fn spectra(cli: &Cli, spec_text: &str, den_limit: u64, n: u64) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let lines = equidist::spectral_profile(&spec, den_limit, n)?;
    let rows: Vec<SpectralLineOut> = lines
        .iter()
        .map(|line| SpectralLineOut {
            numerator: line.num,
            denominator: line.den,
            real: line.value.re,
            imag: line.value.im,
            modulus: line.value.norm(),
        })
        .collect();
    Ok(match cli.format {
        Format::Text => {
            let mut out = format!("den_limit={den_limit} N={n}\n");
            for row in &rows {
                writeln!(
                    out,
                    "{}/{}: real={} imag={} modulus={}",
                    row.numerator, row.denominator, row.real, row.imag, row.modulus
                )
                .expect("string write");
            }
            out
        }
        Format::Json => emit_json(&SpectraReport {
            schema: SCHEMA,
            command: "spectra",
            spec: spec.to_string(),
            den_limit,
            n,
            lines: rows,
        }),
        Format::Csv => {
            let mut out = String::from("numerator,denominator,real,imag,modulus\n");
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.numerator, row.denominator, row.real, row.imag, row.modulus
                )
                .expect("string write");
            }
            out
        }
    })
}

#[derive(Serialize)]
struct TrigTermOut {
    frequency: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AverageOut {
    Vector {
        values: Vec<String>,
        floats: Vec<f64>,
    },
    Trig {
        terms: Vec<TrigTermOut>,
    },
    Moments {
        mean: String,
        deviation_sq: String,
    },
}

#[derive(Serialize)]
struct AverageReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    average: AverageOut,
}

fn averaged(cli: &Cli, command: &'static str, spec_text: &str, avg: &Average) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    Ok(match cli.format {
        Format::Text => match avg {
            Average::Vector(values) => {
                let mut out = String::new();
                for (x, v) in values.iter().enumerate() {
                    writeln!(out, "x={x} value={v} ({})", rat_f64(v)).expect("string write");
                }
                out
            }
            Average::TrigPoly(terms) => {
                let mut out = String::new();
                for (freq, c) in terms {
                    writeln!(out, "freq={freq} re={} im={}", c.re, c.im).expect("string write");
                }
                out
            }
            Average::Moments { mean, deviation_sq } => {
                format!(
                    "mean={mean} ({})\ndeviation_sq={deviation_sq} ({})\n",
                    rat_f64(mean),
                    rat_f64(deviation_sq)
                )
            }
        },
        Format::Json => emit_json(&AverageReport {
            schema: SCHEMA,
            command,
            spec: spec.to_string(),
            average: match avg {
                Average::Vector(values) => AverageOut::Vector {
                    values: values.iter().map(BigRational::to_string).collect(),
                    floats: values.iter().map(rat_f64).collect(),
                },
                Average::TrigPoly(terms) => AverageOut::Trig {
                    terms: terms
                        .iter()
                        .map(|(freq, c)| TrigTermOut {
                            frequency: *freq,
                            re: c.re,
                            im: c.im,
                        })
                        .collect(),
                },
                Average::Moments { mean, deviation_sq } => AverageOut::Moments {
                    mean: mean.to_string(),
                    deviation_sq: deviation_sq.to_string(),
                },
            },
        }),
        Format::Csv => return Err(no_csv(command)),
    })
}

#[derive(Serialize)]
struct RecurReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    ell: u32,
    n: u64,
    value: f64,
    exact: Option<String>,
}

fn recur(
    cli: &Cli,
    system: &str,
    observable: &str,
    spec_text: &str,
    ell: u32,
    n: u64,
) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let out: RecurrenceValue = dynamics::multi_recurrence_average(
        &input::parse_system(system)?,
        &input::parse_observable(observable)?,
        &spec,
        ell,
        n,
    )?;
    Ok(match cli.format {
        Format::Text => {
            let exact = out
                .exact
                .as_ref()
                .map_or_else(|| "none".to_string(), BigRational::to_string);
            format!("value={}\nexact={exact}\n", out.value)
        }
        Format::Json => emit_json(&RecurReport {
            schema: SCHEMA,
            command: "recur",
            spec: spec.to_string(),
            ell,
            n,
            value: out.value,
            exact: out.exact.as_ref().map(BigRational::to_string),
        }),
        Format::Csv => return Err(no_csv("recur")),
    })
}

#[derive(Serialize)]
struct VdcOut {
    schema: &'static str,
    command: &'static str,
    seed: u64,
    n: u64,
    h: u64,
    lhs: f64,
    rhs: f64,
    holds: bool,
}

fn vdc(cli: &Cli, n: u64, h: u64) -> Result<String> {
    let sequence: Vec<Complex64> = random_unit_sequence(cli.seed, n as usize);
    let report: VdcReport = vdc_check(&sequence, h as usize)?;
    Ok(match cli.format {
        Format::Text => format!(
            "seed={} N={n} H={h}\nlhs={}\nrhs={}\nholds={}\n",
            cli.seed, report.lhs, report.rhs, report.holds
        ),
        Format::Json => emit_json(&VdcOut {
            schema: SCHEMA,
            command: "vdc",
            seed: cli.seed,
            n,
            h,
            lhs: report.lhs,
            rhs: report.rhs,
            holds: report.holds,
        }),
        Format::Csv => return Err(no_csv("vdc")),
    })
}

#[derive(Serialize)]
struct WitnessOut {
    start: u64,
    step: String,
    len: u32,
    color: u8,
    verified: bool,
}

#[derive(Serialize)]
struct VdwFindReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    pattern: String,
    width: u64,
    t: u32,
    witness: Option<WitnessOut>,
}

fn color_letter(color: u8) -> char {
    (b'A' + color) as char
}

fn vdw_find(cli: &Cli, spec_text: &str, pattern: &str, width: u64, t: u32) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let coloring = Coloring::from_pattern(pattern, width)?;
    let witness: Option<MonoProgression> = ramsey::find_mono_progression(&coloring, t, &spec)?;
    let verified = witness
        .as_ref()
        .map(|w| ramsey::verify_mono_progression(&coloring, &spec, w));
    Ok(match cli.format {
        Format::Text => match (&witness, verified) {
            (Some(w), Some(ok)) => format!(
                "start={} step={} len={} color={} verified={ok}\n",
                w.start,
                w.step,
                w.len,
                color_letter(w.color)
            ),
            _ => "no monochromatic progression\n".to_string(),
        },
        Format::Json => emit_json(&VdwFindReport {
            schema: SCHEMA,
            command: "vdw-find",
            spec: spec.to_string(),
            pattern: pattern.to_string(),
            width,
            t,
            witness: witness.as_ref().zip(verified).map(|(w, ok)| WitnessOut {
                start: w.start,
                step: w.step.to_string(),
                len: w.len,
                color: w.color,
                verified: ok,
            }),
        }),
        Format::Csv => return Err(no_csv("vdw-find")),
    })
}

#[derive(Serialize)]
struct VdwNumberReport {
    schema: &'static str,
    command: &'static str,
    spec: String,
    t: u32,
    colors: u8,
    wmax: u64,
    outcome: &'static str,
    /// The number itself, or the width cap for unknown outcomes, or the
    /// deepest certified progression-free width on a budget abort.
    width: u64,
    nodes: Option<u64>,
}

fn vdw_number(
    cli: &Cli,
    spec_text: &str,
    t: u32,
    colors: u8,
    wmax: u64,
    budget: u64,
) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let render = |outcome: &'static str, width: u64, nodes: Option<u64>| -> Result<String> {
        Ok(match cli.format {
            Format::Text => match nodes {
                Some(nodes) => format!("{outcome} width={width} nodes={nodes}\n"),
                None => format!("{outcome}={width}\n"),
            },
            Format::Json => emit_json(&VdwNumberReport {
                schema: SCHEMA,
                command: "vdw-number",
                spec: spec.to_string(),
                t,
                colors,
                wmax,
                outcome,
                width,
                nodes,
            }),
            Format::Csv => return Err(no_csv("vdw-number")),
        })
    };
    match ramsey::cvdw_number(&spec, t, colors, wmax, budget) {
        Ok(CvdwOutcome::Number(w)) => render("number", w, None),
        Ok(CvdwOutcome::UnknownUpTo(w)) => render("unknown_up_to", w, None),
        Err(Error::BudgetExhausted { nodes, deepest }) => {
            // Partial report still goes to standard output; the caller sees
            // the abort through exit code 3.
            print!("{}", render("budget_exhausted", deepest, Some(nodes))?);
            Err(Error::BudgetExhausted { nodes, deepest })
        }
        Err(other) => Err(other),
    }
}

#[derive(Serialize)]
struct BlockOut {
    from: usize,
    to: usize,
    sum: String,
    member: bool,
}

#[derive(Serialize)]
struct ClosureOut {
    schema: &'static str,
    command: &'static str,
    spec: String,
    elements: Vec<String>,
    scales_disjoint: bool,
    certified: bool,
    blocks: Vec<BlockOut>,
}

fn closure(cli: &Cli, spec_text: &str, parts_text: &str) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let parts = input::parse_parts(parts_text)?;
    let report = ramsey::sum_closure_certify(&spec, &parts)?;
    Ok(match cli.format {
        Format::Text => {
            let elements: Vec<String> = report.elements.iter().map(u128::to_string).collect();
            let mut out = format!(
                "elements={}\nscales_disjoint={}\ncertified={}\n",
                elements.join(","),
                report.scales_disjoint,
                report.certified
            );
            for block in &report.blocks {
                writeln!(
                    out,
                    "block {}..{}: sum={} member={}",
                    block.from, block.to, block.sum, block.member
                )
                .expect("string write");
            }
            out
        }
        Format::Json => emit_json(&ClosureOut {
            schema: SCHEMA,
            command: "closure",
            spec: spec.to_string(),
            elements: report.elements.iter().map(u128::to_string).collect(),
            scales_disjoint: report.scales_disjoint,
            certified: report.certified,
            blocks: report
                .blocks
                .iter()
                .map(|b| BlockOut {
                    from: b.from,
                    to: b.to,
                    sum: b.sum.to_string(),
                    member: b.member,
                })
                .collect(),
        }),
        Format::Csv => {
            let mut out = String::from("from,to,sum,member\n");
            for b in &report.blocks {
                writeln!(out, "{},{},{},{}", b.from, b.to, b.sum, b.member).expect("string write");
            }
            out
        }
    })
}

#[derive(Serialize)]
struct CensusEntryOut {
    index: u64,
    step: String,
    first_witness: u64,
    witness_count: u64,
}

#[derive(Serialize)]
struct CensusOut {
    schema: &'static str,
    command: &'static str,
    spec: String,
    set: String,
    ell: u32,
    n: u64,
    direction: &'static str,
    density: String,
    density_float: f64,
    value: String,
    value_float: f64,
    entries: Vec<CensusEntryOut>,
}

fn census(
    cli: &Cli,
    spec_text: &str,
    set_text: &str,
    ell: u32,
    n: u64,
    direction: DirectionArg,
) -> Result<String> {
    let spec = DigitSpec::parse(spec_text)?;
    let set = IntegerSet::parse(set_text)?;
    let report = ramsey::step_census(&set, &spec, ell, n, direction.to_core())?;
    let value = ramsey::density_recurrence_average(&set, &spec, ell, n, direction.to_core())?;
    let density = report.density();
    Ok(match cli.format {
        Format::Text => {
            let mut out = format!(
                "ell={} N={} upper={} direction={} entries={}\ndensity={} ({})\nvalue={} ({})\n",
                report.ell,
                report.n_limit,
                report.upper,
                direction.name(),
                report.entries.len(),
                density,
                rat_f64(&density),
                value,
                rat_f64(&value)
            );
            for entry in &report.entries {
                writeln!(
                    out,
                    "n={} step={} first={} count={}",
                    entry.index, entry.step, entry.first_witness, entry.witness_count
                )
                .expect("string write");
            }
            out
        }
        Format::Json => emit_json(&CensusOut {
            schema: SCHEMA,
            command: "census",
            spec: spec.to_string(),
            set: set_text.to_string(),
            ell,
            n,
            direction: direction.name(),
            density: density.to_string(),
            density_float: rat_f64(&density),
            value: value.to_string(),
            value_float: rat_f64(&value),
            entries: report
                .entries
                .iter()
                .map(|e| CensusEntryOut {
                    index: e.index,
                    step: e.step.to_string(),
                    first_witness: e.first_witness,
                    witness_count: e.witness_count,
                })
                .collect(),
        }),
        Format::Csv => {
            let mut out = String::from("index,step,first_witness,witness_count\n");
            for e in &report.entries {
                writeln!(
                    out,
                    "{},{},{},{}",
                    e.index, e.step, e.first_witness, e.witness_count
                )
                .expect("string write");
            }
            out
        }
    })
}
