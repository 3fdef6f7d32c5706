use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use qnormal::cantor::{cantor_digits, cantor_value, format_rational, orbit as exact_orbit};
use qnormal::construction::{
    approximation_history, basic_sequence_from, limit_function_within, LimitFunction,
};
use qnormal::generators::champernowne_bits;
use qnormal::normality::{
    interval_frequency, non_normality_report, program_orbit, star_discrepancy,
};
use qnormal::Error;

use crate::output::{emit, Exact};
use crate::{
    domain_end, BuildArgs, ChampernowneArgs, DiscrepancyArgs, Failure, SeriesArgs, VerifyArgs,
};

/// Upper end of `--trace`: number of approximations `f_s` rebuilt.
const TRACE_LIMIT: u64 = 100_000;

#[derive(Serialize)]
struct BuildDoc {
    format: &'static str,
    stages: usize,
    witness_stage: usize,
    max_position: u64,
    blocks: Vec<BlockRow>,
    f: Vec<FRow>,
    q_exponents: Vec<u64>,
    bound: Vec<BoundRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceRow>>,
}

#[derive(Serialize)]
struct BlockRow {
    block: usize,
    bit: u8,
    window_start: u64,
    scan_end: u64,
}

#[derive(Serialize)]
struct FRow {
    position: u64,
    value: u64,
    block: Option<usize>,
    bit: Option<u8>,
    certificate: u64,
    q_exponent: Option<u64>,
}

#[derive(Serialize)]
struct BoundRow {
    block: usize,
    position: u64,
    value: u64,
    step_limit: u64,
    closed_limit: u64,
    step_ok: bool,
    closed_ok: bool,
    next_value: Option<u64>,
    next_within_closed: Option<bool>,
}

#[derive(Serialize)]
struct TraceRow {
    position: u64,
    changes: Vec<TraceChange>,
}

#[derive(Serialize)]
struct TraceChange {
    stage: usize,
    value: u64,
}

pub fn build(args: &BuildArgs) -> Result<(), Failure> {
    let registry = args.registry.load()?;
    let stages = args.stages as usize;
    let max_position = match args.max_pos {
        Some(m) => m,
        None => domain_end(stages)?,
    };
    let f = limit_function_within(&registry, max_position, stages)?;
    let q = basic_sequence_from(&f, max_position as usize)?;
    let q_exponents = q.exponents().expect("constructed bases are powers of two");

    let rows: Vec<FRow> = f
        .values()
        .iter()
        .enumerate()
        .map(|(p, &value)| {
            let block = LimitFunction::block_of(p as u64);
            FRow {
                position: p as u64,
                value,
                block,
                bit: block.and_then(|t| f.chosen_bit(t)),
                certificate: f.certificates()[p],
                q_exponent: q_exponents.get(p).copied(),
            }
        })
        .collect();
    let bound = qnormal::construction::verify_bound(f.values())
        .checks
        .iter()
        .map(|c| BoundRow {
            block: c.block,
            position: c.position,
            value: c.value,
            step_limit: c.step_limit,
            closed_limit: c.closed_limit,
            step_ok: c.step_ok(),
            closed_ok: c.closed_ok(),
            next_value: c.next_value,
            next_within_closed: c.next_within_closed(),
        })
        .collect();
    let trace = if args.trace {
        Some(trace(&registry, &f)?)
    } else {
        None
    };
    let doc = BuildDoc {
        format: "qnormal.build/v1",
        stages: f.stages(),
        witness_stage: f.witness_stage(),
        max_position,
        blocks: f
            .blocks()
            .iter()
            .map(|b| BlockRow {
                block: b.block,
                bit: b.bit,
                window_start: b.window_start,
                scan_end: b.scan_end,
            })
            .collect(),
        f: rows,
        q_exponents: q_exponents.clone(),
        bound,
        trace,
    };
    emit(&args.output, &doc, |w| {
        for row in &doc.f {
            w.serialize(row)?;
        }
        Ok(())
    })
}

fn trace(
    registry: &qnormal::programs::Registry,
    f: &LimitFunction,
) -> Result<Vec<TraceRow>, Failure> {
    let last = f.certificates().iter().copied().max().unwrap_or(0);
    if last > TRACE_LIMIT {
        return Err(Error::ResourceLimit {
            required: last as usize,
            limit: TRACE_LIMIT as usize,
        }
        .into());
    }
    let history = approximation_history(registry, f.stages(), last as usize)?;
    Ok((0..f.values().len())
        .map(|p| {
            let mut changes: Vec<TraceChange> = Vec::new();
            for fs in &history {
                if let Some(v) = fs.value(p) {
                    if changes.last().is_none_or(|c| c.value != v) {
                        changes.push(TraceChange {
                            stage: fs.stage(),
                            value: v,
                        });
                    }
                }
            }
            TraceRow {
                position: p as u64,
                changes,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct VerifyDoc {
    format: &'static str,
    stages: usize,
    witnesses: Vec<WitnessRow>,
    reals: Vec<RealRow>,
    all_passed: bool,
}

#[derive(Serialize)]
struct WitnessRow {
    index: usize,
    source: usize,
    checkpoint: u64,
    chosen_bit: u8,
    low_hits: u64,
    high_hits: u64,
    fraction_low: String,
    fraction_high: String,
    orbit_fraction_low: String,
    deviation: String,
    passed: bool,
}

#[derive(Serialize)]
struct RealRow {
    source: usize,
    indices: Vec<usize>,
    verdict: Option<bool>,
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let registry = args.registry.load()?;
    let stages = args.stages as usize;
    let f = limit_function_within(&registry, domain_end(stages)?, stages)?;

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in 0..stages {
        groups.entry(registry.root_of(e)?).or_default().push(e);
    }
    let mut witnesses = Vec::new();
    let mut reals = Vec::new();
    for (&source, indices) in &groups {
        let report = non_normality_report(&registry, indices[0], &f, indices)?;
        for c in &report.checkpoints {
            witnesses.push(WitnessRow {
                index: c.index,
                source,
                checkpoint: c.witness.checkpoint,
                chosen_bit: c.witness.chosen_bit,
                low_hits: c.witness.low_hits,
                high_hits: c.witness.high_hits,
                fraction_low: format_rational(&c.witness.fraction_low),
                fraction_high: format_rational(&c.witness.fraction_high),
                orbit_fraction_low: format_rational(&c.orbit_frequency.fraction),
                deviation: format_rational(&c.deviation),
                passed: c.witness.passed() && c.deviates(),
            });
        }
        reals.push(RealRow {
            source,
            indices: indices.clone(),
            verdict: report.verdict(),
        });
    }
    witnesses.sort_by_key(|w| w.index);
    let failed: Vec<usize> = witnesses
        .iter()
        .filter(|w| !w.passed)
        .map(|w| w.index)
        .collect();
    let doc = VerifyDoc {
        format: "qnormal.verify/v1",
        stages,
        witnesses,
        reals,
        all_passed: failed.is_empty(),
    };
    emit(&args.output, &doc, |w| {
        for row in &doc.witnesses {
            w.serialize(row)?;
        }
        Ok(())
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::WitnessFailed(format!("indices {failed:?} failed")))
    }
}

#[derive(Serialize)]
struct ExpandDoc {
    format: &'static str,
    x: String,
    bases: Vec<String>,
    digits: Vec<String>,
    value: String,
    error_bound: String,
}

#[derive(Serialize)]
struct DigitRow<'a> {
    n: usize,
    base: &'a str,
    digit: &'a str,
}

pub fn expand(args: &SeriesArgs) -> Result<(), Failure> {
    let q = args.bases.resolve(args.n)?;
    let d = cantor_digits(&args.x, &q, args.n)?;
    let bound = BigRational::new(BigInt::one(), BigInt::from(q.product(args.n)));
    let doc = ExpandDoc {
        format: "qnormal.expand/v1",
        x: format_rational(&args.x),
        bases: strings(&q.bases()[..args.n]),
        digits: strings(d.digits()),
        value: format_rational(&cantor_value(&d)),
        error_bound: format_rational(&bound),
    };
    emit(&args.output, &doc, |w| {
        for (n, (base, digit)) in doc.bases.iter().zip(&doc.digits).enumerate() {
            w.serialize(DigitRow { n, base, digit })?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct OrbitDoc {
    format: &'static str,
    x: String,
    bases: Vec<String>,
    points: Vec<Exact>,
}

#[derive(Serialize)]
struct PointRow<'a> {
    n: usize,
    point: &'a str,
    decimal: f64,
}

pub fn orbit(args: &SeriesArgs) -> Result<(), Failure> {
    let q = args.bases.resolve(args.n)?;
    let points = exact_orbit(&args.x, &q, args.n)?;
    let doc = OrbitDoc {
        format: "qnormal.orbit/v1",
        x: format_rational(&args.x),
        bases: strings(&q.bases()[..args.n]),
        points: points.iter().map(Exact::from).collect(),
    };
    emit(&args.output, &doc, |w| {
        for (n, p) in doc.points.iter().enumerate() {
            w.serialize(PointRow {
                n,
                point: &p.exact,
                decimal: p.decimal,
            })?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct DiscrepancyDoc {
    format: &'static str,
    n: u64,
    source: String,
    bases: Vec<String>,
    intervals: Vec<IntervalRow>,
    star_discrepancy: Exact,
}

#[derive(Serialize)]
struct IntervalRow {
    statistic: &'static str,
    k: Option<u32>,
    lo: Option<String>,
    hi: Option<String>,
    hits: Option<usize>,
    fraction: String,
    decimal: f64,
}

pub fn discrepancy(args: &DiscrepancyArgs) -> Result<(), Failure> {
    let count = args.n as usize;
    let (source, bases, points) = match (args.program, &args.x) {
        (Some(e), _) => {
            let path = args.bases.registry.clone().ok_or_else(|| {
                Error::Config("--program needs --registry for the construction".into())
            })?;
            if args.bases.bases.is_some() {
                return Err(
                    Error::Config("--program uses the constructed Q, not --bases".into()).into(),
                );
            }
            let registry = crate::RegistryArgs {
                registry: path,
                oracle: args.bases.oracle.clone(),
            }
            .load()?;
            let f = limit_function_within(&registry, args.n - 1, args.bases.stage_limit())?;
            let q = basic_sequence_from(&f, count - 1)?;
            let points = program_orbit(&registry, e, &f, count)?;
            (format!("program {e}"), q, points)
        }
        (None, Some(x)) => {
            let q = args.bases.resolve(count - 1)?;
            let points = exact_orbit(x, &q, count - 1)?;
            (format!("x = {}", format_rational(x)), q, points)
        }
        (None, None) => unreachable!("clap requires --x or --program"),
    };

    let mut intervals = Vec::new();
    for k in 1..=4u32 {
        let width = 1u64 << k;
        for j in 0..width {
            let lo = ratio(j, width);
            let hi = ratio(j + 1, width);
            let rep = interval_frequency(&points, &lo, &hi)?;
            let exact = Exact::from(&rep.fraction);
            intervals.push(IntervalRow {
                statistic: "interval",
                k: Some(k),
                lo: Some(format_rational(&lo)),
                hi: Some(format_rational(&hi)),
                hits: Some(rep.hits),
                fraction: exact.exact,
                decimal: exact.decimal,
            });
        }
    }
    let star = star_discrepancy(&points)?;
    let doc = DiscrepancyDoc {
        format: "qnormal.discrepancy/v1",
        n: args.n,
        source,
        bases: strings(&bases.bases()[..count - 1]),
        intervals,
        star_discrepancy: Exact::from(&star),
    };
    emit(&args.output, &doc, |w| {
        for row in &doc.intervals {
            w.serialize(row)?;
        }
        w.serialize(IntervalRow {
            statistic: "star_discrepancy",
            k: None,
            lo: None,
            hi: None,
            hits: None,
            fraction: doc.star_discrepancy.exact.clone(),
            decimal: doc.star_discrepancy.decimal,
        })
    })
}

#[derive(Serialize)]
struct ChampernowneDoc {
    format: &'static str,
    base: u32,
    n: usize,
    digits: Vec<u32>,
}

#[derive(Serialize)]
struct ChampernowneRow {
    position: usize,
    digit: u32,
}

pub fn champernowne(args: &ChampernowneArgs) -> Result<(), Failure> {
    let digits = champernowne_bits(args.base, args.n)?;
    let doc = ChampernowneDoc {
        format: "qnormal.champernowne/v1",
        base: args.base,
        n: args.n,
        digits,
    };
    emit(&args.output, &doc, |w| {
        for (position, &digit) in doc.digits.iter().enumerate() {
            w.serialize(ChampernowneRow { position, digit })?;
        }
        Ok(())
    })
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn strings(values: &[BigUint]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}
