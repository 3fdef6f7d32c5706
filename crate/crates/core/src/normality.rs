//! Equidistribution statistics and the non-normality witness.
//!
//! The witness for program `e` looks at the first `N = 3^(e+1)` points of
//! the orbit of its real under the constructed `Q`. The orbit point at
//! position `p` is the real whose bits start at `f(p)`, so it sits below
//! `1/2` exactly when bit `f(p)` is `0`. Block `e` of the construction puts
//! `2 * 3^e` of those positions on bits equal to `k_e`, which is two thirds
//! of `N`, so the frequency of `[0, 1/2)` is at least `2/3` or at most
//! `1/3`. Repeated at every alias index of the same real, this keeps the
//! frequency away from `1/2` along an infinite sequence of checkpoints.
//!
//! The point `1/2` itself (bits `1000...`) is counted on the high side,
//! as its leading bit says.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cantor::{orbit, value_of_bits, BitWord};
use crate::construction::{basic_sequence_from, pow3, LimitFunction};
use crate::error::{Error, Result};
use crate::generators::Bit;
use crate::programs::Registry;

/// Extra bits appended past the last orbit position when a program's real
/// is truncated for exact orbit arithmetic.
pub const ORBIT_TAIL_BITS: usize = 32;

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Hits of a half-open interval among a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyReport {
    pub n: usize,
    pub lo: BigRational,
    pub hi: BigRational,
    pub hits: usize,
    pub fraction: BigRational,
}

/// Share of `points` in `[lo, hi)`.
pub fn interval_frequency(
    points: &[BigRational],
    lo: &BigRational,
    hi: &BigRational,
) -> Result<FrequencyReport> {
    if !(&BigRational::zero() <= lo && lo < hi && hi <= &BigRational::one()) {
        return Err(Error::Domain(format!(
            "interval [{lo}, {hi}) is not inside [0, 1) with lo < hi"
        )));
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let hits = points.iter().filter(|x| lo <= *x && *x < hi).count();
    Ok(FrequencyReport {
        n: points.len(),
        lo: lo.clone(),
        hi: hi.clone(),
        hits,
        fraction: ratio(hits as u64, points.len() as u64),
    })
}

/// Star discrepancy `D*_n` of a sample, exactly.
pub fn star_discrepancy(points: &[BigRational]) -> Result<BigRational> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    let n = sorted.len() as u64;
    let mut worst = BigRational::zero();
    for (i, x) in sorted.iter().enumerate() {
        let above = ratio(i as u64 + 1, n) - x;
        let below = x - ratio(i as u64, n);
        worst = worst.max(above).max(below);
    }
    Ok(worst)
}

/// Certificate that program `e`'s real is lopsided at checkpoint `3^(e+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub program_index: usize,
    pub checkpoint: u64,
    /// `k_e` recorded by the construction.
    pub chosen_bit: Bit,
    /// Positions `p < checkpoint` whose orbit point lies in `[0, 1/2)`.
    pub low_hits: u64,
    /// Positions whose orbit point lies in `[1/2, 1)`.
    pub high_hits: u64,
    pub fraction_low: BigRational,
    pub fraction_high: BigRational,
}

impl WitnessReport {
    /// Fraction on the side of `chosen_bit`.
    pub fn chosen_fraction(&self) -> &BigRational {
        if self.chosen_bit == 0 {
            &self.fraction_low
        } else {
            &self.fraction_high
        }
    }

    pub fn passed(&self) -> bool {
        self.chosen_fraction() >= &ratio(2, 3)
    }
}

/// Classifies each `p < 3^(e+1)` by the settled bit of program `e` at `f(p)`.
pub fn witness_check(registry: &Registry, e: usize, f: &LimitFunction) -> Result<WitnessReport> {
    registry.entry(e)?;
    let checkpoint = pow3(e + 1).ok_or(Error::ResourceLimit {
        required: e + 1,
        limit: crate::construction::MAX_STAGES,
    })?;
    let chosen_bit = f
        .chosen_bit(e)
        .filter(|_| f.settled_through() as u64 + 1 >= checkpoint);
    let Some(chosen_bit) = chosen_bit else {
        return Err(Error::Precondition(format!(
            "witness for program {e} needs f settled through {}, only {} is",
            checkpoint - 1,
            f.settled_through()
        )));
    };
    let mut high_hits = 0u64;
    for &v in &f.values()[..checkpoint as usize] {
        high_hits += u64::from(registry.eval_limit(e, v)?);
    }
    let low_hits = checkpoint - high_hits;
    Ok(WitnessReport {
        program_index: e,
        checkpoint,
        chosen_bit,
        low_hits,
        high_hits,
        fraction_low: ratio(low_hits, checkpoint),
        fraction_high: ratio(high_hits, checkpoint),
    })
}

/// The first `count` orbit points of program `e`'s real under the `Q` built
/// from `f`, computed with exact rationals from a truncated prefix of the
/// program's bits (long enough to cover every shift plus
/// [`ORBIT_TAIL_BITS`]).
pub fn program_orbit(
    registry: &Registry,
    e: usize,
    f: &LimitFunction,
    count: usize,
) -> Result<Vec<BigRational>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let q = basic_sequence_from(f, count - 1)?;
    let reach = f.values()[count - 1] as usize + ORBIT_TAIL_BITS;
    let bits = registry.limit_prefix(e, 0, reach)?;
    let x = value_of_bits(&BitWord::new(bits)?).to_rational();
    orbit(&x, &q, count - 1)
}

/// One alias index examined by [`non_normality_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointReport {
    pub index: usize,
    pub witness: WitnessReport,
    /// Frequency of `[0, 1/2)` among the exact orbit points.
    pub orbit_frequency: FrequencyReport,
    /// `|fraction - 1/2|`.
    pub deviation: BigRational,
}

impl CheckpointReport {
    pub fn deviates(&self) -> bool {
        self.deviation >= ratio(1, 6)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonNormalityReport {
    pub source: usize,
    pub checkpoints: Vec<CheckpointReport>,
}

impl NonNormalityReport {
    /// `Some(true)` when every checkpoint keeps the frequency at least `1/6`
    /// away from `1/2`; `None` with no checkpoints.
    pub fn verdict(&self) -> Option<bool> {
        if self.checkpoints.is_empty() {
            None
        } else {
            Some(
                self.checkpoints
                    .iter()
                    .all(|c| c.deviates() && c.witness.passed()),
            )
        }
    }
}

/// Runs the witness at each alias index of `source` and measures the
/// `[0, 1/2)` frequency of the exact orbit there.
pub fn non_normality_report(
    registry: &Registry,
    source: usize,
    f: &LimitFunction,
    checkpoints: &[usize],
) -> Result<NonNormalityReport> {
    let root = registry.root_of(source)?;
    let half = ratio(1, 2);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &index in checkpoints {
        if registry.root_of(index)? != root {
            return Err(Error::Config(format!(
                "index {index} does not register the same program as {source}"
            )));
        }
        let witness = witness_check(registry, index, f)?;
        let points = program_orbit(registry, index, f, witness.checkpoint as usize)?;
        let orbit_frequency = interval_frequency(&points, &BigRational::zero(), &half)?;
        let deviation = (&orbit_frequency.fraction - &half).abs();
        out.push(CheckpointReport {
            index,
            witness,
            orbit_frequency,
            deviation,
        });
    }
    Ok(NonNormalityReport {
        source,
        checkpoints: out,
    })
}
