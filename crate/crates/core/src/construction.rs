//! The staged construction of `f_s`, its limit `f`, and the basic sequence
//! `q_n = 2^(f(n+1) - f(n))`.
//!
//! `f_s` has domain `[0, 3^s)` and is built in `s + 1` stages. Stage 0 sets
//! `f_s(0) = 0`. Stage `t + 1` looks at program `t` with step budget `s + 1`
//! on the positions just above `f_s(3^t - 1)`, picks the least bit `k` that
//! occurs at least `2 * 3^t` times in the window of `4 * 3^t` positions there
//! (one of the two must, by pigeonhole), and assigns the `2 * 3^t` smallest
//! such positions to `f_s(3^t), ..., f_s(3^(t+1) - 1)`.
//!
//! Every block `[3^t, 3^(t+1))` of the domain is therefore mapped to
//! positions where program `t` shows one fixed bit. That is what makes the
//! orbit of program `t`'s real land on one side of `1/2` at least two thirds
//! of the time (see [`crate::normality::witness_check`]).

use crate::cantor::BasicSequence;
use crate::error::{Error, Result};
use crate::generators::Bit;
use crate::programs::Registry;

/// Largest number of stages any builder in this module will run. `3^14`
/// positions is already several million table entries.
pub const MAX_STAGES: usize = 14;

/// Default stage budget for [`limit_function`].
pub const DEFAULT_STAGE_LIMIT: usize = 12;

/// `3^t`, or `None` when it does not fit.
pub fn pow3(t: usize) -> Option<u64> {
    3u64.checked_pow(u32::try_from(t).ok()?)
}

fn pow3_checked(t: usize) -> Result<u64> {
    pow3(t).ok_or(Error::ResourceLimit {
        required: t,
        limit: MAX_STAGES,
    })
}

/// Number of stages needed for `position` to lie in the domain `[0, 3^S)`.
pub fn stages_for(position: u64) -> usize {
    let mut stages = 0;
    let mut size: u64 = 1;
    while size <= position {
        size = size.saturating_mul(3);
        stages += 1;
    }
    stages
}

/// What one stage chose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockChoice {
    /// The block index `t`; also the program consulted.
    pub block: usize,
    /// The bit `k_t` shared by every position assigned in this block.
    pub bit: Bit,
    /// First position examined, `f(3^t - 1) + 1`.
    pub window_start: u64,
    /// Last position examined before the choice was forced.
    pub scan_end: u64,
}

/// A finite approximation `f_s`, or a prefix of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageFunction {
    stage: usize,
    budget: u64,
    values: Vec<u64>,
    blocks: Vec<BlockChoice>,
}

impl StageFunction {
    /// The `s` in `f_s`.
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Step budget handed to every program (`s + 1`).
    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, position: usize) -> Option<u64> {
        self.values.get(position).copied()
    }

    pub fn blocks(&self) -> &[BlockChoice] {
        &self.blocks
    }

    /// The positions chosen at stage `t + 1`, i.e. `f_s` on `[3^t, 3^(t+1))`.
    pub fn block_positions(&self, t: usize) -> Option<&[u64]> {
        let lo = pow3(t)? as usize;
        let hi = pow3(t + 1)? as usize;
        self.values.get(lo..hi)
    }

    /// Runs the bound checks on this table.
    pub fn verify_bound(&self) -> BoundReport {
        verify_bound(&self.values)
    }
}

/// Builds `f_s` in full: domain `[0, 3^s)`, consulting programs `0..s`.
pub fn build_stage_function(registry: &Registry, s: usize) -> Result<StageFunction> {
    build_stage_prefix(registry, s, s)
}

/// Builds `f_s` restricted to `[0, 3^stages)`.
///
/// Because stage `t + 1` only reads program `t` and the values already fixed,
/// this is exactly the restriction of [`build_stage_function`]`(registry, s)`
/// without requiring `s` registered programs or `3^s` table entries.
pub fn build_stage_prefix(registry: &Registry, s: usize, stages: usize) -> Result<StageFunction> {
    if stages > s {
        return Err(Error::Precondition(format!(
            "f_{s} has only {s} stages, {stages} requested"
        )));
    }
    run_stages(registry, s, stages, s as u64 + 1)
}

fn run_stages(registry: &Registry, s: usize, stages: usize, budget: u64) -> Result<StageFunction> {
    if stages > MAX_STAGES {
        return Err(Error::ResourceLimit {
            required: stages,
            limit: MAX_STAGES,
        });
    }
    if registry.len() < stages {
        return Err(Error::Config(format!(
            "{stages} stages consult programs 0..{stages} but the registry has {} entries",
            registry.len()
        )));
    }
    let mut values = Vec::with_capacity(pow3_checked(stages)? as usize);
    values.push(0u64);
    let mut blocks = Vec::with_capacity(stages);
    for t in 0..stages {
        let need = 2 * pow3_checked(t)?;
        let prev = values[pow3_checked(t)? as usize - 1];
        let (choice, picked) = choose_block(registry, t, budget, prev, need)?;
        values.extend(picked);
        blocks.push(choice);
    }
    Ok(StageFunction {
        stage: s,
        budget,
        values,
        blocks,
    })
}

/// One stage: scan the window `(prev, prev + 2 * need]` of program `t` and
/// return the least bit with `need` hits there, with its `need` smallest
/// positions.
fn choose_block(
    registry: &Registry,
    t: usize,
    budget: u64,
    prev: u64,
    need: u64,
) -> Result<(BlockChoice, Vec<u64>)> {
    let window = 2 * need;
    let mut hits: [Vec<u64>; 2] = [Vec::new(), Vec::new()];
    for offset in 1..=window {
        let p = prev + offset;
        let bit = registry.eval_star(t, budget, p)?;
        hits[bit as usize].push(p);
        let remaining = window - offset;
        let zeros = hits[0].len() as u64;
        let ones = hits[1].len() as u64;
        // Zero wins as soon as it qualifies; one only once zero no longer can.
        let decided = if zeros == need {
            Some(0)
        } else if ones >= need && zeros + remaining < need {
            Some(1)
        } else {
            None
        };
        if let Some(bit) = decided {
            let mut picked = std::mem::take(&mut hits[bit as usize]);
            picked.truncate(need as usize);
            let choice = BlockChoice {
                block: t,
                bit,
                window_start: prev + 1,
                scan_end: p,
            };
            return Ok((choice, picked));
        }
    }
    unreachable!("one of the two bits fills half of the window")
}

/// The limit `f = lim_s f_s` on an initial segment, with settling data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitFunction {
    values: Vec<u64>,
    certificates: Vec<u64>,
    blocks: Vec<BlockChoice>,
    stages: usize,
    witness_stage: usize,
}

impl LimitFunction {
    /// `f(0), ..., f(settled_through)`.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, position: usize) -> Option<u64> {
        self.values.get(position).copied()
    }

    /// Largest position whose value is certified.
    pub fn settled_through(&self) -> usize {
        self.values.len() - 1
    }

    /// For each position `p`, a stage `c` with `f_s(p) = f(p)` for all
    /// `s >= c`.
    pub fn certificates(&self) -> &[u64] {
        &self.certificates
    }

    pub fn certificate(&self, position: usize) -> Option<u64> {
        self.certificates.get(position).copied()
    }

    /// Block choices `k_t` for `t < stages()`.
    pub fn blocks(&self) -> &[BlockChoice] {
        &self.blocks
    }

    /// The `k_t` for block `t`, if that block was constructed.
    pub fn chosen_bit(&self, t: usize) -> Option<Bit> {
        self.blocks.get(t).map(|b| b.bit)
    }

    /// Number of stages `S` run; every position below `3^S` was computed.
    pub fn stages(&self) -> usize {
        self.stages
    }

    /// The `s` whose `f_s` (restricted) was used to produce these values.
    pub fn witness_stage(&self) -> usize {
        self.witness_stage
    }

    /// Block index of `position` (`None` for position 0).
    pub fn block_of(position: u64) -> Option<usize> {
        if position == 0 {
            None
        } else {
            Some(stages_for(position) - 1)
        }
    }
}

/// [`limit_function_within`] with [`DEFAULT_STAGE_LIMIT`].
pub fn limit_function(registry: &Registry, max_position: u64) -> Result<LimitFunction> {
    limit_function_within(registry, max_position, DEFAULT_STAGE_LIMIT)
}

/// Computes `f` on `[0, max_position]` exactly.
///
/// With `S` the number of stages covering `max_position`, every position any
/// `f_s` consults for its first `S` stages is at most `2 * (3^S - 1)`. Once the
/// budget `s + 1` reaches the declared halting time of all of those, `f_s`
/// no longer changes there, so one build at that `s` gives the limit.
pub fn limit_function_within(
    registry: &Registry,
    max_position: u64,
    stage_limit: usize,
) -> Result<LimitFunction> {
    let stages = stages_for(max_position);
    let limit = stage_limit.min(MAX_STAGES);
    if stages > limit {
        return Err(Error::ResourceLimit {
            required: stages,
            limit,
        });
    }
    if registry.len() < stages {
        return Err(Error::Config(format!(
            "position {max_position} needs {stages} stages but the registry has {} entries",
            registry.len()
        )));
    }
    let reach = 2 * (pow3_checked(stages)? - 1);
    let mut settle = 0u64;
    for e in 0..stages {
        settle = settle.max(registry.settle_budget(e, reach)?);
    }
    let s = (stages as u64).max(settle);
    let s = usize::try_from(s).map_err(|_| Error::ResourceLimit {
        required: usize::MAX,
        limit,
    })?;
    let full = run_stages(registry, s, stages, s as u64 + 1)?;

    // A block is stable once its scan saw only settled bits and all earlier
    // blocks are stable.
    let mut block_cert = Vec::with_capacity(stages);
    let mut running = 0u64;
    for choice in &full.blocks {
        let entry = registry.entry(choice.block)?;
        let latest = (choice.window_start..=choice.scan_end)
            .map(|p| entry.halt.steps_at(p))
            .max()
            .unwrap_or(0);
        running = running
            .max(choice.block as u64 + 1)
            .max(latest.saturating_sub(1));
        block_cert.push(running);
    }
    let len = max_position as usize + 1;
    let certificates = (0..len as u64)
        .map(|p| LimitFunction::block_of(p).map_or(0, |t| block_cert[t]))
        .collect();
    let mut values = full.values;
    values.truncate(len);
    Ok(LimitFunction {
        values,
        certificates,
        blocks: full.blocks,
        stages,
        witness_stage: s,
    })
}

/// `f_s` restricted to its first `min(s, stages)` stages, for `s = 0..=max_s`.
/// Shows the approximations converging position by position.
pub fn approximation_history(
    registry: &Registry,
    stages: usize,
    max_s: usize,
) -> Result<Vec<StageFunction>> {
    (0..=max_s)
        .map(|s| build_stage_prefix(registry, s, stages.min(s)))
        .collect()
}

/// `q_n = 2^(f(n+1) - f(n))` for `n < count`.
pub fn basic_sequence_from(f: &LimitFunction, count: usize) -> Result<BasicSequence> {
    if count > f.settled_through() {
        return Err(Error::Precondition(format!(
            "{count} terms need f settled through position {count}, only {} is",
            f.settled_through()
        )));
    }
    let exponents: Vec<u64> = f.values[..=count].windows(2).map(|w| w[1] - w[0]).collect();
    BasicSequence::from_exponents(&exponents)
}

/// One row of a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub block: usize,
    /// `3^(t+1) - 1`.
    pub position: u64,
    pub value: u64,
    /// `4 * 3^t + f(3^t - 1)`.
    pub step_limit: u64,
    /// `2 * (3^(t+1) - 1)`.
    pub closed_limit: u64,
    /// `f(3^(t+1))` when that position is in the domain. Informational only.
    pub next_value: Option<u64>,
}

impl BoundCheck {
    pub fn step_ok(&self) -> bool {
        self.value <= self.step_limit
    }

    pub fn closed_ok(&self) -> bool {
        self.value <= self.closed_limit
    }

    pub fn next_within_closed(&self) -> Option<bool> {
        self.next_value.map(|v| v <= self.closed_limit)
    }
}

/// Outcome of [`verify_bound`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    /// First block whose step or closed-form inequality fails.
    pub fn first_violation(&self) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| !(c.step_ok() && c.closed_ok()))
    }

    pub fn passed(&self) -> bool {
        self.first_violation().is_none()
    }
}

/// Checks `f(3^(t+1) - 1) <= 4 * 3^t + f(3^t - 1)` and
/// `f(3^(t+1) - 1) <= 2 * (3^(t+1) - 1)` for every block ending in the domain.
pub fn verify_bound(values: &[u64]) -> BoundReport {
    let mut checks = Vec::new();
    let mut t = 0usize;
    while let (Some(lo), Some(hi)) = (pow3(t), pow3(t + 1)) {
        let end = (hi - 1) as usize;
        if end >= values.len() {
            break;
        }
        checks.push(BoundCheck {
            block: t,
            position: hi - 1,
            value: values[end],
            step_limit: 4 * lo + values[lo as usize - 1],
            closed_limit: 2 * (hi - 1),
            next_value: values.get(end + 1).copied(),
        });
        t += 1;
    }
    BoundReport { checks }
}
