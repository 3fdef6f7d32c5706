//! The program registry and its step-bounded evaluation.
//!
//! Each [`ProgramEntry`] stands for one index of an enumeration of binary
//! sequences. Its value at a position only becomes visible once the step
//! budget reaches the declared halting time; before that the position reads
//! as `0`. A visible value never changes again, so as the budget grows each
//! position changes at most once, and only from `0` to `1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Bit, GeneratorSpec, Oracle};

/// Number of steps before a position's value becomes visible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum HaltRule {
    /// Same halting time everywhere.
    Constant { steps: u64 },
    /// `slope * position + intercept`, saturating.
    Linear { slope: u64, intercept: u64 },
    /// Explicit times for the first positions, then `default`.
    Table { steps: Vec<u64>, default: u64 },
}

impl Default for HaltRule {
    fn default() -> Self {
        Self::Constant { steps: 0 }
    }
}

impl HaltRule {
    pub fn steps_at(&self, position: u64) -> u64 {
        match self {
            Self::Constant { steps } => *steps,
            Self::Linear { slope, intercept } => {
                slope.saturating_mul(position).saturating_add(*intercept)
            }
            Self::Table { steps, default } => usize::try_from(position)
                .ok()
                .and_then(|p| steps.get(p).copied())
                .unwrap_or(*default),
        }
    }

    /// Largest halting time over positions `0..=max_position`.
    pub fn max_through(&self, max_position: u64) -> u64 {
        match self {
            Self::Constant { steps } => *steps,
            Self::Linear { .. } => self.steps_at(max_position),
            Self::Table { steps, default } => {
                let listed = usize::try_from(max_position)
                    .map(|m| m.saturating_add(1))
                    .unwrap_or(usize::MAX)
                    .min(steps.len());
                let head = steps[..listed].iter().copied().max().unwrap_or(0);
                if (steps.len() as u64) <= max_position {
                    head.max(*default)
                } else {
                    head
                }
            }
        }
    }
}

/// One registered program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramEntry {
    pub index: usize,
    pub generator: GeneratorSpec,
    pub halt: HaltRule,
    /// Set when this entry duplicates another registration.
    pub alias_of: Option<usize>,
}

/// What a caller provides to register a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramSource {
    Program {
        generator: GeneratorSpec,
        halt: HaltRule,
    },
    /// Copy of the program at the given index.
    Alias(usize),
}

impl ProgramSource {
    pub fn new(generator: GeneratorSpec, halt: HaltRule) -> Self {
        Self::Program { generator, halt }
    }

    /// A program whose values are all visible from step 0.
    pub fn immediate(generator: GeneratorSpec) -> Self {
        Self::new(generator, HaltRule::default())
    }
}

/// An ordered list of programs, entry `e` having index `e`, plus an optional
/// oracle for relativized runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    entries: Vec<ProgramEntry>,
    oracle: Option<Oracle>,
}

impl Registry {
    /// Builds a registry, resolving aliases and validating every generator.
    ///
    /// Alias chains are followed to their root, so `alias_of` always names a
    /// non-alias entry.
    pub fn new(sources: Vec<ProgramSource>, oracle: Option<Oracle>) -> Result<Self> {
        let mut entries: Vec<ProgramEntry> = Vec::with_capacity(sources.len());
        for (index, source) in sources.iter().enumerate() {
            let entry = match source {
                ProgramSource::Program { generator, halt } => {
                    generator
                        .validate()
                        .map_err(|e| Error::Config(format!("program {index}: {e}")))?;
                    if generator.needs_oracle() && oracle.is_none() {
                        return Err(Error::Config(format!(
                            "program {index} consults the oracle but none was supplied"
                        )));
                    }
                    ProgramEntry {
                        index,
                        generator: generator.clone(),
                        halt: halt.clone(),
                        alias_of: None,
                    }
                }
                ProgramSource::Alias(target) => {
                    let root = resolve_alias(&sources, index, *target)?;
                    let ProgramSource::Program { generator, halt } = &sources[root] else {
                        unreachable!("resolve_alias returns a concrete program");
                    };
                    ProgramEntry {
                        index,
                        generator: generator.clone(),
                        halt: halt.clone(),
                        alias_of: Some(root),
                    }
                }
            };
            entries.push(entry);
        }
        Ok(Self { entries, oracle })
    }

    /// Registry where every program is visible immediately.
    pub fn from_generators<I>(generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = GeneratorSpec>,
    {
        Self::new(
            generators
                .into_iter()
                .map(ProgramSource::immediate)
                .collect(),
            None,
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ProgramEntry] {
        &self.entries
    }

    pub fn oracle(&self) -> Option<&Oracle> {
        self.oracle.as_ref()
    }

    /// Replaces the oracle, revalidating oracle-consulting programs.
    pub fn with_oracle(mut self, oracle: Option<Oracle>) -> Result<Self> {
        if oracle.is_none() {
            if let Some(e) = self.entries.iter().find(|e| e.generator.needs_oracle()) {
                return Err(Error::Config(format!(
                    "program {} consults the oracle but none was supplied",
                    e.index
                )));
            }
        }
        self.oracle = oracle;
        Ok(self)
    }

    pub fn entry(&self, e: usize) -> Result<&ProgramEntry> {
        self.entries.get(e).ok_or(Error::IndexOutOfRange {
            index: e,
            len: self.entries.len(),
        })
    }

    /// Index of the non-alias entry that `e` duplicates (or `e` itself).
    pub fn root_of(&self, e: usize) -> Result<usize> {
        let entry = self.entry(e)?;
        Ok(entry.alias_of.unwrap_or(entry.index))
    }

    /// All indices registering the same program as `e`, in increasing order.
    pub fn aliases_of(&self, e: usize) -> Result<Vec<usize>> {
        let root = self.root_of(e)?;
        Ok(self
            .entries
            .iter()
            .filter(|x| x.alias_of.unwrap_or(x.index) == root)
            .map(|x| x.index)
            .collect())
    }

    /// Value of program `e` at position `p` after `s` steps: the settled bit
    /// if it has appeared by then, otherwise `0`.
    pub fn eval_star(&self, e: usize, s: u64, p: u64) -> Result<Bit> {
        let entry = self.entry(e)?;
        if entry.halt.steps_at(p) <= s {
            entry.generator.bit_at(p, self.oracle.as_ref())
        } else {
            Ok(0)
        }
    }

    /// The settled value of program `e` at position `p`.
    pub fn eval_limit(&self, e: usize, p: u64) -> Result<Bit> {
        let entry = self.entry(e)?;
        entry.generator.bit_at(p, self.oracle.as_ref())
    }

    /// Smallest budget from which `eval_star` agrees with `eval_limit` on
    /// every position up to `max_position`.
    pub fn settle_budget(&self, e: usize, max_position: u64) -> Result<u64> {
        Ok(self.entry(e)?.halt.max_through(max_position))
    }

    /// `count` consecutive settled bits of program `e` starting at `start`.
    pub fn limit_prefix(&self, e: usize, start: u64, count: usize) -> Result<Vec<Bit>> {
        (0..count as u64)
            .map(|i| self.eval_limit(e, start + i))
            .collect()
    }
}

fn resolve_alias(sources: &[ProgramSource], index: usize, target: usize) -> Result<usize> {
    let mut current = target;
    for _ in 0..=sources.len() {
        match sources.get(current) {
            None => {
                return Err(Error::Config(format!(
                    "program {index}: alias_of {target} does not name a registered program"
                )))
            }
            Some(ProgramSource::Program { .. }) => return Ok(current),
            Some(ProgramSource::Alias(next)) => current = *next,
        }
    }
    Err(Error::Config(format!("program {index}: alias cycle")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(generator: GeneratorSpec, halt: HaltRule) -> Registry {
        Registry::new(vec![ProgramSource::new(generator, halt)], None).unwrap()
    }

    #[test]
    fn zero_program_reads_zero_at_every_budget() {
        let reg = single(
            GeneratorSpec::Constant(0),
            HaltRule::Linear {
                slope: 3,
                intercept: 1,
            },
        );
        for s in 0..20 {
            for p in 0..20 {
                assert_eq!(reg.eval_star(0, s, p).unwrap(), 0);
            }
        }
    }

    #[test]
    fn late_bit_appears_at_its_halting_time() {
        let mut bits = vec![0; 6];
        bits[5] = 1;
        let mut steps = vec![0; 6];
        steps[5] = 7;
        let reg = single(
            GeneratorSpec::Table { bits, default: 0 },
            HaltRule::Table { steps, default: 0 },
        );
        assert_eq!(reg.eval_star(0, 6, 5).unwrap(), 0);
        assert_eq!(reg.eval_star(0, 7, 5).unwrap(), 1);
    }

    #[test]
    fn champernowne_entry() {
        let reg = single(GeneratorSpec::Champernowne, HaltRule::default());
        assert_eq!(reg.eval_star(0, 0, 2).unwrap(), 1);
    }

    #[test]
    fn limit_examples() {
        let reg = Registry::from_generators([
            GeneratorSpec::Constant(1),
            GeneratorSpec::Periodic(vec![0, 1]),
            GeneratorSpec::Rational {
                numerator: 1,
                denominator: 3,
            },
        ])
        .unwrap();
        assert_eq!(reg.eval_limit(0, 10).unwrap(), 1);
        assert_eq!(reg.eval_limit(1, 4).unwrap(), 0);
        assert_eq!(reg.eval_limit(2, 3).unwrap(), 1);
    }

    #[test]
    fn unknown_index() {
        let reg = Registry::from_generators([GeneratorSpec::Constant(0)]).unwrap();
        assert_eq!(
            reg.eval_star(3, 0, 0),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        );
        assert!(reg.eval_limit(1, 0).is_err());
        assert!(reg.settle_budget(1, 0).is_err());
    }

    #[test]
    fn settle_budget_examples() {
        let zero = single(GeneratorSpec::Constant(1), HaltRule::default());
        assert_eq!(zero.settle_budget(0, 1_000_000).unwrap(), 0);
        let linear = single(
            GeneratorSpec::Constant(1),
            HaltRule::Linear {
                slope: 1,
                intercept: 0,
            },
        );
        assert_eq!(linear.settle_budget(0, 9).unwrap(), 9);
        let mixed = single(
            GeneratorSpec::Constant(1),
            HaltRule::Table {
                steps: vec![0, 3, 5, 40],
                default: 90,
            },
        );
        assert_eq!(mixed.settle_budget(0, 2).unwrap(), 5);
        assert_eq!(mixed.settle_budget(0, 3).unwrap(), 40);
        assert_eq!(mixed.settle_budget(0, 4).unwrap(), 90);
    }

    #[test]
    fn aliases_resolve_to_root() {
        let reg = Registry::new(
            vec![
                ProgramSource::immediate(GeneratorSpec::Periodic(vec![0, 1])),
                ProgramSource::immediate(GeneratorSpec::Constant(1)),
                ProgramSource::Alias(0),
                ProgramSource::Alias(2),
            ],
            None,
        )
        .unwrap();
        assert_eq!(reg.entry(3).unwrap().alias_of, Some(0));
        assert_eq!(reg.aliases_of(2).unwrap(), vec![0, 2, 3]);
        assert_eq!(reg.aliases_of(1).unwrap(), vec![1]);
    }

    #[test]
    fn bad_aliases_rejected() {
        let missing = Registry::new(vec![ProgramSource::Alias(4)], None);
        assert!(matches!(missing, Err(Error::Config(_))));
        let cycle = Registry::new(vec![ProgramSource::Alias(1), ProgramSource::Alias(0)], None);
        assert!(matches!(cycle, Err(Error::Config(_))));
    }

    #[test]
    fn oracle_programs_need_an_oracle() {
        let src = vec![ProgramSource::immediate(GeneratorSpec::OracleBit {
            offset: 0,
            invert: false,
        })];
        assert!(Registry::new(src.clone(), None).is_err());
        let oracle = Oracle::new(vec![0, 1, 1], 0).unwrap();
        let reg = Registry::new(src, Some(oracle)).unwrap();
        assert_eq!(reg.limit_prefix(0, 0, 5).unwrap(), vec![0, 1, 1, 0, 0]);
        assert!(reg.with_oracle(None).is_err());
    }

    fn arb_generator() -> impl Strategy<Value = GeneratorSpec> {
        prop_oneof![
            (0u8..2).prop_map(GeneratorSpec::Constant),
            proptest::collection::vec(0u8..2, 1..6).prop_map(GeneratorSpec::Periodic),
            (proptest::collection::vec(0u8..2, 0..12), 0u8..2)
                .prop_map(|(bits, default)| GeneratorSpec::Table { bits, default }),
            (1u64..200)
                .prop_flat_map(|q| (0..q, Just(q)))
                .prop_map(|(p, q)| {
                    GeneratorSpec::Rational {
                        numerator: p,
                        denominator: q,
                    }
                }),
            Just(GeneratorSpec::Champernowne),
        ]
    }

    fn arb_halt() -> impl Strategy<Value = HaltRule> {
        prop_oneof![
            (0u64..30).prop_map(|steps| HaltRule::Constant { steps }),
            (0u64..4, 0u64..10)
                .prop_map(|(slope, intercept)| HaltRule::Linear { slope, intercept }),
            (proptest::collection::vec(0u64..30, 0..12), 0u64..30)
                .prop_map(|(steps, default)| HaltRule::Table { steps, default }),
        ]
    }

    proptest! {
        #[test]
        fn monotone_settling(g in arb_generator(), h in arb_halt(), p in 0u64..40) {
            let reg = single(g, h);
            let values: Vec<_> = (0..80).map(|s| reg.eval_star(0, s, p).unwrap()).collect();
            let changes = values.windows(2).filter(|w| w[0] != w[1]).count();
            prop_assert!(changes <= 1);
            prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn settlement(g in arb_generator(), h in arb_halt(), p in 0u64..40) {
            let reg = single(g, h);
            let budget = reg.settle_budget(0, p).unwrap();
            for q in 0..=p {
                prop_assert_eq!(reg.eval_star(0, budget, q).unwrap(), reg.eval_limit(0, q).unwrap());
            }
        }

        #[test]
        fn alias_transparency(g in arb_generator(), h in arb_halt(), s in 0u64..60, p in 0u64..60) {
            let reg = Registry::new(
                vec![
                    ProgramSource::new(g, h),
                    ProgramSource::immediate(GeneratorSpec::Constant(1)),
                    ProgramSource::Alias(0),
                ],
                None,
            ).unwrap();
            prop_assert_eq!(reg.eval_star(0, s, p).unwrap(), reg.eval_star(2, s, p).unwrap());
            prop_assert_eq!(reg.eval_limit(0, p).unwrap(), reg.eval_limit(2, p).unwrap());
        }
    }
}
