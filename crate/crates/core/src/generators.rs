//! Stock bit-sequence generators.
//!
//! A [`GeneratorSpec`] is the eventual (settled) value of a registered
//! program: a total map from positions to bits. The free functions produce
//! finite prefixes of the same sequences and are what the CLI and the tests
//! use directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bit, always `0` or `1`.
pub type Bit = u8;

/// An infinite bit source: an explicit prefix followed by a constant default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oracle {
    prefix: Vec<Bit>,
    default: Bit,
}

impl Oracle {
    pub fn new(prefix: Vec<Bit>, default: Bit) -> Result<Self> {
        check_bits(&prefix, "oracle prefix")?;
        check_bit(default, "oracle default")?;
        Ok(Self { prefix, default })
    }

    pub fn bit(&self, position: u64) -> Bit {
        usize::try_from(position)
            .ok()
            .and_then(|p| self.prefix.get(p).copied())
            .unwrap_or(self.default)
    }

    pub fn prefix(&self) -> &[Bit] {
        &self.prefix
    }

    pub fn default_bit(&self) -> Bit {
        self.default
    }
}

/// The settled behaviour of one registered program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// Every bit equals the given one.
    Constant(Bit),
    /// A nonempty pattern repeated forever.
    Periodic(Vec<Bit>),
    /// Explicit bits for the first positions, then `default`.
    Table { bits: Vec<Bit>, default: Bit },
    /// Binary expansion of `numerator / denominator`, terminating when dyadic.
    Rational { numerator: u64, denominator: u64 },
    /// Base-2 Champernowne sequence `0 1 10 11 100 ...`.
    Champernowne,
    /// Bit `position + offset` of the oracle, optionally inverted.
    OracleBit { offset: u64, invert: bool },
}

impl GeneratorSpec {
    /// Checks the per-kind parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(b) => check_bit(*b, "constant bit"),
            Self::Periodic(pattern) => {
                if pattern.is_empty() {
                    return Err(Error::Domain("periodic pattern must be nonempty".into()));
                }
                check_bits(pattern, "periodic pattern")
            }
            Self::Table { bits, default } => {
                check_bits(bits, "table bits")?;
                check_bit(*default, "table default")
            }
            Self::Rational {
                numerator,
                denominator,
            } => {
                if numerator >= denominator {
                    return Err(Error::Domain(format!(
                        "rational kind requires 0 <= p < q, got {numerator}/{denominator}"
                    )));
                }
                Ok(())
            }
            Self::Champernowne | Self::OracleBit { .. } => Ok(()),
        }
    }

    pub fn needs_oracle(&self) -> bool {
        matches!(self, Self::OracleBit { .. })
    }

    /// The bit at `position`. Fails only for oracle kinds without an oracle.
    pub fn bit_at(&self, position: u64, oracle: Option<&Oracle>) -> Result<Bit> {
        Ok(match self {
            Self::Constant(b) => *b,
            Self::Periodic(pattern) => pattern[(position % pattern.len() as u64) as usize],
            Self::Table { bits, default } => usize::try_from(position)
                .ok()
                .and_then(|p| bits.get(p).copied())
                .unwrap_or(*default),
            Self::Rational {
                numerator,
                denominator,
            } => rational_bit(*numerator, *denominator, position),
            Self::Champernowne => champernowne_digit(2, position) as Bit,
            Self::OracleBit { offset, invert } => {
                let oracle = oracle.ok_or_else(|| {
                    Error::Config("oracle-consulting program but no oracle is attached".into())
                })?;
                oracle.bit(position.saturating_add(*offset)) ^ Bit::from(*invert)
            }
        })
    }

    /// Short kind name used in configs and reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Periodic(_) => "periodic",
            Self::Table { .. } => "table",
            Self::Rational { .. } => "rational",
            Self::Champernowne => "champernowne",
            Self::OracleBit { .. } => "oracle",
        }
    }
}

fn check_bit(b: Bit, what: &str) -> Result<()> {
    if b > 1 {
        return Err(Error::Domain(format!("{what}: {b} is not a bit")));
    }
    Ok(())
}

fn check_bits(bits: &[Bit], what: &str) -> Result<()> {
    bits.iter().try_for_each(|&b| check_bit(b, what))
}

/// First `n` digits of the concatenation of the base-`base` numerals of
/// `0, 1, 2, ...` (no leading zeros).
pub fn champernowne_bits(base: u32, n: usize) -> Result<Vec<u32>> {
    if base < 2 {
        return Err(Error::Domain(format!(
            "base must be at least 2, got {base}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut numeral = Vec::new();
    let mut i: u64 = 0;
    while out.len() < n {
        numeral.clear();
        let mut v = i;
        loop {
            numeral.push((v % u64::from(base)) as u32);
            v /= u64::from(base);
            if v == 0 {
                break;
            }
        }
        out.extend(numeral.iter().rev().take(n - out.len()));
        i += 1;
    }
    Ok(out)
}

/// Digit at `position` of the base-`base` Champernowne sequence, computed
/// directly from the block structure instead of by concatenation.
///
/// Panics if `base < 2`.
pub fn champernowne_digit(base: u32, position: u64) -> u32 {
    assert!(base >= 2, "base must be at least 2");
    let b = u128::from(base);
    let mut pos = u128::from(position);
    // One-digit numerals include 0, so the first block has `b` entries.
    if pos < b {
        return pos as u32;
    }
    pos -= b;
    let mut width: u32 = 2;
    let mut first = b;
    loop {
        let count = first * (b - 1);
        let span = count * u128::from(width);
        if pos < span {
            let number = first + pos / u128::from(width);
            let digit_index = (pos % u128::from(width)) as u32;
            let shift = width - 1 - digit_index;
            return ((number / b.pow(shift)) % b) as u32;
        }
        pos -= span;
        first *= b;
        width += 1;
    }
}

/// Bit `position` (weight `2^-(position+1)`) of `numerator / denominator`.
pub fn rational_bit(numerator: u64, denominator: u64, position: u64) -> Bit {
    let den = u128::from(denominator);
    let r = (u128::from(numerator) * pow2_mod(position, den)) % den;
    ((2 * r) / den) as Bit
}

fn pow2_mod(mut exp: u64, modulus: u128) -> u128 {
    let mut result = 1 % modulus;
    let mut base = 2 % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    result
}

/// First `n` bits of `p / q` by long division. Dyadic values come out with
/// their terminating expansion.
pub fn rational_bits(p: u64, q: u64, n: usize) -> Result<Vec<Bit>> {
    if p >= q {
        return Err(Error::Domain(format!(
            "rational_bits requires p < q, got {p}/{q}"
        )));
    }
    let q = u128::from(q);
    let mut r = u128::from(p);
    Ok((0..n)
        .map(|_| {
            r *= 2;
            if r >= q {
                r -= q;
                1
            } else {
                0
            }
        })
        .collect())
}

/// `pattern` repeated and truncated to `n` bits.
pub fn periodic_bits(pattern: &[Bit], n: usize) -> Result<Vec<Bit>> {
    if pattern.is_empty() {
        return Err(Error::Domain("periodic pattern must be nonempty".into()));
    }
    Ok(pattern.iter().copied().cycle().take(n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn champernowne_base2_prefix() {
        assert_eq!(
            champernowne_bits(2, 18).unwrap(),
            vec![0, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1]
        );
    }

    #[test]
    fn champernowne_base10() {
        assert_eq!(
            champernowne_bits(10, 11).unwrap(),
            vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 1]
        );
        assert!(champernowne_bits(7, 0).unwrap().is_empty());
        assert!(champernowne_bits(1, 3).is_err());
    }

    #[test]
    fn rational_examples() {
        assert_eq!(rational_bits(1, 2, 3).unwrap(), vec![1, 0, 0]);
        assert_eq!(rational_bits(1, 3, 4).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(rational_bits(0, 5, 2).unwrap(), vec![0, 0]);
        assert!(rational_bits(3, 3, 2).is_err());
    }

    #[test]
    fn periodic_examples() {
        assert_eq!(periodic_bits(&[0, 1], 5).unwrap(), vec![0, 1, 0, 1, 0]);
        assert_eq!(periodic_bits(&[1], 3).unwrap(), vec![1, 1, 1]);
        assert_eq!(periodic_bits(&[0, 0, 1], 3).unwrap(), vec![0, 0, 1]);
        assert!(periodic_bits(&[], 3).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(GeneratorSpec::Periodic(vec![]).validate().is_err());
        assert!(GeneratorSpec::Constant(2).validate().is_err());
        assert!(GeneratorSpec::Rational {
            numerator: 4,
            denominator: 4
        }
        .validate()
        .is_err());
        assert!(GeneratorSpec::OracleBit {
            offset: 0,
            invert: false
        }
        .bit_at(0, None)
        .is_err());
    }

    #[test]
    fn oracle_default_beyond_prefix() {
        let oracle = Oracle::new(vec![1, 0, 1], 1).unwrap();
        let bits: Vec<_> = (0..6).map(|p| oracle.bit(p)).collect();
        assert_eq!(bits, vec![1, 0, 1, 1, 1, 1]);
        let inv = GeneratorSpec::OracleBit {
            offset: 1,
            invert: true,
        };
        assert_eq!(inv.bit_at(0, Some(&oracle)).unwrap(), 1);
        assert_eq!(inv.bit_at(1, Some(&oracle)).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn champernowne_prefix_stable(base in 2u32..12, n in 0usize..300, extra in 0usize..100) {
            let short = champernowne_bits(base, n).unwrap();
            let long = champernowne_bits(base, n + extra).unwrap();
            prop_assert_eq!(&long[..n], &short[..]);
        }

        #[test]
        fn champernowne_direct_matches_concatenation(base in 2u32..11) {
            let seq = champernowne_bits(base, 2000).unwrap();
            for (p, d) in seq.iter().enumerate() {
                prop_assert_eq!(champernowne_digit(base, p as u64), *d);
            }
        }

        #[test]
        fn rational_bit_matches_long_division(q in 1u64..5000, p_frac in 0.0f64..1.0) {
            let p = ((q as f64) * p_frac) as u64 % q;
            let bits = rational_bits(p, q, 80).unwrap();
            for (i, b) in bits.iter().enumerate() {
                prop_assert_eq!(rational_bit(p, q, i as u64), *b);
            }
        }
    }
}
