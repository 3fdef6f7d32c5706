//! Exact binary expansions, shifts, Cantor series expansions and mod-1
//! orbits.
//!
//! Everything here is exact. Partial products `q_0 q_1 ... q_n` grow very
//! quickly, so all values are big rationals and floating point never enters.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::generators::Bit;

/// A finite prefix of an infinite bit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord(Vec<Bit>);

impl BitWord {
    pub fn new(bits: Vec<Bit>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("{b} is not a bit")));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Extends with zeros up to `len` bits (finite support reading).
    pub fn padded(&self, len: usize) -> Self {
        let mut bits = self.0.clone();
        if bits.len() < len {
            bits.resize(len, 0);
        }
        Self(bits)
    }
}

impl FromStr for BitWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Domain(format!("{other:?} is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `numerator / 2^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicValue {
    pub numerator: BigUint,
    pub exponent: u64,
}

impl DyadicValue {
    pub fn to_rational(&self) -> BigRational {
        let den = BigUint::one() << self.exponent;
        BigRational::new(BigInt::from(self.numerator.clone()), BigInt::from(den))
    }
}

/// A basic sequence `Q = (q_n)` with every `q_n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BasicSequence {
    bases: Vec<BigUint>,
}

impl BasicSequence {
    pub fn new(bases: Vec<BigUint>) -> Result<Self> {
        let two = BigUint::from(2u32);
        if let Some((i, q)) = bases.iter().enumerate().find(|(_, q)| **q < two) {
            return Err(Error::Domain(format!("q_{i} = {q} is below 2")));
        }
        Ok(Self { bases })
    }

    /// `q_n = 2^exponents[n]`; every exponent must be at least 1.
    pub fn from_exponents(exponents: &[u64]) -> Result<Self> {
        if let Some(i) = exponents.iter().position(|&s| s == 0) {
            return Err(Error::Domain(format!("exponent s_{i} is 0")));
        }
        Ok(Self {
            bases: exponents.iter().map(|&s| BigUint::one() << s).collect(),
        })
    }

    pub fn from_small(bases: &[u64]) -> Result<Self> {
        Self::new(bases.iter().map(|&q| BigUint::from(q)).collect())
    }

    pub fn bases(&self) -> &[BigUint] {
        &self.bases
    }

    pub fn base(&self, n: usize) -> Option<&BigUint> {
        self.bases.get(n)
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// The exponents `s_n`, when every `q_n` is a power of two.
    pub fn exponents(&self) -> Option<Vec<u64>> {
        self.bases
            .iter()
            .map(|q| {
                let tz = q.trailing_zeros()?;
                (q == &(BigUint::one() << tz)).then_some(tz)
            })
            .collect()
    }

    /// `q_0 q_1 ... q_(n-1)`.
    pub fn product(&self, n: usize) -> BigUint {
        self.bases[..n].iter().product()
    }
}

/// The first digits of a Cantor series expansion, `0 <= a_n < q_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorDigits {
    digits: Vec<BigUint>,
    bases: BasicSequence,
}

impl CantorDigits {
    /// Pairs digits with their bases, checking `a_n < q_n`.
    pub fn new(digits: Vec<BigUint>, bases: &BasicSequence) -> Result<Self> {
        if digits.len() > bases.len() {
            return Err(Error::Precondition(format!(
                "{} digits but only {} bases",
                digits.len(),
                bases.len()
            )));
        }
        for (i, (a, q)) in digits.iter().zip(bases.bases()).enumerate() {
            if a >= q {
                return Err(Error::DigitOutOfRange {
                    position: i,
                    digit: a.to_string(),
                    base: q.to_string(),
                });
            }
        }
        let bases = BasicSequence {
            bases: bases.bases[..digits.len()].to_vec(),
        };
        Ok(Self { digits, bases })
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn bases(&self) -> &BasicSequence {
        &self.bases
    }
}

/// `sum w(n) / 2^(n+1)` over the word.
pub fn value_of_bits(w: &BitWord) -> DyadicValue {
    let mut numerator = BigUint::zero();
    for &b in w.bits() {
        numerator <<= 1u32;
        if b == 1 {
            numerator += 1u32;
        }
    }
    DyadicValue {
        numerator,
        exponent: w.len() as u64,
    }
}

/// Drops the first `n` bits.
pub fn shift(w: &BitWord, n: usize) -> Result<BitWord> {
    if n > w.len() {
        return Err(Error::InsufficientPrefix {
            len: w.len(),
            shift: n,
        });
    }
    Ok(BitWord(w.0[n..].to_vec()))
}

fn check_unit(x: &BigRational) -> Result<()> {
    if x < &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::Domain(format!(
            "{} is not in [0, 1)",
            format_rational(x)
        )));
    }
    Ok(())
}

fn check_len(q: &BasicSequence, n: usize) -> Result<()> {
    if q.len() < n {
        return Err(Error::Precondition(format!(
            "basic sequence has {} terms, {n} needed",
            q.len()
        )));
    }
    Ok(())
}

/// First `n` Cantor digits of `x` by the greedy algorithm
/// `a_i = floor(r_i q_i)`, `r_(i+1) = r_i q_i - a_i`.
pub fn cantor_digits(x: &BigRational, q: &BasicSequence, n: usize) -> Result<CantorDigits> {
    check_unit(x)?;
    check_len(q, n)?;
    // Track r_i = num / den with integers only.
    let den = x.denom().magnitude().clone();
    let mut num = x.numer().magnitude().clone();
    let mut digits = Vec::with_capacity(n);
    for base in &q.bases[..n] {
        let (a, r) = (&num * base).div_rem(&den);
        digits.push(a);
        num = r;
    }
    CantorDigits::new(digits, q)
}

/// `sum a_n / (q_0 ... q_n)`.
pub fn cantor_value(d: &CantorDigits) -> BigRational {
    // Horner from the last digit: v = (a_0 + (a_1 + ...)/q_1)/q_0.
    let mut acc = BigRational::zero();
    for (a, q) in d.digits.iter().zip(&d.bases.bases).rev() {
        acc = (acc + BigRational::from_integer(BigInt::from(a.clone())))
            / BigRational::from_integer(BigInt::from(q.clone()));
    }
    acc
}

/// `(y_0, ..., y_n)` with `y_0 = x` and `y_(i+1) = q_i y_i mod 1`.
pub fn orbit(x: &BigRational, q: &BasicSequence, n: usize) -> Result<Vec<BigRational>> {
    check_unit(x)?;
    check_len(q, n)?;
    let den = x.denom().clone();
    let mut num = x.numer().clone();
    let mut out = Vec::with_capacity(n + 1);
    out.push(x.clone());
    for base in &q.bases[..n] {
        num = (num * BigInt::from(base.clone())).mod_floor(&den);
        out.push(BigRational::new(num.clone(), den.clone()));
    }
    Ok(out)
}

/// Parses `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse {s:?} as a rational"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Domain(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Renders a rational as `"numerator/denominator"` in lowest terms, always
/// with an explicit denominator.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Lossy decimal rendering for reports.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn value_examples() {
        assert_eq!(value_of_bits(&w("1")).to_rational(), r("1/2"));
        assert_eq!(value_of_bits(&w("011")).to_rational(), r("3/8"));
        assert_eq!(value_of_bits(&w("")).to_rational(), r("0"));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&w("0110"), 2).unwrap(), w("10"));
        assert_eq!(shift(&w("0110"), 0).unwrap(), w("0110"));
        assert_eq!(shift(&w("1"), 1).unwrap(), w(""));
        assert_eq!(
            shift(&w("1"), 2),
            Err(Error::InsufficientPrefix { len: 1, shift: 2 })
        );
    }

    #[test]
    fn digit_examples() {
        let d = cantor_digits(
            &r("1/2"),
            &BasicSequence::from_small(&[2, 2, 2]).unwrap(),
            3,
        )
        .unwrap();
        assert_eq!(d.digits(), &[1u32.into(), 0u32.into(), 0u32.into()]);

        let q = BasicSequence::from_small(&[2, 3, 4]).unwrap();
        let d = cantor_digits(&r("5/6"), &q, 3).unwrap();
        assert_eq!(d.digits(), &[1u32.into(), 2u32.into(), 0u32.into()]);
        // 1/2 + 2/6 + 0/24
        assert_eq!(r("1/2") + r("2/6") + r("0/24"), r("5/6"));
        assert_eq!(cantor_value(&d), r("5/6"));

        let zero = cantor_digits(&r("0"), &q, 3).unwrap();
        assert!(zero.digits().iter().all(Zero::is_zero));

        assert!(cantor_digits(&r("1"), &q, 2).is_err());
        assert!(cantor_digits(&r("-1/3"), &q, 2).is_err());
        assert!(cantor_digits(&r("1/3"), &q, 4).is_err());
    }

    #[test]
    fn value_examples_from_digits() {
        let q = BasicSequence::from_small(&[2, 2]).unwrap();
        let d = CantorDigits::new(vec![1u32.into(), 0u32.into()], &q).unwrap();
        assert_eq!(cantor_value(&d), r("1/2"));
        let q = BasicSequence::from_small(&[2, 3]).unwrap();
        let d = CantorDigits::new(vec![1u32.into(), 2u32.into()], &q).unwrap();
        assert_eq!(cantor_value(&d), r("5/6"));
        let q = BasicSequence::from_small(&[5, 7, 9]).unwrap();
        let d = CantorDigits::new(vec![0u32.into(); 3], &q).unwrap();
        assert_eq!(cantor_value(&d), r("0"));
        assert!(matches!(
            CantorDigits::new(vec![0u32.into(), 7u32.into()], &q),
            Err(Error::DigitOutOfRange { position: 1, .. })
        ));
    }

    #[test]
    fn orbit_examples() {
        let q = BasicSequence::from_small(&[2, 2]).unwrap();
        assert_eq!(
            orbit(&r("1/3"), &q, 2).unwrap(),
            vec![r("1/3"), r("2/3"), r("1/3")]
        );
        assert!(orbit(&r("0"), &q, 2).unwrap().iter().all(Zero::is_zero));

        let alpha = w("011000");
        let x = value_of_bits(&alpha).to_rational();
        let q = BasicSequence::from_exponents(&[1, 2]).unwrap();
        let y = orbit(&x, &q, 2).unwrap();
        assert_eq!(
            y[1],
            value_of_bits(&shift(&alpha, 1).unwrap()).to_rational()
        );
        assert_eq!(
            y[2],
            value_of_bits(&shift(&alpha, 3).unwrap()).to_rational()
        );
    }

    #[test]
    fn basic_sequence_rules() {
        assert!(BasicSequence::from_small(&[2, 1]).is_err());
        assert!(BasicSequence::from_exponents(&[1, 0]).is_err());
        let q = BasicSequence::from_exponents(&[1, 3, 2]).unwrap();
        assert_eq!(q.exponents(), Some(vec![1, 3, 2]));
        assert_eq!(q.product(3), BigUint::from(64u32));
        assert_eq!(
            BasicSequence::from_small(&[2, 3]).unwrap().exponents(),
            None
        );
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&r("2/4")), "1/2");
        assert_eq!(format_rational(&r("0")), "0/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn arb_unit() -> impl Strategy<Value = BigRational> {
        (1u64..2000)
            .prop_flat_map(|q| (0..q, Just(q)))
            .prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    proptest! {
        #[test]
        fn shift_identity(
            bits in proptest::collection::vec(0u8..2, 0..40),
            exps in proptest::collection::vec(1u64..6, 1..10),
        ) {
            let q = BasicSequence::from_exponents(&exps).unwrap();
            let total: u64 = exps.iter().sum();
            let alpha = BitWord::new(bits).unwrap().padded(total as usize);
            let x = value_of_bits(&alpha).to_rational();
            let y = orbit(&x, &q, exps.len()).unwrap();
            let mut p = 0usize;
            for (n, s) in exps.iter().enumerate() {
                p += *s as usize;
                let shifted = shift(&alpha, p).unwrap();
                prop_assert_eq!(&y[n + 1], &value_of_bits(&shifted).to_rational());
            }
        }

        #[test]
        fn round_trip(x in arb_unit(), bases in proptest::collection::vec(2u64..17, 0..12)) {
            let q = BasicSequence::from_small(&bases).unwrap();
            let d = cantor_digits(&x, &q, bases.len()).unwrap();
            for (a, base) in d.digits().iter().zip(q.bases()) {
                prop_assert!(a < base);
            }
            let v = cantor_value(&d);
            prop_assert!(v <= x);
            let gap = &x - &v;
            let scale = BigRational::from_integer(BigInt::from(q.product(bases.len())));
            prop_assert!(gap * scale < BigRational::one());
        }

        #[test]
        fn dyadic_round_trip_is_exact(bits in proptest::collection::vec(0u8..2, 0..20)) {
            let word = BitWord::new(bits.clone()).unwrap();
            let x = value_of_bits(&word).to_rational();
            let q = BasicSequence::from_small(&vec![2; bits.len()]).unwrap();
            let d = cantor_digits(&x, &q, bits.len()).unwrap();
            let as_bits: Vec<u8> = d.digits().iter().map(|a| if a.is_zero() { 0 } else { 1 }).collect();
            prop_assert_eq!(as_bits, bits);
            prop_assert_eq!(cantor_value(&d), x);
        }
    }
}
