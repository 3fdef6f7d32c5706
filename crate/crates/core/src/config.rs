//! Registry and oracle files.
//!
//! Both are TOML. The grammar is documented in `book/src/file-formats.md`;
//! the short version:
//!
//! ```toml
//! format = "qnormal.registry/v1"      # optional
//!
//! [oracle]                            # optional
//! prefix = "0110 1001"
//! default = 0
//!
//! [[program]]
//! kind = "periodic"
//! pattern = "01"
//! halt = { rule = "linear", slope = 2, intercept = 1 }
//!
//! [[program]]
//! alias_of = 0
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::generators::{Bit, GeneratorSpec, Oracle};
use crate::programs::{HaltRule, ProgramSource, Registry};

pub const REGISTRY_FORMAT: &str = "qnormal.registry/v1";
pub const ORACLE_FORMAT: &str = "qnormal.oracle/v1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    format: Option<String>,
    oracle: Option<OracleFile>,
    #[serde(default)]
    program: Vec<RawProgram>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleFile {
    format: Option<String>,
    #[serde(default)]
    prefix: String,
    #[serde(default)]
    default: Bit,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProgram {
    kind: Option<String>,
    alias_of: Option<usize>,
    halt: Option<HaltRule>,
    bit: Option<Bit>,
    pattern: Option<String>,
    bits: Option<String>,
    default: Option<Bit>,
    numerator: Option<u64>,
    denominator: Option<u64>,
    offset: Option<u64>,
    invert: Option<bool>,
}

impl RawProgram {
    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut note = |set: bool, name| {
            if set {
                keys.push(name)
            }
        };
        note(self.bit.is_some(), "bit");
        note(self.pattern.is_some(), "pattern");
        note(self.bits.is_some(), "bits");
        note(self.default.is_some(), "default");
        note(self.numerator.is_some(), "numerator");
        note(self.denominator.is_some(), "denominator");
        note(self.offset.is_some(), "offset");
        note(self.invert.is_some(), "invert");
        keys
    }

    fn into_source(self, index: usize) -> Result<ProgramSource> {
        let err = |msg: String| Error::Config(format!("program {index}: {msg}"));
        if let Some(target) = self.alias_of {
            if self.kind.is_some() || self.halt.is_some() || !self.present_keys().is_empty() {
                return Err(err("an alias entry takes only `alias_of`".into()));
            }
            return Ok(ProgramSource::Alias(target));
        }
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| err("missing `kind`".into()))?;
        let allowed: &[&str] = match kind {
            "constant" => &["bit"],
            "periodic" => &["pattern"],
            "table" => &["bits", "default"],
            "rational" => &["numerator", "denominator"],
            "champernowne" => &[],
            "oracle" => &["offset", "invert"],
            other => return Err(err(format!("unknown kind {other:?}"))),
        };
        if let Some(extra) = self
            .present_keys()
            .into_iter()
            .find(|k| !allowed.contains(k))
        {
            return Err(err(format!(
                "key `{extra}` does not apply to kind {kind:?}"
            )));
        }
        fn need<T>(v: Option<T>, key: &str, index: usize) -> Result<T> {
            v.ok_or_else(|| Error::Config(format!("program {index}: missing `{key}`")))
        }
        let generator = match kind {
            "constant" => GeneratorSpec::Constant(need(self.bit, "bit", index)?),
            "periodic" => GeneratorSpec::Periodic(
                parse_bits(&need(self.pattern, "pattern", index)?).map_err(err)?,
            ),
            "table" => GeneratorSpec::Table {
                bits: parse_bits(&need(self.bits, "bits", index)?).map_err(err)?,
                default: self.default.unwrap_or(0),
            },
            "rational" => GeneratorSpec::Rational {
                numerator: need(self.numerator, "numerator", index)?,
                denominator: need(self.denominator, "denominator", index)?,
            },
            "champernowne" => GeneratorSpec::Champernowne,
            _ => GeneratorSpec::OracleBit {
                offset: self.offset.unwrap_or(0),
                invert: self.invert.unwrap_or(false),
            },
        };
        generator.validate().map_err(|e| err(e.to_string()))?;
        Ok(ProgramSource::new(generator, self.halt.unwrap_or_default()))
    }
}

/// Parses a bit string: `0` and `1`, with ASCII whitespace and `_` ignored.
pub fn parse_bits(s: &str) -> std::result::Result<Vec<Bit>, String> {
    s.chars()
        .filter(|c| !c.is_ascii_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("{other:?} is not a bit")),
        })
        .collect()
}

fn check_format(found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(f) if f != expected => Err(Error::Config(format!(
            "unsupported format {f:?}, expected {expected:?}"
        ))),
        _ => Ok(()),
    }
}

impl OracleFile {
    fn into_oracle(self) -> Result<Oracle> {
        check_format(self.format.as_deref(), ORACLE_FORMAT)?;
        let prefix = parse_bits(&self.prefix).map_err(|e| Error::Config(format!("oracle: {e}")))?;
        Oracle::new(prefix, self.default).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Parses a registry document. `oracle_override` replaces any `[oracle]`
/// table in the document.
pub fn parse_registry(text: &str, oracle_override: Option<Oracle>) -> Result<Registry> {
    let file: RegistryFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("registry: {e}")))?;
    check_format(file.format.as_deref(), REGISTRY_FORMAT)?;
    let oracle = match (oracle_override, file.oracle) {
        (Some(o), _) => Some(o),
        (None, Some(o)) => Some(o.into_oracle()?),
        (None, None) => None,
    };
    let sources = file
        .program
        .into_iter()
        .enumerate()
        .map(|(i, raw)| raw.into_source(i))
        .collect::<Result<Vec<_>>>()?;
    Registry::new(sources, oracle)
}

/// Parses an oracle document.
pub fn parse_oracle(text: &str) -> Result<Oracle> {
    let file: OracleFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("oracle: {e}")))?;
    file.into_oracle()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn load_registry(path: &Path, oracle_override: Option<Oracle>) -> Result<Registry> {
    parse_registry(&read(path)?, oracle_override)
}

pub fn load_oracle(path: &Path) -> Result<Oracle> {
    parse_oracle(&read(path)?)
}
