use std::fs;
use std::io::{self, Write};

use num_rational::BigRational;
use serde::Serialize;

use qnormal::cantor::{format_rational, rational_to_f64};

use crate::{Failure, Format, OutputArgs};

/// Exact rational as `"num/den"` plus a decimal for people.
#[derive(Debug, Serialize)]
pub struct Exact {
    pub exact: String,
    pub decimal: f64,
}

impl From<&BigRational> for Exact {
    fn from(x: &BigRational) -> Self {
        Self {
            exact: format_rational(x),
            decimal: rational_to_f64(x),
        }
    }
}

/// Writes one artifact: the JSON document, or the CSV rows produced by
/// `rows`.
pub fn emit<J, F>(output: &OutputArgs, json: &J, rows: F) -> Result<(), Failure>
where
    J: Serialize,
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let bytes = match output.format {
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(json).map_err(io::Error::other)?;
            buf.push(b'\n');
            buf
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            rows(&mut w).map_err(io::Error::other)?;
            w.into_inner()
                .map_err(|e| io::Error::other(e.to_string()))?
        }
    };
    match &output.out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
