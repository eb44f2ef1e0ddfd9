//! LIBSVM text format: `label idx:val idx:val ...`, one example per line.

use std::io::{self, BufRead, Write};

use sdg_core::problems::{Dataset, Row};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, msg: msg.into() }
}

fn parse_number(tok: &str) -> Option<f64> {
    let t = tok.replace('\u{2212}', "-");
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a dataset. Labels `<= 0` become `-1`, the rest `+1`; blank lines
/// and `#` comments are skipped.
pub fn parse_libsvm(reader: impl BufRead) -> Result<Dataset, ParseError> {
    let mut rows = Vec::new();
    let mut n_features = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let label_tok = toks.next().unwrap_or_default();
        let label = parse_number(label_tok).ok_or_else(|| malformed(lineno, format!("bad label {label_tok:?}")))?;
        let mut features = Vec::new();
        for tok in toks {
            let (idx, val) = tok.split_once(':').ok_or_else(|| malformed(lineno, format!("expected idx:val, got {tok:?}")))?;
            let idx: u32 = idx.parse().map_err(|_| malformed(lineno, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(malformed(lineno, "indices are 1-based"));
            }
            let val = parse_number(val).ok_or_else(|| malformed(lineno, format!("bad value {val:?}")))?;
            n_features = n_features.max(idx as usize);
            features.push((idx, val));
        }
        rows.push(Row { features, label: if label <= 0.0 { -1.0 } else { 1.0 } });
    }
    Ok(Dataset { rows, n_features })
}

pub fn parse_libsvm_str(s: &str) -> Result<Dataset, ParseError> {
    parse_libsvm(s.as_bytes())
}

/// Writes values in shortest round-trip form.
pub fn write_libsvm(mut w: impl Write, data: &Dataset) -> io::Result<()> {
    for r in &data.rows {
        write!(w, "{}", if r.label > 0.0 { "+1" } else { "-1" })?;
        for &(j, v) in &r.features {
            write!(w, " {j}:{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
