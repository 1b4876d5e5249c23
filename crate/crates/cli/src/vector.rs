//! Text vector files.
//!
//! Sparse form is one `i v` pair per line with a 1-based index; indices not
//! listed are zero. Dense form is one integer per line, the line number
//! being the index. Blank lines and lines starting with `#` are skipped in
//! sparse form only, since in dense form every line is a coordinate.

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum VectorFile {
    Sparse(Vec<(u64, i64)>),
    Dense(Vec<i64>),
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

fn integer<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> CliResult<T> {
    tok.parse().map_err(|_| malformed(line, format!("{what} {tok:?} is not an integer")))
}

impl VectorFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let sparse = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .is_some_and(|l| l.split_whitespace().count() == 2);
        if sparse {
            let mut entries = Vec::new();
            for (no, line) in text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())) {
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(malformed(no, "expected `index value`"));
                }
                let i: u64 = integer(toks[0], no, "index")?;
                if i == 0 {
                    return Err(malformed(no, "indices start at 1"));
                }
                entries.push((i, integer(toks[1], no, "value")?));
            }
            let mut seen = std::collections::HashSet::new();
            for (pos, &(i, _)) in entries.iter().enumerate() {
                if !seen.insert(i) {
                    return Err(CliError::Input(format!("index {i} appears twice (entry {})", pos + 1)));
                }
            }
            Ok(VectorFile::Sparse(entries))
        } else {
            text.lines()
                .enumerate()
                .map(|(k, l)| {
                    let tok = l.trim();
                    if tok.is_empty() {
                        return Err(malformed(k + 1, "empty line in dense vector"));
                    }
                    integer(tok, k + 1, "value")
                })
                .collect::<CliResult<_>>()
                .map(VectorFile::Dense)
        }
    }

    pub fn read(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Dimension implied by the file alone.
    pub fn implied_len(&self) -> u64 {
        match self {
            VectorFile::Dense(v) => v.len() as u64,
            VectorFile::Sparse(e) => e.iter().map(|&(i, _)| i).max().unwrap_or(0),
        }
    }

    /// Dense coordinates of length `n`, each within `[-max_mag, max_mag]`.
    pub fn to_dense(&self, n: u64, max_mag: u64) -> CliResult<Vec<i64>> {
        let check = |i: u64, v: i64| {
            if i > n {
                Err(CliError::Input(format!("index {i} exceeds n = {n}")))
            } else if v.unsigned_abs() > max_mag {
                Err(CliError::Input(format!("value {v} at index {i} exceeds max magnitude {max_mag}")))
            } else {
                Ok(())
            }
        };
        let mut out = vec![0i64; n as usize];
        match self {
            VectorFile::Dense(vals) => {
                for (k, &v) in vals.iter().enumerate() {
                    check(k as u64 + 1, v)?;
                    out[k] = v;
                }
            }
            VectorFile::Sparse(entries) => {
                for &(i, v) in entries {
                    check(i, v)?;
                    out[i as usize - 1] = v;
                }
            }
        }
        Ok(out)
    }
}
