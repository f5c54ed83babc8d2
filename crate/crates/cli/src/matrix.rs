//! Matrix files.
//!
//! A header line `dims d n` followed by `n` columns of `d` whitespace
//! separated decimal values, one column per line. Values are written with 17
//! significant digits so a write/read round trip is exact.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use polylearn_core::PointMatrix;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Invalid {
        origin: String,
        #[source]
        source: polylearn_core::Error,
    },
}

pub fn format_matrix(m: &PointMatrix) -> String {
    let mut out = format!("dims {} {}\n", m.dim(), m.count());
    for col in m.columns() {
        for (i, v) in col.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Whitespace-separated tokens with 1-based line and column.
fn tokens(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(li, line)| {
        let mut out = Vec::new();
        let mut start = None;
        for (ci, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(ci),
                (true, Some(s)) => {
                    out.push((li + 1, line[..s].chars().count() + 1, &line[s..ci]));
                    start = None;
                }
                _ => {}
            }
        }
        out
    })
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<PointMatrix, MatrixError> {
    let err = |line, column, message: String| MatrixError::Parse {
        origin: origin.to_string(),
        line,
        column,
        message,
    };
    let mut toks = tokens(text);
    match toks.next() {
        Some((_, _, "dims")) => {}
        Some((l, c, t)) => return Err(err(l, c, format!("expected `dims`, found `{t}`"))),
        None => return Err(err(1, 1, "empty file; expected `dims d n` header".into())),
    }
    let mut size = |what: &str| -> Result<usize, MatrixError> {
        match toks.next() {
            Some((l, c, t)) => t
                .parse::<usize>()
                .map_err(|_| err(l, c, format!("invalid {what} `{t}`"))),
            None => Err(err(1, 1, format!("header is missing {what}"))),
        }
    };
    let d = size("dimension d")?;
    let n = size("column count n")?;
    let mut data = Vec::with_capacity(d.saturating_mul(n).min(1 << 28));
    let mut last = (1, 1);
    for (l, c, t) in toks {
        last = (l, c);
        if data.len() == d * n {
            return Err(err(l, c, format!("extra value `{t}` after {n} columns of {d}")));
        }
        let v: f64 = t.parse().map_err(|_| err(l, c, format!("invalid number `{t}`")))?;
        if !v.is_finite() {
            return Err(err(l, c, format!("non-finite value `{t}`")));
        }
        data.push(v);
    }
    if data.len() != d * n {
        return Err(err(
            last.0,
            last.1,
            format!("expected {} values, found {}", d * n, data.len()),
        ));
    }
    PointMatrix::from_column_major(d, n, data).map_err(|source| MatrixError::Invalid {
        origin: origin.to_string(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<PointMatrix, MatrixError> {
    let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text, &path.display().to_string())
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &PointMatrix) -> Result<(), MatrixError> {
    write_atomic(path, format_matrix(m).as_bytes()).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })
}
