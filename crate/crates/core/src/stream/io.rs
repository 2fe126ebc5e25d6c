//! JSON-lines stream files.
//!
//! The first line is a header `{"n": <dim>}`; every following non-empty line
//! is one update `{"i": <index>, "d": <delta>}` with a zero-based index.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

use super::{Stream, StreamError, Update};

#[derive(Debug, Error)]
pub enum StreamFileError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("missing header line")]
    MissingHeader,
    #[error("delta {0} does not fit in i64")]
    Overflow(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Serialize, Deserialize)]
struct Header {
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct Line {
    i: usize,
    d: i64,
}

/// Writes a header and then every update; works on lazy streams.
pub fn write_jsonl<Z, W, I>(mut out: W, dim: usize, updates: I) -> Result<usize, StreamFileError>
where
    Z: Scalar,
    W: Write,
    I: IntoIterator<Item = Update<Z>>,
{
    serde_json::to_writer(&mut out, &Header { n: dim }).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    let mut count = 0;
    for u in updates {
        let d = u
            .delta
            .to_i64()
            .ok_or_else(|| StreamFileError::Overflow(u.delta.to_string()))?;
        serde_json::to_writer(&mut out, &Line { i: u.index, d }).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        count += 1;
    }
    Ok(count)
}

pub fn read_jsonl<Z: Scalar, R: BufRead>(input: R) -> Result<Stream<Z>, StreamFileError> {
    let mut lines = input.lines().enumerate();
    let dim = loop {
        match lines.next() {
            None => return Err(StreamFileError::MissingHeader),
            Some((_, l)) if l.as_ref().map(|s| s.trim().is_empty()).unwrap_or(false) => continue,
            Some((k, l)) => {
                let h: Header = serde_json::from_str(&l?)
                    .map_err(|source| StreamFileError::Json { line: k + 1, source })?;
                break h.n;
            }
        }
    };
    let mut stream = Stream::empty(dim);
    for (k, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let u: Line =
            serde_json::from_str(&l).map_err(|source| StreamFileError::Json { line: k + 1, source })?;
        stream.push(Update::new(u.i, Z::lift(u.d)))?;
    }
    Ok(stream)
}
