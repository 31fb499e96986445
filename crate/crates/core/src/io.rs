//! Readers and writers for the word2vec text and binary formats.
//!
//! Both formats start with an ASCII header line `<vocab_count> <dim>`. In the
//! text format each following line is `<word> <f_1> ... <f_dim>`. In the binary
//! format each record is the UTF-8 word, one `0x20` byte, then `dim`
//! little-endian `f32` values. A single `\n` between binary records is
//! accepted on read and always emitted on write.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Binary,
}

impl Format {
    /// Guesses the format from a file extension: `.txt`, `.vec` and `.text`
    /// are text, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ["txt", "vec", "text"].contains(&ext.to_ascii_lowercase().as_str()) => {
                Format::Text
            }
            _ => Format::Binary,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "text",
            Format::Binary => "binary",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "binary" | "bin" => Ok(Format::Binary),
            other => Err(Error::Config(format!(
                "unknown model format {other:?} (expected text or binary)"
            ))),
        }
    }
}

struct Header {
    count: usize,
    dim: usize,
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<Header> {
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::MalformedHeader("missing header line".into()));
    }
    let text = std::str::from_utf8(&line)
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let mut fields = text.split_ascii_whitespace();
    let (Some(count), Some(dim), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::MalformedHeader(format!(
            "expected `<vocab_count> <dim>`, got {:?}",
            text.trim_end()
        )));
    };
    let parse = |field: &str, name: &str| {
        field
            .parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("{name} {field:?} is not a count")))
    };
    let header = Header {
        count: parse(count, "vocab_count")?,
        dim: parse(dim, "dim")?,
    };
    if header.dim == 0 {
        return Err(Error::MalformedHeader("dimension must be positive".into()));
    }
    Ok(header)
}

fn effective_rows(header: &Header, limit: Option<usize>) -> Result<usize> {
    match limit {
        Some(0) => Err(Error::Config("limit must be positive".into())),
        Some(limit) => Ok(header.count.min(limit)),
        None => Ok(header.count),
    }
}

fn with_capacity(rows: usize, dim: usize) -> (Vec<String>, Vec<f32>) {
    // Headers are untrusted; only pre-allocate for plausible sizes.
    const MAX_PREALLOC: usize = 1 << 31;
    match rows.checked_mul(dim) {
        Some(n) if n <= MAX_PREALLOC => (Vec::with_capacity(rows), Vec::with_capacity(n)),
        _ => (Vec::new(), Vec::new()),
    }
}

/// Reads a word2vec text model, keeping at most `limit` rows.
pub fn load_text_model<R: BufRead>(mut reader: R, limit: Option<usize>) -> Result<EmbeddingModel> {
    let header = read_header(&mut reader)?;
    let rows = effective_rows(&header, limit)?;
    let (mut vocab, mut matrix) = with_capacity(rows, header.dim);

    let mut line = String::new();
    for record in 0..rows {
        line.clear();
        let read = read_utf8_line(&mut reader, &mut line, record)?;
        if read == 0 {
            return Err(Error::Truncated {
                record,
                reason: format!("header declares {} records", header.count),
            });
        }
        let mut fields = line.split_ascii_whitespace();
        let Some(word) = fields.next() else {
            return Err(Error::MalformedRecord {
                record,
                reason: "blank line".into(),
            });
        };
        let start = matrix.len();
        for field in fields {
            let value: f32 = field.parse().map_err(|_| Error::MalformedRecord {
                record,
                reason: format!("{field:?} is not a decimal float"),
            })?;
            matrix.push(value);
        }
        let found = matrix.len() - start;
        if found != header.dim {
            return Err(Error::Arity {
                record,
                expected: header.dim,
                found,
            });
        }
        if matrix[start..].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                word: word.to_owned(),
                record,
            });
        }
        vocab.push(word.to_owned());
    }

    if limit.is_none() {
        let mut rest = Vec::new();
        reader.read_to_end(&mut rest)?;
        if !rest.iter().all(u8::is_ascii_whitespace) {
            return Err(Error::MalformedRecord {
                record: rows,
                reason: format!("more records than the {} declared", header.count),
            });
        }
    }
    EmbeddingModel::new(vocab, header.dim, matrix)
}

fn read_utf8_line<R: BufRead>(reader: &mut R, line: &mut String, record: usize) -> Result<usize> {
    match reader.read_line(line) {
        Ok(n) => Ok(n),
        Err(e) if e.kind() == ErrorKind::InvalidData => Err(Error::MalformedRecord {
            record,
            reason: "invalid UTF-8".into(),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Reads a word2vec binary model, keeping at most `limit` rows.
///
/// Floats are copied bit-for-bit. A record cut short by end of input is an
/// error; no partial model is returned.
pub fn load_binary_model<R: BufRead>(
    mut reader: R,
    limit: Option<usize>,
) -> Result<EmbeddingModel> {
    let header = read_header(&mut reader)?;
    let rows = effective_rows(&header, limit)?;
    let (mut vocab, mut matrix) = with_capacity(rows, header.dim);

    let mut word = Vec::new();
    let mut payload = vec![0u8; header.dim * 4];
    for record in 0..rows {
        word.clear();
        reader.read_until(b' ', &mut word)?;
        if word.last() != Some(&b' ') {
            return Err(Error::Truncated {
                record,
                reason: if word.is_empty() {
                    format!("header declares {} records", header.count)
                } else {
                    "word is not terminated by a space".into()
                },
            });
        }
        word.pop();
        let bytes = word.strip_prefix(b"\n").unwrap_or(&word);
        if bytes.is_empty() || bytes.contains(&b'\n') {
            return Err(Error::MalformedRecord {
                record,
                reason: "empty or multi-line word".into(),
            });
        }
        let text = std::str::from_utf8(bytes).map_err(|_| Error::MalformedRecord {
            record,
            reason: "word is not valid UTF-8".into(),
        })?;

        match reader.read_exact(&mut payload) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => {
                return Err(Error::Truncated {
                    record,
                    reason: format!("vector of {text:?} shorter than {} floats", header.dim),
                });
            }
            Err(e) => return Err(e.into()),
        }
        let start = matrix.len();
        matrix.extend(
            payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
        if matrix[start..].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                word: text.to_owned(),
                record,
            });
        }
        vocab.push(text.to_owned());
    }

    if limit.is_none() {
        let mut rest = Vec::new();
        reader.read_to_end(&mut rest)?;
        if !(rest.is_empty() || rest == b"\n") {
            return Err(Error::MalformedRecord {
                record: rows,
                reason: format!(
                    "{} trailing bytes after the {} declared records",
                    rest.len(),
                    header.count
                ),
            });
        }
    }
    EmbeddingModel::new(vocab, header.dim, matrix)
}

pub fn load_model<R: BufRead>(
    reader: R,
    format: Format,
    limit: Option<usize>,
) -> Result<EmbeddingModel> {
    match format {
        Format::Text => load_text_model(reader, limit),
        Format::Binary => load_binary_model(reader, limit),
    }
}

/// Opens and loads a model file with a large read buffer.
pub fn load_path(path: &Path, format: Format, limit: Option<usize>) -> Result<EmbeddingModel> {
    let file = File::open(path)?;
    load_model(BufReader::with_capacity(1 << 20, file), format, limit)
}

fn check_encodable(model: &EmbeddingModel, format: Format) -> Result<()> {
    for word in model.vocab() {
        let bad = match format {
            Format::Text => word.bytes().any(|b| b.is_ascii_whitespace()),
            Format::Binary => word.bytes().any(|b| b == b' ' || b == b'\n'),
        };
        if word.is_empty() || bad {
            return Err(Error::Unencodable(word.clone()));
        }
    }
    Ok(())
}

/// Serializes `model`. Every word is validated before the first byte is
/// written, so an unencodable word never leaves a partial file behind.
///
/// Text output renders each float with the shortest decimal that parses back
/// to the same `f32`.
pub fn write_model<W: Write>(model: &EmbeddingModel, format: Format, mut out: W) -> Result<()> {
    check_encodable(model, format)?;
    writeln!(out, "{} {}", model.len(), model.dim())?;
    match format {
        Format::Text => {
            let mut line = String::new();
            for entry in model.iter() {
                use std::fmt::Write as _;
                line.clear();
                line.push_str(entry.word);
                for v in entry.values {
                    write!(line, " {v:?}").expect("writing to a String");
                }
                line.push('\n');
                out.write_all(line.as_bytes())?;
            }
        }
        Format::Binary => {
            let mut payload = Vec::with_capacity(model.dim() * 4 + 1);
            for entry in model.iter() {
                out.write_all(entry.word.as_bytes())?;
                out.write_all(b" ")?;
                payload.clear();
                for v in entry.values {
                    payload.extend_from_slice(&v.to_le_bytes());
                }
                payload.push(b'\n');
                out.write_all(&payload)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn to_bytes(model: &EmbeddingModel, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_model(model, format, &mut buf)?;
    Ok(buf)
}
