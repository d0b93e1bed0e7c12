//! word2vec text and binary model layouts.
//!
//! Text: a `<vocab_size> <dim>` header line, then one `<word> <v1> ... <v_dim>`
//! line per entry.
//!
//! Binary: the same ASCII header terminated by `\n`, then per entry the
//! word's bytes, a single `0x20`, and `dim` little-endian `f32`s. A single
//! `\n` after each vector is optional on read.

use std::fs::File;
use std::io::{self, BufRead, BufReader, ErrorKind, Read, Write};
use std::path::Path;

use super::{is_valid_word, EmbeddingError, EmbeddingModel, ModelBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    Text,
    Binary,
    #[default]
    Auto,
}

/// Controls the optional newline that follows each vector in binary files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryLayout {
    pub trailing_newline: bool,
}

impl Default for BinaryLayout {
    /// The reference word2vec tool writes a newline after every vector.
    fn default() -> Self {
        Self {
            trailing_newline: true,
        }
    }
}

pub fn parse_text_model(path: impl AsRef<Path>) -> Result<EmbeddingModel, EmbeddingError> {
    read_text(BufReader::new(File::open(path)?))
}

pub fn parse_binary_model(path: impl AsRef<Path>) -> Result<EmbeddingModel, EmbeddingError> {
    read_binary(BufReader::new(File::open(path)?))
}

/// Parses a model file in the given format, sniffing the layout for
/// [`ModelFormat::Auto`].
pub fn parse_model(
    path: impl AsRef<Path>,
    format: ModelFormat,
) -> Result<EmbeddingModel, EmbeddingError> {
    let path = path.as_ref();
    let format = match format {
        ModelFormat::Auto => sniff_format(path)?,
        f => f,
    };
    match format {
        ModelFormat::Text => parse_text_model(path),
        _ => parse_binary_model(path),
    }
}

/// Decides between text and binary by parsing the header, then checking
/// whether the first entry decodes as a text line of `dim + 1` fields.
pub fn sniff_format(path: impl AsRef<Path>) -> Result<ModelFormat, EmbeddingError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let (_, dim) = parse_header(&header)?;

    // A text line holds at least two bytes per component; cap the probe so
    // a binary file without newlines is not read whole.
    let limit = (dim as u64 + 1).saturating_mul(64).max(4096);
    let mut first = Vec::new();
    reader.take(limit).read_until(b'\n', &mut first)?;
    let is_text = std::str::from_utf8(&first)
        .ok()
        .map(|line| {
            let mut fields = line.split_ascii_whitespace();
            fields.next().is_some()
                && fields
                    .map(|f| f.parse::<f64>().is_ok())
                    .try_fold(0usize, |n, ok| ok.then_some(n + 1))
                    == Some(dim)
        })
        .unwrap_or(false);
    Ok(if is_text {
        ModelFormat::Text
    } else {
        ModelFormat::Binary
    })
}

fn parse_header(line: &[u8]) -> Result<(usize, usize), EmbeddingError> {
    let malformed = || EmbeddingError::MalformedHeader(String::from_utf8_lossy(line).into_owned());
    let text = std::str::from_utf8(line).map_err(|_| malformed())?;
    let mut fields = text.split_ascii_whitespace();
    let (Some(n), Some(d), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(malformed());
    };
    let n: usize = n.parse().map_err(|_| malformed())?;
    let d: usize = d.parse().map_err(|_| malformed())?;
    if d == 0 {
        return Err(malformed());
    }
    Ok((n, d))
}

pub fn read_text<R: BufRead>(reader: R) -> Result<EmbeddingModel, EmbeddingError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbeddingError::MalformedHeader(String::new()))??;
    let (vocab_size, dim) = parse_header(header.as_bytes())?;
    let mut builder = ModelBuilder::new(dim, vocab_size)?;
    let mut components = Vec::with_capacity(dim);

    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        if builder.len() == vocab_size {
            return Err(EmbeddingError::TrailingData {
                expected: vocab_size,
                line: line_no,
            });
        }
        let mut fields = line.split_ascii_whitespace();
        let word = fields.next().unwrap_or_default().to_owned();
        components.clear();
        for field in fields {
            let value = field
                .parse::<f64>()
                .map_err(|_| EmbeddingError::NonNumeric {
                    line: line_no,
                    word: word.clone(),
                    value: field.to_owned(),
                })?;
            components.push(value);
        }
        builder.push(word, &components, line_no)?;
    }

    if builder.len() < vocab_size {
        return Err(EmbeddingError::Truncated {
            expected: vocab_size,
            found: builder.len(),
        });
    }
    Ok(builder.finish())
}

pub fn read_binary<R: BufRead>(mut reader: R) -> Result<EmbeddingModel, EmbeddingError> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(EmbeddingError::MalformedHeader(
            String::from_utf8_lossy(&header).into_owned(),
        ));
    }
    let (vocab_size, dim) = parse_header(&header)?;
    let mut builder = ModelBuilder::new(dim, vocab_size)?;
    let mut word_buf = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    let mut components = vec![0.0f64; dim];

    for entry in 0..vocab_size {
        word_buf.clear();
        reader.read_until(b' ', &mut word_buf)?;
        if word_buf.pop() != Some(b' ') {
            return Err(EmbeddingError::Truncated {
                expected: vocab_size,
                found: entry,
            });
        }
        let word =
            String::from_utf8(word_buf.clone()).map_err(|e| EmbeddingError::InvalidWord {
                entry,
                word: String::from_utf8_lossy(e.as_bytes()).into_owned(),
            })?;
        if !is_valid_word(&word) {
            return Err(EmbeddingError::InvalidWord { entry, word });
        }

        if let Err(e) = reader.read_exact(&mut raw) {
            return Err(match e.kind() {
                ErrorKind::UnexpectedEof => EmbeddingError::TruncatedVector { entry, word },
                _ => e.into(),
            });
        }
        for (dst, bytes) in components.iter_mut().zip(raw.chunks_exact(4)) {
            *dst = f64::from(f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]));
        }
        builder.push(word, &components, entry)?;

        if reader.fill_buf()?.first() == Some(&b'\n') {
            reader.consume(1);
        }
    }

    if !reader.fill_buf()?.is_empty() {
        return Err(EmbeddingError::TrailingData {
            expected: vocab_size,
            line: vocab_size + 1,
        });
    }
    Ok(builder.finish())
}

/// Writes the text layout. Components use the shortest decimal form that
/// parses back to the identical `f64`.
pub fn write_text<W: Write>(model: &EmbeddingModel, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {}", model.len(), model.dim())?;
    for entry in model.iter() {
        w.write_all(entry.word.as_bytes())?;
        for c in entry.components {
            write!(w, " {c}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes the binary layout. Components are narrowed to `f32`.
pub fn write_binary<W: Write>(
    model: &EmbeddingModel,
    mut w: W,
    layout: BinaryLayout,
) -> io::Result<()> {
    writeln!(w, "{} {}", model.len(), model.dim())?;
    for entry in model.iter() {
        w.write_all(entry.word.as_bytes())?;
        w.write_all(b" ")?;
        for &c in entry.components {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
        if layout.trailing_newline {
            w.write_all(b"\n")?;
        }
    }
    w.flush()
}
