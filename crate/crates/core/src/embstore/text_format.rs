//! word2vec-style text vectors: an optional `count dim` header, then one
//! `token v1 … vd` row per word.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use super::StaticEmbeddings;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Rows skipped because their token appeared earlier.
    pub duplicates: usize,
    pub had_header: bool,
}

pub fn load_static(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<StaticEmbeddings> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (emb, stats) = read_static(BufReader::new(file), &path.display().to_string(), expected_dim)?;
    if stats.duplicates > 0 {
        warn!(
            "{}: {} duplicate token(s) ignored, first occurrence kept",
            path.display(),
            stats.duplicates
        );
    }
    Ok(emb)
}

/// Parses text vectors. A first line made of exactly two unsigned integers
/// is taken as the header.
pub fn read_static<R: BufRead>(
    reader: R,
    name: &str,
    expected_dim: Option<usize>,
) -> Result<(StaticEmbeddings, LoadStats)> {
    let mut stats = LoadStats::default();
    let mut dim = expected_dim;
    let mut header_count = None;
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut seen = HashSet::new();
    let mut first = true;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();

        if first {
            first = false;
            if let [count] = rest[..] {
                if let (Ok(c), Ok(d)) = (token.parse::<usize>(), count.parse::<usize>()) {
                    if let Some(exp) = expected_dim.filter(|&e| e != d) {
                        return Err(Error::format(
                            name,
                            lineno,
                            format!("header dimension {d} does not match expected {exp}"),
                        ));
                    }
                    dim = Some(d);
                    header_count = Some(c);
                    stats.had_header = true;
                    continue;
                }
            }
        }

        let d = *dim.get_or_insert(rest.len());
        if rest.len() != d {
            return Err(Error::format(
                name,
                lineno,
                format!("expected {d} components, found {}", rest.len()),
            ));
        }
        if !seen.insert(token.to_owned()) {
            stats.duplicates += 1;
            continue;
        }
        for v in rest {
            let x: f32 = v
                .parse()
                .map_err(|_| Error::format(name, lineno, format!("invalid number '{v}'")))?;
            if !x.is_finite() {
                return Err(Error::format(name, lineno, format!("non-finite value '{v}'")));
            }
            data.push(x);
        }
        words.push(token.to_owned());
    }

    if let Some(c) = header_count {
        if c != words.len() + stats.duplicates {
            warn!("{name}: header announces {c} rows, found {}", words.len() + stats.duplicates);
        }
    }
    if words.is_empty() {
        return Err(Error::format(name, 0, "no vectors found"));
    }
    let emb = StaticEmbeddings::new(words, data, dim.unwrap_or(0))?;
    Ok((emb, stats))
}

pub fn save_static(emb: &StaticEmbeddings, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_static(emb, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes the header and rows. Components use the shortest representation
/// that parses back to the same `f32`.
pub fn write_static<W: Write>(emb: &StaticEmbeddings, w: &mut W) -> Result<()> {
    writeln!(w, "{} {}", emb.len(), emb.dim())?;
    for (word, row) in emb.iter() {
        if word.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("token {word:?} contains whitespace")));
        }
        w.write_all(word.as_bytes())?;
        for v in row {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read(text: &str, dim: Option<usize>) -> Result<(StaticEmbeddings, LoadStats)> {
        read_static(Cursor::new(text.as_bytes()), "test", dim)
    }

    #[test]
    fn header_and_rows() {
        let (e, s) = read("2 3\na 1 2 3\nb 4 5 6\n", None).unwrap();
        assert_eq!((e.len(), e.dim()), (2, 3));
        assert!(s.had_header);
    }

    #[test]
    fn short_row_names_line() {
        let err = read("2 3\na 1 2 3\nb 4 5\n", None).unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }), "{err}");
        let err = read("a 1 2\n", Some(3)).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
        let err = read("1 2\na 1 2\n", Some(3)).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn headerless_infers_dim() {
        let (e, s) = read("a 0.5 1.5\nb -1 2\n", None).unwrap();
        assert_eq!(e.dim(), 2);
        assert!(!s.had_header);
    }

    #[test]
    fn duplicates_keep_first() {
        let (e, s) = read("a 1 1\na 2 2\nb 3 3\n", None).unwrap();
        assert_eq!(e.get("a"), Some(&[1.0f32, 1.0][..]));
        assert_eq!(s.duplicates, 1);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn single_word_file_has_two_lines() {
        let e = StaticEmbeddings::new(vec!["žaba".into()], vec![0.25, -1.0], 2).unwrap();
        let mut out = Vec::new();
        write_static(&e, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 2\nžaba 0.25 -1\n");
    }

    #[test]
    fn bad_numbers_are_errors() {
        assert!(read("a x 1\n", None).is_err());
        assert!(read("a inf 1\n", None).is_err());
        assert!(read("", None).is_err());
    }
}
