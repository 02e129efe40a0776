//! Token-embedding record files.
//!
//! One record per line, tab-separated:
//!
//! ```text
//! sentence_id <TAB> position <TAB> token <TAB> layer <TAB> v1 v2 … vd
//! ```
//!
//! `position` is the 0-based token index within the sentence, `layer` is one
//! of `CNN`, `LSTM1`, `LSTM2`, and the components are space-separated.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Layer;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TokenEmbeddingRecord {
    pub sentence_id: String,
    pub position: usize,
    pub token: String,
    pub layer: Layer,
    pub vector: Vec<f32>,
}

/// Streaming record parser. Checks that every layer keeps one dimension and
/// that the layers of one token position agree.
pub struct RecordReader<R> {
    reader: R,
    name: String,
    line: usize,
    buf: String,
    layer_dims: [Option<usize>; 3],
    current: Option<(String, usize, usize)>,
    failed: bool,
}

impl RecordReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(RecordReader::new(BufReader::new(file), path.display().to_string()))
    }
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R, name: impl Into<String>) -> Self {
        RecordReader {
            reader,
            name: name.into(),
            line: 0,
            buf: String::new(),
            layer_dims: [None; 3],
            current: None,
            failed: false,
        }
    }

    /// Dimension seen so far for `layer`.
    pub fn layer_dim(&self, layer: Layer) -> Option<usize> {
        self.layer_dims[layer.index()]
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(&self.name, self.line, msg)
    }

    fn parse(&mut self) -> Result<TokenEmbeddingRecord> {
        let line = self.buf.trim_end_matches(['\n', '\r']);
        let fields: Vec<&str> = line.split('\t').collect();
        let [sid, pos, token, layer, values] = fields[..] else {
            return Err(self.err(format!("expected 5 tab-separated fields, found {}", fields.len())));
        };
        let position: usize = pos
            .parse()
            .map_err(|_| self.err(format!("invalid position '{pos}'")))?;
        let layer: Layer = layer
            .parse()
            .map_err(|_| self.err(format!("unknown layer '{layer}'")))?;
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(self.err(format!("invalid token {token:?}")));
        }
        let vector = values
            .split_whitespace()
            .map(|v| match v.parse::<f32>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(self.err(format!("invalid component '{v}'"))),
            })
            .collect::<Result<Vec<f32>>>()?;
        if vector.is_empty() {
            return Err(self.err("empty vector"));
        }
        let d = vector.len();
        match self.layer_dims[layer.index()] {
            Some(expected) if expected != d => {
                return Err(self.err(format!("layer {layer} has dimension {expected}, record has {d}")))
            }
            _ => self.layer_dims[layer.index()] = Some(d),
        }
        match &self.current {
            Some((s, p, expected)) if s == sid && *p == position && *expected != d => {
                return Err(self.err(format!(
                    "layers of token {position} in sentence {sid} disagree on dimension ({expected} vs {d})"
                )))
            }
            _ => self.current = Some((sid.to_owned(), position, d)),
        }
        Ok(TokenEmbeddingRecord {
            sentence_id: sid.to_owned(),
            position,
            token: token.to_owned(),
            layer,
            vector,
        })
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<TokenEmbeddingRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) if self.buf.trim().is_empty() => continue,
                Ok(_) => {
                    let r = self.parse();
                    self.failed = r.is_err();
                    return Some(r);
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(self.err(format!("read error: {e}"))));
                }
            }
        }
    }
}

pub struct RecordWriter<W: Write> {
    out: W,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Self {
        RecordWriter { out }
    }

    pub fn write(
        &mut self,
        sentence_id: &str,
        position: usize,
        token: &str,
        layer: Layer,
        vector: &[f32],
    ) -> Result<()> {
        write!(self.out, "{sentence_id}\t{position}\t{token}\t{layer}\t")?;
        for (i, v) in vector.iter().enumerate() {
            if i > 0 {
                self.out.write_all(b" ")?;
            }
            write!(self.out, "{v}")?;
        }
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_record(&mut self, r: &TokenEmbeddingRecord) -> Result<()> {
        self.write(&r.sentence_id, r.position, &r.token, r.layer, &r.vector)
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read_all(text: &str) -> Result<Vec<TokenEmbeddingRecord>> {
        RecordReader::new(Cursor::new(text.as_bytes().to_vec()), "test").collect()
    }

    #[test]
    fn three_layers_for_one_token() {
        let text = "s0\t0\tHiša\tCNN\t1 2\ns0\t0\tHiša\tLSTM1\t3 4\ns0\t0\tHiša\tLSTM2\t5 6\n";
        let recs = read_all(text).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].layer, Layer::Lstm1);
        assert_eq!(recs[2].vector, [5.0, 6.0]);
        assert_eq!(recs[0].token, "Hiša");
    }

    #[test]
    fn empty_file() {
        assert!(read_all("").unwrap().is_empty());
    }

    #[test]
    fn dimension_changes_within_layer_fail() {
        let err = read_all("s0\t0\ta\tCNN\t1 2\ns0\t1\tb\tCNN\t1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn layers_of_one_position_must_agree() {
        let err = read_all("s0\t0\ta\tCNN\t1 2\ns0\t0\ta\tLSTM1\t1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(read_all("s0\t0\ta\tCNN\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(read_all("s0\tx\ta\tCNN\t1\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(read_all("s0\t0\ta\tELMO\t1\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(read_all("\ns0\t0\ta\tCNN\tz\n"), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn writer_output_parses_back() {
        let mut w = RecordWriter::new(Vec::new());
        w.write("7", 2, "x", Layer::Lstm2, &[0.1, -3.5]).unwrap();
        let bytes = w.into_inner().unwrap();
        assert_eq!(bytes, b"7\t2\tx\tLSTM2\t0.1 -3.5\n");
        let recs = read_all(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(recs[0].vector, [0.1, -3.5]);
    }
}
