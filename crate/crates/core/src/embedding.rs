//! Dense word embedding spaces in word2vec text format.
//!
//! A space is loaded once and never mutated afterwards. The text format is
//! an optional `vocab_size dim` header followed by one `word c1 ... cd` line
//! per word. Components are written with 9 significant digits, so a space
//! survives `save -> load -> save` byte for byte.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub type Vector = Array1<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Array2<f64>,
    source: Option<String>,
}

impl EmbeddingSpace {
    /// Build a space from `(word, vector)` pairs.
    ///
    /// Fails on duplicate words, vectors of the wrong length and non-finite
    /// components.
    pub fn from_pairs<I, S>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vector)>,
        S: Into<String>,
    {
        let mut words = Vec::new();
        let mut index = HashMap::new();
        let mut data = Vec::new();
        for (word, vector) in pairs {
            let word = word.into();
            if vector.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: vector.len(),
                });
            }
            if vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("embedding of `{word}`")));
            }
            if index.insert(word.clone(), words.len()).is_some() {
                return Err(Error::Invalid(format!("duplicate word `{word}`")));
            }
            words.push(word);
            data.extend(vector.iter().copied());
        }
        let matrix = Array2::from_shape_vec((words.len(), dim), data).expect("row-major data matches shape");
        Ok(EmbeddingSpace {
            words,
            index,
            matrix,
            source: None,
        })
    }

    pub fn empty(dim: usize) -> Self {
        EmbeddingSpace {
            words: Vec::new(),
            index: HashMap::new(),
            matrix: Array2::zeros((0, dim)),
            source: None,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in insertion order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Look up a word. Absent words yield `None`, never a zero vector.
    pub fn get(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index_of(word).map(|i| self.matrix.row(i))
    }

    pub fn row(&self, index: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(index)
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ArrayView1<'_, f64>)> {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), self.matrix.row(i)))
    }

    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Ok(Self::read_text(BufReader::new(file))?.with_source(path.display().to_string()))
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut declared: Option<(usize, usize)> = None;
        let mut dim: Option<usize> = None;
        let mut pairs: Vec<(String, Vector)> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();

        for (i, line) in reader.split(b'\n').enumerate() {
            let lineno = i + 1;
            let line = line?;
            let line = String::from_utf8(line).map_err(|_| Error::Utf8 { line: lineno })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("nonblank line has a field");
            let rest: Vec<&str> = fields.collect();

            if lineno == 1 && rest.len() == 1 {
                if let (Ok(n), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                    declared = Some((n, d));
                    dim = Some(d);
                    continue;
                }
            }

            let expected = *dim.get_or_insert(rest.len());
            if rest.len() != expected {
                return Err(Error::parse(
                    lineno,
                    format!("expected {expected} components, found {}", rest.len()),
                ));
            }
            let mut vector = Vector::zeros(expected);
            for (slot, field) in vector.iter_mut().zip(&rest) {
                let value: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("non-numeric component `{field}`")))?;
                if !value.is_finite() {
                    return Err(Error::parse(lineno, format!("non-finite component `{field}`")));
                }
                *slot = value;
            }
            if let Some(first) = seen.insert(word.to_string(), lineno) {
                return Err(Error::parse(
                    lineno,
                    format!("duplicate word `{word}` (first seen on line {first})"),
                ));
            }
            pairs.push((word.to_string(), vector));
        }

        if let Some((n, _)) = declared {
            if n != pairs.len() {
                return Err(Error::parse(
                    1,
                    format!("header declares {n} words, found {}", pairs.len()),
                ));
            }
        }
        match dim {
            Some(0) | None if pairs.is_empty() => Ok(Self::empty(dim.unwrap_or(0))),
            Some(0) => Err(Error::parse(1, "embeddings have no components")),
            Some(d) => Self::from_pairs(d, pairs),
            None => unreachable!("dimension is known once a vector was read"),
        }
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut writer = BufWriter::new(file);
        self.write_text(&mut writer)?;
        writer.flush().map_err(|e| Error::file(path, e))
    }

    /// Write the header and all words in lexicographic order.
    pub fn write_text<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim())?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.words[a].cmp(&self.words[b]));
        for i in order {
            write_vector_line(&mut writer, &self.words[i], self.matrix.row(i))?;
        }
        Ok(())
    }
}

/// Write `word c1 ... cd` followed by a newline.
pub fn write_vector_line<W: Write>(mut writer: W, word: &str, vector: ArrayView1<'_, f64>) -> std::io::Result<()> {
    write!(writer, "{word}")?;
    for &x in vector {
        write!(writer, " {}", format_component(x))?;
    }
    writeln!(writer)
}

/// Format with 9 significant digits, `%g` style, without trailing zeros.
pub fn format_component(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((a.dot(&b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Componentwise mean.
pub fn average(vectors: &[ArrayView1<'_, f64>]) -> Result<Vector> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let mut sum = Vector::zeros(first.len());
    for v in vectors {
        if v.len() != sum.len() {
            return Err(Error::Dimension {
                expected: sum.len(),
                actual: v.len(),
            });
        }
        sum += v;
    }
    sum /= vectors.len() as f64;
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn parses_header_and_rows() {
        let space = EmbeddingSpace::read_text("2 3\na 1 0 0\nb 0 1 0\n".as_bytes()).unwrap();
        assert_eq!(space.dim(), 3);
        assert_eq!(space.len(), 2);
        assert_eq!(space.get("b").unwrap(), array![0.0, 1.0, 0.0]);
    }

    #[test]
    fn infers_dimension_without_header() {
        let space = EmbeddingSpace::read_text("a 1 2\nb 3 4\n".as_bytes()).unwrap();
        assert_eq!(space.dim(), 2);
        assert_eq!(space.get("a").unwrap(), array![1.0, 2.0]);
    }

    #[test]
    fn missing_word_is_not_zero() {
        let space = EmbeddingSpace::read_text("z 0 0\n".as_bytes()).unwrap();
        assert!(space.get("z").is_some());
        assert!(space.get("y").is_none());
    }

    #[test]
    fn rejects_malformed_files() {
        let err = EmbeddingSpace::read_text("a 1 2\nb 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = EmbeddingSpace::read_text("a 1 2\na 3 4\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = EmbeddingSpace::read_text("a 1 x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
        let err = EmbeddingSpace::read_text("3 2\na 1 2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }

    #[test]
    fn empty_space_writes_only_header() {
        let mut out = Vec::new();
        EmbeddingSpace::empty(7).write_text(&mut out).unwrap();
        assert_eq!(out, b"0 7\n");
        let back = EmbeddingSpace::read_text(&out[..]).unwrap();
        assert_eq!(back.dim(), 7);
        assert!(back.is_empty());
    }

    #[test]
    fn single_word_survives() {
        let space = EmbeddingSpace::from_pairs(2, [("solo", array![0.25, -3.5])]).unwrap();
        let mut out = Vec::new();
        space.write_text(&mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "1 2\nsolo 0.25 -3.5\n");
        assert_eq!(EmbeddingSpace::read_text(&out[..]).unwrap(), space);
    }

    #[test]
    fn writes_in_lexicographic_order() {
        let space = EmbeddingSpace::from_pairs(1, [("b", array![1.0]), ("a", array![2.0])]).unwrap();
        let mut out = Vec::new();
        space.write_text(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "2 1\na 2\nb 1\n");
    }

    #[test]
    fn component_formatting() {
        assert_eq!(format_component(1.0), "1");
        assert_eq!(format_component(-0.125), "-0.125");
        assert_eq!(format_component(1.0 / 3.0), "0.333333333");
        assert_eq!(format_component(123456789.4), "123456789");
        assert_eq!(format_component(9.9999999996), "10");
        assert_eq!(format_component(1.5e-7), "1.5e-7");
        assert_eq!(format_component(2.0e12), "2e12");
    }

    #[test]
    fn cosine_basics() {
        let v = array![0.3, -1.2, 2.0];
        assert!((cosine(v.view(), v.view()).unwrap() - 1.0).abs() < 1e-15);
        let e1 = array![1.0, 0.0];
        let e2 = array![0.0, 1.0];
        assert_eq!(cosine(e1.view(), e2.view()).unwrap(), 0.0);
        let zero = array![0.0, 0.0];
        assert!(matches!(cosine(zero.view(), e1.view()), Err(Error::ZeroVector)));
    }

    #[test]
    fn average_basics() {
        let v = array![1.0, -2.0, 3.5];
        let neg = -&v;
        assert_eq!(average(&[v.view()]).unwrap(), v);
        assert_eq!(average(&[v.view(), neg.view()]).unwrap(), array![0.0, 0.0, 0.0]);
        assert!(matches!(average(&[]), Err(Error::EmptyInput)));
    }
}
