//! Word-embedding ingestion and token-to-token distance matrices.
//!
//! Input files follow the FastText `.vec` convention: a header line with the
//! vocabulary size and dimension, then one line per token holding the token
//! followed by `dim` floats. Tokens are assumed to be ordered by descending
//! frequency, so truncation to `max_tokens` keeps the most frequent ones.

use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;

/// Metric imposed on the embedding vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

/// Token list plus a V x d matrix of embedding vectors for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub language_id: String,
    tokens: Vec<String>,
    vectors: Vec<f64>, // row-major V*dim
    dim: usize,
}

impl EmbeddingSet {
    pub fn new(language_id: String, tokens: Vec<String>, vectors: Vec<f64>, dim: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput("embedding set has no tokens".into()));
        }
        if vectors.len() != tokens.len() * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} vector entries, got {}",
                tokens.len() * dim,
                vectors.len()
            )));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite embedding entry".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &tokens {
            if !seen.insert(t.as_str()) {
                return Err(Error::DegenerateInput(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self { language_id, tokens, vectors, dim })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }
}

/// Parse a FastText-style `.vec` stream, keeping the first `max_tokens`
/// distinct tokens. A duplicate token keeps its first occurrence and does not
/// count toward `max_tokens`. Since tokens may contain spaces, a line is
/// split from the right: the last `dim` fields are the vector, everything
/// before them is the token.
pub fn parse_embedding_file(
    language_id: &str,
    reader: impl BufRead,
    max_tokens: usize,
) -> Result<EmbeddingSet> {
    if max_tokens == 0 {
        return Err(Error::Config("max_tokens must be positive".into()));
    }
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })??;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|&c| c > 0)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("bad header {header:?}") })?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("bad header {header:?}") })?;
    if parts.next().is_some() {
        return Err(Error::Parse { line: 1, msg: format!("bad header {header:?}") });
    }

    let want = max_tokens.min(count);
    let mut tokens: Vec<String> = Vec::with_capacity(want);
    let mut seen = std::collections::HashSet::new();
    let mut vectors: Vec<f64> = Vec::with_capacity(want * dim);

    for (idx, line) in lines.enumerate() {
        if tokens.len() == want {
            break;
        }
        let line_no = idx + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < dim + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected token plus {dim} floats, got {} fields", fields.len()),
            });
        }
        let split_at = fields.len() - dim;
        let token = fields[..split_at].join(" ");
        if !seen.insert(token.clone()) {
            continue;
        }
        for field in &fields[split_at..] {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad float {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value {field:?}"),
                });
            }
            vectors.push(v);
        }
        tokens.push(token);
    }

    if tokens.is_empty() {
        return Err(Error::EmptyInput(format!("no tokens read for {language_id}")));
    }
    EmbeddingSet::new(language_id.to_owned(), tokens, vectors, dim)
}

/// Open an embedding file, transparently inflating gzip input (detected by
/// the 1f 8b magic bytes, not the file name).
pub fn open_embedding_file(path: &std::path::Path) -> Result<Box<dyn BufRead>> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 2];
    use std::io::Seek;
    let got = file.read(&mut magic)?;
    file.seek(std::io::SeekFrom::Start(0))?;
    if got == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(flate2::read::GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn cosine(u: &[f64], v: &[f64], nu: f64, nv: f64) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    // Rounding can push the distance a hair below zero; clamp.
    (1.0 - dot / (nu * nv)).max(0.0)
}

/// Token-to-token distance matrix under the chosen metric. One triangle is
/// computed and mirrored, so symmetry and the zero diagonal hold exactly.
pub fn pairwise_distances(emb: &EmbeddingSet, metric: Metric) -> Result<DistanceMatrix> {
    let labels: Vec<String> = emb.tokens().to_vec();
    match metric {
        Metric::Euclidean => Ok(DistanceMatrix::from_fn(labels, |i, j| {
            euclidean(emb.vector(i), emb.vector(j))
        })),
        Metric::Cosine => {
            let norms: Vec<f64> = (0..emb.len())
                .map(|i| emb.vector(i).iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect();
            if let Some(i) = norms.iter().position(|&n| n == 0.0) {
                return Err(Error::DegenerateInput(format!(
                    "token {:?} has a zero vector; cosine distance undefined",
                    emb.tokens()[i]
                )));
            }
            Ok(DistanceMatrix::from_fn(labels, |i, j| {
                cosine(emb.vector(i), emb.vector(j), norms[i], norms[j])
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, max: usize) -> Result<EmbeddingSet> {
        parse_embedding_file("xx", text.as_bytes(), max)
    }

    #[test]
    fn truncates_to_max_tokens() {
        let e = parse("3 2\na 0 1\nb 1 0\nc 1 1\n", 2).unwrap();
        assert_eq!(e.tokens(), &["a", "b"]);
        assert_eq!(e.vector(0), &[0.0, 1.0]);
        assert_eq!(e.vector(1), &[1.0, 0.0]);
    }

    #[test]
    fn single_row_passthrough() {
        let e = parse("1 2\nx 0.5 -0.5\n", 10).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.vector(0), &[0.5, -0.5]);
    }

    #[test]
    fn duplicate_token_keeps_first() {
        let e = parse("2 2\na 0 1\na 1 0\n", 2).unwrap();
        assert_eq!(e.tokens(), &["a"]);
        assert_eq!(e.vector(0), &[0.0, 1.0]);
    }

    #[test]
    fn token_with_embedded_space() {
        let e = parse("1 2\nNew York 1 2\n", 1).unwrap();
        assert_eq!(e.tokens(), &["New York"]);
        assert_eq!(e.vector(0), &[1.0, 2.0]);
    }

    #[test]
    fn malformed_header_rejected() {
        assert!(matches!(parse("x 2\n", 1), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("", 1), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn wrong_field_count_carries_line_number() {
        let err = parse("2 3\na 1 2 3\nb 1 2\n", 2).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_value_rejected() {
        assert!(parse("1 2\na inf 0\n", 1).is_err());
        assert!(parse("1 2\na nan 0\n", 1).is_err());
    }

    #[test]
    fn euclidean_345() {
        let e = EmbeddingSet::new("t".into(), vec!["p".into(), "q".into()], vec![0.0, 0.0, 3.0, 4.0], 2).unwrap();
        let d = pairwise_distances(&e, Metric::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn cosine_orthogonal_and_parallel() {
        let e = EmbeddingSet::new("t".into(), vec!["p".into(), "q".into()], vec![1.0, 0.0, 0.0, 1.0], 2).unwrap();
        let d = pairwise_distances(&e, Metric::Cosine).unwrap();
        assert_eq!(d.get(0, 1), 1.0);

        let e = EmbeddingSet::new("t".into(), vec!["p".into(), "q".into()], vec![1.0, 0.0, 2.0, 0.0], 2).unwrap();
        let d = pairwise_distances(&e, Metric::Cosine).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn cosine_zero_vector_reports_token() {
        let e = EmbeddingSet::new("t".into(), vec!["ok".into(), "bad".into()], vec![1.0, 0.0, 0.0, 0.0], 2).unwrap();
        let err = pairwise_distances(&e, Metric::Cosine).unwrap_err();
        assert!(err.to_string().contains("bad"));
    }

    #[test]
    fn gzip_detection_by_magic() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain.vec");
        std::fs::write(&plain, "1 2\na 1 2\n").unwrap();
        let gz = dir.path().join("z.vec.gz");
        let mut enc = flate2::write::GzEncoder::new(
            std::fs::File::create(&gz).unwrap(),
            flate2::Compression::default(),
        );
        enc.write_all(b"1 2\na 1 2\n").unwrap();
        enc.finish().unwrap();

        for path in [plain, gz] {
            let e = parse_embedding_file("xx", open_embedding_file(&path).unwrap(), 5).unwrap();
            assert_eq!(e.tokens(), &["a"]);
        }
    }
}
