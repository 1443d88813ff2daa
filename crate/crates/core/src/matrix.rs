//! Labeled symmetric distance matrices and their serialized forms.
//!
//! The same type is used token-to-token (within one language) and
//! language-to-language (between embeddings). Two on-disk formats are
//! supported: a CSV form whose header row carries the labels, and a compact
//! binary cache (label table followed by row-major little-endian f64) that
//! round-trips bit-exactly.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

/// Symmetric nonnegative square matrix with zero diagonal, one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    entries: Vec<f64>, // row-major n*n
}

impl DistanceMatrix {
    /// Build from a full row-major matrix, validating the invariants.
    pub fn new(labels: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for {} labels, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "nonzero diagonal at {i}: {}",
                    entries[i * n + i]
                )));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative value"
                    )));
                }
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetry at ({i},{j}): {} vs {}",
                        entries[i * n + j],
                        entries[j * n + i]
                    )));
                }
            }
        }
        Ok(Self { labels, entries })
    }

    /// Build from a function over index pairs; the function is evaluated on
    /// the upper triangle only and mirrored, so symmetry holds exactly.
    pub fn from_fn(labels: Vec<String>, mut dist: impl FnMut(usize, usize) -> f64) -> Self {
        let n = labels.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = dist(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Self { labels, entries }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.labels.len() + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest off-diagonal entry (0 for matrices smaller than 2x2).
    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// The enclosing radius: min over points of the maximum distance from
    /// that point to any other. Homology of the flag filtration is trivial
    /// above this value.
    pub fn enclosing_radius(&self) -> f64 {
        let n = self.len();
        if n <= 1 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.get(i, j))
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Reorder rows/columns by a permutation of positions: entry (i,j) of the
    /// result is the old entry (perm[i], perm[j]).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::InvalidMatrix(format!(
                "permutation length {} does not match matrix size {n}",
                perm.len()
            )));
        }
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Self::new(labels, entries)
    }

    /// Write the CSV form: header row is the comma-joined labels, then one
    /// row of entries per line. Floats use shortest round-trip formatting.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        for label in &self.labels {
            if label.contains([',', '\n', '\r', '"']) {
                return Err(Error::Config(format!(
                    "label {label:?} cannot be written to CSV"
                )));
            }
        }
        writeln!(w, "{}", self.labels.join(","))?;
        let n = self.len();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Parse the CSV form written by [`DistanceMatrix::write_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("empty CSV".into()))?;
        let labels: Vec<String> = header?.split(',').map(str::to_owned).collect();
        let n = labels.len();
        let mut entries = Vec::with_capacity(n * n);
        for (idx, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            for field in line.split(',') {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad float {field:?}"),
                })?;
                entries.push(v);
            }
        }
        Self::new(labels, entries)
    }

    /// Write the binary cache form: magic, label table, then row-major
    /// little-endian f64 entries. Round-trips bit-exactly.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(b"ESDM\x01")?;
        w.write_all(&(self.labels.len() as u32).to_le_bytes())?;
        for label in &self.labels {
            let bytes = label.as_bytes();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(bytes)?;
        }
        for v in &self.entries {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Parse the binary cache form.
    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != b"ESDM\x01" {
            return Err(Error::Parse {
                line: 0,
                msg: "bad magic for binary distance matrix".into(),
            });
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let n = u32::from_le_bytes(buf4) as usize;
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf4)?;
            let len = u32::from_le_bytes(buf4) as usize;
            let mut s = vec![0u8; len];
            r.read_exact(&mut s)?;
            labels.push(String::from_utf8(s).map_err(|_| Error::Parse {
                line: 0,
                msg: "label is not valid UTF-8".into(),
            })?);
        }
        let mut entries = vec![0.0f64; n * n];
        let mut buf8 = [0u8; 8];
        for e in entries.iter_mut() {
            r.read_exact(&mut buf8)?;
            *e = f64::from_le_bytes(buf8);
        }
        Self::new(labels, entries)
    }
}
