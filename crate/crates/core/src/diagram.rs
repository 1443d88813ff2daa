//! Persistence diagrams: finite (birth, death) bars of one degree.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One finite bar. Zero-persistence bars are never stored in a diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
}

impl Bar {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Multiset of finite bars for one homology degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub degree: u8,
    bars: Vec<Bar>,
}

impl PersistenceDiagram {
    /// Construct from raw bars; zero-persistence bars are dropped, bars with
    /// death < birth or non-finite endpoints are rejected.
    pub fn new(degree: u8, bars: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut kept = Vec::new();
        for (birth, death) in bars {
            if !birth.is_finite() || !death.is_finite() || birth < 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "bar ({birth},{death}) has invalid endpoints"
                )));
            }
            if death < birth {
                return Err(Error::DegenerateInput(format!(
                    "bar ({birth},{death}) dies before it is born"
                )));
            }
            if death > birth {
                kept.push(Bar { birth, death });
            }
        }
        let mut dg = Self { degree, bars: kept };
        dg.normalize();
        Ok(dg)
    }

    pub fn empty(degree: u8) -> Self {
        Self { degree, bars: Vec::new() }
    }

    fn normalize(&mut self) {
        self.bars
            .sort_by(|a, b| (a.birth, a.death).partial_cmp(&(b.birth, b.death)).unwrap());
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Multiset equality on exact float values (bars are stored sorted).
    pub fn same_bars(&self, other: &Self) -> bool {
        self.degree == other.degree && self.bars == other.bars
    }
}

/// Write a set of diagrams as CSV rows `degree,birth,death`, sorted by
/// degree then birth then death. Floats use shortest round-trip formatting,
/// so reading the file back reproduces the exact values.
pub fn write_diagrams_csv(diagrams: &[PersistenceDiagram], mut w: impl Write) -> Result<()> {
    writeln!(w, "degree,birth,death")?;
    let mut sorted: Vec<&PersistenceDiagram> = diagrams.iter().collect();
    sorted.sort_by_key(|d| d.degree);
    for dg in sorted {
        for bar in dg.bars() {
            writeln!(w, "{},{},{}", dg.degree, bar.birth, bar.death)?;
        }
    }
    Ok(())
}

/// Read diagrams written by [`write_diagrams_csv`]. Degrees absent from the
/// file are absent from the result; callers that need explicit empty
/// diagrams for a degree range should fill them in.
pub fn read_diagrams_csv(r: impl BufRead) -> Result<Vec<PersistenceDiagram>> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h == "degree,birth,death" => {}
        Some((_, Ok(h))) => {
            return Err(Error::Parse { line: 1, msg: format!("bad header {h:?}") })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(Error::EmptyInput("empty diagram CSV".into())),
    }
    let mut by_degree: std::collections::BTreeMap<u8, Vec<(f64, f64)>> = Default::default();
    for (idx, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse_err = |msg: String| Error::Parse { line: idx + 1, msg };
        let degree: u8 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err("bad degree".into()))?;
        let birth: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err("bad birth".into()))?;
        let death: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err("bad death".into()))?;
        if fields.next().is_some() {
            return Err(parse_err("too many fields".into()));
        }
        by_degree.entry(degree).or_default().push((birth, death));
    }
    by_degree
        .into_iter()
        .map(|(degree, bars)| PersistenceDiagram::new(degree, bars))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_zero_persistence_bars() {
        let d = PersistenceDiagram::new(1, vec![(1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.bars()[0], Bar { birth: 1.0, death: 2.0 });
    }

    #[test]
    fn rejects_backwards_bars() {
        assert!(PersistenceDiagram::new(0, vec![(2.0, 1.0)]).is_err());
    }

    #[test]
    fn csv_round_trip_exact() {
        let d0 = PersistenceDiagram::new(0, vec![(0.0, 0.1 + 0.2), (0.0, 1.0 / 3.0)]).unwrap();
        let d1 = PersistenceDiagram::new(1, vec![(2.0_f64.sqrt(), 2.0)]).unwrap();
        let mut buf = Vec::new();
        write_diagrams_csv(&[d0.clone(), d1.clone()], &mut buf).unwrap();
        let back = read_diagrams_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[0].same_bars(&d0));
        assert!(back[1].same_bars(&d1));
    }
}
