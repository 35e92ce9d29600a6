//! Plain-text output formats.
//!
//! All formats are comma-separated, one record per line, no header:
//!
//! * edges: `i,j,degree,d0` for every soft-neighbour entry (0-based indices)
//! * trace: `C,alpha1,total_displacement[,ratio1..ratio6]`
//! * embedding: `index,x1,...,xd`
//!
//! Floats are written in their shortest round-trip form.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::deform::{DeformTrace, StepRecord};
use crate::error::{Error, Result};
use crate::neighborhood::SoftNeighborhood;

/// Number of ratio columns written per traced step.
pub const TRACE_RATIO_COLUMNS: usize = 6;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_edges(out: &mut impl Write, neighborhoods: &[SoftNeighborhood]) -> std::io::Result<()> {
    for sn in neighborhoods {
        for e in &sn.entries {
            writeln!(
                out,
                "{},{},{},{}",
                sn.owner,
                e.index,
                fmt_f64(e.degree),
                fmt_f64(e.d0)
            )?;
        }
    }
    Ok(())
}

pub fn write_trace(out: &mut impl Write, trace: &DeformTrace) -> std::io::Result<()> {
    for r in trace.records() {
        write!(
            out,
            "{},{},{}",
            r.step,
            fmt_f64(r.alpha1),
            fmt_f64(r.total_displacement)
        )?;
        if let Some(ratios) = &r.ratios {
            for i in 0..TRACE_RATIO_COLUMNS {
                write!(out, ",{}", fmt_f64(ratios.get(i).copied().unwrap_or(0.0)))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses a trace written by [`write_trace`]. Ratio columns, when present,
/// are kept as written (zero padding included).
pub fn read_trace(input: impl BufRead, source: impl AsRef<Path>) -> Result<DeformTrace> {
    let source = source.as_ref();
    let fail = |line: usize, message: String| Error::Ingestion {
        path: source.to_owned(),
        line: line as u64,
        message,
    };
    let mut trace = DeformTrace::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| fail(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() < 3 {
            return Err(fail(lineno, format!("expected at least 3 columns, found {}", cells.len())));
        }
        let step = cells[0]
            .parse::<usize>()
            .map_err(|_| fail(lineno, format!("step {:?} is not a count", cells[0])))?;
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| fail(lineno, format!("{s:?} is not a number")))
        };
        let alpha1 = num(cells[1])?;
        let total_displacement = num(cells[2])?;
        let ratios = if cells.len() > 3 {
            Some(cells[3..].iter().map(|c| num(c)).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        trace
            .push(StepRecord {
                step,
                alpha1,
                total_displacement,
                ratios,
            })
            .map_err(|e| fail(lineno, e.to_string()))?;
    }
    Ok(trace)
}

pub fn write_embedding(out: &mut impl Write, coordinates: &[Vec<f64>]) -> std::io::Result<()> {
    for (i, p) in coordinates.iter().enumerate() {
        write!(out, "{i}")?;
        for &x in p {
            write!(out, ",{}", fmt_f64(x))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighborhood::NeighborEntry;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-4, -6.123233995736766e-21, 1e300, 123456.789, 1.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-20), "1e-20");
    }

    #[test]
    fn edge_lines() {
        let sn = vec![SoftNeighborhood {
            owner: 2,
            entries: vec![
                NeighborEntry { index: 0, d0: 1.5, degree: 1.0 },
                NeighborEntry { index: 5, d0: 4.5, degree: 1.0 / 3.0 },
            ],
        }];
        let mut buf = Vec::new();
        write_edges(&mut buf, &sn).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "2,0,1,1.5\n2,5,0.3333333333333333,4.5\n"
        );
    }

    #[test]
    fn trace_lines_and_reader() {
        let mut t = DeformTrace::new();
        t.push(StepRecord { step: 0, alpha1: 1e-4, total_displacement: 0.5, ratios: Some(vec![0.6, 0.3, 0.1]) })
            .unwrap();
        t.push(StepRecord { step: 1, alpha1: 0.0, total_displacement: 0.25, ratios: None }).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0,0.0001,0.5,0.6,0.3,0.1,0,0,0\n1,0,0.25\n");
        let back = read_trace(text.as_bytes(), "mem").unwrap();
        assert_eq!(back.records()[0].ratios.as_deref(), Some(&[0.6, 0.3, 0.1, 0.0, 0.0, 0.0][..]));
        assert_eq!(back.records()[1], t.records()[1]);
    }

    #[test]
    fn trace_reader_errors() {
        assert!(read_trace("0,1\n".as_bytes(), "mem").is_err());
        assert!(read_trace("x,1,2\n".as_bytes(), "mem").is_err());
        assert!(read_trace("1,1,2\n0,1,2\n".as_bytes(), "mem").is_err());
        assert!(read_trace("".as_bytes(), "mem").unwrap().is_empty());
    }

    #[test]
    fn embedding_lines() {
        let mut buf = Vec::new();
        write_embedding(&mut buf, &[vec![1.0, -2.5], vec![0.0, 3.0]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1,-2.5\n1,0,3\n");
    }
}
