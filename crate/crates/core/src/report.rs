//! CSV artifacts of a run: the archive, the per-iteration trace and the
//! nondominated front. Floats are written with 17 significant digits so
//! every file reads back to the same bits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::domain::{nondominated_subset, Archive};
use crate::error::{Error, Result};
use crate::optimizer::IterationTrace;

/// One row of `archive.csv` or `front.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRow {
    pub eval_index: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// One row of `trace.csv`. `igd` is NaN when no reference front exists.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub archive_size: usize,
    pub igd: f64,
    pub hypervolume: f64,
    pub train_seconds: f64,
    pub inner_seconds: f64,
    pub select_seconds: f64,
}

pub const TRACE_HEADER: [&str; 7] = [
    "iter",
    "archive_size",
    "igd",
    "hypervolume",
    "train_seconds",
    "inner_seconds",
    "select_seconds",
];

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer `{s}`")))
}

pub fn archive_rows(archive: &Archive) -> Vec<ArchiveRow> {
    archive
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| ArchiveRow {
            eval_index: i,
            x: e.x.clone(),
            f: e.f.clone(),
        })
        .collect()
}

/// Rows of the archive that no other archive row dominates.
pub fn front_rows(archive: &Archive) -> Vec<ArchiveRow> {
    let rows = archive_rows(archive);
    let fs: Vec<&[f64]> = rows.iter().map(|r| r.f.as_slice()).collect();
    let mut keep = nondominated_subset(&fs);
    keep.sort_unstable();
    keep.into_iter().map(|i| rows[i].clone()).collect()
}

/// Trace rows of a run; missing metrics become NaN.
pub fn trace_rows(traces: &[IterationTrace]) -> Vec<TraceRow> {
    traces
        .iter()
        .map(|t| TraceRow {
            iter: t.iteration,
            archive_size: t.archive_size,
            igd: t.igd.unwrap_or(f64::NAN),
            hypervolume: t.hypervolume.unwrap_or(f64::NAN),
            train_seconds: t.train_seconds,
            inner_seconds: t.inner_seconds,
            select_seconds: t.select_seconds,
        })
        .collect()
}

pub fn write_archive_csv<W: Write>(out: W, rows: &[ArchiveRow], n: usize, m: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["eval_index".to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.extend((0..m).map(|j| format!("f_{j}")));
    w.write_record(&header)?;
    for row in rows {
        if row.x.len() != n || row.f.len() != m {
            return Err(Error::Dimension {
                expected: n + m,
                found: row.x.len() + row.f.len(),
            });
        }
        let mut rec = vec![row.eval_index.to_string()];
        rec.extend(row.x.iter().map(|v| fmt_float(*v)));
        rec.extend(row.f.iter().map(|v| fmt_float(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `archive.csv`/`front.csv`; the header determines `n` and `m`.
pub fn read_archive_csv<R: Read>(input: R) -> Result<Vec<ArchiveRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("eval_index") {
        return Err(Error::Parse("archive header must start with eval_index".into()));
    }
    let n = header.iter().filter(|h| h.starts_with("x_")).count();
    let m = header.iter().filter(|h| h.starts_with("f_")).count();
    if 1 + n + m != header.len() {
        return Err(Error::Parse(format!("unexpected archive columns: {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!(
                "row with {} fields, expected {}",
                rec.len(),
                header.len()
            )));
        }
        let vals = rec.iter().skip(1).map(parse_float).collect::<Result<Vec<_>>>()?;
        rows.push(ArchiveRow {
            eval_index: parse_usize(&rec[0])?,
            x: vals[..n].to_vec(),
            f: vals[n..].to_vec(),
        });
    }
    Ok(rows)
}

pub fn write_trace_csv<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in rows {
        w.write_record([
            t.iter.to_string(),
            t.archive_size.to_string(),
            fmt_float(t.igd),
            fmt_float(t.hypervolume),
            fmt_float(t.train_seconds),
            fmt_float(t.inner_seconds),
            fmt_float(t.select_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse(format!("unexpected trace columns: {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != TRACE_HEADER.len() {
            return Err(Error::Parse(format!("trace row with {} fields", rec.len())));
        }
        rows.push(TraceRow {
            iter: parse_usize(&rec[0])?,
            archive_size: parse_usize(&rec[1])?,
            igd: parse_float(&rec[2])?,
            hypervolume: parse_float(&rec[3])?,
            train_seconds: parse_float(&rec[4])?,
            inner_seconds: parse_float(&rec[5])?,
            select_seconds: parse_float(&rec[6])?,
        });
    }
    Ok(rows)
}

/// Writes bare objective vectors with an `f_0..f_{m-1}` header.
pub fn write_points_csv<W: Write>(out: W, points: &[Vec<f64>]) -> Result<()> {
    let m = points.first().map_or(0, |p| p.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..m).map(|j| format!("f_{j}")))?;
    for p in points {
        if p.len() != m {
            return Err(Error::Dimension {
                expected: m,
                found: p.len(),
            });
        }
        w.write_record(p.iter().map(|v| fmt_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("row with {} fields, expected {width}", rec.len())));
        }
        out.push(rec.iter().map(parse_float).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

/// Writes `archive.csv` and `front.csv` into `dir`.
pub fn write_archive_files(dir: &Path, archive: &Archive, n: usize, m: usize) -> Result<()> {
    write_archive_csv(File::create(dir.join("archive.csv"))?, &archive_rows(archive), n, m)?;
    write_archive_csv(File::create(dir.join("front.csv"))?, &front_rows(archive), n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EvaluatedSolution;
    use crate::rng::RngStream;

    fn sample_archive() -> Archive {
        let mut a = Archive::new();
        let mut rng = RngStream::new(1);
        for _ in 0..20 {
            let x = vec![rng.uniform(), rng.uniform() * 1e-7, -rng.uniform() * 1e9];
            let f = vec![rng.uniform() / 3.0, 1.0 / (1.0 + rng.uniform())];
            a.push(EvaluatedSolution::new(x, f)).unwrap();
        }
        a
    }

    #[test]
    fn archive_round_trip_is_bitwise() {
        let a = sample_archive();
        let rows = archive_rows(&a);
        let mut buf = Vec::new();
        write_archive_csv(&mut buf, &rows, 3, 2).unwrap();
        let back = read_archive_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        for (x, y) in rows.iter().zip(&back) {
            assert_eq!(x.eval_index, y.eval_index);
            assert!(x.x.iter().zip(&y.x).all(|(a, b)| a.to_bits() == b.to_bits()));
            assert!(x.f.iter().zip(&y.f).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eval_index,x_0,x_1,x_2,f_0,f_1\n"));
    }

    #[test]
    fn trace_round_trip_keeps_nan() {
        let rows = vec![
            TraceRow {
                iter: 1,
                archive_size: 65,
                igd: f64::NAN,
                hypervolume: 117.25,
                train_seconds: 0.1,
                inner_seconds: 2.0 / 3.0,
                select_seconds: 1e-5,
            },
            TraceRow {
                iter: 2,
                archive_size: 70,
                igd: 0.05,
                hypervolume: 118.0,
                train_seconds: 0.2,
                inner_seconds: 0.3,
                select_seconds: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert!(back[0].igd.is_nan());
        assert_eq!(back[0].inner_seconds, 2.0 / 3.0);
        assert_eq!(back[1], rows[1]);
    }

    #[test]
    fn front_rows_are_mutually_nondominated() {
        let a = sample_archive();
        let front = front_rows(&a);
        assert!(!front.is_empty());
        for p in &front {
            for q in &front {
                assert!(!crate::domain::dominates(&p.f, &q.f).unwrap());
            }
        }
        // every archive row is either on the front or dominated by it
        for r in archive_rows(&a) {
            let on = front.iter().any(|p| p.eval_index == r.eval_index);
            let dom = front.iter().any(|p| crate::domain::dominates(&p.f, &r.f).unwrap());
            assert!(on ^ dom);
        }
    }

    #[test]
    fn points_round_trip() {
        let pts = vec![vec![0.1, 1.0 / 3.0], vec![2.5e-300, -7.0]];
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &pts).unwrap();
        assert_eq!(read_points_csv(buf.as_slice()).unwrap(), pts);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(read_archive_csv("index,x_0\n1,2\n".as_bytes()).is_err());
        assert!(read_archive_csv("eval_index,x_0,f_0\n1,abc,2\n".as_bytes()).is_err());
        assert!(read_trace_csv("iter,archive_size\n1,2\n".as_bytes()).is_err());
    }
}
