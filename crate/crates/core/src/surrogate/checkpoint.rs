//! Plain-text checkpoint of a trained ensemble.
//!
//! ```text
//! bsmobo-checkpoint 1
//! mc_samples 20
//! dropout 5e-2
//! lower <n values>
//! upper <n values>
//! objectives <m>
//! objective <j> mean <mu> std <sigma>
//! w1 <rows> <cols> <values>
//! b1 <len> <values>
//! w2 <rows> <cols> <values>
//! b2 <len> <values>
//! w3 <len> <values>
//! b3 <value>
//! ```
//!
//! The `objective` block repeats `m` times. Floats use Rust's shortest
//! round-trip formatting, so a reload reproduces every weight bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use super::{Net, ObjectiveModel, OutputScaler, SurrogateEnsemble};
use crate::domain::BoxBounds;
use crate::error::{Error, Result};

const MAGIC: &str = "bsmobo-checkpoint 1";

fn join<T: std::fmt::LowerExp>(values: impl IntoIterator<Item = T>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_checkpoint<W: Write>(out: W, ens: &SurrogateEnsemble) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "mc_samples {}", ens.mc_samples())?;
    writeln!(w, "dropout {:e}", ens.dropout_rate())?;
    writeln!(w, "lower {}", join(ens.bounds().lower().iter().copied()))?;
    writeln!(w, "upper {}", join(ens.bounds().upper().iter().copied()))?;
    writeln!(w, "objectives {}", ens.m())?;
    for (j, model) in ens.models().iter().enumerate() {
        let net = &model.net;
        writeln!(
            w,
            "objective {j} mean {:e} std {:e}",
            model.output.mean, model.output.std
        )?;
        let (r1, c1) = net.w1.dim();
        writeln!(w, "w1 {r1} {c1} {}", join(net.w1.iter().copied()))?;
        writeln!(w, "b1 {} {}", net.b1.len(), join(net.b1.iter().copied()))?;
        let (r2, c2) = net.w2.dim();
        writeln!(w, "w2 {r2} {c2} {}", join(net.w2.iter().copied()))?;
        writeln!(w, "b2 {} {}", net.b2.len(), join(net.b2.iter().copied()))?;
        writeln!(w, "w3 {} {}", net.w3.len(), join(net.w3.iter().copied()))?;
        writeln!(w, "b3 {:e}", net.b3)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_checkpoint(path: &Path, ens: &SurrogateEnsemble) -> Result<()> {
    write_checkpoint(File::create(path)?, ens)
}

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    line_no: usize,
}

impl<R: Read> Lines<R> {
    fn next_fields(&mut self, key: &str) -> Result<Vec<String>> {
        loop {
            self.line_no += 1;
            let line = match self.inner.next() {
                Some(l) => l?,
                None => return Err(Error::Parse(format!("unexpected end of checkpoint, wanted `{key}`"))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace().map(str::to_string);
            let head = fields.next().unwrap();
            if head != key {
                return Err(Error::Parse(format!(
                    "line {}: expected `{key}`, found `{head}`",
                    self.line_no
                )));
            }
            return Ok(fields.collect());
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Parse(format!("line {}: {msg}", self.line_no))
    }

    fn floats<T: FromStr>(&self, fields: &[String]) -> Result<Vec<T>> {
        fields
            .iter()
            .map(|f| f.parse::<T>().map_err(|_| self.err(format!("bad number `{f}`"))))
            .collect()
    }

    fn usize_at(&self, fields: &[String], i: usize) -> Result<usize> {
        fields
            .get(i)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| self.err("missing or bad integer"))
    }

    fn vector<T: FromStr>(&mut self, key: &str) -> Result<Array1<T>> {
        let fields = self.next_fields(key)?;
        let len = self.usize_at(&fields, 0)?;
        let vals = self.floats(&fields[1..])?;
        if vals.len() != len {
            return Err(self.err(format!("`{key}` declares {len} values, found {}", vals.len())));
        }
        Ok(Array1::from_vec(vals))
    }

    fn matrix<T: FromStr>(&mut self, key: &str) -> Result<Array2<T>> {
        let fields = self.next_fields(key)?;
        let rows = self.usize_at(&fields, 0)?;
        let cols = self.usize_at(&fields, 1)?;
        let vals = self.floats(&fields[2..])?;
        Array2::from_shape_vec((rows, cols), vals)
            .map_err(|_| self.err(format!("`{key}` does not hold {rows}x{cols} values")))
    }

    fn scalar<T: FromStr + Copy>(&mut self, key: &str) -> Result<T> {
        let fields = self.next_fields(key)?;
        match self.floats::<T>(&fields)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }
}

pub fn read_checkpoint<R: Read>(input: R) -> Result<SurrogateEnsemble> {
    let mut inner = BufReader::new(input).lines();
    match inner.next() {
        Some(Ok(l)) if l.trim() == MAGIC => {}
        _ => return Err(Error::Parse("missing checkpoint header".into())),
    }
    let mut lines = Lines { inner, line_no: 1 };
    let fields = lines.next_fields("mc_samples")?;
    let mc_samples = lines.usize_at(&fields, 0)?;
    let dropout = lines.scalar("dropout")?;
    let lower = lines.next_fields("lower")?;
    let lower = lines.floats(&lower)?;
    let upper = lines.next_fields("upper")?;
    let upper = lines.floats(&upper)?;
    let bounds = BoxBounds::new(lower, upper)?;
    let fields = lines.next_fields("objectives")?;
    let m = lines.usize_at(&fields, 0)?;

    let mut models = Vec::with_capacity(m);
    for j in 0..m {
        let fields = lines.next_fields("objective")?;
        if lines.usize_at(&fields, 0)? != j || fields.len() != 5 || fields[1] != "mean" || fields[3] != "std" {
            return Err(lines.err(format!("malformed header for objective {j}")));
        }
        let stats = lines.floats::<f64>(&[fields[2].clone(), fields[4].clone()])?;
        let net = Net {
            w1: lines.matrix("w1")?,
            b1: lines.vector("b1")?,
            w2: lines.matrix("w2")?,
            b2: lines.vector("b2")?,
            w3: lines.vector("w3")?,
            b3: lines.scalar("b3")?,
        };
        let h = net.hidden();
        if net.n() != bounds.dim()
            || net.b1.len() != h
            || net.w2.dim() != (h, h)
            || net.b2.len() != h
            || net.w3.len() != h
        {
            return Err(lines.err(format!("inconsistent layer shapes for objective {j}")));
        }
        models.push(ObjectiveModel {
            net,
            output: OutputScaler {
                mean: stats[0],
                std: stats[1],
            },
            epoch_losses: Vec::new(),
        });
    }
    Ok(SurrogateEnsemble::from_parts(&bounds, models, mc_samples, dropout))
}

pub fn load_checkpoint(path: &Path) -> Result<SurrogateEnsemble> {
    read_checkpoint(File::open(path)?)
}
