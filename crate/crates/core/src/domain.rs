//! Shared domain types: box bounds, Pareto dominance and the evaluation archive.
//!
//! All objectives are minimized.

use std::collections::HashSet;

use ndarray::Array2;

use crate::error::{check_len, Error, Result};

pub type DecisionVector = Vec<f64>;
pub type ObjectiveVector = Vec<f64>;
/// `m x n` Jacobian, entry `(j, i)` is `df_j / dx_i`.
pub type GradientMatrix = Array2<f64>;

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Domain("bounds need at least one dimension".into()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Domain(format!(
                    "bound {i}: lower {lo} must be finite and below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![1.0; n]).expect("unit box is valid for n >= 1")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the points not dominated by any other point, in input order.
/// Duplicates of a nondominated value are all kept.
pub fn nondominated_subset<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    if points[0].as_ref().len() == 2 {
        return nondominated_2d(points);
    }
    (0..points.len())
        .filter(|&i| {
            let p = points[i].as_ref();
            !points
                .iter()
                .enumerate()
                .any(|(j, q)| j != i && dominates_unchecked(q.as_ref(), p))
        })
        .collect()
}

// Sort-and-sweep variant for two objectives.
fn nondominated_2d<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a].as_ref(), points[b].as_ref());
        pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1]))
    });
    let mut keep = Vec::new();
    let mut best_y = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        // group of equal first coordinate; only its minimal second coordinate survives
        let x = points[order[i]].as_ref()[0];
        let y_min = points[order[i]].as_ref()[1];
        let mut j = i;
        while j < order.len() && points[order[j]].as_ref()[0] == x {
            j += 1;
        }
        if y_min < best_y {
            for &idx in &order[i..j] {
                if points[idx].as_ref()[1] == y_min {
                    keep.push(idx);
                }
            }
            best_y = y_min;
        }
        i = j;
    }
    keep.sort_unstable();
    keep
}

pub fn clamp_to_bounds(x: &[f64], bounds: &BoxBounds) -> DecisionVector {
    x.iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
        .collect()
}

/// A decision vector with its true objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedSolution {
    pub x: DecisionVector,
    pub f: ObjectiveVector,
    pub grad: Option<GradientMatrix>,
}

impl EvaluatedSolution {
    pub fn new(x: DecisionVector, f: ObjectiveVector) -> Self {
        Self { x, f, grad: None }
    }

    pub fn with_gradient(x: DecisionVector, f: ObjectiveVector, grad: GradientMatrix) -> Self {
        Self { x, f, grad: Some(grad) }
    }
}

/// Append-only store of evaluated solutions, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    entries: Vec<EvaluatedSolution>,
    seen: HashSet<Vec<u64>>,
}

pub(crate) fn bit_key(x: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 compare equal, so they share a key
    x.iter().map(|v| if *v == 0.0 { 0u64 } else { v.to_bits() }).collect()
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EvaluatedSolution] {
        &self.entries
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.seen.contains(&bit_key(x))
    }

    /// Appends `sol`; rejects inconsistent shapes and exact duplicates.
    pub fn push(&mut self, sol: EvaluatedSolution) -> Result<()> {
        if let Some(first) = self.entries.first() {
            check_len(first.x.len(), sol.x.len())?;
            check_len(first.f.len(), sol.f.len())?;
        }
        if sol.f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("objective values must be finite".into()));
        }
        if let Some(g) = &sol.grad {
            if g.dim() != (sol.f.len(), sol.x.len()) {
                return Err(Error::Input(format!(
                    "gradient shape {:?} does not match ({}, {})",
                    g.dim(),
                    sol.f.len(),
                    sol.x.len()
                )));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("gradient entries must be finite".into()));
            }
        }
        if !self.seen.insert(bit_key(&sol.x)) {
            return Err(Error::DuplicatePoint);
        }
        self.entries.push(sol);
        Ok(())
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.f.clone()).collect()
    }

    pub fn nondominated_indices(&self) -> Vec<usize> {
        let fs: Vec<&[f64]> = self.entries.iter().map(|e| e.f.as_slice()).collect();
        nondominated_subset(&fs)
    }

    pub fn nondominated(&self) -> Vec<&EvaluatedSolution> {
        self.nondominated_indices()
            .into_iter()
            .map(|i| &self.entries[i])
            .collect()
    }
}
