//! Batch acquisition: LCB vectors, the batch hypervolume upper confidence
//! bound (B-HUCB) and its greedy maximization over a candidate pool.

use crate::domain::{Archive, DecisionVector, ObjectiveVector};
use crate::error::{check_len, Error, Result};
use crate::indicators::{hv_increment, hypervolume, prune_for_hypervolume};
use crate::moead::{Candidate, CandidateSet};
use crate::surrogate::Prediction;

/// Decision vectors closer than this (max-norm) count as the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-9;
/// Relative margin added to the archive span when placing the reference point.
pub const REFERENCE_MARGIN: f64 = 0.1;

/// `mean - beta * std`, componentwise.
pub fn lcb_with(pred: &Prediction, beta: f64) -> ObjectiveVector {
    pred.mean.iter().zip(&pred.std).map(|(m, s)| m - beta * s).collect()
}

pub fn lcb(pred: &Prediction) -> ObjectiveVector {
    lcb_with(pred, 1.0)
}

/// Componentwise archive maximum pushed out by `margin` times the span.
/// A zero span falls back to a unit span.
pub fn reference_point(archive_fs: &[ObjectiveVector], margin: f64) -> Result<ObjectiveVector> {
    let first = archive_fs
        .first()
        .ok_or_else(|| Error::Domain("reference point needs at least one archive point".into()))?;
    let m = first.len();
    let mut lo = first.clone();
    let mut hi = first.clone();
    for f in archive_fs {
        check_len(m, f.len())?;
        for j in 0..m {
            lo[j] = lo[j].min(f[j]);
            hi[j] = hi[j].max(f[j]);
        }
    }
    Ok((0..m)
        .map(|j| {
            let span = hi[j] - lo[j];
            let span = if span > 0.0 { span } else { 1.0 };
            hi[j] + margin * span
        })
        .collect())
}

/// `H(archive ∪ candidates) - H(archive)`.
pub fn bhucb(candidate_gs: &[ObjectiveVector], archive_fs: &[ObjectiveVector], r: &[f64]) -> Result<f64> {
    let base = hypervolume(archive_fs, r)?;
    let mut all: Vec<&[f64]> = archive_fs.iter().map(|v| v.as_slice()).collect();
    all.extend(candidate_gs.iter().map(|v| v.as_slice()));
    Ok((hypervolume(&all, r)? - base).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSelection {
    pub chosen: Vec<Candidate>,
    /// Position of each chosen candidate in the pool.
    pub indices: Vec<usize>,
    /// Hypervolume gain of each pick, in pick order.
    pub increments: Vec<f64>,
    /// Fewer than `k` distinct candidates were available.
    pub shortfall: bool,
}

fn near(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DEDUP_TOLERANCE)
}

/// Greedy B-HUCB maximization with the archive objectives as the base set.
pub fn greedy_select(cands: &CandidateSet, archive: &Archive, k: usize, r: &[f64]) -> Result<BatchSelection> {
    let archive_fs = archive.objectives();
    let archive_xs: Vec<&DecisionVector> = archive.entries().iter().map(|e| &e.x).collect();
    greedy_select_values(cands, &archive_fs, &archive_xs, k, r)
}

/// [`greedy_select`] on raw archive values.
pub fn greedy_select_values(
    cands: &CandidateSet,
    archive_fs: &[ObjectiveVector],
    archive_xs: &[&DecisionVector],
    k: usize,
    r: &[f64],
) -> Result<BatchSelection> {
    if k == 0 {
        return Err(Error::Domain("batch size must be at least 1".into()));
    }
    for c in cands {
        check_len(r.len(), c.g.len())?;
        if c.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("candidate LCB values must be finite".into()));
        }
    }
    for f in archive_fs {
        check_len(r.len(), f.len())?;
    }
    let mut viable: Vec<bool> = cands
        .iter()
        .map(|c| !archive_xs.iter().any(|x| near(x, &c.x)))
        .collect();
    // dominated archive values never change the hypervolume
    let mut base = prune_for_hypervolume(archive_fs, r);
    let mut out = BatchSelection {
        chosen: Vec::with_capacity(k),
        indices: Vec::with_capacity(k),
        increments: Vec::with_capacity(k),
        shortfall: false,
    };
    while out.chosen.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cands.iter().enumerate() {
            if !viable[i] {
                continue;
            }
            let gain = hv_increment(&base, &c.g, r)?;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((i, gain));
            }
        }
        let Some((i, gain)) = best else {
            out.shortfall = true;
            break;
        };
        let pick = &cands[i];
        for (j, c) in cands.iter().enumerate() {
            if viable[j] && near(&c.x, &pick.x) {
                viable[j] = false;
            }
        }
        base.push(pick.g.clone());
        out.chosen.push(pick.clone());
        out.indices.push(i);
        out.increments.push(gain);
    }
    Ok(out)
}
