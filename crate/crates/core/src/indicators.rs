//! Hypervolume, hypervolume increments and IGD.
//!
//! Two and three objectives are computed exactly by dimension sweeps. More
//! objectives fall back to a seeded Monte-Carlo estimate. Points that do not
//! strictly dominate the reference point contribute nothing.

use crate::domain::{dominates_unchecked, ObjectiveVector};
use crate::error::{check_len, Error, Result};
use crate::rng::RngStream;

/// Samples used by the Monte-Carlo estimator for more than three objectives.
pub const MC_SAMPLES: usize = 200_000;
const MC_SEED: u64 = 0x5eed_4d0c;

fn check_dims<P: AsRef<[f64]>>(points: &[P], r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::Domain("reference point is empty".into()));
    }
    for p in points {
        check_len(r.len(), p.as_ref().len())?;
    }
    Ok(())
}

/// Points strictly inside the reference box, i.e. with positive own volume.
fn inside<P: AsRef<[f64]>>(points: &[P], r: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| p.as_ref())
        .filter(|p| p.iter().zip(r).all(|(a, b)| a < b))
        .map(|p| p.to_vec())
        .collect()
}

/// Lebesgue measure of the union of the boxes `[p, r]`.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], r: &[f64]) -> Result<f64> {
    check_dims(points, r)?;
    let pts = inside(points, r);
    if pts.is_empty() {
        return Ok(0.0);
    }
    Ok(match r.len() {
        1 => r[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => hv2d(pts, r),
        3 => hv3d(pts, r),
        _ => hv_monte_carlo(&pts, r, MC_SAMPLES, &mut RngStream::new(MC_SEED)),
    })
}

fn hv2d(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut best_y = r[1];
    let mut i = 0;
    while i < pts.len() {
        let (x, y) = (pts[i][0], pts[i][1]);
        if y < best_y {
            // slab [x, r0] x [y, best_y)
            area += (r[0] - x) * (best_y - y);
            best_y = y;
        }
        i += 1;
    }
    area
}

/// Nondominated 2-D staircase, x ascending and y descending.
#[derive(Default)]
struct Staircase {
    steps: Vec<(f64, f64)>,
}

impl Staircase {
    fn insert(&mut self, x: f64, y: f64) {
        let pos = self.steps.partition_point(|s| s.0 <= x);
        // the closest step at or left of x has the smallest y among those
        if pos > 0 && self.steps[pos - 1].1 <= y {
            return;
        }
        // remove steps the new point dominates: x' >= x and y' >= y
        let mut end = pos;
        while end < self.steps.len() && self.steps[end].1 >= y {
            end += 1;
        }
        let mut start = pos;
        while start > 0 && self.steps[start - 1].0 == x {
            start -= 1;
        }
        self.steps.splice(start..end, std::iter::once((x, y)));
    }

    fn area(&self, rx: f64, ry: f64) -> f64 {
        let mut area = 0.0;
        for (i, &(x, y)) in self.steps.iter().enumerate() {
            let next = self.steps.get(i + 1).map_or(rx, |s| s.0);
            area += (next - x) * (ry - y);
        }
        area
    }
}

fn hv3d(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stairs = Staircase::default();
    let mut volume = 0.0;
    for i in 0..pts.len() {
        stairs.insert(pts[i][0], pts[i][1]);
        let top = pts.get(i + 1).map_or(r[2], |p| p[2]);
        let height = top - pts[i][2];
        if height > 0.0 {
            volume += stairs.area(r[0], r[1]) * height;
        }
    }
    volume
}

/// Monte-Carlo hypervolume over the bounding box `[min(points), r]`.
pub fn hv_monte_carlo(points: &[Vec<f64>], r: &[f64], samples: usize, rng: &mut RngStream) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let m = r.len();
    let lower: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = (0..m).map(|j| r[j] - lower[j]).product();
    let mut sample = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..m {
            sample[j] = rng.uniform_in(lower[j], r[j]);
        }
        if points.iter().any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s)) {
            hits += 1;
        }
    }
    box_volume * hits as f64 / samples as f64
}

/// `hypervolume(base + candidate) - hypervolume(base)`, computed as the
/// candidate's exclusive box volume.
pub fn hv_increment<P: AsRef<[f64]>>(base: &[P], candidate: &[f64], r: &[f64]) -> Result<f64> {
    check_dims(base, r)?;
    check_len(r.len(), candidate.len())?;
    if !candidate.iter().zip(r).all(|(c, b)| c < b) {
        return Ok(0.0);
    }
    if base
        .iter()
        .any(|b| b.as_ref().iter().zip(candidate).all(|(x, c)| x <= c))
    {
        return Ok(0.0);
    }
    let own: f64 = candidate.iter().zip(r).map(|(c, b)| b - c).product();
    // the part of [candidate, r] already covered by the base
    let clipped: Vec<Vec<f64>> = base
        .iter()
        .map(|b| b.as_ref().iter().zip(candidate).map(|(x, c)| x.max(*c)).collect())
        .collect();
    let covered = hypervolume(&clipped, r)?;
    Ok((own - covered).max(0.0))
}

/// Inverted generational distance: mean Euclidean distance from each
/// reference point to its nearest front point.
pub fn igd<P: AsRef<[f64]>, Q: AsRef<[f64]>>(front: &[P], reference: &[Q]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Domain("IGD needs a nonempty reference set".into()));
    }
    if front.is_empty() {
        return Err(Error::Domain("IGD needs a nonempty front".into()));
    }
    let m = reference[0].as_ref().len();
    for p in front {
        check_len(m, p.as_ref().len())?;
    }
    for q in reference {
        check_len(m, q.as_ref().len())?;
    }
    let total: f64 = reference
        .iter()
        .map(|q| {
            front
                .iter()
                .map(|p| {
                    p.as_ref()
                        .iter()
                        .zip(q.as_ref())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Keeps only points that can matter for hypervolume against `r`.
pub fn prune_for_hypervolume(points: &[ObjectiveVector], r: &[f64]) -> Vec<ObjectiveVector> {
    let pts = inside(points, r);
    let keep = crate::domain::nondominated_subset(&pts);
    let mut out: Vec<ObjectiveVector> = Vec::with_capacity(keep.len());
    for i in keep {
        if !out.iter().any(|q| q == &pts[i] || dominates_unchecked(q, &pts[i])) {
            out.push(pts[i].clone());
        }
    }
    out
}
