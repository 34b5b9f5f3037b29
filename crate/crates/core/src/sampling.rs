//! Latin hypercube design for the initial dataset.

use crate::domain::{BoxBounds, DecisionVector};
use crate::rng::RngStream;

/// Randomized Latin hypercube: along every axis each of the `count`
/// equal-width strata holds exactly one sample, placed uniformly inside
/// its cell. Axes use independent permutations.
pub fn latin_hypercube(count: usize, bounds: &BoxBounds, rng: &mut RngStream) -> Vec<DecisionVector> {
    let n = bounds.dim();
    let mut points = vec![vec![0.0; n]; count];
    let mut perm: Vec<usize> = (0..count).collect();
    for i in 0..n {
        rng.shuffle(&mut perm);
        let lo = bounds.lower()[i];
        let width = bounds.width(i);
        for (point, &stratum) in points.iter_mut().zip(&perm) {
            let u = (stratum as f64 + rng.uniform()) / count as f64;
            // guard against rounding past the upper edge
            point[i] = (lo + width * u).min(bounds.upper()[i]);
        }
    }
    points
}
