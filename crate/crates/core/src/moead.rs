//! MOEA/D with Tchebycheff decomposition, used as the inner solver on the
//! lower-confidence-bound surrogate problem.
//!
//! Offspring for all subproblems are generated from the population at the
//! start of a generation and evaluated as one batch, then merged in
//! subproblem order. Each offspring's objective vector is computed once and
//! cached, so replacement decisions never see a re-drawn noisy value.

use crate::domain::{BoxBounds, DecisionVector, ObjectiveVector};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampling::latin_hypercube;

/// Margin that keeps the ideal point strictly below every observed value.
pub const IDEAL_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectorSet {
    lambdas: Vec<Vec<f64>>,
}

impl WeightVectorSet {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn as_slice(&self) -> &[Vec<f64>] {
        &self.lambdas
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn lattice_points(m: usize, h: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, h: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == m - 1 {
            let mut v: Vec<f64> = prefix.iter().map(|&c| c as f64 / h as f64).collect();
            v.push(left as f64 / h as f64);
            out.push(v);
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(m, left - c, h, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(h + m - 1, m - 1));
    rec(m, h, h, &mut Vec::with_capacity(m), &mut out);
    out
}

/// `count` points of the unit simplex: the smallest lattice with at least
/// `count` points, thinned to `count` by an even index stride.
pub fn simplex_lattice(m: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(Error::Domain("simplex lattice needs m >= 2".into()));
    }
    if count < 1 {
        return Err(Error::Domain("simplex lattice needs count >= 1".into()));
    }
    let mut h = 1;
    while binomial(h + m - 1, m - 1) < count {
        h += 1;
    }
    let all = lattice_points(m, h);
    if all.len() == count {
        return Ok(all);
    }
    if count == 1 {
        return Ok(vec![all[0].clone()]);
    }
    let last = all.len() - 1;
    Ok((0..count)
        .map(|i| all[(i * last + (count - 1) / 2) / (count - 1)].clone())
        .collect())
}

/// Evenly spread weight vectors on the simplex, one per subproblem.
pub fn generate_weights(m: usize, p: usize) -> Result<WeightVectorSet> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 objectives, got {m}")));
    }
    if p < m {
        return Err(Error::Domain(format!(
            "population {p} is smaller than the objective count {m}"
        )));
    }
    let lambdas = if m == 2 {
        (0..p)
            .map(|i| {
                let a = i as f64 / (p - 1) as f64;
                vec![a, 1.0 - a]
            })
            .collect()
    } else {
        simplex_lattice(m, p)?
    };
    Ok(WeightVectorSet { lambdas })
}

pub fn tchebycheff(g: &[f64], lambda: &[f64], z: &[f64]) -> f64 {
    g.iter()
        .zip(lambda)
        .zip(z)
        .map(|((gi, li), zi)| li * (gi - zi).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone)]
pub struct MoeadConfig {
    pub population: usize,
    pub generations: usize,
    /// Neighborhood size T, capped at the population size.
    pub neighborhood: usize,
    /// Probability of mating inside the neighborhood rather than the population.
    pub neighborhood_mating_prob: f64,
    /// Maximum number of incumbents one offspring may replace.
    pub max_replacements: usize,
    pub crossover_eta: f64,
    pub crossover_prob: f64,
    pub mutation_eta: f64,
    /// Per-variable mutation probability; `None` means `1 / n`.
    pub mutation_prob: Option<f64>,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 100,
            neighborhood: 20,
            neighborhood_mating_prob: 0.9,
            max_replacements: 2,
            crossover_eta: 20.0,
            crossover_prob: 1.0,
            mutation_eta: 20.0,
            mutation_prob: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemState {
    pub index: usize,
    pub lambda: Vec<f64>,
    pub neighborhood: Vec<usize>,
    pub incumbent: DecisionVector,
    pub incumbent_g: ObjectiveVector,
}

/// One candidate of the pool: a decision vector and its surrogate objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: DecisionVector,
    pub g: ObjectiveVector,
}

pub type CandidateSet = Vec<Candidate>;

/// Per-generation record, mostly for tests and diagnostics.
#[derive(Debug, Clone)]
pub struct GenerationLog {
    pub ideal: Vec<f64>,
    /// Tchebycheff value of every incumbent under the ideal point used for
    /// this generation's replacements, before and after them.
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

fn neighborhoods(lambdas: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    lambdas
        .iter()
        .map(|a| {
            let mut idx: Vec<(f64, usize)> = lambdas
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                    (d, j)
                })
                .collect();
            idx.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            idx.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Bounded simulated binary crossover; returns one child.
pub fn sbx(p1: &[f64], p2: &[f64], bounds: &BoxBounds, eta: f64, prob: f64, rng: &mut RngStream) -> DecisionVector {
    let mut child = p1.to_vec();
    if rng.uniform() > prob {
        return child;
    }
    for i in 0..p1.len() {
        if rng.uniform() > 0.5 {
            continue;
        }
        let (a, b) = (p1[i], p2[i]);
        if (a - b).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if a < b { (a, b) } else { (b, a) };
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        let u = rng.uniform();
        let spread = |beta: f64| -> f64 {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        let c1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
        let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        let c2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
        let (c1, c2) = (c1.clamp(lo, hi), c2.clamp(lo, hi));
        child[i] = if rng.uniform() < 0.5 { c1 } else { c2 };
    }
    child
}

/// Bounded polynomial mutation, in place.
pub fn polynomial_mutation(x: &mut [f64], bounds: &BoxBounds, eta: f64, prob: f64, rng: &mut RngStream) {
    for i in 0..x.len() {
        if rng.uniform() >= prob {
            continue;
        }
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        let width = hi - lo;
        let y = x[i];
        let d1 = (y - lo) / width;
        let d2 = (hi - y) / width;
        let u = rng.uniform();
        let pow = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        x[i] = (y + dq * width).clamp(lo, hi);
    }
}

fn update_ideal(z: &mut [f64], g: &[f64]) {
    for (zi, gi) in z.iter_mut().zip(g) {
        let cand = gi - IDEAL_MARGIN;
        if cand < *zi {
            *zi = cand;
        }
    }
}

/// Solves `min G(x)` over `bounds` and returns one incumbent per subproblem.
///
/// `evaluate` maps a batch of decision vectors to their objective vectors.
/// `seeds` optionally provides starting decision vectors; the rest of the
/// initial population is a Latin hypercube.
pub fn solve<F>(
    mut evaluate: F,
    bounds: &BoxBounds,
    m: usize,
    cfg: &MoeadConfig,
    seeds: &[DecisionVector],
    rng: &mut RngStream,
    mut log: Option<&mut Vec<GenerationLog>>,
) -> Result<CandidateSet>
where
    F: FnMut(&[DecisionVector]) -> Vec<ObjectiveVector>,
{
    let p = cfg.population;
    let weights = generate_weights(m, p)?;
    let t = cfg.neighborhood.clamp(2.min(p), p);
    let hoods = neighborhoods(weights.as_slice(), t);
    let n = bounds.dim();
    let mutation_prob = cfg.mutation_prob.unwrap_or(1.0 / n as f64);

    let mut xs: Vec<DecisionVector> = seeds
        .iter()
        .take(p)
        .map(|s| crate::domain::clamp_to_bounds(s, bounds))
        .collect();
    if xs.len() < p {
        xs.extend(latin_hypercube(p - xs.len(), bounds, rng));
    }
    let mut gs = evaluate(&xs);
    assert_eq!(gs.len(), p, "evaluator returned the wrong batch size");

    let mut z = vec![f64::INFINITY; m];
    for g in &gs {
        update_ideal(&mut z, g);
    }

    for _gen in 0..cfg.generations {
        let mut pools = Vec::with_capacity(p);
        let mut offspring = Vec::with_capacity(p);
        for i in 0..p {
            let use_hood = rng.uniform() < cfg.neighborhood_mating_prob;
            let pick = |rng: &mut RngStream| -> usize {
                if use_hood {
                    hoods[i][rng.below(hoods[i].len())]
                } else {
                    rng.below(p)
                }
            };
            let a = pick(rng);
            let mut b = pick(rng);
            for _ in 0..8 {
                if b != a {
                    break;
                }
                b = pick(rng);
            }
            let mut child = sbx(&xs[a], &xs[b], bounds, cfg.crossover_eta, cfg.crossover_prob, rng);
            polynomial_mutation(&mut child, bounds, cfg.mutation_eta, mutation_prob, rng);
            offspring.push(child);
            pools.push(use_hood);
        }
        let child_gs = evaluate(&offspring);
        assert_eq!(child_gs.len(), p, "evaluator returned the wrong batch size");

        let mut entry = log.as_ref().map(|_| GenerationLog {
            ideal: Vec::new(),
            before: Vec::new(),
            after: Vec::new(),
        });
        for g in &child_gs {
            update_ideal(&mut z, g);
        }
        if let Some(e) = entry.as_mut() {
            e.ideal = z.clone();
            e.before = (0..p)
                .map(|j| tchebycheff(&gs[j], &weights.as_slice()[j], &z))
                .collect();
        }
        for (i, (child, cg)) in offspring.into_iter().zip(child_gs).enumerate() {
            let mut candidates: Vec<usize> = if pools[i] { hoods[i].clone() } else { (0..p).collect() };
            rng.shuffle(&mut candidates);
            let mut replaced = 0;
            for j in candidates {
                if replaced >= cfg.max_replacements {
                    break;
                }
                let lambda = &weights.as_slice()[j];
                if tchebycheff(&cg, lambda, &z) < tchebycheff(&gs[j], lambda, &z) {
                    xs[j] = child.clone();
                    gs[j] = cg.clone();
                    replaced += 1;
                }
            }
        }
        if let (Some(mut e), Some(l)) = (entry, log.as_deref_mut()) {
            e.after = (0..p)
                .map(|j| tchebycheff(&gs[j], &weights.as_slice()[j], &z))
                .collect();
            l.push(e);
        }
    }

    Ok(xs.into_iter().zip(gs).map(|(x, g)| Candidate { x, g }).collect())
}

/// Materializes the subproblem view of a finished candidate set.
pub fn subproblems(cands: &CandidateSet, m: usize, neighborhood: usize) -> Result<Vec<SubproblemState>> {
    let weights = generate_weights(m, cands.len())?;
    let hoods = neighborhoods(weights.as_slice(), neighborhood.min(cands.len()));
    Ok(cands
        .iter()
        .zip(weights.lambdas)
        .zip(hoods)
        .enumerate()
        .map(|(index, ((c, lambda), neighborhood))| SubproblemState {
            index,
            lambda,
            neighborhood,
            incumbent: c.x.clone(),
            incumbent_g: c.g.clone(),
        })
        .collect())
}
