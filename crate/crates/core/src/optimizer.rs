//! The outer optimization loop with an ask/tell interface.
//!
//! ```no_run
//! use bsmobo::optimizer::{Ask, Optimizer, RunConfig};
//! use bsmobo::problems::{Problem, ProblemKind};
//! use bsmobo::EvaluatedSolution;
//!
//! let problem = Problem::new(ProblemKind::Zdt1, 8).unwrap();
//! let mut opt = Optimizer::new(RunConfig::for_problem(&problem)).unwrap();
//! while let Ask::Evaluate(batch) = opt.ask().unwrap() {
//!     let evals = batch
//!         .into_iter()
//!         .map(|x| {
//!             let f = problem.evaluate(&x).unwrap();
//!             EvaluatedSolution::new(x, f)
//!         })
//!         .collect();
//!     opt.tell(evals).unwrap();
//! }
//! let front = opt.archive().nondominated();
//! ```

use std::collections::HashMap;
use std::time::Instant;

use crate::domain::{bit_key, Archive, BoxBounds, DecisionVector, EvaluatedSolution, ObjectiveVector};
use crate::error::{Error, Result};
use crate::indicators::{hypervolume, igd};
use crate::moead::{self, Candidate, MoeadConfig};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::sampling::latin_hypercube;
use crate::selection::{greedy_select, lcb_with, reference_point, REFERENCE_MARGIN};
use crate::surrogate::{SurrogateEnsemble, TrainingConfig, DEFAULT_MC_SAMPLES};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub bounds: BoxBounds,
    pub m: usize,
    /// Total number of true evaluations, initial design included.
    pub budget: usize,
    pub init_count: usize,
    pub batch_size: usize,
    /// Candidate pool size, which is also the inner population size.
    pub population: usize,
    pub mc_samples: usize,
    pub use_gradients: bool,
    pub training: TrainingConfig,
    pub inner_generations: usize,
    pub seed: u64,
    /// Margin of the selection reference point, relative to the archive span.
    pub reference_margin: f64,
    /// Multiplier of the predictive std in the lower confidence bound.
    pub lcb_beta: f64,
    /// Start the inner population from the archive's nondominated points.
    pub seed_inner_population: bool,
    /// Worker threads for training the per-objective networks.
    pub threads: usize,
}

impl RunConfig {
    pub fn new(bounds: BoxBounds, m: usize) -> Self {
        Self {
            bounds,
            m,
            budget: 160,
            init_count: 60,
            batch_size: 5,
            population: 100,
            mc_samples: DEFAULT_MC_SAMPLES,
            use_gradients: false,
            training: TrainingConfig::default(),
            inner_generations: 100,
            seed: 0,
            reference_margin: REFERENCE_MARGIN,
            lcb_beta: 1.0,
            seed_inner_population: false,
            threads: 1,
        }
    }

    pub fn for_problem(problem: &Problem) -> Self {
        Self::new(problem.bounds().clone(), problem.m())
    }

    /// Every violated constraint, in a stable order.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.m < 2 {
            errs.push(format!("need at least 2 objectives, got {}", self.m));
        }
        if self.init_count < 2 {
            errs.push(format!("init_count {} must be at least 2", self.init_count));
        }
        if self.batch_size < 1 {
            errs.push("batch_size must be at least 1".into());
        }
        if self.init_count + self.batch_size > self.budget {
            errs.push(format!(
                "init_count + batch_size ({} + {}) exceeds the budget {}",
                self.init_count, self.batch_size, self.budget
            ));
        }
        if self.batch_size > self.population {
            errs.push(format!(
                "batch_size {} exceeds the population {}",
                self.batch_size, self.population
            ));
        }
        if self.population < self.m {
            errs.push(format!("population {} is smaller than m = {}", self.population, self.m));
        }
        if self.mc_samples < 2 {
            errs.push(format!("mc_samples {} must be at least 2", self.mc_samples));
        }
        if !(self.reference_margin >= 0.0) {
            errs.push("reference margin must be non-negative".into());
        }
        if !(self.lcb_beta >= 0.0) {
            errs.push("LCB multiplier must be non-negative".into());
        }
        errs.extend(self.training.validate());
        errs
    }

    pub fn moead(&self) -> MoeadConfig {
        MoeadConfig {
            population: self.population,
            generations: self.inner_generations,
            ..MoeadConfig::default()
        }
    }
}

/// What the caller should do next.
#[derive(Debug, Clone, PartialEq)]
pub enum Ask {
    Evaluate(Vec<DecisionVector>),
    Finished,
}

/// Record of one post-initialization iteration.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// 1-based outer iteration.
    pub iteration: usize,
    pub archive_size: usize,
    pub selected: Vec<Candidate>,
    pub increments: Vec<f64>,
    /// Points added at random because the pool had too few distinct ones.
    pub filled: usize,
    pub igd: Option<f64>,
    pub hypervolume: Option<f64>,
    /// Final epoch loss of each objective's network.
    pub training_losses: Vec<f64>,
    pub train_seconds: f64,
    pub inner_seconds: f64,
    pub select_seconds: f64,
}

/// Metrics evaluated against the archive after every tell.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub reference_front: Option<Vec<ObjectiveVector>>,
    pub hv_reference: Option<ObjectiveVector>,
}

impl Metrics {
    pub fn for_problem(problem: &Problem, front_size: usize) -> Result<Self> {
        Ok(Self {
            reference_front: Some(problem.reference_front(front_size)?),
            hv_reference: Some(problem.hypervolume_reference()),
        })
    }

    pub fn evaluate(&self, archive: &Archive) -> Result<(Option<f64>, Option<f64>)> {
        let front: Vec<&[f64]> = archive.nondominated().iter().map(|e| e.f.as_slice()).collect();
        let i = match &self.reference_front {
            Some(r) if !front.is_empty() => Some(igd(&front, r)?),
            _ => None,
        };
        let h = match &self.hv_reference {
            Some(r) => Some(hypervolume(&front, r)?),
            None => None,
        };
        Ok((i, h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Init,
    Ready,
    Outstanding,
    Finished,
}

#[derive(Debug, Clone)]
struct Pending {
    points: Vec<DecisionVector>,
    info: Option<IterationTrace>,
}

pub struct Optimizer {
    cfg: RunConfig,
    master: RngStream,
    archive: Archive,
    phase: Phase,
    iteration: usize,
    pending: Option<Pending>,
    last_model: Option<SurrogateEnsemble>,
    metrics: Option<Metrics>,
}

impl Optimizer {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let errs = cfg.validate();
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(Self {
            master: RngStream::new(cfg.seed),
            cfg,
            archive: Archive::new(),
            phase: Phase::Init,
            iteration: 0,
            pending: None,
            last_model: None,
            metrics: None,
        })
    }

    pub fn with_metrics(mut self, metrics: Metrics) -> Self {
        self.metrics = Some(metrics);
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// The ensemble trained for the most recent batch, if any.
    pub fn model(&self) -> Option<&SurrogateEnsemble> {
        self.last_model.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    pub fn ask(&mut self) -> Result<Ask> {
        match self.phase {
            Phase::Outstanding => Err(Error::Protocol("a batch is already outstanding".into())),
            Phase::Finished => Ok(Ask::Finished),
            Phase::Init => {
                let mut rng = self.master.derive("init");
                let points = latin_hypercube(self.cfg.init_count, &self.cfg.bounds, &mut rng);
                self.pending = Some(Pending {
                    points: points.clone(),
                    info: None,
                });
                self.phase = Phase::Outstanding;
                Ok(Ask::Evaluate(points))
            }
            Phase::Ready => {
                let remaining = self.cfg.budget.saturating_sub(self.archive.len());
                if remaining == 0 {
                    self.phase = Phase::Finished;
                    return Ok(Ask::Finished);
                }
                let k = remaining.min(self.cfg.batch_size);
                let t = self.iteration + 1;
                let info = self.propose(t, k)?;
                let mut points: Vec<DecisionVector> = info.selected.iter().map(|c| c.x.clone()).collect();
                if points.len() < k {
                    points.extend(self.fill(t, k - points.len(), &points));
                }
                let info = IterationTrace {
                    filled: k - info.selected.len(),
                    ..info
                };
                self.pending = Some(Pending {
                    points: points.clone(),
                    info: Some(info),
                });
                self.phase = Phase::Outstanding;
                Ok(Ask::Evaluate(points))
            }
        }
    }

    /// Trains the surrogate, solves the LCB problem and selects `k` points.
    fn propose(&mut self, t: usize, k: usize) -> Result<IterationTrace> {
        let cfg = &self.cfg;
        let start = Instant::now();
        let rngs: Vec<RngStream> = (0..cfg.m)
            .map(|j| self.master.derive(&format!("train-{j}-{t}")))
            .collect();
        let model = SurrogateEnsemble::fit(
            &self.archive,
            &cfg.bounds,
            &cfg.training,
            cfg.mc_samples,
            &rngs,
            self.last_model.as_ref(),
            cfg.threads,
        )?;
        let train_seconds = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let seeds: Vec<DecisionVector> = if cfg.seed_inner_population {
            self.archive.nondominated().iter().map(|e| e.x.clone()).collect()
        } else {
            Vec::new()
        };
        let mut predict_rng = self.master.derive(&format!("predict-{t}"));
        let mut inner_rng = self.master.derive(&format!("inner-{t}"));
        let beta = cfg.lcb_beta;
        let cands = moead::solve(
            |xs: &[DecisionVector]| {
                model
                    .predict_batch(xs, &mut predict_rng)
                    .iter()
                    .map(|p| lcb_with(p, beta))
                    .collect()
            },
            &cfg.bounds,
            cfg.m,
            &cfg.moead(),
            &seeds,
            &mut inner_rng,
            None,
        )?;
        let inner_seconds = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let r = reference_point(&self.archive.objectives(), cfg.reference_margin)?;
        let sel = greedy_select(&cands, &self.archive, k, &r)?;
        let select_seconds = start.elapsed().as_secs_f64();

        let training_losses = model.final_losses();
        self.last_model = Some(model);
        Ok(IterationTrace {
            iteration: t,
            archive_size: self.archive.len(),
            selected: sel.chosen,
            increments: sel.increments,
            filled: 0,
            igd: None,
            hypervolume: None,
            training_losses,
            train_seconds,
            inner_seconds,
            select_seconds,
        })
    }

    /// Uniform random points that are new to the archive and the batch.
    fn fill(&self, t: usize, count: usize, taken: &[DecisionVector]) -> Vec<DecisionVector> {
        let mut rng = self.master.derive(&format!("fill-{t}"));
        let b = &self.cfg.bounds;
        let mut out: Vec<DecisionVector> = Vec::with_capacity(count);
        while out.len() < count {
            let x: DecisionVector = (0..b.dim())
                .map(|i| rng.uniform_in(b.lower()[i], b.upper()[i]))
                .collect();
            let key = bit_key(&x);
            let clash = self.archive.contains(&x) || taken.iter().chain(&out).any(|y| bit_key(y) == key);
            if !clash {
                out.push(x);
            }
        }
        out
    }

    /// Accepts the evaluations of the outstanding batch in any order.
    /// Returns the iteration trace for post-initialization batches.
    pub fn tell(&mut self, evaluations: Vec<EvaluatedSolution>) -> Result<Option<IterationTrace>> {
        if self.phase != Phase::Outstanding {
            return Err(Error::Protocol("tell without an outstanding batch".into()));
        }
        let pending = self.pending.as_ref().expect("outstanding batch is recorded");
        if evaluations.len() != pending.points.len() {
            return Err(Error::Protocol(format!(
                "expected {} evaluations, got {}",
                pending.points.len(),
                evaluations.len()
            )));
        }
        let slots: HashMap<Vec<u64>, usize> = pending
            .points
            .iter()
            .enumerate()
            .map(|(i, x)| (bit_key(x), i))
            .collect();
        let mut ordered: Vec<Option<EvaluatedSolution>> = vec![None; pending.points.len()];
        for mut e in evaluations {
            let Some(&i) = slots.get(&bit_key(&e.x)) else {
                return Err(Error::Protocol("evaluation for a point that was not asked".into()));
            };
            if ordered[i].is_some() {
                return Err(Error::Protocol("point evaluated twice in one tell".into()));
            }
            if e.f.len() != self.cfg.m {
                return Err(Error::Dimension {
                    expected: self.cfg.m,
                    found: e.f.len(),
                });
            }
            if self.cfg.use_gradients {
                if e.grad.is_none() {
                    return Err(Error::Input("gradients are required on every evaluation".into()));
                }
            } else {
                e.grad = None;
            }
            ordered[i] = Some(e);
        }
        // validate the whole batch before touching the archive
        let mut trial = self.archive.clone();
        for e in ordered.into_iter().flatten() {
            trial.push(e)?;
        }
        self.archive = trial;
        let mut pending = self.pending.take().unwrap();
        self.phase = if self.archive.len() >= self.cfg.budget {
            Phase::Finished
        } else {
            Phase::Ready
        };
        let Some(mut info) = pending.info.take() else {
            return Ok(None);
        };
        self.iteration = info.iteration;
        info.archive_size = self.archive.len();
        if let Some(m) = &self.metrics {
            let (i, h) = m.evaluate(&self.archive)?;
            info.igd = i;
            info.hypervolume = h;
        }
        Ok(Some(info))
    }
}

/// Outcome of a complete benchmark run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub archive: Archive,
    pub traces: Vec<IterationTrace>,
    /// IGD and hypervolume of the initial design.
    pub initial_igd: Option<f64>,
    pub initial_hypervolume: Option<f64>,
    pub evaluations: usize,
    /// Surrogate trained for the final batch.
    pub model: Option<SurrogateEnsemble>,
}

/// Default size of the sampled reference front used for IGD.
pub fn reference_front_size(problem: &Problem) -> usize {
    if problem.m() == 2 {
        500
    } else {
        990
    }
}

fn evaluate_point(problem: &Problem, x: DecisionVector, gradients: bool) -> Result<EvaluatedSolution> {
    if gradients {
        let (f, g) = problem.evaluate_with_gradient(&x)?;
        Ok(EvaluatedSolution::with_gradient(x, f, g))
    } else {
        let f = problem.evaluate(&x)?;
        Ok(EvaluatedSolution::new(x, f))
    }
}

/// Runs the optimizer against a built-in problem until the budget is spent.
pub fn run(cfg: RunConfig, problem: &Problem) -> Result<RunResult> {
    let metrics = Metrics::for_problem(problem, reference_front_size(problem))?;
    run_with(cfg, problem, metrics, |_| {})
}

/// [`run`] with explicit metrics and a callback after every
/// post-initialization iteration.
pub fn run_with<F: FnMut(&IterationTrace)>(
    cfg: RunConfig,
    problem: &Problem,
    metrics: Metrics,
    mut progress: F,
) -> Result<RunResult> {
    if cfg.bounds != *problem.bounds() || cfg.m != problem.m() {
        return Err(Error::Config(vec![format!(
            "configuration does not match {} with n = {}, m = {}",
            problem.name(),
            problem.n(),
            problem.m()
        )]));
    }
    let gradients = cfg.use_gradients;
    let mut opt = Optimizer::new(cfg)?.with_metrics(metrics.clone());
    let mut traces = Vec::new();
    let mut evaluations = 0;
    let mut initial = (None, None);
    while let Ask::Evaluate(batch) = opt.ask()? {
        evaluations += batch.len();
        let evals = batch
            .into_iter()
            .map(|x| evaluate_point(problem, x, gradients))
            .collect::<Result<Vec<_>>>()?;
        match opt.tell(evals)? {
            Some(trace) => {
                progress(&trace);
                traces.push(trace);
            }
            None => initial = metrics.evaluate(opt.archive())?,
        }
    }
    Ok(RunResult {
        model: opt.last_model,
        archive: opt.archive,
        traces,
        initial_igd: initial.0,
        initial_hypervolume: initial.1,
        evaluations,
    })
}

/// Pure Latin-hypercube baseline with the same number of evaluations.
pub fn lhs_baseline(problem: &Problem, count: usize, seed: u64) -> Result<Archive> {
    let mut rng = RngStream::new(seed).derive("baseline");
    let mut archive = Archive::new();
    for x in latin_hypercube(count, problem.bounds(), &mut rng) {
        let f = problem.evaluate(&x)?;
        archive.push(EvaluatedSolution::new(x, f))?;
    }
    Ok(archive)
}
