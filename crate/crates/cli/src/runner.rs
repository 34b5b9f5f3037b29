//! Executes the configured seeds and writes per-seed artifacts.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use bsmobo::optimizer::{reference_front_size, run_with, Metrics, RunConfig};
use bsmobo::problems::{Problem, ProblemKind};
use bsmobo::report::{read_points_csv, trace_rows, write_archive_files, write_points_csv, write_trace_csv};
use bsmobo::surrogate::{save_checkpoint, TrainingConfig};
use serde::Serialize;

use crate::config::Settings;
use crate::summary::{summarize, write_summary, RunInfo, RUN_INFO};
use crate::CliError;

#[derive(Debug, Serialize)]
struct RunPaths {
    seed: u64,
    dir: PathBuf,
    archive: PathBuf,
    trace: PathBuf,
    front: PathBuf,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'static str,
    problem: &'a str,
    n: usize,
    m: usize,
    seeds: &'a [u64],
    out: &'a Path,
    config: &'a Settings,
    runs: Vec<RunPaths>,
}

fn runtime(context: &str) -> impl Fn(bsmobo::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{context}: {e}"))
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn build_problem(s: &Settings) -> Result<Problem, CliError> {
    let kind: ProblemKind = s.problem.parse().map_err(|_| {
        CliError::Config(format!(
            "unknown problem `{}`; valid names: {}",
            s.problem,
            ProblemKind::valid_names()
        ))
    })?;
    let problem = match s.objectives {
        Some(m) => Problem::with_objectives(kind, s.dim, m),
        None => Problem::new(kind, s.dim),
    };
    problem.map_err(|e| CliError::Config(e.to_string()))
}

pub fn run_config(s: &Settings, problem: &Problem, seed: u64, threads: usize) -> RunConfig {
    RunConfig {
        budget: s.budget,
        init_count: s.init,
        batch_size: s.batch,
        population: s.pop,
        mc_samples: s.mc_samples,
        use_gradients: s.gradients,
        inner_generations: s.inner_gens,
        seed,
        seed_inner_population: s.seed_inner,
        threads,
        training: TrainingConfig {
            epochs: s.epochs,
            learning_rate: s.lr,
            sobolev_weight: s.sobolev_weight,
            ..TrainingConfig::default()
        },
        ..RunConfig::for_problem(problem)
    }
}

/// Worker threads per run: `BSMOBO_THREADS` when set, else the core count.
fn thread_count() -> Result<usize, CliError> {
    match std::env::var("BSMOBO_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|t| *t >= 1)
            .ok_or_else(|| CliError::Config(format!("BSMOBO_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Loads the reference front cached in `out`, computing it on first use.
fn reference_front(problem: &Problem, out: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let name = format!("reference_front_{}_m{}.csv", problem.name(), problem.m());
    let path = out.join(name);
    if path.is_file() {
        let file = File::open(&path).map_err(io(&path))?;
        return read_points_csv(file).map_err(runtime("reading cached reference front"));
    }
    let front = problem
        .reference_front(reference_front_size(problem))
        .map_err(runtime("reference front"))?;
    write_points_csv(File::create(&path).map_err(io(&path))?, &front).map_err(runtime("writing reference front"))?;
    Ok(front)
}

pub fn execute(s: &Settings) -> Result<(), CliError> {
    let problem = build_problem(s)?;
    let threads = thread_count()?;
    // validate every seed's configuration before any output is written
    for &seed in &s.seeds {
        let errs = run_config(s, &problem, seed, threads).validate();
        if !errs.is_empty() {
            return Err(CliError::Config(errs.join("; ")));
        }
    }
    fs::create_dir_all(&s.out).map_err(io(&s.out))?;
    let variant = if s.gradients { "gradient" } else { "plain" };
    let run_dir = |seed: u64| s.out.join(format!("seed_{seed}"));
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        problem: problem.name(),
        n: problem.n(),
        m: problem.m(),
        seeds: &s.seeds,
        out: &s.out,
        config: s,
        runs: s
            .seeds
            .iter()
            .map(|&seed| {
                let dir = run_dir(seed);
                RunPaths {
                    seed,
                    archive: dir.join("archive.csv"),
                    trace: dir.join("trace.csv"),
                    front: dir.join("front.csv"),
                    dir,
                }
            })
            .collect(),
    };
    let manifest_path = s.out.join("manifest.json");
    let file = File::create(&manifest_path).map_err(io(&manifest_path))?;
    serde_json::to_writer_pretty(file, &manifest).map_err(|e| CliError::Runtime(e.to_string()))?;

    let metrics = Metrics {
        reference_front: Some(reference_front(&problem, &s.out)?),
        hv_reference: Some(problem.hypervolume_reference()),
    };
    let mut dirs = Vec::new();
    for &seed in &s.seeds {
        let dir = run_dir(seed);
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let cfg = run_config(s, &problem, seed, threads);
        let quiet = s.quiet;
        let result = run_with(cfg, &problem, metrics.clone(), |t| {
            if !quiet {
                eprintln!(
                    "[{} seed {seed}] iter {:>3}  evals {:>4}  igd {:.5}  hv {:.5}  train {:.1}s  inner {:.1}s",
                    problem.name(),
                    t.iteration,
                    t.archive_size,
                    t.igd.unwrap_or(f64::NAN),
                    t.hypervolume.unwrap_or(f64::NAN),
                    t.train_seconds,
                    t.inner_seconds
                );
            }
        })
        .map_err(runtime(&format!("seed {seed}")))?;

        write_archive_files(&dir, &result.archive, problem.n(), problem.m()).map_err(runtime("writing archive"))?;
        let trace_path = dir.join("trace.csv");
        write_trace_csv(
            File::create(&trace_path).map_err(io(&trace_path))?,
            &trace_rows(&result.traces),
        )
        .map_err(runtime("writing trace"))?;
        if s.save_model {
            if let Some(model) = &result.model {
                save_checkpoint(&dir.join("model.txt"), model).map_err(runtime("writing model"))?;
            }
        }
        let info = RunInfo {
            problem: problem.name().to_string(),
            variant: variant.to_string(),
            seed,
            n: problem.n(),
            m: problem.m(),
        };
        let info_path = dir.join(RUN_INFO);
        serde_json::to_writer_pretty(File::create(&info_path).map_err(io(&info_path))?, &info)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let last = result.traces.last();
        println!(
            "{} seed {seed}: {} evaluations, final IGD {:.6}, hypervolume {:.6}",
            problem.name(),
            result.evaluations,
            last.and_then(|t| t.igd).unwrap_or(f64::NAN),
            last.and_then(|t| t.hypervolume).unwrap_or(f64::NAN),
        );
        dirs.push(dir);
    }

    let rows = summarize(&dirs)?;
    let summary_path = s.out.join("summary.csv");
    write_summary(File::create(&summary_path).map_err(io(&summary_path))?, &rows).map_err(io(&summary_path))?;
    write_summary(std::io::stdout().lock(), &rows).map_err(io(&summary_path))?;
    Ok(())
}
