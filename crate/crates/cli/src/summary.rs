//! Aggregation of final IGD and hypervolume over finished runs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use bsmobo::report::{fmt_float, read_trace_csv};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Identity of one run directory, stored next to its CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub problem: String,
    pub variant: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
}

pub const RUN_INFO: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub median: f64,
}

pub fn stats(values: &[f64]) -> Stats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Stats { mean, std, median }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub variant: String,
    pub runs: usize,
    pub igd: Stats,
    pub hypervolume: Stats,
}

/// Run directories below `dir`: the directory itself when it holds a run,
/// otherwise its immediate subdirectories that do.
fn expand(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if dir.join(RUN_INFO).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries =
        std::fs::read_dir(dir).map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", dir.display())))?;
    let mut runs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(RUN_INFO).is_file())
        .collect();
    runs.sort();
    if runs.is_empty() {
        return Err(CliError::Runtime(format!("no run directories in {}", dir.display())));
    }
    Ok(runs)
}

/// Final (IGD, hypervolume) of one run.
fn final_metrics(dir: &Path) -> Result<(RunInfo, f64, f64), CliError> {
    let info_path = dir.join(RUN_INFO);
    let info: RunInfo = serde_json::from_reader(
        File::open(&info_path).map_err(|e| CliError::Runtime(format!("{}: {e}", info_path.display())))?,
    )
    .map_err(|e| CliError::Runtime(format!("{}: {e}", info_path.display())))?;
    let trace_path = dir.join("trace.csv");
    let file = File::open(&trace_path)
        .map_err(|_| CliError::Runtime(format!("missing trace file {}", trace_path.display())))?;
    let rows = read_trace_csv(file).map_err(|e| CliError::Runtime(format!("{}: {e}", trace_path.display())))?;
    let last = rows
        .last()
        .ok_or_else(|| CliError::Runtime(format!("{} has no iterations", trace_path.display())))?;
    Ok((info, last.igd, last.hypervolume))
}

pub fn summarize(dirs: &[PathBuf]) -> Result<Vec<SummaryRow>, CliError> {
    let mut groups: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for dir in dirs {
        for run in expand(dir)? {
            let (info, igd, hv) = final_metrics(&run)?;
            let entry = groups.entry((info.problem, info.variant)).or_default();
            entry.0.push(igd);
            entry.1.push(hv);
        }
    }
    if groups.is_empty() {
        return Err(CliError::Runtime("no runs to summarize".into()));
    }
    Ok(groups
        .into_iter()
        .map(|((problem, variant), (igd, hv))| SummaryRow {
            problem,
            variant,
            runs: igd.len(),
            igd: stats(&igd),
            hypervolume: stats(&hv),
        })
        .collect())
}

pub const SUMMARY_HEADER: &str =
    "problem,variant,runs,igd_mean,igd_std,igd_median,hypervolume_mean,hypervolume_std,hypervolume_median";

pub fn write_summary<W: Write>(mut out: W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.problem,
            r.variant,
            r.runs,
            fmt_float(r.igd.mean),
            fmt_float(r.igd.std),
            fmt_float(r.igd.median),
            fmt_float(r.hypervolume.mean),
            fmt_float(r.hypervolume.std),
            fmt_float(r.hypervolume.median),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_has_zero_spread() {
        let s = stats(&[0.25]);
        assert_eq!((s.mean, s.std, s.median), (0.25, 0.0, 0.25));
    }

    #[test]
    fn identical_values_have_zero_std() {
        assert_eq!(stats(&[0.1; 5]).std, 0.0);
    }

    #[test]
    fn even_count_median_averages_middle_pair() {
        let s = stats(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        // sample variance of 1..4 is 5/3
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
