//! Performance profiles and the same-solution filter.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use sdg_core::sdg::Status;

use crate::config::Statistic;
use crate::suite::SuiteRecord;

/// One line of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub instance_id: String,
    pub algorithm: String,
    pub status: String,
    pub iterations: usize,
    pub f_evals: usize,
    pub final_f: f64,
    pub final_gnorm: f64,
    pub wall_time_ms: f64,
}

pub const RECORD_HEADER: [&str; 8] =
    ["instance_id", "algorithm", "status", "iterations", "f_evals", "final_f", "final_gnorm", "wall_time_ms"];

impl From<&SuiteRecord> for RecordRow {
    fn from(r: &SuiteRecord) -> Self {
        RecordRow {
            instance_id: r.instance_id.clone(),
            algorithm: r.algorithm.clone(),
            status: r.record.status.as_str().to_string(),
            iterations: r.record.iterations,
            f_evals: r.record.f_evals,
            final_f: r.record.final_f,
            final_gnorm: r.record.final_gnorm,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

impl RecordRow {
    pub fn converged(&self) -> bool {
        Status::parse(&self.status) == Some(Status::Converged)
    }

    /// The statistic, clamped away from zero so ratios stay finite.
    pub fn stat(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Iterations => self.iterations.max(1) as f64,
            Statistic::FEvals => self.f_evals.max(1) as f64,
            Statistic::WallTime => self.wall_time_ms.max(1e-3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub algorithm: String,
    /// Breakpoints, ascending.
    pub chi: Vec<f64>,
    /// `pi[i]` is the fraction of instances with ratio `<= chi[i]`.
    pub pi: Vec<f64>,
    /// Limit of `pi` as `chi` grows.
    pub solved_fraction: f64,
}

impl ProfileCurve {
    pub fn at(&self, chi: f64) -> f64 {
        match self.chi.iter().rposition(|&c| c <= chi) {
            Some(i) => self.pi[i],
            None => 0.0,
        }
    }
}

fn first_seen<'a>(it: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    it.filter(|s| seen.insert(*s)).map(str::to_string).collect()
}

/// Algorithm names in order of first appearance.
pub fn algorithms_of(rows: &[RecordRow]) -> Vec<String> {
    first_seen(rows.iter().map(|r| r.algorithm.as_str()))
}

pub fn instances_of(rows: &[RecordRow]) -> Vec<String> {
    first_seen(rows.iter().map(|r| r.instance_id.as_str()))
}

/// Performance ratios `ratio[a][p]`; `inf` where the algorithm failed or
/// has no record.
pub fn ratios(rows: &[RecordRow], stat: Statistic) -> (Vec<String>, Vec<Vec<f64>>) {
    let algs = algorithms_of(rows);
    let insts = instances_of(rows);
    let ai: HashMap<&str, usize> = algs.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let pi: HashMap<&str, usize> = insts.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let mut s = vec![vec![f64::INFINITY; insts.len()]; algs.len()];
    for r in rows.iter().filter(|r| r.converged()) {
        s[ai[r.algorithm.as_str()]][pi[r.instance_id.as_str()]] = r.stat(stat);
    }
    for p in 0..insts.len() {
        let best = s.iter().map(|row| row[p]).fold(f64::INFINITY, f64::min);
        for row in s.iter_mut() {
            row[p] = if best.is_finite() && row[p].is_finite() { row[p] / best } else { f64::INFINITY };
        }
    }
    (algs, s)
}

/// One curve per algorithm, all sharing the breakpoints: every distinct
/// finite ratio. Every instance counts in the denominator.
pub fn performance_profile(rows: &[RecordRow], stat: Statistic) -> Vec<ProfileCurve> {
    let (algs, r) = ratios(rows, stat);
    let n = instances_of(rows).len() as f64;
    let mut chi: Vec<f64> = r.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    chi.sort_by(f64::total_cmp);
    chi.dedup();
    algs.into_iter()
        .zip(r)
        .map(|(algorithm, ra)| {
            let mut sorted: Vec<f64> = ra.iter().copied().filter(|v| v.is_finite()).collect();
            sorted.sort_by(f64::total_cmp);
            let pi = chi.iter().map(|&c| sorted.partition_point(|&v| v <= c) as f64 / n).collect();
            ProfileCurve { algorithm, chi: chi.clone(), pi, solved_fraction: sorted.len() as f64 / n }
        })
        .collect()
}

/// `f` rounded to three significant digits; `|f| < 1e-12` counts as zero.
pub fn solution_key(f: f64) -> String {
    if f.abs() < 1e-12 {
        "0".to_string()
    } else {
        format!("{f:.2e}")
    }
}

/// Instances on which every algorithm converged to the same value.
pub fn same_solution_filter(rows: &[RecordRow]) -> BTreeSet<String> {
    let algs = algorithms_of(rows);
    let mut by_inst: HashMap<&str, Vec<&RecordRow>> = HashMap::new();
    for r in rows {
        by_inst.entry(r.instance_id.as_str()).or_default().push(r);
    }
    by_inst
        .into_iter()
        .filter(|(_, rs)| {
            let names: BTreeSet<&str> = rs.iter().map(|r| r.algorithm.as_str()).collect();
            names.len() == algs.len()
                && rs.iter().all(|r| r.converged() && r.final_f.is_finite())
                && rs.iter().map(|r| solution_key(r.final_f)).collect::<BTreeSet<_>>().len() == 1
        })
        .map(|(k, _)| k.to_string())
        .collect()
}

pub fn retain_instances(rows: &[RecordRow], keep: &BTreeSet<String>) -> Vec<RecordRow> {
    rows.iter().filter(|r| keep.contains(&r.instance_id)).cloned().collect()
}
