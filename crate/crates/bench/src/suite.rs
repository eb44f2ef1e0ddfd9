//! Instance construction and parallel execution.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use sdg_core::problems::{
    self, cv_folds, logistic_objective, perturb_starts, scale_objective, ProblemInstance, SharedObjective, NUM_FOLDS,
};
use sdg_core::sdg::{plain_run, sdg_run, RunRecord};
use sdg_core::Vector;

use crate::config::{Algorithm, ExperimentConfig};
use crate::libsvm::parse_libsvm;
use crate::profile::RecordRow;
use crate::table1::Check;
use crate::synth::gaussian_clouds;
use crate::BenchError;

/// 64-bit FNV-1a.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed for one instance, independent of scheduling order.
pub fn instance_seed(seed: u64, instance_id: &str) -> u64 {
    seed ^ fnv1a(instance_id)
}

/// Resolves corpus names; `"all"` expands to the whole corpus in its
/// canonical order.
pub fn corpus_selection(names: &[String]) -> Result<Vec<SharedObjective>, BenchError> {
    let corpus = problems::corpus();
    let mut out: Vec<SharedObjective> = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(corpus.iter().cloned());
            continue;
        }
        let obj = corpus
            .iter()
            .find(|o| o.name() == name)
            .ok_or_else(|| BenchError::Config(format!("unknown problem {name:?}")))?;
        out.push(obj.clone());
    }
    Ok(out)
}

/// Every instance named by the config, in a fixed order: corpus problems
/// (by ω, then problem, then start), synthetic sets, then datasets.
pub fn build_instances(cfg: &ExperimentConfig) -> Result<Vec<ProblemInstance>, BenchError> {
    let p = &cfg.problems;
    let mut out = Vec::new();
    let selected = corpus_selection(&p.corpus)?;
    for &omega in &p.omegas {
        for obj in &selected {
            let scaled = if omega == 1.0 { obj.clone() } else { scale_objective(obj.clone(), omega) };
            let starts = perturb_starts(&scaled, instance_seed(cfg.seed, &format!("starts/{}", obj.name())));
            out.extend(starts.into_iter().take(p.starts));
        }
    }
    if let Some(s) = &p.synthetic {
        let params = s.params();
        let mu = s.mu.unwrap_or(1.0 / params.rows as f64);
        for i in 0..s.instances {
            let id = format!("synth{i}");
            let data = gaussian_clouds(&params, instance_seed(cfg.seed, &format!("data/{id}")));
            out.push(logistic_instance(data, mu, id));
        }
    }
    for d in &p.datasets {
        let path = cfg.resolve_path(&d.path);
        let file = std::fs::File::open(&path).map_err(|e| BenchError::io(&path, e))?;
        let data = parse_libsvm(std::io::BufReader::new(file)).map_err(|e| BenchError::Parse { path: path.clone(), source: e })?;
        if data.is_empty() {
            return Err(BenchError::Config(format!("{}: no rows", path.display())));
        }
        let name = d.name.clone().unwrap_or_else(|| {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
        });
        if d.cv {
            if data.len() < NUM_FOLDS {
                return Err(BenchError::Config(format!("{name}: cross-validation needs at least {NUM_FOLDS} rows")));
            }
            let split = cv_folds(data.len(), instance_seed(cfg.seed, &format!("folds/{name}")));
            for k in 0..NUM_FOLDS {
                let mut train = data.subset(&split.train_rows(k));
                train.n_features = data.n_features;
                let mu = d.mu.unwrap_or(1.0 / train.len() as f64);
                out.push(logistic_instance(train, mu, format!("{name}/fold{k}")));
            }
        } else {
            let mu = d.mu.unwrap_or(1.0 / data.len() as f64);
            out.push(logistic_instance(data, mu, name));
        }
    }
    Ok(out)
}

fn logistic_instance(data: sdg_core::problems::Dataset, mu: f64, id: String) -> ProblemInstance {
    let n = data.n_features;
    let obj: SharedObjective = Arc::new(logistic_objective(data, mu).with_name(id.clone()));
    ProblemInstance::new(obj, Vector::zeros(n), id)
}

/// One solver run.
#[derive(Debug, Clone)]
pub struct SuiteRecord {
    pub instance_id: String,
    pub algorithm: String,
    pub record: RunRecord,
    pub wall_time_ms: f64,
}

pub fn run_one(inst: &ProblemInstance, alg: &Algorithm, seed: u64) -> SuiteRecord {
    let mut opts = alg.options;
    opts.seed = instance_seed(seed, &inst.instance_id);
    let t0 = Instant::now();
    let record = if alg.gated { sdg_run(inst, &opts) } else { plain_run(inst, opts.engine, &opts) };
    let wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    SuiteRecord { instance_id: inst.instance_id.clone(), algorithm: alg.name.clone(), record, wall_time_ms }
}

/// Solves every instance with every algorithm. Output is ordered by
/// instance, then algorithm, regardless of the thread count.
pub fn run_instances(instances: &[ProblemInstance], algs: &[Algorithm], seed: u64, threads: usize) -> Result<Vec<SuiteRecord>, BenchError> {
    let tasks: Vec<(&ProblemInstance, &Algorithm)> =
        instances.iter().flat_map(|i| algs.iter().map(move |a| (i, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(|(i, a)| run_one(i, a, seed)).collect()))
}

pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<SuiteRecord>, BenchError> {
    let algs = cfg.algorithms()?;
    let instances = build_instances(cfg)?;
    run_instances(&instances, &algs, cfg.seed, cfg.threads)
}

/// Evaluates the config's `assert` section.
pub fn check_assertions(cfg: &ExperimentConfig, rows: &[RecordRow]) -> Vec<Check> {
    let count = |alg: &str| {
        let total = rows.iter().filter(|r| r.algorithm == alg).count();
        let conv = rows.iter().filter(|r| r.algorithm == alg && r.converged()).count();
        (conv, total)
    };
    let mut out = Vec::new();
    for (alg, &min) in &cfg.assertions.min_converged_fraction {
        let (conv, total) = count(alg);
        let frac = if total == 0 { 0.0 } else { conv as f64 / total as f64 };
        out.push(Check {
            name: "min_converged_fraction",
            passed: total > 0 && frac >= min,
            detail: format!("{alg}: {conv}/{total} converged, need {min}"),
        });
    }
    for [a, b] in &cfg.assertions.fewer_failures {
        let (ca, ta) = count(a);
        let (cb, tb) = count(b);
        out.push(Check {
            name: "fewer_failures",
            passed: ta - ca < tb - cb,
            detail: format!("{a}: {} failures, {b}: {} failures", ta - ca, tb - cb),
        });
    }
    out
}
