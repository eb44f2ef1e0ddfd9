//! JSON experiment configuration.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdg_core::directions::{EngineKind, CBFGS_CHI, CBFGS_UPSILON, MN_TAU};
use sdg_core::problems::NUM_STARTS;
use sdg_core::sdg::{BetaRule, EpsilonSchedule, SolverOptions, XiMode};

use crate::synth::SynthParams;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "its", alias = "iterations")]
    Iterations,
    #[serde(rename = "evals", alias = "f_evals")]
    FEvals,
    #[serde(rename = "time", alias = "wall_time")]
    WallTime,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Iterations, Statistic::FEvals, Statistic::WallTime];

    /// Short name used in file names.
    pub fn short(&self) -> &'static str {
        match self {
            Statistic::Iterations => "its",
            Statistic::FEvals => "evals",
            Statistic::WallTime => "time",
        }
    }

    pub fn parse(s: &str) -> Option<Statistic> {
        match s {
            "its" | "iterations" => Some(Statistic::Iterations),
            "evals" | "f_evals" => Some(Statistic::FEvals),
            "time" | "wall_time" | "wall_time_ms" => Some(Statistic::WallTime),
            _ => None,
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short())
    }
}

impl std::str::FromStr for Statistic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Statistic::parse(s).ok_or_else(|| format!("unknown statistic {s:?} (expected its, evals or time)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    Newton,
    ModifiedNewton,
    Bfgs,
    Cbfgs,
    Mbfgs,
    SdBb2,
}

impl EngineName {
    fn label(&self) -> &'static str {
        match self {
            EngineName::Newton => "Newton",
            EngineName::ModifiedNewton => "MNewton",
            EngineName::Bfgs => "BFGS",
            EngineName::Cbfgs => "CBFGS",
            EngineName::Mbfgs => "MBFGS",
            EngineName::SdBb2 => "SD-BB2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRuleName {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiModeName {
    Bb2,
    UnitShi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    Shrinking,
    ShrinkingCombinedOnly,
    Fixed,
}

/// Overrides for [`SolverOptions`]; absent fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    pub eps0: Option<f64>,
    pub zeta: Option<f64>,
    pub eps_bar: Option<f64>,
    pub sigma1: Option<f64>,
    pub tau_g: Option<f64>,
    pub gtol_abs: Option<f64>,
    pub k_max: Option<usize>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    pub beta_rule: Option<BetaRuleName>,
    pub xi_mode: Option<XiModeName>,
    pub schedule: Option<ScheduleName>,
    pub pure_sd_on_ascent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    /// Defaults to `SDG[<engine>,<eps0>]` when gated, `<engine>` otherwise.
    pub name: Option<String>,
    pub engine: EngineName,
    #[serde(default = "yes")]
    pub gated: bool,
    pub tau: Option<f64>,
    pub chi: Option<f64>,
    pub upsilon: Option<f64>,
    #[serde(default)]
    pub options: OptionsSpec,
}

fn yes() -> bool {
    true
}

/// A fully resolved algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm {
    pub name: String,
    pub gated: bool,
    pub options: SolverOptions,
}

impl AlgorithmSpec {
    pub fn resolve(&self) -> Result<Algorithm, BenchError> {
        let d = SolverOptions::default();
        let o = &self.options;
        let engine = match self.engine {
            EngineName::Newton => EngineKind::Newton,
            EngineName::ModifiedNewton => EngineKind::ModifiedNewton { tau: self.tau.unwrap_or(MN_TAU) },
            EngineName::Bfgs => EngineKind::Bfgs,
            EngineName::Cbfgs => EngineKind::Cbfgs {
                chi: self.chi.unwrap_or(CBFGS_CHI),
                upsilon: self.upsilon.unwrap_or(CBFGS_UPSILON),
            },
            EngineName::Mbfgs => EngineKind::Mbfgs,
            EngineName::SdBb2 => EngineKind::SdBb2,
        };
        let stray = match self.engine {
            EngineName::ModifiedNewton => self.chi.is_some() || self.upsilon.is_some(),
            EngineName::Cbfgs => self.tau.is_some(),
            _ => self.tau.is_some() || self.chi.is_some() || self.upsilon.is_some(),
        };
        if stray {
            return Err(BenchError::Config(format!("engine {:?} does not take the given tau/chi/upsilon", self.engine)));
        }
        let options = SolverOptions {
            eps0: o.eps0.unwrap_or(d.eps0),
            zeta: o.zeta.unwrap_or(d.zeta),
            eps_bar: o.eps_bar.unwrap_or(d.eps_bar),
            sigma1: o.sigma1.unwrap_or(d.sigma1),
            tau_g: o.tau_g.unwrap_or(d.tau_g),
            gtol_abs: o.gtol_abs.or(d.gtol_abs),
            k_max: o.k_max.unwrap_or(d.k_max),
            nu1: o.nu1.unwrap_or(d.nu1),
            nu2: o.nu2.unwrap_or(d.nu2),
            beta_rule: match o.beta_rule {
                Some(BetaRuleName::Exact) => BetaRule::Exact,
                Some(BetaRuleName::LowerBound) => BetaRule::LowerBound,
                None => d.beta_rule,
            },
            xi_mode: match o.xi_mode {
                Some(XiModeName::Bb2) => XiMode::Bb2,
                Some(XiModeName::UnitShi) => XiMode::UnitShi,
                None => d.xi_mode,
            },
            schedule: match o.schedule {
                Some(ScheduleName::Shrinking) => EpsilonSchedule::Shrinking,
                Some(ScheduleName::ShrinkingCombinedOnly) => EpsilonSchedule::ShrinkingCombinedOnly,
                Some(ScheduleName::Fixed) => EpsilonSchedule::Fixed,
                None => d.schedule,
            },
            pure_sd_on_ascent: o.pure_sd_on_ascent.unwrap_or(d.pure_sd_on_ascent),
            engine,
            seed: 0,
        };
        let name = match &self.name {
            Some(n) if n.trim().is_empty() => return Err(BenchError::Config("empty algorithm name".into())),
            Some(n) => n.clone(),
            None if self.gated => format!("SDG[{},{}]", self.engine.label(), options.eps0),
            None => self.engine.label().to_string(),
        };
        options.validate().map_err(|e| BenchError::Config(format!("algorithm {name}: {e}")))?;
        Ok(Algorithm { name, gated: self.gated, options })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub instances: usize,
    pub rows: usize,
    pub features: usize,
    pub separation: Option<f64>,
    pub density: Option<f64>,
    /// Regularization; defaults to `1 / rows`.
    pub mu: Option<f64>,
}

impl SyntheticSpec {
    pub fn params(&self) -> SynthParams {
        let d = SynthParams::default();
        SynthParams {
            rows: self.rows,
            features: self.features,
            separation: self.separation.unwrap_or(d.separation),
            density: self.density.unwrap_or(d.density),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// LIBSVM file, relative paths resolved against the config file.
    pub path: PathBuf,
    pub name: Option<String>,
    /// Regularization; defaults to `1 / N` for the training rows.
    pub mu: Option<f64>,
    /// Ten training instances from the fold complements instead of one
    /// instance on the full data.
    #[serde(default = "yes")]
    pub cv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Corpus members by name; `"all"` selects the whole corpus.
    #[serde(default)]
    pub corpus: Vec<String>,
    /// Starting points per corpus problem, 1 to 10.
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Objective scale factors applied to every corpus problem.
    #[serde(default = "default_omegas")]
    pub omegas: Vec<f64>,
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub datasets: Vec<DatasetSpec>,
}

fn default_starts() -> usize {
    NUM_STARTS
}

fn default_omegas() -> Vec<f64> {
    vec![1.0]
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec { corpus: vec![], starts: default_starts(), omegas: default_omegas(), synthetic: None, datasets: vec![] }
    }
}

/// Thresholds checked by `run --assert`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    /// Minimum fraction of instances with status Converged, per algorithm.
    #[serde(default)]
    pub min_converged_fraction: BTreeMap<String, f64>,
    /// Pairs `[a, b]`: `a` must fail on strictly fewer instances than `b`.
    #[serde(default)]
    pub fewer_failures: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<Statistic>,
    /// Profile only instances on which all algorithms agree.
    #[serde(default)]
    pub same_solution: bool,
    pub problems: ProblemSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default, rename = "assert")]
    pub assertions: Assertions,
    /// Directory the config was read from.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_statistics() -> Vec<Statistic> {
    vec![Statistic::Iterations, Statistic::FEvals]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>, BenchError> {
        let algs = self.algorithms.iter().map(AlgorithmSpec::resolve).collect::<Result<Vec<_>, _>>()?;
        let mut seen = HashSet::new();
        for a in &algs {
            if !seen.insert(a.name.as_str()) {
                return Err(BenchError::Config(format!("duplicate algorithm name {}", a.name)));
            }
        }
        Ok(algs)
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let p = &self.problems;
        let synth = p.synthetic.as_ref().map_or(0, |s| s.instances);
        if p.corpus.is_empty() && synth == 0 && p.datasets.is_empty() {
            return Err(BenchError::Config("no problems selected".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms given".into()));
        }
        if !(1..=NUM_STARTS).contains(&p.starts) {
            return Err(BenchError::Config(format!("starts must lie in 1..={NUM_STARTS}")));
        }
        if p.omegas.is_empty() || p.omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(BenchError::Config("omegas must be positive and finite".into()));
        }
        if let Some(s) = &p.synthetic {
            let params = s.params();
            if params.rows < 2 || params.features == 0 {
                return Err(BenchError::Config("synthetic data needs rows >= 2 and features >= 1".into()));
            }
            if !(params.density > 0.0 && params.density <= 1.0) {
                return Err(BenchError::Config("synthetic density must lie in (0, 1]".into()));
            }
        }
        for mu in p.synthetic.iter().filter_map(|s| s.mu).chain(p.datasets.iter().filter_map(|d| d.mu)) {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(BenchError::Config("mu must be nonnegative".into()));
            }
        }
        let algs = self.algorithms()?;
        let names: HashSet<&str> = algs.iter().map(|a| a.name.as_str()).collect();
        let asserted = self.assertions.min_converged_fraction.keys().map(String::as_str);
        for n in asserted.chain(self.assertions.fewer_failures.iter().flatten().map(String::as_str)) {
            if !names.contains(n) {
                return Err(BenchError::Config(format!("assertion names unknown algorithm {n}")));
            }
        }
        crate::suite::corpus_selection(&p.corpus)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problems": {"corpus": ["beale", "wood"], "starts": 2},
        "algorithms": [{"engine": "newton"}, {"engine": "newton", "gated": false}]
    }"#;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.statistics, vec![Statistic::Iterations, Statistic::FEvals]);
        let algs = cfg.algorithms().unwrap();
        assert_eq!(algs[0].name, "SDG[Newton,0.5]");
        assert_eq!(algs[1].name, "Newton");
        assert_eq!(algs[0].options, SolverOptions::default());
    }

    #[test]
    fn options_and_engine_parameters() {
        let spec: AlgorithmSpec = serde_json::from_str(
            r#"{"engine": "cbfgs", "upsilon": 2.0,
                "options": {"eps0": 0.001, "schedule": "fixed", "beta_rule": "exact", "xi_mode": "unit_shi", "k_max": 50}}"#,
        )
        .unwrap();
        let a = spec.resolve().unwrap();
        assert_eq!(a.name, "SDG[CBFGS,0.001]");
        assert_eq!(a.options.engine, EngineKind::Cbfgs { chi: CBFGS_CHI, upsilon: 2.0 });
        assert_eq!(a.options.schedule, EpsilonSchedule::Fixed);
        assert_eq!(a.options.beta_rule, BetaRule::Exact);
        assert_eq!(a.options.xi_mode, XiMode::UnitShi);
        assert_eq!(a.options.k_max, 50);
    }

    #[test]
    fn statistic_aliases() {
        for (s, want) in [("\"its\"", Statistic::Iterations), ("\"f_evals\"", Statistic::FEvals), ("\"wall_time\"", Statistic::WallTime)] {
            assert_eq!(serde_json::from_str::<Statistic>(s).unwrap(), want);
        }
        assert_eq!("time".parse::<Statistic>().unwrap(), Statistic::WallTime);
        assert!("speed".parse::<Statistic>().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"problems": {"corpus": ["nope"]}, "algorithms": [{"engine": "newton"}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": []}"#,
            r#"{"problems": {}, "algorithms": [{"engine": "newton"}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "quasi"}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "newton", "chi": 1.0}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "newton", "options": {"eps0": 2.0}}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "newton"}, {"engine": "newton"}]}"#,
            r#"{"problems": {"corpus": ["beale"], "starts": 11}, "algorithms": [{"engine": "newton"}]}"#,
            r#"{"problems": {"corpus": ["beale"], "omegas": [0.0]}, "algorithms": [{"engine": "newton"}]}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "newton"}], "typo": 1}"#,
            r#"{"problems": {"corpus": ["beale"]}, "algorithms": [{"engine": "newton"}],
                "assert": {"min_converged_fraction": {"Missing": 0.5}}}"#,
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::from_json(text), Err(BenchError::Config(_))), "{text}");
        }
    }

    #[test]
    fn synthetic_spec_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"problems": {"synthetic": {"instances": 3, "rows": 40, "features": 5}},
                "algorithms": [{"engine": "bfgs", "gated": false}]}"#,
        )
        .unwrap();
        let s = cfg.problems.synthetic.unwrap();
        assert_eq!(s.instances, 3);
        assert_eq!(s.params(), SynthParams { rows: 40, features: 5, ..SynthParams::default() });
    }
}
