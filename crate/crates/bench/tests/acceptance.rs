//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `EXPECTED_FAILURES` are known to be unattainable; they
//! still run at their stated thresholds and print `FAIL (expected: ...)`.
//! The process exits nonzero on any other failure, or if an expected
//! failure unexpectedly passes.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdg_bench::checks::check_derivatives;
use sdg_bench::profile::{performance_profile, RecordRow};
use sdg_bench::report::{emit_reports, strip_wall_time};
use sdg_bench::suite::run_suite;
use sdg_bench::table1::{check_invariance, check_shi_degradation, run_table1};
use sdg_bench::{ExperimentConfig, Statistic};
use sdg_core::directions::{mbfgs_ybar, BfgsState, EngineKind, CBFGS_CHI, CBFGS_UPSILON};
use sdg_core::numerics::{cholesky, cos_angle, dot, norm2, SymMatrix};
use sdg_core::problems::{extended_rosenbrock, ProblemInstance};
use sdg_core::sdg::{beta_eps, beta_hat, combine_direction, sdg_run, BetaInputs, SolverOptions, StepKind};

const EXPECTED_FAILURES: [(u32, &str); 2] = [
    (
        5,
        "the MBFGS bound fails whenever y's < 0 and ||g|| < 1: then ybar's - ||g|| ||s||^2 = y's (1 - ||g||) < 0",
    ),
    (
        8,
        "the Rosenbrock tail is not asymptotic at the default tolerance; the last gradient norms are not monotone",
    ),
];

struct Outcome {
    passed: bool,
    detail: String,
    /// For an expected failure: the failure is due only to the documented gap.
    gap_only: bool,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail, gap_only: true }
}

fn c1() -> Outcome {
    let c = check_invariance(&run_table1(1e-3));
    outcome(c.passed, c.detail)
}

fn c2() -> Outcome {
    let c = check_shi_degradation(&run_table1(1e-3));
    outcome(c.passed, c.detail)
}

fn bisection_oracle(g: &[f64], d: &[f64], xi: f64, eps: f64) -> f64 {
    let ng: Vec<f64> = g.iter().map(|v| -v).collect();
    let phi = |b: f64| {
        let dir: Vec<f64> = d.iter().zip(g).map(|(di, gi)| b * di - (1.0 - b) * xi * gi).collect();
        cos_angle(&dir, &ng).unwrap()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `d` with a prescribed cosine to `-g`.
fn direction_with_cos(r: &mut ChaCha8Rng, g: &[f64], c: f64, scale: f64) -> Vec<f64> {
    let n = g.len();
    let gn = norm2(g);
    let mut u: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let proj = dot(&u, g) / (gn * gn);
    for (ui, gi) in u.iter_mut().zip(g) {
        *ui -= proj * gi;
    }
    let un = norm2(&u);
    let s = (1.0 - c * c).max(0.0).sqrt();
    (0..n).map(|i| scale * (-c * g[i] / gn + s * u[i] / un)).collect()
}

fn c3() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_beta, mut worst_phi) = (0.0f64, 0.0f64);
    let mut cases = [0usize; 2];
    let mut bad = Vec::new();
    for i in 0..1000 {
        let n = r.random_range(2..10);
        let g: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0) * 10f64.powf(r.random_range(-2.0..2.0))).collect();
        let eps = r.random_range(0.01..0.95);
        let case_b = i % 2 == 1;
        let c = if case_b { r.random_range(-1.0..-eps) } else { r.random_range(-eps..eps) };
        let scale = 10f64.powf(r.random_range(-3.0..3.0));
        let d = direction_with_cos(&mut r, &g, c, scale);
        let xi = 10f64.powf(r.random_range(-3.0..3.0));
        let real_c = cos_angle(&d, &g.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        cases[usize::from(real_c < -eps)] += 1;
        let inp = BetaInputs { g: &g, d_nt: &d, xi, eps };
        let (be, bh) = match (beta_eps(&inp), beta_hat(&inp)) {
            (Ok(a), Ok(b)) => (a, b),
            other => {
                bad.push(format!("case {i}: {other:?}"));
                continue;
            }
        };
        let oracle = bisection_oracle(&g, &d, xi, eps);
        worst_beta = worst_beta.max((be - oracle).abs());
        worst_phi = worst_phi.max((inp.phi(be) - eps).abs());
        if bh > be {
            bad.push(format!("case {i}: beta_hat {bh} > beta_eps {be}"));
        }
        let dir = combine_direction(&g, &d, xi, bh);
        let cos = cos_angle(&dir, &g.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        if cos < eps - 1e-12 {
            bad.push(format!("case {i}: cos {cos} < eps {eps}"));
        }
    }
    let passed = bad.is_empty() && worst_beta <= 1e-8 && worst_phi <= 1e-8 && cases[0] > 0 && cases[1] > 0;
    let mut detail = format!("cases a/b {}/{}, max |beta - oracle| {worst_beta:.1e}, max |phi - eps| {worst_phi:.1e}", cases[0], cases[1]);
    if let Some(b) = bad.first() {
        detail.push_str(&format!(", {} violations, first: {b}", bad.len()));
    }
    outcome(passed, detail)
}

fn c4() -> Outcome {
    let (g, d) = ([1.0, 0.0], [0.0, 1.0]);
    let inp = BetaInputs { g: &g, d_nt: &d, xi: 1.0, eps: 0.5 };
    let want = 3f64.sqrt() / (1.0 + 3f64.sqrt());
    let be = beta_eps(&inp).unwrap();
    let bh = beta_hat(&inp).unwrap();
    outcome((be - want).abs() <= 1e-10 && bh == 0.5, format!("beta_eps {be:.16}, beta_hat {bh}"))
}

fn random_spd(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut a = SymMatrix::scaled_identity(n, 10f64.powf(r.random_range(-2.0..1.0)));
    for _ in 0..n {
        let u: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        a.add_outer(10f64.powf(r.random_range(-2.0..2.0)), &u);
    }
    a
}

fn c5() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let trials = 10_000;
    let (mut bfgs_ok, mut bfgs_n, mut cbfgs_ok, mut cbfgs_n) = (0, 0, 0, 0);
    let mut mbfgs_ok = 0;
    for i in 0..trials {
        let n = r.random_range(2..9);
        let s: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0) * 10f64.powf(r.random_range(-2.0..1.0))).collect();
        let b = random_spd(&mut r, n);
        let mut st = BfgsState { b, initialized: true, skipped: 0 };
        let applied = if i % 2 == 0 {
            st.update(&s, &y)
        } else {
            st.cautious_update(&s, &y, norm2(&g), CBFGS_CHI, CBFGS_UPSILON)
        };
        if applied {
            let ok = cholesky(&st.b).is_ok();
            if i % 2 == 0 {
                bfgs_n += 1;
                bfgs_ok += usize::from(ok);
            } else {
                cbfgs_n += 1;
                cbfgs_ok += usize::from(ok);
            }
        }
        let ybar = mbfgs_ybar(&g, &y, &s);
        if dot(&ybar, &s) > norm2(&g) * dot(&s, &s) {
            mbfgs_ok += 1;
        }
    }
    let spd = bfgs_ok == bfgs_n && cbfgs_ok == cbfgs_n && bfgs_n > 1000 && cbfgs_n > 1000;
    Outcome {
        passed: spd && mbfgs_ok == trials,
        detail: format!(
            "BFGS SPD {bfgs_ok}/{bfgs_n}, CBFGS SPD {cbfgs_ok}/{cbfgs_n}, MBFGS bound {mbfgs_ok}/{trials}"
        ),
        gap_only: spd,
    }
}

fn c6() -> Outcome {
    let res = check_derivatives(None, 42).unwrap();
    let failed: Vec<&str> = res.iter().filter(|r| !r.passed).map(|r| r.problem.as_str()).collect();
    let worst = res.iter().map(|r| r.max_error).fold(0.0, f64::max);
    outcome(failed.is_empty(), format!("{} objectives, max error {worst:.1e}, failed {failed:?}", res.len()))
}

fn tally(rows: &[RecordRow], alg: &str, pred: impl Fn(&RecordRow) -> bool) -> (usize, usize) {
    let sel: Vec<&RecordRow> = rows.iter().filter(|r| r.algorithm == alg && pred(r)).collect();
    (sel.iter().filter(|r| r.converged()).count(), sel.len())
}

fn c7(rows: &[RecordRow]) -> Outcome {
    let corpus = |r: &RecordRow| !r.instance_id.starts_with("synth");
    let (sc, st) = tally(rows, "SDG[Newton,0.5]", corpus);
    let (nc, nt) = tally(rows, "Newton", corpus);
    let frac = sc as f64 / st as f64;
    outcome(
        st == 150 && frac >= 0.95 && nt - nc > st - sc,
        format!("SDG[Newton,0.5] converged {sc}/{st} ({:.1}%), Newton failures {} vs SDG failures {}", 100.0 * frac, nt - nc, st - sc),
    )
}

fn c8() -> Outcome {
    let inst = ProblemInstance::at_default_start(extended_rosenbrock(2));
    let opts = SolverOptions { engine: EngineKind::Newton, eps0: 0.5, ..SolverOptions::default() };
    let rec = sdg_run(&inst, &opts);
    let mut gn: Vec<f64> = rec.trace.iter().map(|t| t.gnorm).collect();
    gn.push(rec.final_gnorm);
    let k = gn.len();
    if k < 4 || !rec.converged() {
        return Outcome { passed: false, detail: format!("{:?} after {} iterations", rec.status, rec.iterations), gap_only: false };
    }
    // least-squares slope of ln g_{j+1} against ln g_j over the last three pairs
    let pairs: Vec<(f64, f64)> = (k - 4..k - 1).map(|j| (gn[j].ln(), gn[j + 1].ln())).collect();
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let rate = sxy / sxx;
    let tail_nt = rec.trace[rec.trace.len() - 3..].iter().all(|t| t.kind == StepKind::Nt && t.beta == 1.0);
    let tail: Vec<String> = gn[k - 4..].iter().map(|v| format!("{v:.2e}")).collect();
    outcome(
        rate >= 1.7 && tail_nt,
        format!("{} iterations, fitted exponent {rate:.2}, last NT {tail_nt}, gradient norms {}", rec.iterations, tail.join(" ")),
    )
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

fn c9(rows: &[RecordRow]) -> Outcome {
    let synth: Vec<&RecordRow> = rows.iter().filter(|r| r.instance_id.starts_with("synth")).collect();
    let its = |alg: &str| synth.iter().filter(|r| r.algorithm == alg).map(|r| r.iterations).collect::<Vec<_>>();
    let (sdg, bfgs, cbfgs) = (its("SDG[BFGS,0.5]"), its("BFGS"), its("CBFGS"));
    let all_conv = synth.iter().all(|r| r.converged());
    let equal = bfgs.iter().zip(&cbfgs).filter(|(a, b)| a == b).count();
    let (ms, mb) = (median(sdg.clone()), median(bfgs.clone()));
    outcome(
        bfgs.len() == 10 && all_conv && ms <= mb && equal * 10 >= 8 * bfgs.len(),
        format!("median its SDG[BFGS,0.5] {ms} vs BFGS {mb}; CBFGS equal to BFGS on {equal}/{}; SDG {sdg:?} BFGS {bfgs:?}", bfgs.len()),
    )
}

fn c10() -> Outcome {
    let row = |p: &str, a: &str, its: Option<usize>| RecordRow {
        instance_id: p.into(),
        algorithm: a.into(),
        status: if its.is_some() { "Converged" } else { "MaxIter" }.into(),
        iterations: its.unwrap_or(2000),
        f_evals: 1,
        final_f: 0.0,
        final_gnorm: 0.0,
        wall_time_ms: 0.0,
    };
    let rows = [
        row("p1", "A", Some(1)),
        row("p1", "B", Some(2)),
        row("p2", "A", Some(2)),
        row("p2", "B", Some(2)),
        row("p3", "A", Some(4)),
        row("p3", "B", None),
    ];
    let c = performance_profile(&rows, Statistic::Iterations);
    let (a1, b1, b2, binf) = (c[0].at(1.0), c[1].at(1.0), c[1].at(2.0), c[1].solved_fraction);
    outcome(
        a1 == 1.0 && b1 == 1.0 / 3.0 && b2 == 2.0 / 3.0 && binf == 2.0 / 3.0,
        format!("pi_A(1) = {a1}, pi_B(1) = {b1}, pi_B(2) = {b2}, lim pi_B = {binf}"),
    )
}

fn c11(cfg: &ExperimentConfig, first: &[RecordRow]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let second: Vec<RecordRow> = run_suite(cfg).unwrap().iter().map(RecordRow::from).collect();
    emit_reports(first, &[], &a).unwrap();
    emit_reports(&second, &[], &b).unwrap();
    let ta = std::fs::read_to_string(a.join("records.csv")).unwrap();
    let tb = std::fs::read_to_string(b.join("records.csv")).unwrap();
    let (sa, sb) = (strip_wall_time(&ta), strip_wall_time(&tb));
    outcome(sa == sb, format!("{} rows, {} bytes without wall time, identical {}", first.len(), sa.len(), sa == sb))
}

fn config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.json")
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        results.push((id, name, o, t.elapsed().as_secs_f64()));
    };

    timed(1, "scale invariance", &mut c1);
    timed(2, "unit-xi degradation", &mut c2);
    timed(3, "beta oracle equivalence", &mut c3);
    timed(4, "worked beta instance", &mut c4);
    timed(5, "SPD preservation", &mut c5);
    timed(6, "derivative correctness", &mut c6);

    let cfg = ExperimentConfig::load(&config_path()).expect("acceptance config");
    let mut rows = Vec::new();
    timed(7, "robustness contrast", &mut || {
        rows = run_suite(&cfg).expect("suite").iter().map(RecordRow::from).collect();
        c7(&rows)
    });
    timed(8, "local quadratic rate", &mut c8);
    timed(9, "convex speedup ordering", &mut || c9(&rows));
    timed(10, "profile correctness", &mut c10);
    timed(11, "determinism", &mut || c11(&cfg, &rows));

    let mut unexpected = 0;
    for (id, name, o, secs) in &results {
        let expected = EXPECTED_FAILURES.iter().find(|(e, _)| e == id).map(|(_, why)| *why);
        let verdict = match (o.passed, expected) {
            (true, None) => "PASS".to_string(),
            (true, Some(_)) => {
                unexpected += 1;
                "XPASS (listed as an expected failure)".to_string()
            }
            (false, Some(why)) if o.gap_only => format!("FAIL (expected: {why})"),
            (false, _) => {
                unexpected += 1;
                "FAIL".to_string()
            }
        };
        println!("criterion {id:>2} {name:<26} {verdict} [{secs:.2}s] {}", o.detail);
    }
    println!("total {:.1}s, unexpected outcomes: {unexpected}", t0.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
