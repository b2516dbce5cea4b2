//! Acceptance suite. Every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line; the test fails if any criterion fails.
//!
//! The criteria run one after another inside a single test so that the
//! runtime limits are measured without competing tests.

use std::fmt::Write as _;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use predictive_recursion::baselines::grenander;
use predictive_recursion::bench::{
    derive_seed, run_experiment, sample, Estimator, ExperimentSpec, Metric,
};
use predictive_recursion::engine::{fit_observed, t_functional};
use predictive_recursion::metrics::{kl_divergence, DensityPair};
use predictive_recursion::monotone::{
    bias_bound, build_support, initial_guess, restrict_target, Exponential, HalfNormal,
    KlMinimizer, MonotoneTruth,
};
use predictive_recursion::quad;
use predictive_recursion::{fit, uniform_kernel, Kernel, MixingMeasure, PrConfig, SupportInterval};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn exponential_data(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&Exponential, n, &mut rng)
}

/// Random probability measure on `support`: Dirichlet(1, 1, 1) split between
/// the two atoms and the interior, with a bumpy interior shape.
fn random_measure(rng: &mut ChaCha8Rng, support: SupportInterval, grid: usize) -> MixingMeasure {
    let e: Vec<f64> = (0..3).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| {
            let c = rng.random_range(support.lower()..support.upper());
            let s = rng.random_range(0.05..1.0) * support.width();
            (c, s, rng.random_range(0.1..2.0))
        })
        .collect();
    MixingMeasure::from_density_fn(support, grid, e[0] / total, e[2] / total, |u| {
        0.01 + bumps
            .iter()
            .map(|(c, s, h)| h * (-0.5 * ((u - c) / s).powi(2)).exp())
            .sum::<f64>()
    })
    .unwrap()
}

fn mass_conservation() -> Verdict {
    let data = exponential_data(1000, 11);
    let support = build_support(&data, 1e-5).unwrap();
    let config = PrConfig::default();
    let initial = initial_guess(support, &config).unwrap();
    let worst = std::sync::Mutex::new(0.0f64);
    let start = Instant::now();
    let fitted = fit_observed(&data, &uniform_kernel(), &initial, &config, |_, _, m| {
        let err = (m.total_mass() - 1.0).abs();
        let mut w = worst.lock().unwrap();
        *w = w.max(err);
        Ok(None)
    })
    .unwrap();
    let elapsed = start.elapsed();
    let worst = *worst.lock().unwrap();
    let states: usize = fitted.diagnostics.iter().map(Vec::len).sum();
    verdict(
        worst < 1e-10 && states == 25_000 && elapsed < Duration::from_secs(1),
        format!("max |mass - 1| = {worst:.1e} over {states} states in {elapsed:.2?} (limits 1e-10, 1 s)"),
    )
}

/// Least concave majorant by checking every chord, in integer arithmetic.
fn brute_force_majorant(ticks: &[i64], scale: f64) -> (Vec<f64>, Vec<f64>) {
    let mut sorted = ticks.to_vec();
    sorted.sort();
    let n = sorted.len();
    let mut xs = vec![0i64];
    let mut cs = vec![0i64];
    for (i, &t) in sorted.iter().enumerate() {
        if t == *xs.last().unwrap() {
            *cs.last_mut().unwrap() = i as i64 + 1;
        } else {
            xs.push(t);
            cs.push(i as i64 + 1);
        }
    }
    let vertices: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            !(0..i).any(|j| {
                (i + 1..xs.len()).any(|k| {
                    cs[j] * (xs[k] - xs[j]) + (cs[k] - cs[j]) * (xs[i] - xs[j])
                        >= cs[i] * (xs[k] - xs[j])
                })
            })
        })
        .collect();
    let bps = vertices.iter().map(|&i| xs[i] as f64 / scale).collect();
    let heights = vertices
        .windows(2)
        .map(|w| {
            let dx = (xs[w[1]] - xs[w[0]]) as f64 / scale;
            (cs[w[1]] - cs[w[0]]) as f64 / (n as f64 * dx)
        })
        .collect();
    (bps, heights)
}

fn grenander_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=10);
        let ticks: Vec<i64> = (0..n).map(|_| rng.random_range(1..=64)).collect();
        let data: Vec<f64> = ticks.iter().map(|&t| t as f64 / 16.0).collect();
        let d = grenander(&data).unwrap();
        let (bps, heights) = brute_force_majorant(&ticks, 16.0);
        if d.breakpoints() != bps.as_slice() || d.heights() != heights.as_slice() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < Duration::from_secs(1),
        format!("{mismatches} mismatches in 100 samples, {elapsed:.2?} (limit 1 s)"),
    )
}

fn williamson_round_trip() -> Verdict {
    let start = Instant::now();
    let truths: [&dyn MonotoneTruth; 2] = [&Exponential, &HalfNormal];
    let mut worst: f64 = 0.0;
    for truth in truths {
        for i in 1..=100 {
            let x = 0.05 * i as f64;
            let m = quad::simpson(|u| truth.mixing_density(u) / u, x, 40.0, 10_000);
            worst = worst.max((m - truth.density(x)).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-6 && elapsed < Duration::from_secs(5),
        format!("max error {worst:.1e} over 2 x 100 points in {elapsed:.2?} (limits 1e-6, 5 s)"),
    )
}

fn minimizer_optimality() -> Verdict {
    let start = Instant::now();
    let truth = Exponential;
    let support = SupportInterval::new(0.05, 5.0).unwrap();
    let minimizer = KlMinimizer::new(&truth, support).unwrap();
    let target = restrict_target(&truth, 5.0).unwrap();
    let kernel = uniform_kernel();
    let kl_to = |g: &dyn Fn(&[f64]) -> Vec<f64>| {
        let pair = DensityPair::from_batch(
            |xs: &[f64]| Ok(xs.iter().map(|&x| target.density(x)).collect()),
            |xs: &[f64]| Ok(g(xs)),
            0.0,
            5.0,
        )
        .unwrap()
        .with_resolution(20_000)
        .unwrap()
        .with_breakpoints([0.05]);
        kl_divergence(&pair).unwrap()
    };
    let best = kl_to(&|xs| xs.iter().map(|&x| minimizer.density(x)).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut closest = f64::INFINITY;
    for _ in 0..100 {
        let p = random_measure(&mut rng, support, 400);
        let kl = kl_to(&|xs| kernel.mixture_density_many(&p, xs).unwrap());
        closest = closest.min(kl - best);
        if best > kl + 1e-6 {
            violations += 1;
        }
    }
    let mut agreement: f64 = 0.0;
    for x in quad::linspace(0.05, 5.0, 1000).into_iter().skip(1) {
        agreement = agreement.max((minimizer.density(x) - target.density(x)).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        violations == 0 && agreement < 1e-8 && elapsed < Duration::from_secs(30),
        format!(
            "KL(m*L, m†) = {best:.4e}, {violations} violations, smallest gap {closest:.3e}; \
             max |m† - m*L| on (l, L] = {agreement:.1e}; {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn bias_bound_holds() -> Verdict {
    let start = Instant::now();
    let truth = Exponential;
    let mut report = String::new();
    let mut pass = true;
    for ell in [0.01, 0.05] {
        for upper in [2.0, 5.0, 10.0] {
            let support = SupportInterval::new(ell, upper).unwrap();
            let k = KlMinimizer::new(&truth, support).unwrap();
            let pair = DensityPair::new(|x| k.density(x), |x| truth.density(x), 0.0, upper)
                .unwrap()
                .with_resolution(20_000)
                .unwrap()
                .with_breakpoints([ell]);
            let l1 =
                predictive_recursion::metrics::l1_distance(&pair).unwrap() + truth.survival(upper);
            let bound = bias_bound(&truth, support).unwrap();
            pass &= l1 <= bound;
            let _ = write!(report, "({ell}, {upper}): {l1:.4e} <= {bound:.4e}; ");
        }
    }
    let tiny = bias_bound(&truth, SupportInterval::new(1e-5, 10.0).unwrap()).unwrap();
    pass &= tiny < 1e-4 && (tiny - 9.08e-5).abs() < 1e-6;
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    let _ = write!(
        report,
        "bound(1e-5, 10) = {tiny:.4e}; {elapsed:.2?} (limit 10 s)"
    );
    verdict(pass, report)
}

fn t_functional_checks() -> Verdict {
    let start = Instant::now();
    let truth = Exponential;
    let support = SupportInterval::new(0.05, 5.0).unwrap();
    let target = restrict_target(&truth, 5.0).unwrap();
    let xs = quad::linspace(0.0, 5.0, 20_001);
    let kernel = uniform_kernel();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lowest = f64::INFINITY;
    for _ in 0..1000 {
        let p = random_measure(&mut rng, support, 200);
        let t = t_functional(&p, |x| target.density(x), &kernel, &xs).unwrap();
        lowest = lowest.min(t);
    }
    let dagger = KlMinimizer::new(&truth, support)
        .unwrap()
        .to_measure(1000)
        .unwrap();
    let at_minimizer = t_functional(&dagger, |x| target.density(x), &kernel, &xs).unwrap();
    let elapsed = start.elapsed();
    verdict(
        lowest >= -1e-6 && at_minimizer < 1e-4 && elapsed < Duration::from_secs(60),
        format!(
            "min T over 1000 random measures = {lowest:.3e}; T(P†) = {at_minimizer:.2e}; \
             {elapsed:.2?} (limits -1e-6, 1e-4, 60 s)"
        ),
    )
}

fn kl_trace_trend() -> Verdict {
    let start = Instant::now();
    let checkpoints = [50usize, 100, 200];
    let kernel = uniform_kernel();
    let mut sums = [0.0; 3];
    let runs = 200;
    for r in 0..runs {
        let data = exponential_data(200, derive_seed(77, &[r]));
        let support = build_support(&data, 1e-5).unwrap();
        let target = restrict_target(&Exponential, support.upper()).unwrap();
        let config = PrConfig::default()
            .with_permutations(1)
            .unwrap()
            .with_seed(r);
        let initial = initial_guess(support, &config).unwrap();
        let fitted = fit_observed(&data, &kernel, &initial, &config, |_, i, m| {
            if !checkpoints.contains(&i) {
                return Ok(None);
            }
            let pair = DensityPair::from_batch(
                |xs: &[f64]| Ok(xs.iter().map(|&x| target.density(x)).collect()),
                |xs: &[f64]| kernel.mixture_density_many(m, xs),
                0.0,
                support.upper(),
            )?
            .with_breakpoints([support.lower()]);
            kl_divergence(&pair).map(Some)
        })
        .unwrap();
        for entry in &fitted.diagnostics[0] {
            if let (Some(k), Some(c)) = (
                entry.kl,
                checkpoints.iter().position(|&c| c == entry.iteration),
            ) {
                sums[c] += k;
            }
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / runs as f64).collect();
    let elapsed = start.elapsed();
    let trend = means.windows(2).all(|w| w[1] <= w[0] + 1e-3);
    verdict(
        trend && elapsed < Duration::from_secs(120),
        format!(
            "mean KL at n = 50, 100, 200: {:.5}, {:.5}, {:.5}; {elapsed:.2?} (slack 1e-3, limit 120 s)",
            means[0], means[1], means[2]
        ),
    )
}

struct StudyOutcome {
    qualitative: Verdict,
    floor: Verdict,
}

fn simulation_study() -> StudyOutcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let sizes = [50usize, 100, 200];
    let mut detail = String::new();
    let mut pass = true;
    let mut checks = 0;
    let mut violations = 0;
    let mut expected_checks = 0;
    for name in ["exponential", "halfnormal"] {
        let mut spec = ExperimentSpec::new(name, sizes.to_vec(), dir.path().join(name));
        spec.replications = 50;
        spec.seed = 2013;
        spec.floor_probes = 20;
        let report = run_experiment(&spec).unwrap();
        pass &= report.failures() == 0;
        let pr: Vec<f64> = sizes
            .iter()
            .map(|&n| report.median(Estimator::Pr, n, Metric::L1).unwrap())
            .collect();
        let gr: Vec<f64> = sizes
            .iter()
            .map(|&n| report.median(Estimator::Grenander, n, Metric::L1).unwrap())
            .collect();
        let ratio = report
            .median(Estimator::Pr, 200, Metric::OriginRatio)
            .unwrap();
        let decreasing = pr.windows(2).all(|w| w[1] < w[0]);
        let beats = pr.iter().zip(&gr).all(|(p, g)| p <= g);
        let origin = (0.5..=1.5).contains(&ratio);
        pass &= decreasing && beats && origin;
        let _ = write!(
            detail,
            "{name}: PR L1 {:.4}/{:.4}/{:.4} (decreasing {decreasing}), Grenander {:.4}/{:.4}/{:.4} (PR better {beats}), \
             PR origin ratio {ratio:.3}; ",
            pr[0], pr[1], pr[2], gr[0], gr[1], gr[2]
        );
        let floor = report.floor.unwrap();
        checks += floor.checks;
        violations += floor.violations;
        expected_checks += (sizes.iter().sum::<usize>() * 50 * 25 * 20) as u64;
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    let _ = write!(detail, "{elapsed:.2?} (limit 300 s)");
    StudyOutcome {
        qualitative: verdict(pass, detail),
        floor: verdict(
            violations == 0 && checks == expected_checks,
            format!("{violations} violations in {checks} probe checks"),
        ),
    }
}

fn single_pass_speed() -> Verdict {
    let data = exponential_data(10_000, 10);
    let support = build_support(&data, 1e-5).unwrap();
    let config = PrConfig::default().with_permutations(1).unwrap();
    let initial = initial_guess(support, &config).unwrap();
    let start = Instant::now();
    let fitted = fit(&data, &uniform_kernel(), &initial, &config).unwrap();
    let elapsed = start.elapsed();
    verdict(
        fitted.n_used == 10_000 && elapsed < Duration::from_secs(2),
        format!("n = 10000, G = 1000, one ordering: {elapsed:.2?} (limit 2 s)"),
    )
}

fn simulate_is_deterministic() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let out = dir.path().join("out");
    let spec = serde_json::json!({
        "truth_name": "halfnormal",
        "sample_sizes": [30, 60],
        "replications": 4,
        "seed": 99,
        "pr_config": {"permutations": 5, "grid_size": 300},
        "output_dir": out,
    });
    std::fs::write(&spec_path, spec.to_string()).unwrap();
    let run = || {
        let status = Command::new(env!("CARGO_BIN_EXE_prmono"))
            .arg("simulate")
            .arg(&spec_path)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out.join("results.csv")).unwrap()
    };
    let first = run();
    let second = run();
    let rows = first.iter().filter(|&&b| b == b'\n').count() - 1;
    verdict(
        first == second && rows == 16,
        format!("two runs, {rows} rows, byte-identical: {}", first == second),
    )
}

#[test]
fn acceptance() {
    let mut verdicts: Vec<(u32, &str, Verdict)> = vec![
        (1, "mass conservation", mass_conservation()),
        (2, "Grenander oracle equivalence", grenander_oracle()),
        (3, "Williamson round trip", williamson_round_trip()),
        (4, "KL minimizer optimality", minimizer_optimality()),
        (5, "L1 bias bound", bias_bound_holds()),
        (6, "T functional", t_functional_checks()),
        (7, "KL supermartingale trend", kl_trace_trend()),
    ];
    let study = simulation_study();
    verdicts.push((8, "simulation study trends", study.qualitative));
    verdicts.push((9, "mixture floor along fits", study.floor));
    verdicts.push((10, "single-pass speed", single_pass_speed()));
    verdicts.push((11, "simulate determinism", simulate_is_deterministic()));

    let mut failed = Vec::new();
    for (id, name, v) in &verdicts {
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{name}]: {status} - {}", v.detail);
        if !v.pass {
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
