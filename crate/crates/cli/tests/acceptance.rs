//! Acceptance suite. Runs each criterion at its pinned tolerance, prints one
//! line per criterion and exits nonzero if any of them fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lvpatch::{
    almost_period_scan, attractivity_experiment, check_contraction, check_dispersal_bound,
    estimate_ultimate_bounds, example51, integrate, integrate_paired, validate_params, verify_decay,
    AttractOptions, Components, DecayOptions, Execution, IntegrationOptions, PairedState,
    QuasiPeriodicCoefficient, RegionEstimate, RegionOptions, ScanOptions, State, SystemParams, Term,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn empirical_c() -> f64 {
    let region = estimate_ultimate_bounds(&example51(), &RegionOptions::default(), &IntegrationOptions::default()).unwrap();
    check_contraction(&example51(), &region).unwrap().c
}

fn dispersal_margins() -> Outcome {
    let p = example51();
    let start = Instant::now();
    let report = check_dispersal_bound(&p);
    let elapsed = start.elapsed();
    let expected = [2.8, 2.8, 1.8, 2.0];
    let margins = report.margins();
    let exact = margins.iter().zip(expected).all(|(m, e)| (m - e).abs() <= 1e-12);
    outcome(
        exact && report.holds && elapsed < Duration::from_millis(1),
        format!("margins {margins:?}, expected {expected:?}, {} us", elapsed.as_micros()),
    )
}

fn contraction_constants() -> Outcome {
    let p = example51();
    let unit = RegionEstimate::from_bounds(Components::splat(1.0), Components::splat(2.0)).unwrap();
    let r = check_contraction(&p, &unit).unwrap();
    let expected = [1.35, 1.1, 1.8, 1.8];
    let constants_ok = r.margins().iter().zip(expected).all(|(a, b)| (a - b).abs() <= 1e-12)
        && (r.eta - 1.1).abs() <= 1e-12
        && (r.c - 1.1).abs() <= 1e-12;

    let start = Instant::now();
    let region = estimate_ultimate_bounds(&p, &RegionOptions::default(), &IntegrationOptions::rk4(1e-3));
    let elapsed = start.elapsed();
    let (holds, emp) = match region.and_then(|reg| check_contraction(&p, &reg)) {
        Ok(e) => (e.holds, format!("eta {:.6}, c {:.6}", e.eta, e.c)),
        Err(e) => (false, e.to_string()),
    };
    outcome(
        constants_ok && holds && elapsed < Duration::from_secs(120),
        format!(
            "unit region P {:?}, eta {}, c {}; empirical region holds = {holds} ({emp}), estimate took {}",
            r.margins(),
            r.eta,
            r.c,
            secs(elapsed)
        ),
    )
}

fn random_coefficient(rng: &mut ChaCha8Rng, max_constant: f64) -> QuasiPeriodicCoefficient {
    let constant = rng.random_range(0.0..max_constant);
    let n = rng.random_range(0..3);
    let budget = constant * rng.random_range(0.0..1.0);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let terms = weights
        .iter()
        .map(|w| {
            let amplitude = budget * w / total * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let frequency = rng.random_range(0.1..3.0);
            if rng.random_bool(0.5) {
                Term::sin(amplitude, frequency)
            } else {
                Term::cos(amplitude, frequency)
            }
        })
        .collect();
    QuasiPeriodicCoefficient::new(constant, terms).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let mut g = || random_coefficient(rng, 6.0);
    let (r1, r2, s1, s2) = (g(), g(), g(), g());
    let mut i = || random_coefficient(rng, 3.0);
    let (a11, a12, a21, a22, b11, b12, b21, b22) = (i(), i(), i(), i(), i(), i(), i(), i());
    let mut d = || random_coefficient(rng, 2.0);
    let (d1, d2) = (d(), d());
    SystemParams { r1, r2, s1, s2, a11, a12, a21, a22, b11, b12, b21, b22, d1, d2 }
}

fn positivity_suite() -> Outcome {
    const CASES: usize = 1000;
    let start = Instant::now();
    let results = Execution::default().map_range(CASES, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        rng.set_stream(k as u64);
        let p = random_params(&mut rng);
        if validate_params(&p).is_err() {
            return Err(format!("case {k}: generated parameters are invalid"));
        }
        let z0 = State::from_array(std::array::from_fn(|_| rng.random_range(1e-3..10.0))).unwrap();
        let traj = integrate(&p, &z0, 0.0, 50.0, &IntegrationOptions::default().with_stride(1))
            .map_err(|e| format!("case {k}: {e}"))?;
        let bad = traj.states().iter().flatten().filter(|v| v.is_nan() || **v <= 0.0).count();
        Ok((bad, traj.len()))
    });
    let elapsed = start.elapsed();
    let mut nonpositive = 0;
    let mut samples = 0;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((bad, n)) => {
                nonpositive += bad;
                samples += n;
            }
            Err(e) => failures.push(e),
        }
    }
    outcome(
        nonpositive == 0 && failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{CASES} parameter sets, {samples} samples, {nonpositive} nonpositive, {} integration failures{}, {}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(" (first: {f})")),
            secs(elapsed)
        ),
    )
}

fn logistic_oracle() -> Outcome {
    let (r, a, x0) = (1.0, 1.0, 0.1);
    let exact = |t: f64| (r / a) / (1.0 + ((r / a) / x0 - 1.0) * (-r * t).exp());
    let p = SystemParams::constant([r; 4], [a, 0.0, 0.0, a, a, 0.0, 0.0, a], [0.0, 0.0]);
    let z0 = State::uniform(x0).unwrap();
    let run = |h: f64| integrate(&p, &z0, 0.0, 20.0, &IntegrationOptions::rk4(h).with_stride(1)).unwrap();
    let at20 = (run(1e-3).last()[0] - exact(20.0)).abs();

    let max_err = |h: f64| run(h).iter().map(|(t, z)| (z[0] - exact(t)).abs()).fold(0.0, f64::max);
    let errs = [0.2, 0.1, 0.05].map(max_err);
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let order_ok = ratios.iter().all(|q| (8.0..=32.0).contains(q));
    outcome(
        at20 <= 1e-4 && order_ok,
        format!(
            "error at t = 20 is {at20:.2e}; halving ratios {:.2}, {:.2} (orders {:.2}, {:.2})",
            ratios[0],
            ratios[1],
            ratios[0].log2(),
            ratios[1].log2()
        ),
    )
}

fn example_ics() -> Vec<State> {
    vec![
        State::new(1.0, 1.0, 1.0, 1.0).unwrap(),
        State::new(3.0, 2.0, 0.5, 1.5).unwrap(),
        State::new(0.2, 0.4, 2.0, 3.0).unwrap(),
    ]
}

fn attractivity() -> Outcome {
    let report = attractivity_experiment(&example51(), &example_ics(), &AttractOptions::default(), &IntegrationOptions::default())
        .unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in &report.pairs {
        let first = p.differences.iter().position(|&d| d < 1e-3).map(|k| report.grid[k]);
        let ok = match first {
            Some(t) if t < 200.0 => p.max_difference_after(&report.grid, t) <= 2e-3,
            _ => false,
        };
        pass &= ok;
        parts.push(format!(
            "({}, {}) below 1e-3 at {}, max after {:.2e}",
            p.i + 1,
            p.j + 1,
            first.map_or("never".into(), |t| format!("{t:.2}")),
            first.map_or(f64::NAN, |t| p.max_difference_after(&report.grid, t))
        ));
    }
    outcome(pass, parts.join("; "))
}

fn lyapunov_decay() -> Outcome {
    let p = example51();
    let c = empirical_c();
    let z0 = State::uniform(1.0).unwrap();
    let shadow = State::new(2.0, 0.5, 1.5, 0.8).unwrap();
    let opts = DecayOptions { tol: 1e-8, ..Default::default() };
    let integration = IntegrationOptions::default();

    let literal = verify_decay(&p, &z0, &shadow, (100.0, 200.0), c, &opts, &integration).unwrap();
    let rate = literal.fitted_rate.unwrap_or(f64::NAN);
    let pass = literal.envelope_violations == 0 && rate >= c;

    // Same pair started at t = 0 and checked only after burn-in, when both
    // copies are inside the estimated region.
    let burn = integrate_paired(&p, &PairedState { primary: z0, shadow }, 0.0, 100.0, &integration).unwrap();
    let at100 = burn.sample_paired(100.0).unwrap();
    let settled = verify_decay(&p, &at100.primary, &at100.shadow, (100.0, 200.0), c, &opts, &integration).unwrap();

    outcome(
        pass,
        format!(
            "c = {c:.4}; initial states at t = 100: {} envelope violations (max excess {:.3e}), fitted rate {rate:.4}; \
             after burn-in: {} violations (max excess {:.3e}), fitted rate {:.4}",
            literal.envelope_violations,
            literal.max_violation,
            settled.envelope_violations,
            settled.max_violation,
            settled.fitted_rate.unwrap_or(f64::NAN)
        ),
    )
}

fn almost_period() -> Outcome {
    let start = Instant::now();
    let traj = integrate(&example51(), &State::uniform(1.0).unwrap(), 0.0, 350.0, &IntegrationOptions::default()).unwrap();
    let opts = ScanOptions { window: (100.0, 150.0), t_min: 150.0, t_max: 200.0, t_step: 0.01, epsilon: 0.2, ..Default::default() };
    let res = almost_period_scan(&traj, &opts).unwrap();
    let elapsed = start.elapsed();
    let target = 58.0 * PI;
    let hit = res.accepted().filter(|c| (c.shift - target).abs() <= 0.1).min_by(|a, b| a.defect.total_cmp(&b.defect));
    outcome(
        hit.is_some() && elapsed < Duration::from_secs(180),
        format!(
            "{} accepted; nearest to 58 pi = {target:.4}: {}; {}",
            res.accepted().count(),
            hit.map_or("none".into(), |c| format!("T = {:.2}, defect {:.4}", c.shift, c.defect)),
            secs(elapsed)
        ),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["simulate", "check", "attract", "almost-period"] {
        let mut names: Vec<_> = fs::read_dir(dir.join(sub))
            .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.path()).collect())
            .unwrap_or_default();
        names.retain(|p: &std::path::PathBuf| p.extension().is_some_and(|e| e == "csv"));
        names.sort();
        for p in names {
            let name = format!("{sub}/{}", p.file_name().unwrap().to_string_lossy());
            out.push((name, fs::read(&p).unwrap()));
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_lvpatch"))
            .env_remove("LVPATCH_OUT_DIR")
            .arg("--out")
            .arg(&dir)
            .args(["example51", "all"])
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run {k} exited with {:?}", status.status.code()));
        }
        runs.push(csv_files(&dir));
    }
    let same = runs[0] == runs[1];
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    outcome(
        same && runs[0].len() >= 10,
        format!("{} CSV files, {bytes} bytes, identical = {same}", runs[0].len()),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("dispersal margins", dispersal_margins),
        ("contraction constants", contraction_constants),
        ("positivity", positivity_suite),
        ("integrator oracle", logistic_oracle),
        ("attractivity", attractivity),
        ("Lyapunov decay", lyapunov_decay),
        ("almost period near 58 pi", almost_period),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!("criterion {} {:<26} {}  {}", k + 1, name, if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
