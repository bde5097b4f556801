//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report is always printed; exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use spectral_forge::io::config::RunConfig;
use spectral_forge::io::rng::{substream, DEFAULT_SEED};
use spectral_forge::resolvent::g_scalar;
use spectral_forge::scanner::{scan_unit_circle, ScanConfig, Verdict};
use spectral_forge::semigroup::{
    default_beta_grid, default_cert_points, evolve, trajectory, uniform_times, FourierState, GeneratorSpec,
};
use spectral_forge::truncation::eigs_via_secular;
use spectral_forge::verify::{self, VerifyOptions};
use spectral_forge::{GroupUnionSpec, WeightSeq, C64};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn setup(orders: &[usize]) -> (GroupUnionSpec, WeightSeq) {
    let spec = GroupUnionSpec::new(orders.to_vec()).unwrap();
    let w = WeightSeq::dyadic(spec.dim());
    (spec, w)
}

fn unit_circle_scan() -> Check {
    let start = Instant::now();
    let (spec, w) = setup(&[2, 3]);
    let cfg = ScanConfig { grid_size: 3600, exclusion_radius: 0.05, depth: 40, certificate_block: 30 };
    let report = scan_unit_circle(&spec, &w, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let required = report.required().count();
    let failed = report.required().filter(|p| !p.verdict.is_certified()).count();
    ensure(failed == 0, || format!("{failed}/{required} required points not certified"))?;
    ensure(report.certificates.len() == 4, || format!("{} certificates", report.certificates.len()))?;
    // 2 q_30 with ‖z‖ = 1; rounding in ‖(T - u) z‖ allowed at 64 ε.
    let threshold = 2.0 * 2f64.powi(-30) / 5.0;
    for c in &report.certificates {
        ensure(c.residual <= threshold + 64.0 * f64::EPSILON && c.residual < 1e-8, || {
            format!("certificate at {} has residual {:e} > {threshold:e}", c.target, c.residual)
        })?;
    }
    within(elapsed, 5.0)?;
    Ok(format!(
        "{required} points certified, max residual {:.3e}, {:.2} s",
        report.max_certificate_residual(),
        elapsed.as_secs_f64()
    ))
}

fn key_inequality() -> Check {
    let mut rng = substream(DEFAULT_SEED, "acceptance/key-inequality");
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for orders in [&[1][..], &[2], &[3], &[2, 3], &[4, 6]] {
        let (spec, w) = setup(orders);
        let mut drawn = 0;
        while drawn < 500 {
            let lambda = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            if spec.distance_to_union(lambda) < 0.05 {
                continue;
            }
            drawn += 1;
            let g = g_scalar(&spec, &w, lambda, 40).map_err(|e| format!("{orders:?} at {lambda}: {e}"))?;
            let bound = g.value.norm() + g.radius;
            worst = worst.max(bound);
            ensure(bound < 1.0, || format!("{orders:?} at {lambda}: |g| + radius = {bound}"))?;
        }
        samples += drawn;
    }
    Ok(format!("{samples} samples, max |g| + radius = {worst:.6}"))
}

fn run_suite(name: &str) -> Result<(verify::SuiteResult, Duration), String> {
    let start = Instant::now();
    let r = verify::run(&VerifyOptions { seed: DEFAULT_SEED, suites: vec![name.into()], inject_fault: false })
        .map_err(|e| e.to_string())?;
    Ok((r.suites.into_iter().next().unwrap(), start.elapsed()))
}

fn sherman_morrison() -> Check {
    let (s, elapsed) = run_suite("sherman-morrison")?;
    ensure(s.passed && s.cases == 200, || format!("{s:?}"))?;
    within(elapsed, 1.0)?;
    Ok(format!("{} cases, max entrywise error {:.3e}, {:.2} s", s.cases, s.max_error, elapsed.as_secs_f64()))
}

fn circles() -> Check {
    let (s, _) = run_suite("circles")?;
    ensure(s.passed && s.cases == 100_000 && s.failures == 0, || format!("{s:?}"))?;
    Ok(format!("{} samples, max p - |λ-1+p| = {:.3e}", s.cases, s.max_error))
}

fn finite_section() -> Check {
    let start = Instant::now();
    let (spec, w) = setup(&[2, 3]);
    let op = spectral_forge::truncation::build_tn(&spec, &w, 12, true).map_err(|e| e.to_string())?;
    let s = eigs_via_secular(&spec, &w, 12, true).map_err(|e| e.to_string())?;
    let all = s.eigenvalues();
    ensure(all.len() == 61 && s.dimension == 61, || format!("{} eigenvalues", all.len()))?;
    ensure(s.max_residual <= 1e-9, || format!("max residual {:e}", s.max_residual))?;
    let checks = op.checks();
    ensure(checks.max_column_sum_deviation <= 1e-12, || {
        format!("column sums off by {:e}", checks.max_column_sum_deviation)
    })?;
    ensure(checks.strongly_connected && checks.nonnegative, || "not irreducible".into())?;
    let peripheral: Vec<C64> = all.iter().map(|e| e.value()).filter(|z| z.norm() >= 1.0 - 1e-10).collect();
    ensure(
        peripheral.len() == 1 && (peripheral[0] - 1.0).norm() <= 1e-10,
        || format!("peripheral eigenvalues {peripheral:?}"),
    )?;
    let bound = 2.0 * op.section_weights()[11];
    for u in spec.union_points() {
        let d = s.distance_to(u.to_complex());
        ensure(d <= bound, || format!("dist({u}, spectrum) = {d:e} > {bound:e}"))?;
    }
    let (fact, _) = run_suite("factorization")?;
    ensure(fact.passed, || format!("cofactor cross-check: {fact:?}"))?;
    let elapsed = start.elapsed();
    within(elapsed, 30.0)?;
    Ok(format!(
        "61 eigenvalues, max residual {:.3e}, 2q̃_12 = {bound:.3e}, cofactor max rel. error {:.3e}, {:.2} s",
        s.max_residual,
        fact.max_error,
        elapsed.as_secs_f64()
    ))
}

fn imaginary_axis() -> Check {
    let start = Instant::now();
    let g = GeneratorSpec::new(WeightSeq::dyadic_semigroup(), 40).map_err(|e| e.to_string())?;
    let betas: Vec<f64> = default_beta_grid().into_iter().filter(|b| *b != 0.0).collect();
    ensure(betas.len() == 10, || format!("{betas:?}"))?;
    let report = g
        .scan_imaginary_axis(&betas, 40, &default_cert_points())
        .map_err(|e| e.to_string())?;
    for p in &report.points {
        ensure(p.verdict.is_certified(), || format!("β = {} not certified: {:?}", p.beta, p.verdict))?;
    }
    let den = match &report.zero {
        Verdict::SingularCandidate { denominator: Some(d), .. } => *d,
        other => return Err(format!("β = 0 gave {other:?}")),
    };
    let exact = 2f64.powi(-40);
    ensure((den.value - exact).norm() <= 4.0 * f64::EPSILON * exact, || {
        format!("β = 0 denominator {} != 2^-40", den.value)
    })?;
    ensure(report.certificates.len() == 4, || "missing certificates".into())?;
    for c in &report.certificates {
        ensure((c.residual - c.q_n).abs() <= 1e-12, || format!("r = {}: {:e} vs {:e}", c.r, c.residual, c.q_n))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 5.0)?;
    Ok(format!(
        "10 points certified, β = 0 denominator = 2^-40 exactly: {}, {:.2} s",
        den.value.re == exact,
        elapsed.as_secs_f64()
    ))
}

fn dynamics() -> Check {
    let g = GeneratorSpec::new(WeightSeq::dyadic_semigroup(), 40).map_err(|e| e.to_string())?;
    let rows = trajectory(&g, &FourierState::e(), &uniform_times(50.0, 100), 40).map_err(|e| e.to_string())?;
    let mass_dev = rows.iter().map(|r| (r.mass - 1.0).abs()).fold(0.0, f64::max);
    let min_entry = rows.iter().map(|r| r.min_entry).fold(f64::INFINITY, f64::min);
    ensure(mass_dev <= 1e-8, || format!("mass drift {mass_dev:e}"))?;
    ensure(min_entry >= -1e-10, || format!("negative chain entry {min_entry:e}"))?;
    let mut worst_decay: f64 = 0.0;
    for (n, k) in [(1, 1), (2, -1), (5, 3), (12, -2), (40, 1), (55, 7)] {
        let f0 = FourierState::mode(n, k, C64::new(1.0 / std::f64::consts::TAU, 0.0));
        for t in [0.5, 5.0, 20.0, 50.0] {
            let f = evolve(&g, &f0, t, 40).map_err(|e| e.to_string())?;
            let err = (f.norm() - (-g.q(n) * t).exp()).abs();
            worst_decay = worst_decay.max(err);
            ensure(err <= 1e-10, || format!("mode ({n},{k}) at t = {t}: error {err:e}"))?;
        }
    }
    Ok(format!(
        "mass drift {mass_dev:.3e}, min chain entry {min_entry:.3e}, single-mode decay error {worst_decay:.3e}"
    ))
}

fn determinism() -> Check {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for d in &dirs {
        let o = Command::new(env!("CARGO_BIN_EXE_spectral-forge"))
            .args(["verify", "--seed", "12345", "--out"])
            .arg(d.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stdout).into_owned())?;
        outputs.push(std::fs::read(d.path().join("verify.json")).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "verify.json differs between runs".into())?;
    ensure(RunConfig::default().suites.len() == verify::SUITES.len(), || "default suites".into())?;
    Ok(format!("two runs, {} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 unit-circle scan, orders [2,3]", unit_circle_scan),
        ("2 |<q,R(λ,S)q>| + radius < 1", key_inequality),
        ("3 Sherman-Morrison oracle", sherman_morrison),
        ("4 circles inequality", circles),
        ("5 finite section N = 12", finite_section),
        ("6 imaginary-axis scan", imaginary_axis),
        ("7 semigroup dynamics", dynamics),
        ("8 verify determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
