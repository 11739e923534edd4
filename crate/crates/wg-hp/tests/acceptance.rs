//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::{Command, Stdio};
use std::time::Instant;

use wghp_core::problem::ProblemSpec;
use wghp_core::verify::bounds::{all_samples, worst, BoundKind};
use wghp_core::verify::checks::{
    conforming_derivative_suite, coercivity_suite, error_equation_suite, reproduction_suite, CheckConfig, SuiteReport,
    REGIME_SAMPLES,
};
use wghp_core::verify::{convergence_study, log10_slope, run_case, ProblemFamily, StudyConfig};

/// Relative energy errors of the model problem from the first verified run.
const BASELINE: [(usize, f64); 5] = [
    (2, 1.8805707126793542e-2),
    (4, 3.2918987028674124e-3),
    (6, 5.800768786646183e-4),
    (8, 1.0439313122752109e-4),
    (10, 1.8985902347680797e-5),
];

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite(r: SuiteReport) -> Outcome {
    Outcome {
        pass: r.passed(),
        detail: format!("cases={} failures={} worst={:e}; {}", r.cases, r.failures, r.worst, r.detail),
    }
}

fn c1() -> Outcome {
    suite(reproduction_suite(&CheckConfig::default(), &(2..=8).collect::<Vec<_>>()))
}

fn c2() -> Outcome {
    suite(conforming_derivative_suite(&CheckConfig::default(), 100, 10))
}

fn c3() -> Outcome {
    suite(coercivity_suite(&CheckConfig::default(), &(1..=8).collect::<Vec<_>>(), 500, 1.0, false))
}

fn c4() -> Outcome {
    suite(error_equation_suite(&CheckConfig::default(), &[2, 4, 6], 50))
}

fn c5() -> Outcome {
    let family = ProblemFamily::new(ProblemSpec::model(1e-5, 1e-2).unwrap());
    let ps: Vec<usize> = BASELINE.iter().map(|b| b.0).collect();
    let recs = convergence_study(&family, &ps, &[(1e-5, 1e-2)], &StudyConfig::default(), None);
    let errs: Vec<f64> = recs.iter().map(|r| r.err_rel).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let slope = log10_slope(&recs).unwrap_or(f64::NAN);
    let pinned = recs.iter().zip(BASELINE).all(|(r, (p, e))| r.p == p && (r.err_rel - e).abs() <= 1e-6 * e);
    Outcome {
        pass: decreasing && slope <= -0.3 && pinned,
        detail: format!("errors {}, strictly decreasing={decreasing}, slope={slope:.4}, matches baseline={pinned}", fmt_list(&errs)),
    }
}

fn c6() -> Outcome {
    let base = ProblemSpec::model(1e-5, 1e-2).unwrap();
    let family = ProblemFamily::new(base);
    let errs: Vec<f64> = REGIME_SAMPLES
        .iter()
        .map(|&(e1, e2)| run_case(&family, e1, e2, 6, &StudyConfig::default()).err_rel)
        .collect();
    let max = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    Outcome { pass: ratio <= 100.0, detail: format!("p=6 errors {}, max/min={ratio:.2}", fmt_list(&errs)) }
}

fn c7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (tag, kind) in [
        ("7a", BoundKind::InterpolantSeminorm),
        ("7b", BoundKind::ProjectionL2),
        ("7c", BoundKind::ProjectionEndpoint),
    ] {
        let samples = all_samples(kind);
        let bad = samples.iter().filter(|s| !s.holds(1e-8)).count();
        let w = worst(&samples).unwrap();
        pass &= bad == 0;
        parts.push(format!(
            "{tag} {}: {} of {} violate, worst ratio {:.3} ({}, p={}, s={}, ({}, {}))",
            kind.name(),
            bad,
            samples.len(),
            w.ratio(),
            w.function.name(),
            w.p,
            w.s,
            w.interval.a,
            w.interval.b
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_wg-hp"))
            .args(["convergence", "--eps-grid", "1e-8:1,1e-5:1e-2,1e-6:1e-6,1e-4:1e-5", "--p-range", "1..10", "--out"])
            .arg(&out)
            .stderr(Stdio::null())
            .status()
            .unwrap();
        (status.success(), std::fs::read(&out).unwrap_or_default())
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    let same = !a.is_empty() && a == b;
    Outcome { pass: ok_a && ok_b && same, detail: format!("{} bytes, identical={same}", a.len()) }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 polynomial reproduction", c1),
        ("2 weak derivative of conforming functions", c2),
        ("3 coercivity with constant 1", c3),
        ("4 error equation identity", c4),
        ("5 exponential convergence on the model problem", c5),
        ("6 parameter robustness at p=6", c6),
        ("7 interpolation and projection bounds", c7),
        ("8 determinism", c8),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 8 criteria passed in {:.1} s", 8 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
