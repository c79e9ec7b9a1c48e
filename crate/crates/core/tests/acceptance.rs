//! Runs the full battery (including dimension 8) and prints one line per
//! acceptance criterion. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use tractoria::verify::{run_suite, CheckReport, Suite};

const TITLES: [&str; 11] = [
    "cross-route agreement, n = 6",
    "cross-route agreement, n = 8",
    "dimension-4 Bach forms and obstruction",
    "conformal covariance of obstruction and Weyl",
    "Einstein vanishing and W·I = 0",
    "conformally flat vanishing",
    "divergence-free obstruction",
    "tractor identities",
    "deformation-complex spot checks",
    "jet engine",
    "hash convention lock-in",
];

/// Wall-time limits in seconds, where the criterion states one.
fn time_limit(criterion: u8) -> Option<f64> {
    match criterion {
        1 => Some(60.0),
        2 => Some(600.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    let reports = run_suite(Suite::Full, 42);
    let mut by: BTreeMap<u8, Vec<&CheckReport>> = BTreeMap::new();
    for r in &reports {
        by.entry(r.criterion).or_default().push(r);
    }
    let mut all = true;
    for (i, title) in TITLES.iter().enumerate() {
        let c = (i + 1) as u8;
        let checks = by.get(&c).map(Vec::as_slice).unwrap_or(&[]);
        let passed = checks.iter().filter(|r| r.passed).count();
        let seconds: f64 = checks.iter().map(|r| r.seconds).sum();
        let worst = checks
            .iter()
            .map(|r| if r.tolerance > 0.0 { r.residual / r.tolerance } else if r.residual == 0.0 { 0.0 } else { f64::INFINITY })
            .fold(0.0f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
        let in_time = time_limit(c).is_none_or(|t| seconds < t);
        let ok = !checks.is_empty() && passed == checks.len() && in_time;
        all &= ok;
        println!(
            "criterion {c:>2} {}  {passed}/{} checks  worst residual/tolerance {worst:.1e}  {seconds:.1} s  {title}",
            if ok { "PASS" } else { "FAIL" },
            checks.len()
        );
        for r in checks.iter().filter(|r| !r.passed) {
            println!("    failed: {} residual {:e} tolerance {:e} {}", r.name, r.residual, r.tolerance, r.error.as_deref().unwrap_or(""));
        }
        if !in_time {
            println!("    exceeded time limit of {:.0} s", time_limit(c).unwrap_or(0.0));
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
