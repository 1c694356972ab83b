//! Runs every verification suite once and prints one verdict per criterion,
//! followed by the checks behind it.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use capflow::verify::{run_suite, Check, SUITES};

const CRITERIA: [&str; 11] = [
    "norm duality identities",
    "Q vanishes for quadratic norms",
    "condition thresholds and equality case",
    "static Wulff caps",
    "Minkowski formula",
    "quermassintegral consistency",
    "flow conservation and monotonicity",
    "rate formulas",
    "convergence to a capillary Wulff shape",
    "inequalities",
    "convexity preservation witness",
];

fn criterion(suite: &str, name: &str) -> usize {
    let has = |s: &str| name.contains(s);
    match suite {
        "duality" if name.starts_with("Q ≡ 0") => 2,
        "duality" => 1,
        "appendix-a" => 3,
        "wulff-static" if has("sup|f|") => 4,
        "wulff-static" => 6,
        "minkowski" if has("Minkowski") => 5,
        "minkowski" => 6,
        "inequalities" => 10,
        "flow-conservation" if has("dV") || has("transient window") => 8,
        "flow-conservation" if has("reached") || has("radial deviation") || has("r₀") || has("final time") => 9,
        "flow-conservation" if has("κ^F") || has("control") || has("converged") => 11,
        "flow-conservation" => 7,
        _ => panic!("unassigned check {suite}: {name}"),
    }
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let results: Vec<(&str, Vec<Check>)> = std::thread::scope(|s| {
        let handles: Vec<_> = SUITES.iter().map(|&suite| (suite, s.spawn(move || run_suite(suite)))).collect();
        handles.into_iter().map(|(suite, h)| (suite, h.join().unwrap().unwrap())).collect()
    });
    let mut by_criterion: BTreeMap<usize, Vec<Check>> = BTreeMap::new();
    for (suite, checks) in results {
        for c in checks {
            by_criterion.entry(criterion(suite, &c.name)).or_default().push(c);
        }
    }
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (k, title) in CRITERIA.iter().enumerate() {
        let checks = by_criterion.get(&(k + 1)).map(Vec::as_slice).unwrap_or_default();
        let gated = checks.iter().filter(|c| c.pass.is_some()).count();
        let bad = checks.iter().filter(|c| c.failed()).count();
        let ok = gated > 0 && bad == 0;
        writeln!(out, "criterion {:>2} {}: {title} ({gated} gated, {bad} failed)", k + 1, if ok { "PASS" } else { "FAIL" }).unwrap();
        for c in checks {
            writeln!(out, "    {c}").unwrap();
        }
        if !ok {
            failed.push(k + 1);
        }
    }
    writeln!(out, "acceptance runtime: {:.0} s", start.elapsed().as_secs_f64()).unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
