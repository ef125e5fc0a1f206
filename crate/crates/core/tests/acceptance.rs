//! Acceptance suite: one PASS/FAIL line per criterion, with the failing
//! checks listed underneath. Exits non-zero if a criterion outside
//! `UNATTAINABLE` fails.

use std::process::ExitCode;
use std::time::Instant;

use moment_core::report::CheckRecord;
use moment_core::suites;
use moment_core::Result;

/// Criteria that are expected to fail at desk scale.
const UNATTAINABLE: [u32; 1] = [7];

struct Criterion {
    id: u32,
    title: &'static str,
    budget_s: f64,
    run: fn() -> Result<Vec<CheckRecord>>,
}

fn c1() -> Result<Vec<CheckRecord>> {
    suites::identities(&[3, 4, 5], 42)
}

fn c2() -> Result<Vec<CheckRecord>> {
    suites::afe(&[3, 4, 5], &[30.0, 50.0, 80.0], 42)
}

fn c3() -> Result<Vec<CheckRecord>> {
    suites::voronoi(&suites::VORONOI_GRID)
}

fn c4() -> Result<Vec<CheckRecord>> {
    suites::delta(20.0, 50)
}

fn c5() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for q in [3, 4, 5] {
        out.extend(suites::sums(q, 42)?);
    }
    Ok(out)
}

fn c6() -> Result<Vec<CheckRecord>> {
    suites::diagonal(3, &[(1, 1), (2, 1)], &suites::TREND_HEIGHTS)
}

fn c7() -> Result<Vec<CheckRecord>> {
    suites::moment(&[3, 4], &[(1, 1), (2, 3)], &suites::TREND_HEIGHTS)
}

fn c8() -> Result<Vec<CheckRecord>> {
    suites::motohashi(-3, 2000.0)
}

fn c9() -> Result<Vec<CheckRecord>> {
    suites::mollified(-3, 3, 2000.0)
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "exact identities", budget_s: 60.0, run: c1 },
        Criterion { id: 2, title: "approximate functional equation", budget_s: 300.0, run: c2 },
        Criterion { id: 3, title: "Voronoi summation and mutations", budget_s: 600.0, run: c3 },
        Criterion { id: 4, title: "delta-symbol expansion", budget_s: 60.0, run: c4 },
        Criterion { id: 5, title: "sum formulas U_ij", budget_s: 600.0, run: c5 },
        Criterion { id: 6, title: "diagonal closed form, decay under doubling T", budget_s: 900.0, run: c6 },
        Criterion { id: 7, title: "oracle against main term", budget_s: 3600.0, run: c7 },
        Criterion { id: 8, title: "leading constant of the zero-shift moment", budget_s: 600.0, run: c8 },
        Criterion { id: 9, title: "mollified c2 consistency", budget_s: 600.0, run: c9 },
    ];
    let mut hard_failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (passed, summary, failing) = match &result {
            Ok(checks) => {
                let failing: Vec<&CheckRecord> = checks.iter().filter(|r| !r.passed).collect();
                let worst = checks.iter().max_by(|a, b| a.margin().total_cmp(&b.margin()));
                let worst = worst
                    .map(|r| format!(", tightest {} = {:.3e} (bound {:.1e})", r.name, r.residual, r.tolerance))
                    .unwrap_or_default();
                (failing.is_empty() && secs <= c.budget_s, format!("{} checks{worst}", checks.len()), failing)
            }
            Err(e) => (false, format!("error: {e}"), Vec::new()),
        };
        let known = UNATTAINABLE.contains(&c.id);
        let tag = match (passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected at desk scale)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {tag}: {}: {summary}; {secs:.1}s of {:.0}s budget", c.id, c.title, c.budget_s);
        for r in failing {
            println!("    failed {}: {:.4e} vs {:.1e} {}", r.name, r.residual, r.tolerance, r.details);
        }
        if !passed && !known {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
