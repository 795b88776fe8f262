//! Acceptance gate: runs the default case grid and prints one PASS/FAIL line
//! per criterion. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::Instant;

use supergeom::riesz::gamma_closed;
use supergeom::sbos::lhs_closed;
use supergeom::suite::{default_cases, run_suite, CaseOutcome, SuiteConfig};
use supergeom::superfourier::{parseval_pointwise_alt, test_family, Grid};
use supergeom::MultiIndex;

/// Wall-clock budgets in seconds, where a criterion states one.
fn budget(criterion: u32) -> Option<f64> {
    match criterion {
        1 => Some(60.0),
        3 => Some(120.0),
        _ => None,
    }
}

/// Criteria allowed to print FAIL without failing the target.
const KNOWN_UNATTAINABLE: &[u32] = &[];

fn summary(cases: &[CaseOutcome]) -> (usize, usize, f64, Vec<String>) {
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for c in cases {
        if c.pass {
            passed += 1;
        }
        if let Some(r) = &c.report {
            for cmp in &r.comparisons {
                worst = worst.max(cmp.max_rel_err());
                if !cmp.pass {
                    notes.push(format!(
                        "{} {}: rel {:.2e}",
                        c.kind,
                        cmp.label,
                        cmp.max_rel_err()
                    ));
                }
            }
        }
        if let Some(e) = &c.error {
            notes.push(format!("{}: {e}", c.kind));
        }
    }
    (passed, cases.len(), worst, notes)
}

/// Values fixed by hand, independent of the library's closed forms.
fn frozen_oracles() -> Vec<(&'static str, bool)> {
    let mi = |p, q, v: &[f64]| MultiIndex::new(p, q, v.to_vec()).unwrap();
    let g = |p, q, v: &[f64]| gamma_closed(&mi(p, q, v)).value.unwrap();
    let x = supergeom::suite::parse_matrix("diag:2,1", 1, 1, 0).unwrap();
    let sbos = lhs_closed(1, 1, 1, &x).unwrap().body().re;
    vec![
        // Γ(3)/Γ(2)
        (
            "gamma (1|1) m=(3,2) = 2",
            (g(1, 1, &[3.0, 2.0]) - 2.0).abs() < 1e-14,
        ),
        // Γ(3)
        ("gamma (1|0) m=3 = 2", (g(1, 0, &[3.0]) - 2.0).abs() < 1e-14),
        // 2π·Γ(2)·Γ(1)
        (
            "gamma (2|0) m=(2,2) = 2π",
            (g(2, 0, &[2.0, 2.0]) - 2.0 * PI).abs() < 1e-13,
        ),
        // Γ(1)/Γ(3)
        (
            "gamma (0|1) m=2 = 1/2",
            (g(0, 1, &[2.0]) - 0.5).abs() < 1e-15,
        ),
        (
            "gamma (1|0) m=0 is a pole",
            gamma_closed(&mi(1, 0, &[0.0])).is_pole,
        ),
        // √π · Ber(diag(2,1))^{-1} = √π/2
        (
            "sbos diag(2,1) n=1 = √π/2",
            (sbos - PI.sqrt() / 2.0).abs() < 1e-14,
        ),
    ]
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::default();
    let mut failed = Vec::new();
    for (label, ok) in frozen_oracles() {
        println!("oracle {label}: {}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(0);
        }
    }
    for criterion in 1..=14u32 {
        let cases: Vec<_> = default_cases()
            .into_iter()
            .filter(|c| c.criterion == Some(criterion))
            .collect();
        let start = Instant::now();
        let report = run_suite(&cfg.with_cases(cases), false);
        let secs = start.elapsed().as_secs_f64();
        let (passed, total, worst, notes) = summary(&report.cases);
        let in_budget = budget(criterion).map_or(true, |b| secs < b);
        let ok = report.pass && in_budget;
        let mut line = format!(
            "criterion {criterion:>2}: {} ({passed}/{total} cases, max rel err {worst:.2e}, {secs:.1} s",
            if ok { "PASS" } else { "FAIL" }
        );
        if let Some(b) = budget(criterion) {
            line.push_str(&format!(", budget {b:.0} s"));
        }
        line.push(')');
        if criterion == 13 {
            line.push_str(&format!("; {}", parseval_note()));
        }
        println!("{line}");
        for n in notes.iter().take(5) {
            println!("    {n}");
        }
        if !ok && !KNOWN_UNATTAINABLE.contains(&criterion) {
            failed.push(criterion);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// The pointwise Parseval variant with `(−1)^{q(q−1)/2}` against the checked
/// one, pairing the odd and even test inputs at `q = 1` (an odd input
/// squares to zero there).
fn parseval_note() -> String {
    let fam = test_family(0, 1, Grid::point()).unwrap();
    let (f, g) = (&fam[1], &fam[0]);
    let stated = parseval_pointwise_alt(f, g).unwrap();
    let lhs = supergeom::superfourier::ft(f)
        .unwrap()
        .mul(&supergeom::superfourier::ft(g).unwrap())
        .unwrap()
        .integrate();
    assert!(lhs.norm() > 1e-6, "degenerate Parseval pair");
    let agrees = (stated - lhs).norm() <= 1e-12 * lhs.norm().max(1.0);
    format!(
        "pointwise Parseval with (-1)^(q(q-1)/2) at q=1: {}",
        if agrees {
            "agrees"
        } else {
            "off by a sign, checked in the (f*g)(0) form"
        }
    )
}
