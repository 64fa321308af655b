use grassmann_core::exterior::CLUSTER_TOL;
use grassmann_core::verify::{self, CriterionResult, VerifyOptions};
use std::process::ExitCode;

// Criterion 6 measures a spin-m contraction factor of 4(m+2) where 4(m+1)
// is expected; the first half of the criterion holds.
const KNOWN_FAILURES: [u8; 1] = [6];

fn line(r: &CriterionResult) -> String {
    format!(
        "[{:>2}] {} {}: {}",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.detail
    )
}

fn pinned_tolerances() -> Vec<String> {
    let mut bad = Vec::new();
    if verify::SPECTRUM_TOL != 1e-9 || CLUSTER_TOL != 1e-9 {
        bad.push("spectrum tolerance is not 1e-9".to_string());
    }
    if verify::CONTRACTION_PAIRS < 100 {
        bad.push("fewer than 100 contraction pairs".into());
    }
    if verify::PROPERTY_SAMPLES < 20 {
        bad.push("fewer than 20 property samples".into());
    }
    if verify::PARSER_CORPUS < 200 {
        bad.push("parser corpus below 200".into());
    }
    if verify::SPANNING_DEGREE != 6 {
        bad.push("spanning degree is not 6".into());
    }
    bad
}

fn main() -> ExitCode {
    let mut problems = pinned_tolerances();
    println!(
        "tolerances: spectrum {:e} relative, all other checks exact",
        verify::SPECTRUM_TOL
    );
    let results = verify::run_all(&VerifyOptions::default());
    for r in &results {
        println!("{}", line(r));
    }
    println!(
        "{}/{} criteria pass",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    for r in &results {
        if KNOWN_FAILURES.contains(&r.id) {
            if r.passed {
                problems.push(format!("criterion {} now passes; update KNOWN_FAILURES", r.id));
            }
        } else if !r.passed {
            problems.push(line(r));
        }
    }
    let six = &results[5].detail;
    for want in [
        "ω^AB ω_AB = −(m+1) for m = 1..4",
        "m=1: factor 12, expected 8",
        "m=3: factor 20, expected 16",
    ] {
        if !six.contains(want) {
            problems.push(format!("criterion 6 detail lacks '{want}': {six}"));
        }
    }

    let faulty = VerifyOptions {
        eps: [[0, 1], [1, 0]],
        ..VerifyOptions::default()
    };
    println!("mutation: symmetric ε");
    let mut caught = 0;
    for id in [7u8, 8, 9, 10, 12] {
        let r = verify::run(id, &faulty);
        println!("  {}", line(&r));
        caught += usize::from(!r.passed);
    }
    if caught < 3 {
        problems.push(format!("symmetric ε caught by only {caught} criteria"));
    }

    if problems.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        for p in &problems {
            eprintln!("acceptance: {p}");
        }
        ExitCode::FAILURE
    }
}
