//! Acceptance battery: every claimed identity is checked at desk scale and
//! each criterion prints one pass/fail line.

use quon_core::suite::{run_all, CheckRecord, SuiteConfig};
use std::time::Instant;

struct Criterion {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn records_with<'a>(
    records: &'a [CheckRecord],
    prefix: &'a str,
    dims: &'a [usize],
) -> impl Iterator<Item = &'a CheckRecord> {
    records.iter().filter(move |r| {
        if !r.name.starts_with(prefix) {
            return false;
        }
        dims.iter().any(|d| {
            r.name.ends_with(&format!("/d{d}")) || r.name.contains(&format!("/d{d}-"))
        })
    })
}

fn all_pass(records: &[CheckRecord], prefix: &str, dims: &[usize], expect_at_least: usize) -> (bool, String) {
    let matched: Vec<&CheckRecord> = records_with(records, prefix, dims).collect();
    if matched.len() < expect_at_least {
        return (
            false,
            format!("only {} records matched {prefix}", matched.len()),
        );
    }
    let worst = matched
        .iter()
        .map(|r| r.max_error)
        .fold(0.0f64, |a, b| a.max(b));
    let failures: Vec<&str> = matched
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name.as_str())
        .collect();
    if failures.is_empty() {
        (true, format!("{} records, worst deviation {:.2e}", matched.len(), worst))
    } else {
        (false, format!("failing: {}", failures.join(", ")))
    }
}

fn runtime_ms(records: &[CheckRecord], prefix: &str, dims: &[usize]) -> u128 {
    records_with(records, prefix, dims)
        .map(|r| r.runtime_ms)
        .sum()
}

#[test]
fn acceptance() {
    let wall = Instant::now();
    let config = SuiteConfig {
        dims: vec![2, 3, 4, 5, 6, 7],
        ..SuiteConfig::default()
    };
    let report = run_all(&config);
    let total_elapsed = wall.elapsed();
    let r = &report.records;

    let mut criteria: Vec<Criterion> = Vec::new();

    // 1. parafermion suite at d in {2,3,4,5}, n <= 4, within 1e-9 and 10 s
    {
        let (mut pass, mut detail) = all_pass(r, "pf/", &[2, 3, 4, 5], 16);
        let ms = runtime_ms(r, "pf/", &[2, 3, 4, 5]);
        if ms >= 10_000 {
            pass = false;
            detail = format!("{detail}; runtime {ms} ms exceeds 10 s");
        } else {
            detail = format!("{detail}; runtime {ms} ms");
        }
        criteria.push(Criterion {
            name: "1 parafermion relations, para-isotopy, twisted product, adjoint, charge",
            pass,
            detail,
        });
    }

    // 2. Jordan-Wigner isomorphism at d in {2,3}, n' in {1,2}
    {
        let (pass, detail) = all_pass(r, "jw/", &[2, 3], 8);
        criteria.push(Criterion {
            name: "2 Jordan-Wigner multiplicativity and basis independence",
            pass,
            detail,
        });
    }

    // 3. Clifford census: 24 and 216, within 30 s
    {
        let (mut pass, mut detail) = all_pass(r, "clifford/", &[2, 3], 2);
        for (d, expect) in [(2usize, 24.0), (3usize, 216.0)] {
            let found = records_with(r, "clifford/", &[d])
                .next()
                .and_then(|rec| rec.scalar)
                .map(|s| s.re)
                .unwrap_or(-1.0);
            if (found - expect).abs() > 0.5 {
                pass = false;
                detail = format!("{detail}; census d={d} returned {found}");
            }
        }
        let ms = runtime_ms(r, "clifford/", &[2, 3, 4, 5]);
        if ms >= 30_000 {
            pass = false;
            detail = format!("{detail}; runtime {ms} ms exceeds 30 s");
        }
        criteria.push(Criterion {
            name: "3 Clifford census 24 / 216",
            pass,
            detail,
        });
    }

    // 4. quon suite: bases, charge words, braids, words, Fourier at d in {2..5}
    {
        let (pass, detail) = all_pass(r, "quon/", &[2, 3, 4, 5], 24);
        criteria.push(Criterion {
            name: "4 quon bases, charge words, braid relations, F/G words, string Fourier",
            pass,
            detail,
        });
    }

    // 5. joint relation at d in {2,3}, m,n in {1,2}
    {
        let (pass, detail) = all_pass(r, "joint/", &[2, 3], 8);
        criteria.push(Criterion {
            name: "5 joint relation expansions agree and are basis independent",
            pass,
            detail,
        });
    }

    // 6. circle and genus rules with the both-path identity
    {
        let (pass, detail) = all_pass(r, "genus/", &[2, 3, 4, 5], 12);
        criteria.push(Criterion {
            name: "6 circle values, genus parity, both evaluation paths",
            pass,
            detail,
        });
    }

    // 7. Hopf / Frobenius rule suite with duality scalars
    {
        let (pass, detail) = all_pass(r, "hopf/", &[2, 3, 4, 5], 60);
        criteria.push(Criterion {
            name: "7 Hopf relations, antipode, Frobenius laws, duality scalars",
            pass,
            detail,
        });
    }

    // 8. CNOT: exact spider decomposition and compiled top view
    {
        let (pass1, detail1) = all_pass(r, "cnot/spider-decomposition", &[2, 3, 4, 5], 4);
        let (pass2, detail2) = all_pass(r, "cnot/top-view-compile", &[2, 3], 2);
        criteria.push(Criterion {
            name: "8 CNOT spider decomposition and compiled top view",
            pass: pass1 && pass2,
            detail: format!("{detail1}; {detail2}"),
        });
    }

    // 9. resource states and their compilations
    {
        let (pass, detail) = all_pass(r, "resource/", &[2, 3, 4, 5], 16);
        criteria.push(Criterion {
            name: "9 resource-state identities and quon compilations",
            pass,
            detail,
        });
    }

    // 10. teleportation fidelity at every outcome for d <= 7
    {
        let (pass, detail) = all_pass(r, "teleport/", &[2, 3, 4, 5, 6, 7], 12);
        criteria.push(Criterion {
            name: "10 teleportation fidelity and frozen correction family",
            pass,
            detail,
        });
    }

    // 11. tooling: full battery under 2 minutes and deterministic records
    {
        let mut pass = total_elapsed.as_millis() < 120_000;
        let mut detail = format!("suite wall time {:?}", total_elapsed);
        let second = run_all(&config);
        let same = second.records.len() == r.len()
            && second
                .records
                .iter()
                .zip(r.iter())
                .all(|(a, b)| a.name == b.name && a.max_error == b.max_error);
        if !same {
            pass = false;
            detail = format!("{detail}; records differ between identical runs");
        }
        criteria.push(Criterion {
            name: "11 runtime bound and run-to-run determinism",
            pass,
            detail,
        });
    }

    let mut all_ok = true;
    for c in &criteria {
        let flag = if c.pass { "PASS" } else { "FAIL" };
        println!("{flag}  criterion {} ({})", c.name, c.detail);
        all_ok &= c.pass;
    }
    // every remaining suite record (soundness, normalization, numerics) must pass too
    for rec in r {
        if !rec.passed() {
            println!("FAIL  suite record {} (max_error {})", rec.name, rec.max_error);
            all_ok = false;
        }
    }
    assert!(all_ok, "acceptance criteria failed");
}
