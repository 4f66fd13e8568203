//! End-to-end acceptance run: every suite at its default size and seed 42,
//! checked against the required trial counts, plus the timing and replay
//! requirements on the full run. One PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kkmkit::dispatch;
use kkmkit::report::Status;
use serde_json::Value;

const SEED: &str = "42";

struct Criterion {
    suite: &'static str,
    what: &'static str,
    min_trials: usize,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        suite: "point-separation",
        what: "exterior points are strictly separated, margin = |u|^2 (500 per dim 1..6, < 10 s)",
        min_trials: 3000,
    },
    Criterion {
        suite: "set-separation",
        what: "disjoint pairs are separated, margin matches the product-simplex QP",
        min_trials: 300,
    },
    Criterion {
        suite: "simplex-faces",
        what: "facet families n = 1..4: subfamilies meet, family does not, union not convex",
        min_trials: 4,
    },
    Criterion {
        suite: "kkm-star",
        what: "star maps certify and intersect inside conv(domain) (100 per dim <= 4)",
        min_trials: 400,
    },
    Criterion {
        suite: "kkm-barycentric",
        what: "barycentric cover meets at (1/3, 1/3, 1/3)",
        min_trials: 1,
    },
    Criterion {
        suite: "selection",
        what: "ball-cover selections subordinated, inside the hull on >= 1000 points",
        min_trials: 50,
    },
    Criterion {
        suite: "minimax",
        what: "game values match LP; pennies and RPS are exactly fair",
        min_trials: 102,
    },
    Criterion {
        suite: "supinf-infsup",
        what: "alpha >= beta - 1e-7 on shifted pairs",
        min_trials: 50,
    },
    Criterion {
        suite: "stampacchia",
        what: "coercive VIs: residual, uniqueness, projection oracle, a-priori bound",
        min_trials: 100,
    },
    Criterion {
        suite: "mazur-schauder",
        what: "convex quadratics match the oracle; sqrt|x| minimized at 0",
        min_trials: 2,
    },
    Criterion {
        suite: "markov-kakutani",
        what: "stationary vectors, commuting families, saddle-point cross-check",
        min_trials: 2,
    },
    Criterion {
        suite: "klee-to-kkm",
        what: "positive families convert to certified KKM maps",
        min_trials: 100,
    },
];

fn run(args: &[&str]) -> Result<(Vec<u8>, Value, Duration), String> {
    let mut argv = vec!["kkmkit"];
    argv.extend_from_slice(args);
    let start = Instant::now();
    let report = dispatch(argv).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bytes = report.to_bytes();
    let json: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    if report.status != Status::Certified && report.status != Status::Error {
        return Err(format!("unexpected status {:?}", report.status));
    }
    Ok((bytes, json, elapsed))
}

fn check_suite(c: &Criterion, outcome: &Value) -> Result<String, String> {
    let trials = outcome["trials"].as_u64().unwrap_or(0) as usize;
    let failures = outcome["failures"].as_u64().unwrap_or(u64::MAX);
    if outcome["passed"] != Value::Bool(true) || failures != 0 {
        return Err(format!(
            "{failures} failing trials; first: {}",
            outcome["first_failure"]
        ));
    }
    if trials < c.min_trials {
        return Err(format!("only {trials} trials, need {}", c.min_trials));
    }
    Ok(format!("{trials} trials"))
}

fn main() -> ExitCode {
    let mut results: Vec<(String, Result<String, String>)> = Vec::new();

    let first = run(&["verify-suite", "--suite", "all", "--seed", SEED]);
    let second = run(&["verify-suite", "--suite", "all", "--seed", SEED]);

    for c in CRITERIA {
        let label = format!("{} — {}", c.suite, c.what);
        let verdict = match &first {
            Err(e) => Err(e.clone()),
            Ok((_, json, _)) => {
                let suites = json["outcome"]["suites"].as_array().cloned().unwrap_or_default();
                match suites.iter().find(|s| s["name"] == c.suite) {
                    None => Err("suite missing from the full run".into()),
                    Some(outcome) => check_suite(c, outcome),
                }
            }
        };
        results.push((label, verdict));
    }

    // The point-separation suite has its own time budget.
    let solo = run(&["verify-suite", "--suite", "point-separation", "--seed", SEED]).and_then(|(_, json, t)| {
        let outcome = &json["outcome"]["suites"][0];
        check_suite(&CRITERIA[0], outcome)?;
        if t >= Duration::from_secs(10) {
            return Err(format!("took {:.2} s", t.as_secs_f64()));
        }
        Ok(format!("{:.2} s alone", t.as_secs_f64()))
    });
    if let Ok(note) = &solo {
        if let Ok(prev) = &mut results[0].1 {
            *prev = format!("{prev}, {note}");
        }
    } else {
        results[0].1 = solo;
    }

    let full = match (&first, &second) {
        (Ok((a, ja, ta)), Ok((b, _, tb))) => {
            let slowest = (*ta).max(*tb);
            if ja["status"] != "certified" {
                Err("full run did not certify".to_string())
            } else if a != b {
                Err("two runs with the same seed produced different reports".to_string())
            } else if slowest >= Duration::from_secs(60) {
                Err(format!("took {:.2} s", slowest.as_secs_f64()))
            } else {
                Ok(format!("{:.2} s, {} identical bytes", slowest.as_secs_f64(), a.len()))
            }
        }
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    results.push((
        "verify-suite all — under 60 s and byte-identical on replay".into(),
        full,
    ));

    let mut failed = 0;
    for (label, verdict) in &results {
        match verdict {
            Ok(note) => println!("PASS  {label} ({note})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {label}: {why}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
