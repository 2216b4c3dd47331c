//! Every acceptance criterion at its stated tolerance, one line each.
//!
//! Run with `cargo test -p logmod-cli --test acceptance -- --nocapture` to
//! see the lines as they finish.

use std::process::Command;
use std::time::{Duration, Instant};

use logmod::selftest::{run_criterion, CRITERIA};

const SEED: u64 = 0;
const SELFTEST_BUDGET: Duration = Duration::from_secs(15 * 60);

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let outcome = run_criterion(id, SEED).unwrap();
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_logmod")).args(["selftest", "--seed", "0"]).output().unwrap();
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out.stdout);
    let passes = text.lines().filter(|l| l.starts_with("criterion ") && l.contains("[PASS]")).count();
    let ok = out.status.code() == Some(0) && passes == CRITERIA && elapsed < SELFTEST_BUDGET;
    println!(
        "criterion 10 [{}] end-to-end selftest: exit {:?}, {passes}/{CRITERIA} passed in {:.1} s (budget {} s)",
        if ok { "PASS" } else { "FAIL" },
        out.status.code(),
        elapsed.as_secs_f64(),
        SELFTEST_BUDGET.as_secs()
    );
    if !ok {
        failed.push(10);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
