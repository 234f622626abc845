//! One line per acceptance criterion; fails if any criterion fails.

use elimkit::reproduce::{run_one, Options, CRITERIA};

#[test]
fn acceptance() {
    let opts = Options::default();
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let t = run_one(id, &opts);
        let o = &t.outcome;
        println!(
            "criterion {:>2} {} [{:.2}s] {}: {}",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed.as_secs_f64(),
            o.title,
            o.detail
        );
        if !o.passed {
            failed.push(o.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
