//! Acceptance suite: criteria 1 to 10 at their stated tolerances.
//!
//! Status lines go straight to stderr so they show up without
//! `--nocapture`.

use std::io::Write;
use std::time::Duration;

use qfisher::acceptance::{reproduce, Summary};

fn say(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn runtime_line(summary: &Summary, id: u32, limit: Duration) -> bool {
    let t = summary.timing(id).unwrap_or(Duration::MAX);
    let ok = t < limit;
    say(&format!(
        "criterion {id:>2} runtime {}  {:.1} s (limit {} s)",
        if ok { "PASS" } else { "FAIL" },
        t.as_secs_f64(),
        limit.as_secs()
    ));
    ok
}

#[test]
fn acceptance_criteria() {
    let first = reproduce();
    let second = reproduce();
    for o in &first.outcomes {
        say(&o.status_line());
        for note in &o.notes {
            say(&format!("    {note}"));
        }
    }
    let runtime_1 = runtime_line(&first, 1, Duration::from_secs(30));
    let runtime_2 = runtime_line(&first, 2, Duration::from_secs(120));
    let (a, b) = (first.table(), second.table());
    let identical = a.as_bytes() == b.as_bytes();
    say(&format!(
        "criterion 10 {}  byte-identical reproduce summaries",
        if identical { "PASS" } else { "FAIL" }
    ));

    assert_eq!(first.outcomes.len(), 9);
    for o in &first.outcomes {
        assert!(o.passed, "criterion {} failed: {:?}", o.id, o.notes);
    }
    assert!(runtime_1 && runtime_2, "runtime limits exceeded");
    assert!(identical, "summaries differ:\n{a}\n---\n{b}");
}
