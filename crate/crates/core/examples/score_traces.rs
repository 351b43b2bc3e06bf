//! Scores methods across three traces and drops the ones every trace runs.

use std::collections::BTreeMap;

use featloc::relevance::{filter_methods, score_methods, score_report};
use featloc::trace::{MethodKey, Trace, TraceMethodCounts};

fn main() -> featloc::Result<()> {
    let traces = [
        Trace::from_methods("T1", "edit", ["A.m1()", "A.m2()", "A.m3()", "A.m4()"])?,
        Trace::from_methods("T2", "edit", ["A.m1()", "A.m2()", "A.m1()", "A.m4()"])?,
        Trace::from_methods("T3", "view", ["A.m3()", "A.m4()", "A.m3()", "A.m4()"])?,
    ];
    let table = score_methods(&TraceMethodCounts::from_traces(&traces))?;
    let outcome = filter_methods(&table, 0.05)?;
    print!("{}", score_report(&table, Some(&outcome.kept)));

    for (key, score) in &outcome.removed {
        println!("removed {key} ({score})");
    }

    // counts can also come straight from a profiler
    let mut row = BTreeMap::new();
    row.insert(MethodKey::new("B", "run", "()"), 10);
    let single = TraceMethodCounts::from_rows(vec![("only".into(), row)]);
    println!("single trace score: {:?}", score_methods(&single)?.methods[0].score);
    Ok(())
}
