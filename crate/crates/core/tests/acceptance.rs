//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test --release --test acceptance`. Extra arguments
//! select criteria by number, e.g. `-- 3 10`.

use std::process::ExitCode;

use patchflow::acceptance::{
    criterion_bony, criterion_biot_savart, criterion_commutators, criterion_para_vector_field,
    criterion_partition, criterion_pde_formula, criterion_persistence, criterion_scaling,
    criterion_taylor_green, criterion_transport, run_persistence, PersistenceRun,
    PersistenceSetup, Verdict,
};

type Criterion = fn() -> patchflow::Result<Verdict>;

fn persistence(n: usize) -> PersistenceRun {
    let setup = PersistenceSetup::default().with_resolution(n);
    run_persistence(&setup, |_, _| {}).unwrap_or_else(|e| panic!("persistence run at n = {n}: {e}"))
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wants = |id: u32| selected.is_empty() || selected.contains(&id);

    let mut verdicts: Vec<Verdict> = Vec::new();
    let mut report = |v: patchflow::Result<Verdict>, id: u32| match v {
        Ok(v) => {
            println!("{}", v.line());
            verdicts.push(v);
        }
        Err(e) => {
            println!("FAIL criterion {id:>2} errored: {e}");
            verdicts.push(Verdict {
                id,
                title: format!("error: {e}"),
                measures: vec![patchflow::acceptance::Measure::holds("ran", false)],
                seconds: 0.0,
                budget: None,
            });
        }
    };

    let fast: [(u32, Criterion); 4] = [
        (1, criterion_partition),
        (2, criterion_bony),
        (3, criterion_para_vector_field),
        (4, criterion_biot_savart),
    ];
    for (id, f) in fast {
        if wants(id) {
            report(f(), id);
        }
    }
    if wants(5) {
        report(criterion_taylor_green(), 5);
    }

    if wants(6) || wants(7) || wants(8) {
        let coarse = persistence(256);
        if wants(6) {
            report(Ok(criterion_transport(&coarse)), 6);
        }
        if wants(7) {
            let fine = persistence(512);
            report(Ok(criterion_persistence(&coarse, Some(&fine))), 7);
        }
        if wants(8) {
            report(Ok(criterion_pde_formula(&coarse)), 8);
        }
    }

    if wants(9) {
        report(criterion_scaling(), 9);
    }
    if wants(10) {
        report(criterion_commutators(), 10);
    }

    let failed = verdicts.iter().filter(|v| !v.passed()).count();
    println!("{} criteria, {failed} failed", verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
