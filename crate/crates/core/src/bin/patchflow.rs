use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use patchflow::acceptance::{
    criterion_pde_formula, criterion_persistence, criterion_transport, run_persistence,
    run_persistence_with_state, ExtraRow, PersistenceSetup,
};
use patchflow::analysis::{analyze, parse_norms};
use patchflow::config::RunConfig;
use patchflow::diagnostics::{save_state, SeriesRow};
use patchflow::spectral::snapshot;
use patchflow::verify::{csv_lines, run_suite, Suite, CSV_HEADER};
use patchflow::Error;

/// Density patches in inhomogeneous incompressible flow on the periodic square.
#[derive(Parser)]
#[command(name = "patchflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured patch and write series.csv, kappa.csv and the final state.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "patchflow-out")]
        out: PathBuf,
    },
    /// Dyadic block table and norms of one snapshot field.
    Analyze {
        snapshot: PathBuf,
        /// `;`-separated items: besov(s,p,r), besov_inh(s,p,r), holder(eps).
        #[arg(long)]
        norms: String,
    },
    /// Property suites; exits with 1 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// End-to-end experiments with a PASS/FAIL verdict per criterion.
    Reproduce {
        experiment: Experiment,
        #[arg(long, default_value = "patchflow-persistence")]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Resolution of the refinement run.
        #[arg(long, default_value_t = 512)]
        refine_n: usize,
        /// Skip the refinement run (its check then fails).
        #[arg(long)]
        no_refine: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Persistence,
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn exit_code(err: &Error) -> u8 {
    if err.is_input_error() {
        2
    } else {
        3
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("PATCHFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config("PATCHFLOW_THREADS", format!("expected a positive integer, got `{raw}`")))?;
    // a second initialisation (only possible in-process) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn progress(row: &SeriesRow, extra: &ExtraRow) {
    eprintln!(
        "t={:.3} holder_X={:.4e} boundary_holder={:.4e} tangency={:.2e} area={:.6} pde_vs_formula={:.2e}",
        row.t,
        row.striated.holder_x,
        row.striated.boundary_holder,
        row.invariants.tangency,
        row.invariants.area,
        extra.pde_formula_l2
    );
}

fn run(config: &Path, out: &Path) -> Result<Outcome, Error> {
    let cfg = RunConfig::from_file(config)?;
    // validate the patch before creating any output
    cfg.setup.initial_state()?;
    fs::create_dir_all(out)?;
    let (run, end) = run_persistence_with_state(&cfg.setup, progress)?;
    fs::write(out.join("series.csv"), run.series_csv())?;
    fs::write(out.join("kappa.csv"), run.kappa_csv())?;
    if cfg.snapshots {
        save_state(&out.join("final"), &end)?;
    }
    eprintln!("wrote {} rows to {}", run.rows.len(), out.join("series.csv").display());
    Ok(Outcome::Ok)
}

fn analyze_cmd(path: &Path, norms: &str) -> Result<Outcome, Error> {
    let specs = parse_norms(norms)?;
    let snap = snapshot::read(path)?;
    let report = analyze(&snap.field, &specs)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(report.csv().as_bytes())?;
    let summary = serde_json::json!({
        "field": snap.header.name,
        "t": snap.header.t,
        "n": snap.header.n,
        "L": snap.header.length,
        "norms": report.summary,
    });
    writeln!(stdout, "{summary}")?;
    Ok(Outcome::Ok)
}

fn verify(suite: &str) -> Result<Outcome, Error> {
    let suite: Suite = suite.parse()?;
    println!("{CSV_HEADER}");
    let results = run_suite(suite, |name, v| {
        for line in csv_lines(name, v) {
            println!("{line}");
        }
    })?;
    let failed = results.iter().filter(|(_, v)| !v.passed()).count();
    eprintln!("{} checks, {failed} failed", results.len());
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::ChecksFailed })
}

fn reproduce(out: &Path, n: usize, refine_n: usize, no_refine: bool) -> Result<Outcome, Error> {
    fs::create_dir_all(out)?;
    let setup = PersistenceSetup::default().with_resolution(n);
    eprintln!("persistence run at n = {n}");
    let run = run_persistence(&setup, progress)?;
    fs::write(out.join("series.csv"), run.series_csv())?;
    fs::write(out.join("kappa.csv"), run.kappa_csv())?;
    let refined = if no_refine {
        None
    } else {
        eprintln!("refinement run at n = {refine_n}");
        let fine = run_persistence(&setup.with_resolution(refine_n), progress)?;
        fs::write(out.join("series_refined.csv"), fine.series_csv())?;
        Some(fine)
    };
    let verdicts = [
        criterion_transport(&run),
        criterion_persistence(&run, refined.as_ref()),
        criterion_pde_formula(&run),
    ];
    let mut text = String::new();
    for v in &verdicts {
        println!("{}", v.line());
        text.push_str(&v.line());
        text.push('\n');
    }
    fs::write(out.join("verdicts.txt"), text)?;
    Ok(if verdicts.iter().all(|v| v.passed()) {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Analyze { snapshot, norms } => analyze_cmd(snapshot, norms),
        Command::Verify { suite } => verify(suite),
        Command::Reproduce {
            experiment: Experiment::Persistence,
            out,
            n,
            refine_n,
            no_refine,
        } => reproduce(out, *n, *refine_n, *no_refine),
    });
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
