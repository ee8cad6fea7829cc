//! The flat `section.key = value` configuration read by `patchflow run`,
//! including the errors it reports for bad input.

use patchflow::config::{RunConfig, KEYS};

const CONFIG: &str = "
# a perturbed disc in a gentle strain, short run
grid.n = 128
grid.L = 8
patch.shape = perturbed_disc
patch.radius = 1.0
patch.amplitude = 0.05
solver.dt = 0.01
solver.t_end = 0.2
diagnostics.every = 5
seed = 42
";

fn main() {
    println!("{} recognised keys, e.g. {:?}", KEYS.len(), &KEYS[..4]);
    match RunConfig::parse(CONFIG) {
        Ok(cfg) => println!(
            "n = {}, dt = {}, t_end = {}, shape = {:?}",
            cfg.setup.n, cfg.setup.solver.dt, cfg.setup.solver.t_end, cfg.setup.shape
        ),
        Err(e) => println!("unexpected: {e}"),
    }
    for bad in [
        "grid.n = 128\nsolver.dtt = 0.01",
        "grid.n = -4",
        "grid.L = 8\npatch.shape = disc\npatch.radius = 3.5",
    ] {
        let outcome = RunConfig::parse(bad).and_then(|cfg| cfg.setup.initial_state().map(|_| ()));
        match outcome {
            Ok(()) => println!("accepted: {bad:?}"),
            Err(e) => println!("rejected: {e}"),
        }
    }
}
