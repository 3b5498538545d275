//! Drive an experiment from a TOML configuration in-process, as the `shiftlab` binary does.

use shiftlab::cli::config::ExperimentConfig;
use shiftlab::cli::experiments::run_experiment;
use shiftlab::cli::output::render;

const CONFIG: &str = r#"
experiment = "bounds-table"

[bounds]
alphas = [2.5, 3.0, 4.0]
ls = [8, 64]
sources = ["thm1", "thm4"]

[params]
big_c_prime = 2.0
"#;

fn main() -> shiftlab::Result<()> {
    let r = ExperimentConfig::from_toml(CONFIG)?.resolve()?;
    let out = run_experiment(&r)?;
    print!("{}", render(&out.artifact, r.experiment.name(), &r.hash, &out.violations));
    println!("exit status would be {}", out.exit_code());
    Ok(())
}
