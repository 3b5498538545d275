//! The `shiftlab` command line: one subcommand per experiment plus `run --config`.
//!
//! Exit codes: 0 all certificates hold; 1 a certificate failed (the inequality is printed)
//! or the computation itself failed; 2 bad usage, configuration or domain; 3 size cap.

pub mod config;
pub mod experiments;
pub mod output;

use crate::error::Error;
use clap::{Args, Parser, Subcommand};
use config::{apply_override, read_table, set_dotted, Experiment, ExperimentConfig, Format, Resolved};
use output::{atomic_write, cache_load, cache_root, cache_store, record_json, record_path, render, RunRecord, TOOL, VERSION};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "shiftlab", version, about = "Exact small-ring experiments on how fast local dynamics can shift a ring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment named in the config file.
    Run(CommonArgs),
    /// Commutator front ‖[A_x(t), B_0]‖ on a (t, x) grid.
    ScanLr(CommonArgs),
    /// Leakage of A(t) outside its grown support on a (t, r) grid.
    ScanFrobenius(CommonArgs),
    /// Block-circuit approximation of e^{-iHT} with error certificates.
    Circuitize(CommonArgs),
    /// Trace-distance certificate for random four-block circuits.
    VerifyLemma(CommonArgs),
    /// Operator-space certificate and exhaustive Pauli scan.
    VerifySuper2(CommonArgs),
    /// Fidelity chain down to ‖Ũ − U_sh‖_F ≥ 1/4.
    VerifyFidelityChain(CommonArgs),
    /// Evolve, circuitize and bound ‖U − U_sh‖ from below.
    EndToEnd(CommonArgs),
    /// Hardness time thresholds over (α, L, source).
    BoundsTable(CommonArgs),
    /// Fit light-cone constants to a scan and check they majorize it.
    FitFront(CommonArgs),
    /// Two-copy SWAP string checks.
    SptSwap(CommonArgs),
    /// Haar twirl versus exact region projector.
    HaarProjector(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Override any key, e.g. `--set model.alpha=2.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(short, long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Recompute even when a cached result exists.
    #[arg(long)]
    pub force: bool,
}

impl Command {
    fn split(self) -> (Option<Experiment>, CommonArgs) {
        use Command::*;
        match self {
            Run(a) => (None, a),
            ScanLr(a) => (Some(Experiment::ScanLr), a),
            ScanFrobenius(a) => (Some(Experiment::ScanFrobenius), a),
            Circuitize(a) => (Some(Experiment::Circuitize), a),
            VerifyLemma(a) => (Some(Experiment::VerifyLemma), a),
            VerifySuper2(a) => (Some(Experiment::VerifySuper2), a),
            VerifyFidelityChain(a) => (Some(Experiment::VerifyFidelityChain), a),
            EndToEnd(a) => (Some(Experiment::EndToEnd), a),
            BoundsTable(a) => (Some(Experiment::BoundsTable), a),
            FitFront(a) => (Some(Experiment::FitFront), a),
            SptSwap(a) => (Some(Experiment::SptSwap), a),
            HaarProjector(a) => (Some(Experiment::HaarProjector), a),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) => EXIT_USAGE,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Numerical(_) | Error::Fit(_) | Error::Io(_) => EXIT_CERT,
    }
}

/// Config file, then flags, then `--set` overrides; a subcommand fixes the experiment.
pub fn build_config(experiment: Option<Experiment>, args: &CommonArgs) -> crate::Result<ExperimentConfig> {
    let mut table = match &args.config {
        Some(p) => read_table(p)?,
        None => toml::Table::new(),
    };
    if let Some(e) = experiment {
        if let Some(prev) = table.get("experiment").and_then(|v| v.as_str()) {
            if prev != e.name() {
                return Err(Error::Parse(format!("config names experiment '{prev}' but the subcommand is '{}'", e.name())));
            }
        }
        set_dotted(&mut table, "experiment", toml::Value::String(e.name().into()))?;
    }
    let int = |x: u64| toml::Value::Integer(x.min(i64::MAX as u64) as i64);
    if let Some(n) = args.n {
        set_dotted(&mut table, "lattice.n", int(n as u64))?;
    }
    if let Some(l) = args.l {
        set_dotted(&mut table, "lattice.l", int(l as u64))?;
    }
    if let Some(s) = args.seed {
        set_dotted(&mut table, "seed", int(s))?;
    }
    if let Some(s) = args.samples {
        set_dotted(&mut table, "samples", int(s as u64))?;
    }
    if let Some(o) = &args.output {
        set_dotted(&mut table, "output.path", toml::Value::String(o.to_string_lossy().into_owned()))?;
    }
    if let Some(f) = args.format {
        set_dotted(&mut table, "output.format", toml::Value::String(if f == Format::Csv { "csv" } else { "json" }.into()))?;
    }
    for kv in &args.set {
        apply_override(&mut table, kv)?;
    }
    let cfg = ExperimentConfig::from_table(table)?;
    if cfg.experiment.is_none() {
        return Err(Error::Parse("no experiment: use a subcommand or set `experiment` in the config".into()));
    }
    Ok(cfg)
}

fn deliver(r: &Resolved, text: &str, record: &RunRecord) -> crate::Result<()> {
    match &r.cfg.output.path {
        Some(p) => {
            atomic_write(p, text.as_bytes())?;
            atomic_write(&record_path(p), record_json(record).as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn report(violations: &[String]) {
    for v in violations {
        eprintln!("{TOOL}: certificate violated: {v}");
    }
}

/// Run a resolved configuration: cache lookup, compute, write. Returns the exit status.
pub fn execute(r: &Resolved, force: bool) -> crate::Result<i32> {
    let cache = cache_root();
    if let (Some(root), false) = (&cache, force) {
        if let Some(hit) = cache_load(root, &r.hash) {
            eprintln!("{TOOL}: reusing cached result {} (use --force to recompute)", r.hash);
            let mut record = hit.record;
            record.config = serde_json::to_value(&r.cfg).expect("json");
            deliver(r, &hit.text, &record)?;
            report(&record.violations);
            return Ok(record.exit_code);
        }
    }
    let outcome = experiments::run_experiment(r)?;
    let code = outcome.exit_code();
    let text = render(&outcome.artifact, r.experiment.name(), &r.hash, &outcome.violations);
    let record = RunRecord {
        tool: TOOL.into(),
        version: VERSION.into(),
        experiment: r.experiment.name().into(),
        config_hash: r.hash.clone(),
        config: serde_json::to_value(&r.cfg).expect("json"),
        exit_code: code,
        violations: outcome.violations.clone(),
    };
    if let Some(root) = &cache {
        cache_store(root, &r.hash, &text, &record)?;
    }
    deliver(r, &text, &record)?;
    report(&outcome.violations);
    Ok(code)
}

/// Entry point for the binary; never panics on bad input.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (experiment, args) = cli.command.split();
    let res = build_config(experiment, &args).and_then(|c| c.resolve()).and_then(|r| execute(&r, args.force));
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{TOOL}: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_set_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "experiment = \"verify-lemma\"\nseed = 1\n[lattice]\nl = 2\n").unwrap();
        let args = CommonArgs { config: Some(p.clone()), seed: Some(5), set: vec!["seed=9".into(), "samples=3".into()], ..Default::default() };
        let c = build_config(None, &args).unwrap();
        assert_eq!((c.seed, c.samples, c.lattice.l), (9, Some(3), Some(2)));
        // subcommand must agree with the file
        assert!(build_config(Some(Experiment::ScanLr), &CommonArgs { config: Some(p), ..Default::default() }).is_err());
        assert!(build_config(None, &CommonArgs::default()).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with(["shiftlab", "no-such-thing"]), EXIT_USAGE);
        assert_eq!(main_with(["shiftlab", "scan-lr", "--n", "14"]), EXIT_RESOURCE);
        assert_eq!(main_with(["shiftlab", "verify-lemma", "--n", "8", "--l", "3"]), EXIT_USAGE);
        assert_eq!(main_with(["shiftlab", "run", "--set", "experiment=bogus"]), EXIT_USAGE);
        assert_eq!(main_with(["shiftlab", "--version"]), EXIT_OK);
    }
}
