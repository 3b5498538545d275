//! Experiment configuration: TOML file + dotted `key=value` overrides, defaults per experiment,
//! validation (caps before allocation), and the config hash.

use crate::bounds::{BoundParams, ThresholdSource};
use crate::error::{domain, Error, Result};
use crate::evolution::EllPolicy;
use crate::lattice::{RingLattice, MAX_SITES};
use crate::super2::spt::MAX_TWO_COPY_QUBITS;
use crate::super2::MAX_SUPER_SITES;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ScanLr,
    ScanFrobenius,
    Circuitize,
    VerifyLemma,
    VerifySuper2,
    VerifyFidelityChain,
    EndToEnd,
    BoundsTable,
    FitFront,
    SptSwap,
    HaarProjector,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::ScanLr,
        Experiment::ScanFrobenius,
        Experiment::Circuitize,
        Experiment::VerifyLemma,
        Experiment::VerifySuper2,
        Experiment::VerifyFidelityChain,
        Experiment::EndToEnd,
        Experiment::BoundsTable,
        Experiment::FitFront,
        Experiment::SptSwap,
        Experiment::HaarProjector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ScanLr => "scan-lr",
            Experiment::ScanFrobenius => "scan-frobenius",
            Experiment::Circuitize => "circuitize",
            Experiment::VerifyLemma => "verify-lemma",
            Experiment::VerifySuper2 => "verify-super2",
            Experiment::VerifyFidelityChain => "verify-fidelity-chain",
            Experiment::EndToEnd => "end-to-end",
            Experiment::BoundsTable => "bounds-table",
            Experiment::FitFront => "fit-front",
            Experiment::SptSwap => "spt-swap",
            Experiment::HaarProjector => "haar-projector",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::Parse(format!("unknown experiment '{s}'")))
    }

    /// Table-shaped results go to CSV, everything else to JSON.
    pub fn native_format(self) -> Format {
        match self {
            Experiment::ScanLr | Experiment::ScanFrobenius | Experiment::BoundsTable => Format::Csv,
            _ => Format::Json,
        }
    }

    /// Needs the `4L` geometry of the four-block circuit.
    fn needs_blocks(self) -> bool {
        matches!(
            self,
            Experiment::Circuitize | Experiment::VerifyLemma | Experiment::VerifySuper2 | Experiment::VerifyFidelityChain | Experiment::EndToEnd | Experiment::SptSwap
        )
    }

    fn default_n(self) -> usize {
        match self {
            Experiment::SptSwap => 4,
            Experiment::HaarProjector => 6,
            _ => 8,
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Experiment::VerifyLemma => 100,
            Experiment::HaarProjector => 1000,
            _ => 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub n: Option<usize>,
    pub l: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// `nearest-neighbor`, `power-law` or `file`.
    pub kind: String,
    pub alpha: f64,
    pub k: f64,
    /// Coupling seed; the master seed when absent.
    pub seed: Option<u64>,
    pub saturate: bool,
    /// Model JSON, for `kind = "file"`.
    pub file: Option<PathBuf>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: "nearest-neighbor".into(), alpha: 3.0, k: 1.0, seed: None, saturate: true, file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t: f64,
    pub dt: Option<f64>,
    /// Times for scans and end-to-end sweeps; `[t]` for end-to-end when empty.
    pub grid: Vec<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t: 0.5, dt: None, grid: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// Moving operator, text form (`"Z0"`, `"X0 X1"`).
    pub a: String,
    /// Fixed probe for commutator fronts.
    pub b: String,
    pub xs: Vec<i64>,
    pub rs: Vec<usize>,
    /// Also compute operator-norm leakage.
    pub operator: bool,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { a: "Z0".into(), b: "Z0".into(), xs: Vec::new(), rs: Vec::new(), operator: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub alphas: Vec<f64>,
    pub ls: Vec<usize>,
    pub sources: Vec<String>,
    pub conjecture: bool,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            alphas: vec![1.5, 2.0, 2.5, 2.0 + std::f64::consts::FRAC_1_SQRT_2, 3.0, 3.5, 4.0, 5.0],
            ls: vec![2, 4, 8, 16, 32, 64],
            sources: vec!["thm1".into(), "thm4".into(), "thm6".into()],
            conjecture: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// `exponential` (commutator front), `power-law` (operator leakage) or `frobenius` (Frobenius leakage).
    pub model: String,
    /// Shape exponent; the model's α when absent.
    pub alpha: Option<f64>,
}

impl Default for FitSection {
    fn default() -> Self {
        Self { model: "exponential".into(), alpha: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    pub ell_policy: EllPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Stdout when absent.
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub lattice: LatticeSection,
    pub model: ModelSection,
    pub time: TimeSection,
    pub scan: ScanSection,
    pub bounds: BoundsSection,
    pub fit: FitSection,
    pub circuit: CircuitSection,
    pub params: BoundParams,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            samples: None,
            lattice: LatticeSection::default(),
            model: ModelSection::default(),
            time: TimeSection::default(),
            scan: ScanSection::default(),
            bounds: BoundsSection::default(),
            fit: FitSection::default(),
            circuit: CircuitSection::default(),
            params: BoundParams::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parse a `value` the way TOML would; bare words fall back to strings.
fn toml_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Set `a.b.c = value` in a table, creating sections as needed.
pub fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("bad key '{key}'")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        cur = entry.as_table_mut().ok_or_else(|| Error::Parse(format!("'{p}' in '{key}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Apply one `key=value` override.
pub fn apply_override(table: &mut toml::Table, kv: &str) -> Result<()> {
    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("override '{kv}' is not key=value")))?;
    set_dotted(table, k.trim(), toml_value(v.trim()))
}

pub fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path)?;
    text.parse::<toml::Table>().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check the configuration and fill in experiment defaults. Size caps are enforced here,
    /// before anything is allocated.
    pub fn resolve(mut self) -> Result<Resolved> {
        let experiment = self.experiment.ok_or_else(|| Error::Parse("no experiment given".into()))?;
        let n = match (self.lattice.n, self.lattice.l) {
            (Some(n), Some(l)) if n != 4 * l => return domain(format!("lattice.n = {n} but lattice.l = {l}; need n = 4·l")),
            (Some(n), _) => n,
            (None, Some(l)) => 4 * l,
            (None, None) => experiment.default_n(),
        };
        if n > MAX_SITES {
            return Err(Error::Resource(format!("n = {n} exceeds the dense cap of {MAX_SITES} sites")));
        }
        let lattice = RingLattice::new(n)?;
        if experiment.needs_blocks() && (n % 4 != 0 || n < 4) {
            return domain(format!("{} needs n = 4·L, got n = {n}", experiment.name()));
        }
        match experiment {
            Experiment::SptSwap if 2 * n > MAX_TWO_COPY_QUBITS => {
                return Err(Error::Resource(format!("two copies of {n} sites exceed {MAX_TWO_COPY_QUBITS} qubits")));
            }
            Experiment::VerifySuper2 if n / 2 > MAX_SUPER_SITES => {
                return Err(Error::Resource(format!("operator-space scan on {} sites exceeds {MAX_SUPER_SITES}", n / 2)));
            }
            _ => {}
        }
        self.lattice = LatticeSection { n: Some(n), l: (n % 4 == 0).then_some(n / 4) };
        let samples = self.samples.unwrap_or(experiment.default_samples());
        if samples == 0 {
            return domain("samples must be positive");
        }
        self.samples = Some(samples);
        if self.model.seed.is_none() {
            self.model.seed = Some(self.seed);
        }
        match self.model.kind.as_str() {
            "nearest-neighbor" | "power-law" => {}
            "file" if self.model.file.is_some() => {}
            "file" => return domain("model.kind = \"file\" needs model.file"),
            k => return Err(Error::Parse(format!("unknown model.kind '{k}'"))),
        }
        if !(self.time.t >= 0.0 && self.time.t.is_finite()) {
            return domain("time.t must be finite and non-negative");
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) {
                return domain("time.dt must be positive");
            }
        }
        if self.time.grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return domain("time.grid entries must be finite and non-negative");
        }
        for s in &self.bounds.sources {
            ThresholdSource::parse(s)?;
        }
        match self.fit.model.as_str() {
            "exponential" | "power-law" | "frobenius" => {}
            m => return Err(Error::Parse(format!("unknown fit.model '{m}'"))),
        }
        self.params.validate()?;
        let format = self.output.format.unwrap_or(experiment.native_format());
        if format != experiment.native_format() {
            return domain(format!("{} writes {:?}, not {format:?}", experiment.name(), experiment.native_format()));
        }
        self.output.format = Some(format);
        let hash = config_hash(&self);
        Ok(Resolved { cfg: self, experiment, lattice, samples, format, hash })
    }
}

/// SHA-256 over the canonical JSON of everything except the output section, so a result can
/// be reused for a different destination.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = OutputSection::default();
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated configuration with its defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub cfg: ExperimentConfig,
    pub experiment: Experiment,
    pub lattice: RingLattice,
    pub samples: usize,
    pub format: Format,
    pub hash: String,
}
