//! Command execution: argument structs shared by the CLI parser and the
//! JSON config format, plus the dispatch onto the library.

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use postulatelab::gpt::{random_effect_functions, space_dimensions, OutcomeFn};
use postulatelab::readout::{
    detect_signalling, m_fpem, quadratic_fit_residual, sequential_spo_then_povm, Device,
    EntropyBin, OutcomeKey, ProperMixture,
};
use postulatelab::linalg::{c, CMatrix, CVector};
use postulatelab::quantum::{EntropyKind, Povm, PureState, Subsystem};
use postulatelab::span::{classify, rank_profile, Classification, FunctionFamily};
use postulatelab::star::{check_axioms, check_no_signalling, StarProduct};

/// Report envelope; `schema_version` guards stored runs against format
/// drift.
#[derive(Serialize)]
pub struct Outcome {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub params: Value,
    pub passed: bool,
    pub result: Value,
    #[serde(skip)]
    pub csv: String,
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone)]
pub enum CommandConfig {
    CheckAxioms(CheckAxiomsArgs),
    NoSignalling(NoSignallingArgs),
    Signalling(SignallingArgs),
    Spo(SpoArgs),
    Fpem(FpemArgs),
    SpanRank(SpanRankArgs),
    SpaceDims(SpaceDimsArgs),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::CheckAxioms(_) => "check-axioms",
            CommandConfig::NoSignalling(_) => "no-signalling",
            CommandConfig::Signalling(_) => "signalling",
            CommandConfig::Spo(_) => "spo",
            CommandConfig::Fpem(_) => "fpem",
            CommandConfig::SpanRank(_) => "span-rank",
            CommandConfig::SpaceDims(_) => "space-dims",
        }
    }
}

/// On-disk config: `{"command": "...", "seed": 7, "params": {...}}`.
/// Unknown parameter fields are rejected with the field name.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Value,
}

pub fn from_config(file: &ConfigFile) -> anyhow::Result<CommandConfig> {
    let params = if file.params.is_null() { json!({}) } else { file.params.clone() };
    let config = match file.command.as_str() {
        "check-axioms" => CommandConfig::CheckAxioms(serde_json::from_value(params)?),
        "no-signalling" => CommandConfig::NoSignalling(serde_json::from_value(params)?),
        "signalling" => CommandConfig::Signalling(serde_json::from_value(params)?),
        "spo" => CommandConfig::Spo(serde_json::from_value(params)?),
        "fpem" => CommandConfig::Fpem(serde_json::from_value(params)?),
        "span-rank" => CommandConfig::SpanRank(serde_json::from_value(params)?),
        "space-dims" => CommandConfig::SpaceDims(serde_json::from_value(params)?),
        other => bail!("unknown command '{other}' in config"),
    };
    validate(&config)?;
    Ok(config)
}

macro_rules! require {
    ($cond:expr, $($msg:tt)*) => {
        if !($cond) {
            bail!($($msg)*);
        }
    };
}

/// Config invariants, checked before any work starts.
pub fn validate(config: &CommandConfig) -> anyhow::Result<()> {
    match config {
        CommandConfig::CheckAxioms(a) => {
            require!(a.tol > 0.0, "field 'tol' must be > 0");
            require!(a.trials >= 1, "field 'trials' must be >= 1");
            require!(a.dims.len() == 3, "field 'dims' must list three dimensions");
            require!(a.dims.iter().all(|&d| d >= 2), "field 'dims' entries must be >= 2");
            parse_star(&a.star, a.epsilon, a.factor)?;
        }
        CommandConfig::NoSignalling(a) => {
            require!(a.tol > 0.0, "field 'tol' must be > 0");
            require!(a.trials >= 1, "field 'trials' must be >= 1");
            require!(a.dims.len() == 2, "field 'dims' must list two dimensions");
            require!(a.dims.iter().all(|&d| d >= 2), "field 'dims' entries must be >= 2");
            parse_star(&a.star, a.epsilon, a.factor)?;
        }
        CommandConfig::Signalling(a) => {
            require!(a.tol > 0.0, "field 'tol' must be > 0");
            require!(a.precision > 0.0, "field 'precision' must be > 0");
            parse_state(&a.state)?;
            parse_remote(&a.remote)?;
            parse_device(&a.device, a.precision)?;
        }
        CommandConfig::Spo(a) => {
            require!((0.0..=1.0).contains(&a.p0), "field 'p0' must lie in [0, 1]");
            require!(a.threshold > 0.0, "field 'threshold' must be > 0");
            require!(a.samples >= 16, "field 'samples' must be >= 16");
        }
        CommandConfig::Fpem(a) => {
            require!((0.0..=1.0).contains(&a.p), "field 'p' must lie in [0, 1]");
            parse_entropy(&a.entropy)?;
            parse_side(&a.side)?;
        }
        CommandConfig::SpanRank(a) => {
            require!(a.tol > 0.0, "field 'tol' must be > 0");
            require!(a.n >= 1, "field 'n' must be >= 1");
            EntropyBin::from_value(a.bin).map_err(|e| anyhow!("field 'bin': {e}"))?;
            parse_family(&a.family, a.bin)?;
        }
        CommandConfig::SpaceDims(a) => {
            require!(a.tol > 0.0, "field 'tol' must be > 0");
            require!(a.dim >= 2, "field 'dim' must be >= 2");
            require!(a.functions >= 1, "field 'functions' must be >= 1");
        }
    }
    Ok(())
}

// --- per-command argument structs -----------------------------------------

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckAxiomsArgs {
    /// Composition rule: quantum | broken | scaled
    #[arg(long, default_value = "quantum")]
    pub star: String,
    /// Cross-term weight of the broken rule
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Scale of the scaled rule
    #[arg(long, default_value_t = 0.99)]
    pub factor: f64,
    /// Local dimensions a,b,c
    #[arg(long, value_delimiter = ',', num_args = 1..=3, default_values_t = vec![2, 2, 2])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Max tolerated violation
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

impl Default for CheckAxiomsArgs {
    fn default() -> Self {
        Self {
            star: "quantum".into(),
            epsilon: 0.01,
            factor: 0.99,
            dims: vec![2, 2, 2],
            trials: 1000,
            tol: 1e-9,
        }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoSignallingArgs {
    /// Composition rule: quantum | broken | scaled
    #[arg(long, default_value = "quantum")]
    pub star: String,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.99)]
    pub factor: f64,
    /// Local dimensions a,b
    #[arg(long, value_delimiter = ',', num_args = 1..=2, default_values_t = vec![2, 2])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

impl Default for NoSignallingArgs {
    fn default() -> Self {
        Self {
            star: "quantum".into(),
            epsilon: 0.01,
            factor: 0.99,
            dims: vec![2, 2],
            trials: 1000,
            tol: 1e-9,
        }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignallingArgs {
    /// Two-qubit preparation: bell | product | weighted:P
    #[arg(long, default_value = "bell")]
    pub state: String,
    /// Remote projective basis on B: z | x | trivial
    #[arg(long, default_value = "z")]
    pub remote: String,
    /// Readout on A: sr | fpem-vn | fpem-r2 | born
    #[arg(long, default_value = "sr")]
    pub device: String,
    /// Entrywise rounding of state-readout outcomes
    #[arg(long, default_value_t = 1e-6)]
    pub precision: f64,
    /// TV distance above this flags signalling
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

impl Default for SignallingArgs {
    fn default() -> Self {
        Self {
            state: "bell".into(),
            remote: "z".into(),
            device: "sr".into(),
            precision: 1e-6,
            tol: 1e-9,
        }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpoArgs {
    /// Ground-state population of the qubit (0.5 is the balanced state)
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// Haar samples for the quadratic-form fit
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Residual above this certifies non-quadratic statistics
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
}

impl Default for SpoArgs {
    fn default() -> Self {
        Self { p0: 0.5, samples: 256, threshold: 0.01 }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpemArgs {
    /// Schmidt weight of sqrt(P)|00> + sqrt(1-P)|11>
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    /// vn | renyi2
    #[arg(long, default_value = "vn")]
    pub entropy: String,
    /// Side fed to the meter: a | b
    #[arg(long, default_value = "a")]
    pub side: String,
}

impl Default for FpemArgs {
    fn default() -> Self {
        Self { p: 0.2, entropy: "vn".into(), side: "a".into() }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpanRankArgs {
    /// born | k2 | entropy-bin | renyi-bin | constant
    #[arg(long, default_value = "entropy-bin")]
    pub family: String,
    /// Family members to profile
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Fixed Haar sample states (>= 4n)
    #[arg(long, default_value_t = 256)]
    pub m: usize,
    /// Bin selected by the indicator families
    #[arg(long, default_value_t = 0.99)]
    pub bin: f64,
    /// Relative singular-value threshold
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl Default for SpanRankArgs {
    fn default() -> Self {
        Self { family: "entropy-bin".into(), n: 32, m: 256, bin: 0.99, tol: 1e-8 }
    }
}

#[derive(clap::Args, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceDimsArgs {
    /// Hilbert-space dimension
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Random rank-1 effects (the unit outcome is always included)
    #[arg(long, default_value_t = 12)]
    pub functions: usize,
    /// Haar sample states (>= 10 x family size)
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Relative singular-value threshold
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl Default for SpaceDimsArgs {
    fn default() -> Self {
        Self { dim: 2, functions: 12, samples: 200, tol: 1e-8 }
    }
}

// --- flag-value parsing -----------------------------------------------------

fn parse_star(value: &str, epsilon: f64, factor: f64) -> anyhow::Result<StarProduct> {
    match value {
        "quantum" => Ok(StarProduct::quantum()),
        "broken" => Ok(StarProduct::broken_bilinear(epsilon)),
        "scaled" => Ok(StarProduct::scaled(factor)),
        other => bail!("field 'star': unknown rule '{other}' (quantum | broken | scaled)"),
    }
}

fn parse_state(value: &str) -> anyhow::Result<PureState> {
    match value {
        "bell" => Ok(PureState::maximally_entangled(2)),
        "product" => Ok(PureState::basis(2, 0).tensor(&PureState::basis(2, 0))),
        other => {
            let p = other
                .strip_prefix("weighted:")
                .ok_or_else(|| {
                    anyhow!("field 'state': unknown value '{other}' (bell | product | weighted:P)")
                })?
                .parse::<f64>()
                .context("field 'state': weighted:P needs a number")?;
            require!((0.0..=1.0).contains(&p), "field 'state': P must lie in [0, 1]");
            Ok(weighted_pair(p))
        }
    }
}

/// `sqrt(p)|00> + sqrt(1-p)|11>`
fn weighted_pair(p: f64) -> PureState {
    PureState::new(CVector::from_vec(vec![
        c(p.sqrt(), 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c((1.0 - p).sqrt(), 0.0),
    ]))
    .expect("normalized by construction")
}

fn parse_remote(value: &str) -> anyhow::Result<Povm> {
    match value {
        "z" => Ok(Povm::computational(2)),
        "x" => {
            let h = CMatrix::from_row_slice(
                2,
                2,
                &[
                    c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    c(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ],
            );
            Ok(Povm::basis_projectors(&h).expect("Hadamard is unitary"))
        }
        "trivial" => Ok(Povm::trivial(2)),
        other => bail!("field 'remote': unknown basis '{other}' (z | x | trivial)"),
    }
}

fn parse_device(value: &str, precision: f64) -> anyhow::Result<Device> {
    match value {
        "sr" => Ok(Device::StateReadout { precision }),
        "fpem-vn" => Ok(Device::EntropyMeter {
            side: Subsystem::A,
            entropy: EntropyKind::VonNeumann,
        }),
        "fpem-r2" => Ok(Device::EntropyMeter { side: Subsystem::A, entropy: EntropyKind::Renyi2 }),
        "born" => Ok(Device::BornMarginal { povm: Povm::computational(2) }),
        other => bail!("field 'device': unknown device '{other}' (sr | fpem-vn | fpem-r2 | born)"),
    }
}

fn parse_entropy(value: &str) -> anyhow::Result<EntropyKind> {
    match value {
        "vn" => Ok(EntropyKind::VonNeumann),
        "renyi2" => Ok(EntropyKind::Renyi2),
        other => bail!("field 'entropy': unknown kind '{other}' (vn | renyi2)"),
    }
}

fn parse_side(value: &str) -> anyhow::Result<Subsystem> {
    match value {
        "a" => Ok(Subsystem::A),
        "b" => Ok(Subsystem::B),
        other => bail!("field 'side': unknown side '{other}' (a | b)"),
    }
}

fn parse_family(value: &str, bin: f64) -> anyhow::Result<FunctionFamily> {
    let bin = EntropyBin::from_value(bin).map_err(|e| anyhow!("field 'bin': {e}"))?;
    match value {
        "born" => Ok(FunctionFamily::born_qubit()),
        "k2" => Ok(FunctionFamily::power_two_qubit()),
        "entropy-bin" => Ok(FunctionFamily::entropy_bin(bin, EntropyKind::VonNeumann)),
        "renyi-bin" => Ok(FunctionFamily::renyi_family(bin)),
        "constant" => Ok(FunctionFamily::constant_unit(2)),
        other => bail!(
            "field 'family': unknown family '{other}' (born | k2 | entropy-bin | renyi-bin | constant)"
        ),
    }
}

fn outcome_key_label(key: &OutcomeKey, dim: usize) -> String {
    match key {
        OutcomeKey::Bin(bin) => format!("bin:{bin}"),
        OutcomeKey::Index(i) => format!("index:{i}"),
        OutcomeKey::Matrix(_) => {
            let m = key.matrix(dim).expect("matrix key has dim x dim entries");
            let mut entries = Vec::with_capacity(dim * dim);
            for r in 0..dim {
                for col in 0..dim {
                    let z = m[(r, col)];
                    entries.push(format!("{:+}{:+}i", z.re, z.im));
                }
            }
            format!("matrix:{}", entries.join(";"))
        }
    }
}

// --- execution --------------------------------------------------------------

pub fn execute(
    config: &CommandConfig,
    seed: u64,
    threads: usize,
    command: &str,
) -> anyhow::Result<Outcome> {
    validate(config)?;
    let (params, passed, result, csv) = match config {
        CommandConfig::CheckAxioms(a) => {
            let star = parse_star(&a.star, a.epsilon, a.factor)?;
            let dims = (a.dims[0], a.dims[1], a.dims[2]);
            let report = check_axioms(&star, dims, a.trials, seed, a.tol)?;
            let mut csv = String::from("axiom,violation\n");
            for (axiom, violation) in &report.violations {
                csv.push_str(&format!("{axiom},{violation:e}\n"));
            }
            (serde_json::to_value(a)?, report.passed(), serde_json::to_value(&report)?, csv)
        }
        CommandConfig::NoSignalling(a) => {
            let star = parse_star(&a.star, a.epsilon, a.factor)?;
            let violation = check_no_signalling(&star, (a.dims[0], a.dims[1]), a.trials, seed)?;
            let passed = violation <= a.tol;
            let result = json!({
                "star": star.label(),
                "dims": a.dims,
                "trials": a.trials,
                "seed": seed,
                "tol": a.tol,
                "violation": violation,
            });
            let csv = format!("check,violation\nno-signalling,{violation:e}\n");
            (serde_json::to_value(a)?, passed, result, csv)
        }
        CommandConfig::Signalling(a) => {
            let psi = parse_state(&a.state)?;
            let remote = parse_remote(&a.remote)?;
            let device = parse_device(&a.device, a.precision)?;
            let report = detect_signalling(&psi, (2, 2), &remote, &device, a.tol)?;
            let mut csv = String::from("outcome,baseline,post\n");
            let mut keys: Vec<OutcomeKey> =
                report.baseline.entries().map(|(k, _)| k.clone()).collect();
            for (k, _) in report.post_measurement.entries() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
            keys.sort();
            for k in &keys {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    outcome_key_label(k, 2),
                    report.baseline.prob(k),
                    report.post_measurement.prob(k)
                ));
            }
            let passed = !report.signalling;
            (serde_json::to_value(a)?, passed, serde_json::to_value(&report)?, csv)
        }
        CommandConfig::Spo(a) => {
            let psi = PureState::new(CVector::from_vec(vec![
                c(a.p0.sqrt(), 0.0),
                c((1.0 - a.p0).sqrt(), 0.0),
            ]))?;
            let z = Povm::computational(2);
            let joint = sequential_spo_then_povm(&psi, &z, &z)?;

            let joint_cell = OutcomeFn::new(
                "seq-joint-00",
                2,
                std::sync::Arc::new(move |state: &PureState| {
                    sequential_spo_then_povm(state, &Povm::computational(2), &Povm::computational(2))
                        .expect("qubit POVMs match")
                        .prob(0, 0)
                }),
            );
            let fit = quadratic_fit_residual(&joint_cell, a.samples, seed)?;

            let e0 = postulatelab::linalg::basis_vector(2, 0);
            let born_fn = OutcomeFn::from_effect("born-00", postulatelab::linalg::outer(&e0, &e0))?;
            let born_fit = quadratic_fit_residual(&born_fn, a.samples, seed.wrapping_add(1))?;

            let nonquadratic = fit.relative_residual > a.threshold;
            let result = json!({
                "state_p0": a.p0,
                "joint": joint.probs,
                "joint_total": joint.total(),
                "joint_cell_residual": fit.relative_residual,
                "born_control_residual": born_fit.relative_residual,
                "threshold": a.threshold,
                "nonquadratic_statistics": nonquadratic,
            });
            let mut csv = String::from("j,i,probability\n");
            for (j, row) in joint.probs.iter().enumerate() {
                for (i, p) in row.iter().enumerate() {
                    csv.push_str(&format!("{j},{i},{p}\n"));
                }
            }
            csv.push_str(&format!("residual-joint-cell,,{:e}\n", fit.relative_residual));
            csv.push_str(&format!("residual-born-control,,{:e}\n", born_fit.relative_residual));
            // the requested check: quadratic fit within threshold
            (serde_json::to_value(a)?, !nonquadratic, result, csv)
        }
        CommandConfig::Fpem(a) => {
            let entropy = parse_entropy(&a.entropy)?;
            let side = parse_side(&a.side)?;
            let mixture = ProperMixture::from_pure(weighted_pair(a.p), (2, 2))?;
            let dist = m_fpem(&mixture, side, entropy)?;
            let mut csv = String::from("bin,probability\n");
            for (k, p) in dist.entries() {
                csv.push_str(&format!("{},{p}\n", outcome_key_label(k, 2)));
            }
            let result = json!({
                "p": a.p,
                "entropy": a.entropy,
                "side": a.side,
                "distribution": dist,
            });
            (serde_json::to_value(a)?, true, result, csv)
        }
        CommandConfig::SpanRank(a) => {
            let family = parse_family(&a.family, a.bin)?;
            let profile = rank_profile(&family, a.n, a.m, seed, a.tol)?;
            let classification = classify(&profile)?;
            let conclusive = !matches!(classification, Classification::Inconclusive { .. });
            let mut csv_bytes = Vec::new();
            profile.write_csv(&mut csv_bytes)?;
            let result = json!({
                "profile": profile,
                "classification": classification,
            });
            (serde_json::to_value(a)?, conclusive, result, String::from_utf8(csv_bytes)?)
        }
        CommandConfig::SpaceDims(a) => {
            let functions = random_effect_functions(a.dim, a.functions, seed);
            let dims = space_dimensions(&functions, a.samples, seed, a.tol)?;
            let duality = dims.dim_effects == dims.dim_states + 1;
            let passed = dims.conclusive && duality;
            let csv = format!(
                "key,value\ndim-states,{}\ndim-effects,{}\nconclusive,{}\nduality-holds,{}\n",
                dims.dim_states, dims.dim_effects, dims.conclusive, duality
            );
            let result = json!({
                "dims": dims,
                "duality_holds": duality,
            });
            (serde_json::to_value(a)?, passed, result, csv)
        }
    };
    Ok(Outcome {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        seed,
        threads,
        params,
        passed,
        result,
        csv,
    })
}
