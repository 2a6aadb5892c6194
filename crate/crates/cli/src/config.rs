//! Experiment configuration: one JSON document per run. Every field has a
//! default, so `{}` is a valid config (the one-qubit `|+⟩` diagonalization).

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;
use vqsd::ansatz::LocalKind;
use vqsd::circuits::{EvalMode, ShotPlan};
use vqsd::optimize::{AnnealSchedule, Method, OptimizerConfig};
use vqsd::qpca::{Estimator, NoiseModel};
use vqsd::random::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    Diagonalize,
    Spectroscopy,
    Landscape,
    QSweep,
    OptimizerBench,
    Qpca,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Diagonalize => "diagonalize",
            Experiment::Spectroscopy => "spectroscopy",
            Experiment::Landscape => "landscape",
            Experiment::QSweep => "q_sweep",
            Experiment::OptimizerBench => "optimizer_bench",
            Experiment::Qpca => "qpca",
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    /// `|+⟩` on one qubit.
    Plus {},
    Basis {
        n: usize,
        index: usize,
    },
    MaximallyMixed {
        n: usize,
    },
    /// Diagonal density matrix with the given probabilities.
    Diagonal {
        probs: Vec<f64>,
    },
    /// `⊗ⱼ Rx(θⱼ)|0⟩`.
    ProductRx {
        angles: Vec<f64>,
    },
    /// `⊗ⱼ Rx·Ry·Rz|0⟩` with angles drawn from the state seed.
    RandomProduct {
        n: usize,
    },
    /// Reduced ground state of the Heisenberg ring.
    Heisenberg {
        sites: usize,
        subsystem: usize,
        #[serde(default = "yes")]
        periodic: bool,
    },
    /// Random density matrix of the given rank.
    Random {
        n: usize,
        rank: usize,
    },
    /// Density-matrix JSON file.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzSettings {
    /// Independent single-qubit rotations. Without `init`, parameters start
    /// uniform in `[0, 2π)`.
    Local {
        local_kind: LocalKind,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    /// Layered two-qubit ansatz. With `growth`, training runs at every row
    /// count from one row up to `2p`.
    Layered {
        p: f64,
        #[serde(default = "yes")]
        growth: bool,
        #[serde(default = "default_init_scale")]
        init_scale: f64,
    },
    /// Annealed structure search over free gate placements.
    Free {
        d_max: usize,
        #[serde(default)]
        schedule: AnnealSchedule,
    },
    /// Ansatz JSON file, trained as loaded.
    File {
        path: PathBuf,
    },
}

fn default_init_scale() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObservableChoice {
    #[default]
    TotalSz,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSettings {
    pub resolution: usize,
    pub param_index: usize,
    /// Sweep every parameter together instead of only `param_index`.
    pub all_params: bool,
    /// Independent cost estimates per angle in sampled mode.
    pub repeats: usize,
}

impl Default for LandscapeSettings {
    fn default() -> Self {
        LandscapeSettings { resolution: 100, param_index: 0, all_params: false, repeats: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QSweepSettings {
    pub sizes: Vec<usize>,
    pub qs: Vec<f64>,
    pub trials: usize,
}

impl Default for QSweepSettings {
    fn default() -> Self {
        QSweepSettings { sizes: vec![6, 8, 10], qs: vec![0.0, 0.5, 1.0], trials: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub methods: Vec<Method>,
    /// Starting parameters are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    pub success_threshold: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings {
            n: 6,
            p: 1.0,
            trials: 10,
            methods: vec![Method::Powell, Method::NelderMead, Method::FdGradient],
            init_scale: PI,
            success_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpcaSettings {
    pub times: Vec<f64>,
    pub ks: Vec<usize>,
    pub noise: NoiseModel,
    pub estimator: Estimator,
    pub noiseless: bool,
    pub noisy: bool,
}

impl Default for QpcaSettings {
    fn default() -> Self {
        QpcaSettings {
            times: (1..=20).map(|i| i as f64 / 20.0).collect(),
            ks: vec![1, 2],
            noise: NoiseModel::default(),
            estimator: Estimator::default(),
            noiseless: true,
            noisy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub state: StateSource,
    pub ansatz: AnsatzSettings,
    pub q: f64,
    pub optimizer: OptimizerConfig,
    pub mode: EvalMode,
    pub shots: u64,
    pub n_readout: u64,
    pub eps_max: f64,
    /// Relative gap below which neighbouring exact-mode estimates share a
    /// degenerate group. Sampled reports use a two-sigma gap instead.
    pub degeneracy_tol: f64,
    pub observable: ObservableChoice,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Real wall-clock values in CSV time columns. Off by default so CSV
    /// bodies are reproducible; times always go to the manifest.
    pub timing: bool,
    pub landscape: LandscapeSettings,
    pub q_sweep: QSweepSettings,
    pub bench: BenchSettings,
    pub qpca: QpcaSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Diagonalize,
            state: StateSource::Plus {},
            ansatz: AnsatzSettings::Local { local_kind: LocalKind::RxHalfPiRz, init: None },
            q: 1.0,
            optimizer: OptimizerConfig::with_method(Method::Powell),
            mode: EvalMode::Exact,
            shots: 10_000,
            n_readout: 10_000,
            eps_max: 0.1,
            degeneracy_tol: 0.05,
            observable: ObservableChoice::TotalSz,
            out_dir: PathBuf::from("out"),
            seed: 0,
            threads: None,
            timing: false,
            landscape: LandscapeSettings::default(),
            q_sweep: QSweepSettings::default(),
            bench: BenchSettings::default(),
            qpca: QpcaSettings::default(),
        }
    }
}

/// Fixed sub-seed indices under the master seed.
pub mod streams {
    pub const STATE: u64 = 0;
    pub const INIT: u64 = 1;
    pub const SHOTS: u64 = 2;
    pub const READOUT: u64 = 3;
    pub const ANNEAL: u64 = 4;
    pub const PURITY: u64 = 5;
    pub const TRIALS: u64 = 1000;
}

pub const PRESETS: &[&str] = &["fig3a", "fig3b", "fig5", "figS2", "figS4", "figS6", "figS7"];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let base = ExperimentConfig::default();
        let cfg = match name {
            "fig3a" => ExperimentConfig { mode: EvalMode::Sampled, ..base },
            "fig3b" => ExperimentConfig { experiment: Experiment::Landscape, mode: EvalMode::Sampled, ..base },
            "fig5" => ExperimentConfig {
                experiment: Experiment::Spectroscopy,
                state: StateSource::Heisenberg { sites: 8, subsystem: 4, periodic: true },
                ansatz: AnsatzSettings::Layered { p: 5.0, growth: true, init_scale: 0.1 },
                optimizer: OptimizerConfig { method: Method::Powell, max_evals: 100_000, ..Default::default() },
                ..base
            },
            "figS2" => ExperimentConfig {
                experiment: Experiment::QSweep,
                ansatz: AnsatzSettings::Local { local_kind: LocalKind::Rx, init: None },
                optimizer: OptimizerConfig { method: Method::Powell, max_evals: 400, ..Default::default() },
                ..base
            },
            "figS4" => ExperimentConfig {
                state: StateSource::Heisenberg { sites: 8, subsystem: 4, periodic: true },
                ansatz: AnsatzSettings::Free {
                    d_max: 4,
                    schedule: AnnealSchedule { initial_gates: 3, stall_patience: 10, max_rounds: 100, ..Default::default() },
                },
                ..base
            },
            "figS6" => ExperimentConfig { experiment: Experiment::OptimizerBench, ..base },
            "figS7" => ExperimentConfig { experiment: Experiment::Qpca, ..base },
            other => {
                return Err(CliError::Config(format!("unknown preset {other:?}; known presets: {}", PRESETS.join(", "))))
            }
        };
        Ok(cfg)
    }

    /// Shot plan for training, seeded from the master seed.
    pub fn plan(&self) -> ShotPlan {
        match self.mode {
            EvalMode::Exact => ShotPlan::exact(),
            EvalMode::Sampled => ShotPlan::sampled(self.shots, derive_seed(self.seed, streams::SHOTS)),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(0.0..=1.0).contains(&self.q) {
            return bad(format!("q = {} is outside [0, 1]", self.q));
        }
        if self.mode == EvalMode::Sampled && self.shots == 0 {
            return bad("sampled mode requires shots ≥ 1".into());
        }
        if self.n_readout == 0 {
            return bad("n_readout must be at least 1".into());
        }
        if !(self.eps_max > 0.0) {
            return bad("eps_max must be positive".into());
        }
        if !(self.degeneracy_tol >= 0.0) {
            return bad("degeneracy_tol must be non-negative".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        self.optimizer.validate().map_err(|e| CliError::Config(format!("optimizer: {e}")))?;
        match &self.state {
            StateSource::File { path } if !path.is_file() => {
                return bad(format!("state file {} does not exist", path.display()));
            }
            _ => {}
        }
        match &self.ansatz {
            AnsatzSettings::Layered { p, init_scale, .. } => {
                let rows = p * 2.0;
                if !(rows >= 1.0) || (rows - rows.round()).abs() > 1e-12 {
                    return bad(format!("layered p = {p} must be a positive half-integer"));
                }
                if !(*init_scale >= 0.0) {
                    return bad("init_scale must be non-negative".into());
                }
            }
            AnsatzSettings::Free { d_max, schedule } => {
                schedule.validate().map_err(|e| CliError::Config(format!("anneal schedule: {e}")))?;
                if *d_max < schedule.initial_gates {
                    return bad(format!("d_max = {d_max} is below initial_gates = {}", schedule.initial_gates));
                }
            }
            AnsatzSettings::File { path } if !path.is_file() => {
                return bad(format!("ansatz file {} does not exist", path.display()));
            }
            _ => {}
        }
        match self.experiment {
            Experiment::Landscape => {
                if self.landscape.resolution == 0 || self.landscape.repeats == 0 {
                    return bad("landscape resolution and repeats must be positive".into());
                }
            }
            Experiment::QSweep => {
                let s = &self.q_sweep;
                if s.sizes.is_empty() || s.qs.is_empty() || s.trials == 0 {
                    return bad("q_sweep needs sizes, qs and trials".into());
                }
                if let Some(q) = s.qs.iter().find(|q| !(0.0..=1.0).contains(*q)) {
                    return bad(format!("q_sweep q = {q} is outside [0, 1]"));
                }
                if let Some(n) = s.sizes.iter().find(|&&n| n == 0 || n > vqsd::state::MAX_QUBITS) {
                    return bad(format!("q_sweep size {n} is unsupported"));
                }
            }
            Experiment::OptimizerBench => {
                let b = &self.bench;
                if b.n < 2 || b.n > vqsd::state::MAX_QUBITS || b.trials == 0 || b.methods.is_empty() {
                    return bad("bench needs 2 ≤ n ≤ 12, trials ≥ 1 and at least one method".into());
                }
                let rows = b.p * 2.0;
                if !(rows >= 1.0) || (rows - rows.round()).abs() > 1e-12 {
                    return bad(format!("bench p = {} must be a positive half-integer", b.p));
                }
                if !(b.init_scale >= 0.0) || !(b.success_threshold > 0.0) {
                    return bad("bench init_scale must be ≥ 0 and success_threshold > 0".into());
                }
            }
            Experiment::Qpca => {
                let s = &self.qpca;
                if s.times.is_empty() || s.ks.is_empty() || !(s.noiseless || s.noisy) {
                    return bad("qpca needs times, ks and at least one of noiseless/noisy".into());
                }
                for &k in &s.ks {
                    for &t in &s.times {
                        let c = vqsd::qpca::QpcaConfig { t, k, noise: Some(s.noise), estimator: s.estimator };
                        c.validate().map_err(|e| CliError::Config(format!("qpca: {e}")))?;
                    }
                }
            }
            Experiment::Diagonalize | Experiment::Spectroscopy => {}
        }
        Ok(())
    }
}
