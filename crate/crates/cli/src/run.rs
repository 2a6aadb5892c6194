//! Experiment runners. Each returns its artifacts in memory; nothing touches
//! the disk until [`write_artifacts`].

use crate::config::{streams, AnsatzSettings, Experiment, ExperimentConfig, ObservableChoice, StateSource};
use crate::CliError;
use rand::Rng as _;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vqsd::ansatz::{Diagonalizer, LocalAnsatz, LocalKind, ParamAnsatz};
use vqsd::circuits::ShotPlan;
use vqsd::cost::{eigenvalue_error, rotate, CostContext};
use vqsd::io::{density_from_json, fmt_f64, CsvWriter};
use vqsd::models::{product_state, reduced_ground_state, total_sz, ProductAngles, SpinChainSpec};
use vqsd::optimize::{
    annealed_structure_search, layer_growth_train, train, OptimizationTrace, OptimizerConfig,
};
use vqsd::qpca::{qpca_csv, qpca_one_bit, QpcaConfig};
use vqsd::random::{derive_seed, random_density, seeded, substream};
use vqsd::readout::{
    eigenvalue_report_csv, exact_eigenvalues, group_degenerate, infer_eigenvalues, observable_report,
    observable_report_csv, resolve_in_span, threshold, two_sigma, EigenEstimate,
};
use vqsd::state::QuantumState;
use vqsd::{CMatrix, CVector, C64};

/// Files of one run, keyed by path relative to the output directory, plus the
/// manifest written as `manifest.json`.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, String)>,
    pub manifest: Value,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts { files: Vec::new(), manifest: json!({}) }
    }

    fn add(&mut self, path: impl Into<PathBuf>, body: String) {
        self.files.push((path.into(), body));
    }

    /// Body of the file at `path`, if present.
    pub fn file(&self, path: &str) -> Option<&str> {
        self.files.iter().find(|(p, _)| p == Path::new(path)).map(|(_, b)| b.as_str())
    }

    /// Manifest entry under `results`.
    pub fn result(&self, key: &str) -> &Value {
        &self.manifest["results"][key]
    }
}

pub fn write_artifacts(out_dir: &Path, art: &Artifacts) -> Result<(), CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::Runtime(format!("writing {}: {e}", p.display()));
    for (rel, body) in &art.files {
        let path = out_dir.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        }
        std::fs::write(&path, body).map_err(|e| io(e, &path))?;
    }
    std::fs::create_dir_all(out_dir).map_err(|e| io(e, out_dir))?;
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&art.manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| io(e, &path))
}

/// Validates `cfg` and runs its experiment on a pool capped at `cfg.threads`.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut art = pool.install(|| match cfg.experiment {
        Experiment::Diagonalize | Experiment::Spectroscopy => run_diagonalize(cfg),
        Experiment::Landscape => run_landscape(cfg),
        Experiment::QSweep => run_q_sweep(cfg),
        Experiment::OptimizerBench => run_optimizer_bench(cfg),
        Experiment::Qpca => run_qpca(cfg),
    })?;
    let results = std::mem::take(&mut art.manifest);
    art.manifest = json!({
        "tool": "vqsd",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "seeds": {
            "master": cfg.seed,
            "state": derive_seed(cfg.seed, streams::STATE),
            "init": derive_seed(cfg.seed, streams::INIT),
            "shots": derive_seed(cfg.seed, streams::SHOTS),
            "readout": derive_seed(cfg.seed, streams::READOUT),
            "anneal": derive_seed(cfg.seed, streams::ANNEAL),
            "purity": derive_seed(cfg.seed, streams::PURITY),
        },
        "wall_time": start.elapsed().as_secs_f64(),
        "files": art.files.iter().map(|(p, _)| p.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "results": results,
    });
    Ok(art)
}

fn config_err(e: vqsd::VqsdError) -> CliError {
    CliError::Config(format!("state: {e}"))
}

/// Builds the input state from the config's source.
pub fn build_state(cfg: &ExperimentConfig) -> Result<QuantumState, CliError> {
    let mut rng = substream(cfg.seed, streams::STATE);
    let state = match &cfg.state {
        StateSource::Plus {} => {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            QuantumState::pure(CVector::from_vec(vec![h, h]))?
        }
        StateSource::Basis { n, index } => {
            if *n == 0 || *n > vqsd::state::MAX_QUBITS || *index >= 1usize << n {
                return Err(CliError::Config(format!("state: basis index {index} on {n} qubits is out of range")));
            }
            QuantumState::basis(*n, *index)
        }
        StateSource::MaximallyMixed { n } => {
            if *n == 0 || *n > vqsd::state::MAX_QUBITS {
                return Err(CliError::Config(format!("state: unsupported qubit count {n}")));
            }
            QuantumState::maximally_mixed(*n)
        }
        StateSource::Diagonal { probs } => {
            if probs.len() < 2 || !probs.len().is_power_of_two() {
                return Err(CliError::Config("state: diagonal needs 2^n probabilities".into()));
            }
            let d = CVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
            QuantumState::density(CMatrix::from_diagonal(&d)).map_err(config_err)?
        }
        StateSource::ProductRx { angles } => product_state(&ProductAngles::Rx(angles.clone())).map_err(config_err)?,
        StateSource::RandomProduct { n } => {
            product_state(&ProductAngles::random_xyz(*n, &mut rng)).map_err(config_err)?
        }
        StateSource::Heisenberg { sites, subsystem, periodic } => {
            let spec = SpinChainSpec { sites: *sites, periodic: *periodic, subsystem_start: 0, subsystem_len: *subsystem };
            spec.validate().map_err(config_err)?;
            reduced_ground_state(&spec)?
        }
        StateSource::Random { n, rank } => {
            if *n == 0 || *n > vqsd::state::MAX_QUBITS || *rank == 0 || *rank > 1usize << n {
                return Err(CliError::Config(format!("state: random state with n = {n}, rank = {rank} is unsupported")));
            }
            random_density(*n, *rank, &mut rng)
        }
        StateSource::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("state: reading {}: {e}", path.display())))?;
            density_from_json(&text).map_err(|e| CliError::Config(format!("state: {}: {e}", path.display())))?
        }
    };
    Ok(state)
}

fn cost_context(cfg: &ExperimentConfig, rho: QuantumState, plan: &ShotPlan) -> Result<CostContext, CliError> {
    Ok(CostContext::with_plan(rho, plan, &mut substream(cfg.seed, streams::PURITY))?)
}

fn local_ansatz(n: usize, kind: LocalKind, init: &Option<Vec<f64>>, seed: u64) -> Result<LocalAnsatz, CliError> {
    let params = match init {
        Some(p) => p.clone(),
        None => {
            let mut rng = substream(seed, streams::INIT);
            (0..n * kind.params_per_qubit()).map(|_| rng.random_range(0.0..TAU)).collect()
        }
    };
    LocalAnsatz::new(n, kind, params).map_err(|e| CliError::Config(format!("ansatz: {e}")))
}

fn load_ansatz(path: &Path, n: usize) -> Result<ParamAnsatz, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("ansatz: reading {}: {e}", path.display())))?;
    let a = ParamAnsatz::from_json(&text).map_err(|e| CliError::Config(format!("ansatz: {}: {e}", path.display())))?;
    if a.n_qubits != n {
        return Err(CliError::Config(format!("ansatz has {} qubits, state has {n}", a.n_qubits)));
    }
    Ok(a)
}

/// `iteration,cost,D,wall_time` over consecutive traces with a running
/// iteration count. Times are zero unless `timing` is set.
pub fn traces_csv(traces: &[&OptimizationTrace], timing: bool) -> String {
    let mut w = CsvWriter::new(&["iteration", "cost", "D", "wall_time"]);
    let (mut it, mut offset) = (0usize, 0.0);
    for t in traces {
        for r in &t.records {
            let time = if timing && t.evaluations > 0 {
                offset + t.wall_time * r.evaluation as f64 / t.evaluations as f64
            } else {
                0.0
            };
            w.row(&[it.to_string(), fmt_f64(r.cost), r.gates.to_string(), fmt_f64(time)]);
            it += 1;
        }
        offset += t.wall_time;
    }
    w.finish()
}

fn check_n(u_n: usize, n: usize) -> Result<(), CliError> {
    if u_n != n {
        return Err(CliError::Config(format!("ansatz acts on {u_n} qubits, state has {n}")));
    }
    Ok(())
}

fn run_diagonalize(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let rho = build_state(cfg)?;
    let n = rho.n_qubits();
    let plan = cfg.plan();
    let ctx = cost_context(cfg, rho.clone(), &plan)?;
    let mut art = Artifacts::new();
    let mut extra = serde_json::Map::new();

    match &cfg.ansatz {
        AnsatzSettings::Local { local_kind, init } => {
            let u = local_ansatz(n, *local_kind, init, cfg.seed)?;
            let (trained, trace) = train(&ctx, &u, cfg.q, &cfg.optimizer, &plan, 0)?;
            art.add("trace.csv", traces_csv(&[&trace], cfg.timing));
            art.add(
                "params.json",
                serde_json::to_string_pretty(&json!({ "local_kind": local_kind, "params": trained.params })).unwrap() + "\n",
            );
            extra.insert("final_cost".into(), json!(trace.final_cost()));
            extra.insert("evaluations".into(), json!(trace.evaluations));
            report(cfg, &ctx, &trained, &mut art, &mut extra)?;
        }
        AnsatzSettings::Layered { p, growth, init_scale } => {
            let mut rng = substream(cfg.seed, streams::INIT);
            if *growth {
                let start = ParamAnsatz::random_layered(n, 0.5, *init_scale, &mut rng)?;
                let res = layer_growth_train(&ctx, cfg.q, &start, *p, &cfg.optimizer, &plan)?;
                let traces: Vec<&OptimizationTrace> = res.stages.iter().map(|s| &s.trace).collect();
                art.add("trace.csv", traces_csv(&traces, cfg.timing));
                art.add("params.json", res.ansatz.to_json()? + "\n");
                let stages: Vec<Value> = res
                    .stages
                    .iter()
                    .map(|s| {
                        json!({
                            "p": s.p,
                            "gates": s.gates,
                            "final_cost": s.final_cost(),
                            "evaluations": s.trace.evaluations,
                            "growth_check": s.growth_check.map(|(b, a)| json!({ "before": b, "after": a })),
                        })
                    })
                    .collect();
                extra.insert("final_cost".into(), json!(res.stages.last().map(|s| s.final_cost())));
                extra.insert("evaluations".into(), json!(res.stages.iter().map(|s| s.trace.evaluations).sum::<usize>()));
                extra.insert("stages".into(), Value::Array(stages));
                if cfg.experiment == Experiment::Spectroscopy {
                    art.add("spectrum.csv", spectrum_csv(&rho, &res.stages.iter().map(|s| (s.p, &s.ansatz)).collect::<Vec<_>>())?);
                }
                report(cfg, &ctx, &res.ansatz, &mut art, &mut extra)?;
            } else {
                let start = ParamAnsatz::random_layered(n, *p, *init_scale, &mut rng)?;
                let (trained, trace) = train(&ctx, &start, cfg.q, &cfg.optimizer, &plan, 0)?;
                finish_param(cfg, &ctx, &rho, trained, &trace, &mut art, &mut extra)?;
            }
        }
        AnsatzSettings::Free { d_max, schedule } => {
            let mut rng = substream(cfg.seed, streams::ANNEAL);
            let res = annealed_structure_search(&ctx, cfg.q, *d_max, schedule, &cfg.optimizer, &plan, &mut rng)?;
            extra.insert("rounds".into(), json!(res.rounds));
            extra.insert("accepted".into(), json!(res.accepted));
            extra.insert("growth".into(), serde_json::to_value(&res.growth).unwrap());
            finish_param(cfg, &ctx, &rho, res.ansatz, &res.trace, &mut art, &mut extra)?;
        }
        AnsatzSettings::File { path } => {
            let start = load_ansatz(path, n)?;
            let (trained, trace) = train(&ctx, &start, cfg.q, &cfg.optimizer, &plan, 0)?;
            finish_param(cfg, &ctx, &rho, trained, &trace, &mut art, &mut extra)?;
        }
    }
    art.manifest = Value::Object(extra);
    Ok(art)
}

fn finish_param(
    cfg: &ExperimentConfig,
    ctx: &CostContext,
    rho: &QuantumState,
    trained: ParamAnsatz,
    trace: &OptimizationTrace,
    art: &mut Artifacts,
    extra: &mut serde_json::Map<String, Value>,
) -> Result<(), CliError> {
    check_n(trained.n_qubits, rho.n_qubits())?;
    art.add("trace.csv", traces_csv(&[trace], cfg.timing));
    art.add("params.json", trained.to_json()? + "\n");
    extra.insert("final_cost".into(), json!(trace.final_cost()));
    extra.insert("evaluations".into(), json!(trace.evaluations));
    extra.insert("gates".into(), json!(trained.gate_count()));
    if cfg.experiment == Experiment::Spectroscopy {
        let p = trained.structure.layers().unwrap_or(0.0);
        art.add("spectrum.csv", spectrum_csv(rho, &[(p, &trained)])?);
    }
    report(cfg, ctx, &trained, art, extra)
}

/// `p,rank,inferred,exact,delta_lambda`: sorted diagonal of `ρ̃` at each stage
/// against the dense spectrum.
fn spectrum_csv(rho: &QuantumState, stages: &[(f64, &ParamAnsatz)]) -> Result<String, CliError> {
    let exact = rho.exact_eigendecomposition()?.eigenvalues;
    let dim = rho.dim();
    let mut w = CsvWriter::new(&["p", "rank", "inferred", "exact", "delta_lambda"]);
    for (p, u) in stages {
        let mut diag = rotate(rho, *u)?.diagonal();
        diag.sort_by(|a, b| b.total_cmp(a));
        let dl = eigenvalue_error(&exact, &diag, dim)?;
        for (i, (inf, ex)) in diag.iter().zip(&exact).enumerate() {
            w.row(&[fmt_f64(*p), i.to_string(), fmt_f64(*inf), fmt_f64(*ex), fmt_f64(dl)]);
        }
    }
    Ok(w.finish())
}

/// Readout, observable resolution and error metrics for a trained unitary.
fn report<D: Diagonalizer>(
    cfg: &ExperimentConfig,
    ctx: &CostContext,
    u: &D,
    art: &mut Artifacts,
    extra: &mut serde_json::Map<String, Value>,
) -> Result<(), CliError> {
    let rho = ctx.state();
    let n = rho.n_qubits();
    let dim = rho.dim();
    let (estimates, m) = readout(cfg, rho, u)?;
    art.add("eigenvalues.csv", eigenvalue_report_csv(&estimates));
    let accepted: Vec<&EigenEstimate> = estimates.iter().filter(|e| e.accepted).collect();

    let oracle = rho.exact_eigendecomposition()?.eigenvalues;
    let inferred: Vec<f64> = accepted.iter().map(|e| e.estimate).collect();
    let exact_cost = ctx.evaluate(u, cfg.q, &ShotPlan::exact(), &mut seeded(0))?;
    let metrics = CostContext::new(rho.clone()).error_metrics(u, cfg.q)?;
    extra.insert("exact_cost".into(), serde_json::to_value(exact_cost).unwrap());
    extra.insert("delta_lambda".into(), json!(eigenvalue_error(&oracle, &inferred, dim)?));
    extra.insert("delta_lambda_diagonal".into(), json!(metrics.delta_lambda));
    extra.insert("delta_v".into(), json!(metrics.delta_v));
    extra.insert("beta".into(), json!(metrics.beta));
    extra.insert("accepted".into(), json!(m));
    extra.insert("inferred_eigenvalues".into(), json!(inferred));
    extra.insert("oracle_eigenvalues".into(), json!(oracle));

    if cfg.observable == ObservableChoice::TotalSz {
        let obs = total_sz(n);
        let owned: Vec<EigenEstimate> = accepted.iter().map(|e| (*e).clone()).collect();
        art.add("observable.csv", observable_report_csv(&observable_report(u, &owned, &obs)?));
        let values: Vec<f64> = owned.iter().map(|e| e.estimate).collect();
        let groups = if cfg.plan().is_exact() {
            let tol = cfg.degeneracy_tol;
            group_degenerate(&values, move |a, b| tol * a.abs().max(b.abs()))
        } else {
            group_degenerate(&values, two_sigma(cfg.n_readout))
        };
        let mut out = Vec::new();
        for g in groups {
            let idx: Vec<usize> = owned[g.clone()].iter().map(|e| e.index).collect();
            out.push(json!({
                "bitstrings": owned[g.clone()].iter().map(|e| e.bitstring.clone()).collect::<Vec<_>>(),
                "estimates": values[g].to_vec(),
                "resolved": resolve_in_span(u, &idx, &obs)?,
            }));
        }
        extra.insert("observable_groups".into(), Value::Array(out));
    }
    Ok(())
}

/// Exact-mode runs read the diagonal of `ρ̃` directly; sampled runs draw
/// `n_readout` shots. Returns the estimates and the accepted count.
fn readout<D: Diagonalizer>(cfg: &ExperimentConfig, rho: &QuantumState, u: &D) -> Result<(Vec<EigenEstimate>, usize), CliError> {
    if cfg.plan().is_exact() {
        let est = exact_eigenvalues(rho, u, 0.0)?;
        let m = est.len();
        Ok((est, m))
    } else {
        let mut est = infer_eigenvalues(rho, u, cfg.n_readout, derive_seed(cfg.seed, streams::READOUT))?;
        let m = threshold(&mut est, cfg.eps_max);
        Ok((est, m))
    }
}

fn run_landscape(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let rho = build_state(cfg)?;
    let n = rho.n_qubits();
    let (kind, init) = match &cfg.ansatz {
        AnsatzSettings::Local { local_kind, init } => (*local_kind, init.clone()),
        _ => return Err(CliError::Config("landscape needs a local ansatz".into())),
    };
    let np = n * kind.params_per_qubit();
    let base = init.unwrap_or_else(|| vec![0.0; np]);
    let mut u = LocalAnsatz::new(n, kind, base.clone()).map_err(|e| CliError::Config(format!("ansatz: {e}")))?;
    let s = &cfg.landscape;
    if !s.all_params && s.param_index >= np {
        return Err(CliError::Config(format!("param_index {} is out of range for {np} parameters", s.param_index)));
    }
    let plan = cfg.plan();
    let ctx = cost_context(cfg, rho, &plan)?;
    let repeats = if plan.is_exact() { 1 } else { s.repeats };
    let mut w = CsvWriter::new(&["angle", "cost", "std_error"]);
    let mut curve = Vec::with_capacity(s.resolution);
    for i in 0..s.resolution {
        let angle = TAU * i as f64 / s.resolution as f64;
        let mut params = base.clone();
        if s.all_params {
            params.iter_mut().for_each(|p| *p = angle);
        } else {
            params[s.param_index] = angle;
        }
        u.set_params(&params)?;
        let mut vals = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let mut rng = substream(plan.seed, (i * repeats + r) as u64);
            vals.push(ctx.weighted(&u, cfg.q, &plan, &mut rng)?);
        }
        let mean = vals.iter().sum::<f64>() / repeats as f64;
        let se = if repeats > 1 {
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
            (var / repeats as f64).sqrt()
        } else {
            0.0
        };
        w.row(&[fmt_f64(angle), fmt_f64(mean), fmt_f64(se)]);
        curve.push((angle, mean));
    }
    let mut art = Artifacts::new();
    art.add("landscape.csv", w.finish());
    art.manifest = json!({ "local_minima": local_minima(&curve) });
    Ok(art)
}

/// Angles of strict local minima on the periodic grid, ties broken forward.
pub fn local_minima(curve: &[(f64, f64)]) -> Vec<f64> {
    let m = curve.len();
    if m < 3 {
        return curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|c| vec![c.0]).unwrap_or_default();
    }
    (0..m)
        .filter(|&i| {
            let prev = curve[(i + m - 1) % m].1;
            let next = curve[(i + 1) % m].1;
            curve[i].1 < prev && curve[i].1 <= next
        })
        .map(|i| curve[i].0)
        .collect()
}

fn q_label(q: f64) -> String {
    format!("{q}")
}

fn run_q_sweep(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let s = &cfg.q_sweep;
    let plan = cfg.plan();
    let mut jobs = Vec::new();
    for &n in &s.sizes {
        for t in 0..s.trials {
            for (qi, &q) in s.qs.iter().enumerate() {
                jobs.push((n, t, qi, q));
            }
        }
    }
    let results: Vec<(usize, usize, f64, String, f64, f64)> = jobs
        .par_iter()
        .map(|&(n, t, qi, q)| {
            // state and start point depend on (n, trial) only
            let mut rng = substream(cfg.seed, streams::TRIALS + (n * 1000 + t) as u64);
            let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let start: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let rho = product_state(&ProductAngles::Rx(angles))?;
            let run_seed = derive_seed(plan.seed, (n * 1000 + t * 10 + qi) as u64);
            let run_plan = plan.with_seed(run_seed);
            let ctx = CostContext::with_plan(rho.clone(), &run_plan, &mut substream(run_seed, u64::MAX))?;
            let u = LocalAnsatz::new(n, LocalKind::Rx, start)?;
            let (trained, trace) = train(&ctx, &u, q, &cfg.optimizer, &run_plan, 0)?;
            let exact = CostContext::new(rho);
            let mut w = CsvWriter::new(&["iteration", "cost", "c1", "evaluation"]);
            let mut probe = u.clone();
            for r in &trace.records {
                probe.set_params(&r.params)?;
                let c1 = exact.c1(&probe, &ShotPlan::exact(), &mut seeded(0))?;
                w.row(&[r.iteration.to_string(), fmt_f64(r.cost), fmt_f64(c1), r.evaluation.to_string()]);
            }
            let final_c1 = exact.c1(&trained, &ShotPlan::exact(), &mut seeded(0))?;
            Ok((n, t, q, w.finish(), trace.final_cost(), final_c1))
        })
        .collect::<Result<_, vqsd::VqsdError>>()?;

    let mut art = Artifacts::new();
    let mut runs = Vec::new();
    for (n, t, q, body, cost, c1) in &results {
        art.add(format!("q_sweep/n{n}_q{}_trial{t}.csv", q_label(*q)), body.clone());
        runs.push(json!({ "n": n, "trial": t, "q": q, "final_cost": cost, "final_c1": c1 }));
    }
    // per size: trials where indirect training reached a C1 no worse than direct q = 1
    let mut wins = Vec::new();
    for &n in &s.sizes {
        for &q in s.qs.iter().filter(|&&q| q < 1.0) {
            let c1_of = |qq: f64, t: usize| {
                results.iter().find(|r| r.0 == n && r.1 == t && r.2 == qq).map(|r| r.5)
            };
            let count = (0..s.trials)
                .filter(|&t| matches!((c1_of(q, t), c1_of(1.0, t)), (Some(a), Some(b)) if a <= b))
                .count();
            if s.qs.contains(&1.0) {
                wins.push(json!({ "n": n, "q": q, "trials_at_or_below_q1": count, "trials": s.trials }));
            }
        }
    }
    art.manifest = json!({ "runs": runs, "comparison": wins });
    Ok(art)
}

/// Shared start for one bench trial: a random product state and a random
/// layered ansatz.
pub fn bench_instance(cfg: &ExperimentConfig, trial: usize) -> Result<(QuantumState, ParamAnsatz), CliError> {
    let b = &cfg.bench;
    let mut rng = substream(cfg.seed, streams::TRIALS + trial as u64);
    let rho = product_state(&ProductAngles::random_xyz(b.n, &mut rng))?;
    let start = ParamAnsatz::random_layered(b.n, b.p, b.init_scale, &mut rng)?;
    Ok((rho, start))
}

fn run_optimizer_bench(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = &cfg.bench;
    let plan = cfg.plan();
    let instances: Vec<(QuantumState, ParamAnsatz)> =
        (0..b.trials).map(|t| bench_instance(cfg, t)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..b.methods.len()).flat_map(|m| (0..b.trials).map(move |t| (m, t))).collect();
    let runs: Vec<OptimizationTrace> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let (rho, start) = &instances[t];
            let run_plan = plan.with_seed(derive_seed(plan.seed, t as u64));
            let ctx = CostContext::with_plan(rho.clone(), &run_plan, &mut substream(run_plan.seed, u64::MAX))?;
            let opt = OptimizerConfig { method: b.methods[m], ..cfg.optimizer.clone() };
            Ok(train(&ctx, start, cfg.q, &opt, &run_plan, 0)?.1)
        })
        .collect::<Result<_, vqsd::VqsdError>>()?;

    let mut art = Artifacts::new();
    let mut w = CsvWriter::new(&["method", "trial", "final_cost", "evaluations", "wall_time", "success"]);
    let mut summary = Vec::new();
    for (m, method) in b.methods.iter().enumerate() {
        let mut successes = 0;
        let mut evals = 0usize;
        for t in 0..b.trials {
            let trace = &runs[m * b.trials + t];
            let ok = trace.final_cost() <= b.success_threshold;
            successes += ok as usize;
            evals += trace.evaluations;
            let time = if cfg.timing { trace.wall_time } else { 0.0 };
            w.row(&[
                method.name().to_string(),
                t.to_string(),
                fmt_f64(trace.final_cost()),
                trace.evaluations.to_string(),
                fmt_f64(time),
                ok.to_string(),
            ]);
            art.add(format!("bench/{}_trial{t}.csv", method.name()), traces_csv(&[trace], cfg.timing));
        }
        summary.push(json!({
            "method": method.name(),
            "successes": successes,
            "trials": b.trials,
            "success_fraction": successes as f64 / b.trials as f64,
            "mean_evaluations": evals as f64 / b.trials as f64,
            "wall_time": (0..b.trials).map(|t| runs[m * b.trials + t].wall_time).sum::<f64>(),
        }));
    }
    art.files.insert(0, ("bench.csv".into(), w.finish()));
    art.manifest = json!({ "methods": summary });
    Ok(art)
}

fn run_qpca(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let rho = build_state(cfg)?;
    if rho.n_qubits() != 1 {
        return Err(CliError::Config(format!("qpca needs a one-qubit state, got {} qubits", rho.n_qubits())));
    }
    let s = &cfg.qpca;
    let plan = cfg.plan();
    let mut settings = Vec::new();
    if s.noiseless {
        settings.push(false);
    }
    if s.noisy {
        settings.push(true);
    }
    let mut jobs = Vec::new();
    for &noisy in &settings {
        for &k in &s.ks {
            for &t in &s.times {
                jobs.push((t, k, noisy));
            }
        }
    }
    let rows: Vec<(f64, usize, bool, f64)> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(t, k, noisy))| {
            let qc = QpcaConfig { t, k, noise: noisy.then_some(s.noise), estimator: s.estimator };
            let est = qpca_one_bit(&rho, &qc, &plan, &mut substream(plan.seed, i as u64))?;
            Ok((t, k, noisy, est.top))
        })
        .collect::<Result<_, vqsd::VqsdError>>()?;
    let mut art = Artifacts::new();
    art.add("qpca.csv", qpca_csv(&rows));
    art.manifest = json!({ "rows": rows.len() });
    Ok(art)
}
