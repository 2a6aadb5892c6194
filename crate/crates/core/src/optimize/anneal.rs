use super::{train, OptimizationTrace, OptimizerConfig, StopReason, TraceRecord};
use crate::ansatz::{Diagonalizer, ParamAnsatz};
use crate::circuits::ShotPlan;
use crate::cost::CostContext;
use crate::random::{substream, Rng};
use crate::{Result, VqsdError};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSchedule {
    /// Initial temperature `T₀` of `T_k = T₀·γ^k`.
    pub t0: f64,
    pub gamma: f64,
    /// Proposals without a new best before an identity gate is added, or,
    /// at the gate cap, before the search resumes from the best point.
    pub stall_patience: usize,
    /// Upper bound on the gates whose support one proposal changes.
    pub max_modified: usize,
    /// Gate count of the random starting structure.
    pub initial_gates: usize,
    /// Starting parameters are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    /// Hard cap on proposals.
    pub max_rounds: usize,
    pub target_cost: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t0: 0.1,
            gamma: 0.95,
            stall_patience: 25,
            max_modified: 2,
            initial_gates: 1,
            init_scale: 0.1,
            max_rounds: 1000,
            target_cost: 1e-8,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(VqsdError::InvalidArgument("need t0 > 0 and 0 < gamma ≤ 1".into()));
        }
        if !(self.init_scale >= 0.0) {
            return Err(VqsdError::InvalidArgument("init_scale must be non-negative".into()));
        }
        if self.stall_patience == 0 || self.max_modified == 0 {
            return Err(VqsdError::InvalidArgument("stall_patience and max_modified must be positive".into()));
        }
        Ok(())
    }

    pub fn temperature(&self, k: usize) -> f64 {
        self.t0 * self.gamma.powi(k as i32)
    }
}

/// Cost right before and right after an identity gate was added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub gates_after: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    /// Best structure and parameters seen.
    pub ansatz: ParamAnsatz,
    pub cost: f64,
    /// Best-so-far improvements across the whole search; `D` is the gate count.
    pub trace: OptimizationTrace,
    pub growth: Vec<GrowthEvent>,
    pub rounds: usize,
    pub accepted: usize,
}

/// Simulated annealing over gate supports with parameter training inside
/// each proposal, growing by identity gates when proposals keep failing.
pub fn annealed_structure_search(
    ctx: &CostContext,
    q: f64,
    d_max: usize,
    schedule: &AnnealSchedule,
    inner: &OptimizerConfig,
    plan: &ShotPlan,
    rng: &mut Rng,
) -> Result<AnnealResult> {
    schedule.validate()?;
    if d_max < schedule.initial_gates {
        return Err(VqsdError::InvalidArgument(format!(
            "D_max = {d_max} is below the initial gate count {}",
            schedule.initial_gates
        )));
    }
    let start = Instant::now();
    let mut evals: u64 = 0;
    let n = ctx.n_qubits();
    let initial = ParamAnsatz::random_free(n, schedule.initial_gates, rng)?.perturbed(schedule.init_scale, rng);

    let (mut current, t) = train(ctx, &initial, q, inner, plan, evals)?;
    evals += t.evaluations as u64;
    let mut cost = t.final_cost();
    let mut best = (current.clone(), cost);
    let mut records = vec![TraceRecord {
        iteration: 0,
        evaluation: evals as usize,
        params: current.params(),
        cost,
        gates: current.gate_count(),
    }];
    let mut growth = Vec::new();
    let (mut k, mut stall, mut rounds, mut accepted) = (0usize, 0usize, 0usize, 0usize);

    while rounds < schedule.max_rounds && best.1 > schedule.target_cost {
        rounds += 1;
        let proposal = current.random_structure_update(schedule.max_modified, rng)?;
        let (trained, t) = train(ctx, &proposal, q, inner, plan, evals)?;
        evals += t.evaluations as u64;
        let c_new = t.final_cost();
        let temp = schedule.temperature(k);
        k += 1;
        let u: f64 = rng.random();
        if c_new < cost || u < (-(c_new - cost) / temp).exp() {
            accepted += 1;
            current = trained;
            cost = c_new;
        }
        if cost < best.1 {
            best = (current.clone(), cost);
            stall = 0;
            records.push(TraceRecord {
                iteration: records.len(),
                evaluation: evals as usize,
                params: current.params(),
                cost,
                gates: current.gate_count(),
            });
        } else {
            stall += 1;
        }
        if stall >= schedule.stall_patience {
            if current.gate_count() >= d_max {
                // no room to grow: resume from the best point
                current = best.0.clone();
                cost = best.1;
                stall = 0;
                continue;
            }
            // grow from the best structure found so far
            let base = best.0.clone();
            let grown = base.grow_identity_gate(rng)?;
            let probe = evals.wrapping_add(u64::MAX / 2);
            let before = ctx.weighted(&base, q, plan, &mut substream(plan.seed, probe))?;
            let after = ctx.weighted(&grown, q, plan, &mut substream(plan.seed, probe))?;
            growth.push(GrowthEvent { gates_after: grown.gate_count(), before, after });
            let (trained, t) = train(ctx, &grown, q, inner, plan, evals)?;
            evals += t.evaluations as u64;
            current = trained;
            cost = t.final_cost();
            stall = 0;
            if cost < best.1 {
                best = (current.clone(), cost);
                records.push(TraceRecord {
                    iteration: records.len(),
                    evaluation: evals as usize,
                    params: current.params(),
                    cost,
                    gates: current.gate_count(),
                });
            }
        }
    }
    let stop = if best.1 <= schedule.target_cost { StopReason::TargetCost } else { StopReason::MaxEvals };
    let trace = OptimizationTrace {
        records,
        evaluations: evals as usize,
        wall_time: start.elapsed().as_secs_f64(),
        cycles: rounds,
        stop,
    };
    Ok(AnnealResult { ansatz: best.0, cost: best.1, trace, growth, rounds, accepted })
}
