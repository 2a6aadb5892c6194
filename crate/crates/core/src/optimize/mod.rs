//! Classical minimizers and the VQSD training drivers built on them.
//!
//! Every minimizer takes an objective `&[f64] → f64`, a start point and an
//! [`OptimizerConfig`], and returns an [`OptimizationTrace`] holding only the
//! evaluations that strictly lowered the best cost so far.

mod anneal;
mod gradient;
mod growth;
mod nelder_mead;
mod powell;
mod trace;

pub use anneal::{annealed_structure_search, AnnealResult, AnnealSchedule, GrowthEvent};
pub use gradient::{fd_gradient, fd_gradient_minimize};
pub use growth::{layer_growth_train, GrowthResult, GrowthStage};
pub use nelder_mead::nelder_mead_minimize;
pub use powell::powell_minimize;
pub use trace::{Method, OptimizationTrace, OptimizerConfig, StopReason, TraceRecord};

use crate::ansatz::Diagonalizer;
use crate::circuits::ShotPlan;
use crate::cost::CostContext;
use crate::random::substream;
use crate::Result;

/// Runs the method named in `cfg`.
pub fn minimize(objective: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationTrace> {
    match cfg.method {
        Method::Powell => powell_minimize(objective, x0, cfg),
        Method::NelderMead => nelder_mead_minimize(objective, x0, cfg),
        Method::FdGradient => fd_gradient_minimize(objective, x0, cfg),
    }
}

/// The weighted cost as a function of the parameters of `template`.
///
/// In sampled mode evaluation `k` (counted from `first_eval`) draws its shots
/// from substream `k` of the plan's seed. Parameter-count errors surface as NaN,
/// which the minimizers reject.
pub fn cost_objective<'a, D: Diagonalizer + 'a>(
    ctx: &'a CostContext,
    template: &D,
    q: f64,
    plan: &'a ShotPlan,
    first_eval: u64,
) -> impl FnMut(&[f64]) -> f64 + 'a {
    let mut u = template.clone();
    let mut counter = first_eval;
    move |x: &[f64]| {
        if u.set_params(x).is_err() {
            return f64::NAN;
        }
        let mut rng = substream(plan.seed, counter);
        counter += 1;
        ctx.weighted(&u, q, plan, &mut rng).unwrap_or(f64::NAN)
    }
}

/// Minimizes the weighted cost over the parameters of `u`, starting from its
/// current parameters. Returns the trained copy and the trace.
pub fn train<D: Diagonalizer>(
    ctx: &CostContext,
    u: &D,
    q: f64,
    cfg: &OptimizerConfig,
    plan: &ShotPlan,
    first_eval: u64,
) -> Result<(D, OptimizationTrace)> {
    let mut f = cost_objective(ctx, u, q, plan, first_eval);
    let trace = minimize(&mut f, &u.params(), cfg)?;
    let trained = u.with_params(trace.best_params())?;
    Ok((trained, trace))
}
