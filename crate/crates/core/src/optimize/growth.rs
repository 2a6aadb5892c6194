use super::{train, OptimizationTrace, OptimizerConfig};
use crate::ansatz::{ParamAnsatz, Structure};
use crate::circuits::ShotPlan;
use crate::cost::CostContext;
use crate::random::substream;
use crate::{Result, VqsdError};

/// One training stage at a fixed layer count.
#[derive(Debug, Clone)]
pub struct GrowthStage {
    pub p: f64,
    pub gates: usize,
    pub trace: OptimizationTrace,
    /// Trained ansatz of this stage.
    pub ansatz: ParamAnsatz,
    /// Cost of the previous stage's optimum and of the same point after the
    /// identity rows were appended, evaluated with one shared noise stream.
    pub growth_check: Option<(f64, f64)>,
}

impl GrowthStage {
    pub fn final_cost(&self) -> f64 {
        self.trace.final_cost()
    }
}

#[derive(Debug, Clone)]
pub struct GrowthResult {
    pub ansatz: ParamAnsatz,
    pub stages: Vec<GrowthStage>,
}

/// Trains a layered ansatz at every row count from that of `start` up to
/// `2·p_max`. The first stage starts from `start`; each later stage starts
/// from the previous optimum with one identity row appended.
pub fn layer_growth_train(
    ctx: &CostContext,
    q: f64,
    start: &ParamAnsatz,
    p_max: f64,
    inner: &OptimizerConfig,
    plan: &ShotPlan,
) -> Result<GrowthResult> {
    let rows_max = (p_max * 2.0).round() as usize;
    if rows_max < 1 || ((rows_max as f64) / 2.0 - p_max).abs() > 1e-12 {
        return Err(VqsdError::InvalidArgument(format!("p_max = {p_max} must be a half-integer ≥ 0.5")));
    }
    let rows_start = match start.structure {
        Structure::Layered { rows } => rows,
        Structure::Free => return Err(VqsdError::InvalidArgument("layer growth needs a layered ansatz".into())),
    };
    if start.n_qubits != ctx.n_qubits() || rows_start > rows_max {
        return Err(VqsdError::InvalidArgument(format!(
            "start ansatz has {} qubits and {rows_start} rows; need {} qubits and at most {rows_max} rows",
            start.n_qubits,
            ctx.n_qubits()
        )));
    }
    let mut current = start.clone();
    let mut stages: Vec<GrowthStage> = Vec::new();
    let mut evals: u64 = 0;
    for rows in rows_start..=rows_max {
        let mut growth_check = None;
        if rows > rows_start {
            let grown = current.grow_identity_rows(1)?;
            let probe = evals.wrapping_add(u64::MAX / 2);
            let before = ctx.weighted(&current, q, plan, &mut substream(plan.seed, probe))?;
            let after = ctx.weighted(&grown, q, plan, &mut substream(plan.seed, probe))?;
            growth_check = Some((before, after));
            current = grown;
        }
        let (trained, mut trace) = train(ctx, &current, q, inner, plan, evals)?;
        evals += trace.evaluations as u64;
        trace.set_gate_count(trained.gate_count());
        current = trained;
        stages.push(GrowthStage {
            p: rows as f64 / 2.0,
            gates: current.gate_count(),
            trace,
            ansatz: current.clone(),
            growth_check,
        });
    }
    Ok(GrowthResult { ansatz: current, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Diagonalizer;
    use crate::models::{product_state, ProductAngles};
    use crate::optimize::Method;
    use crate::random::seeded;
    use crate::state::QuantumState;
    use crate::{CMatrix, CVector, C64};

    #[test]
    fn diagonal_state_needs_no_training() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(
            [0.4, 0.3, 0.2, 0.1].iter().map(|&x| C64::new(x, 0.0)).collect(),
        ));
        let ctx = CostContext::new(QuantumState::density(d).unwrap());
        let cfg = OptimizerConfig::with_method(Method::FdGradient);
        let start = ParamAnsatz::identity_layered(2, 0.5).unwrap();
        let r = layer_growth_train(&ctx, 1.0, &start, 0.5, &cfg, &ShotPlan::exact()).unwrap();
        assert_eq!(r.stages.len(), 1);
        assert!(r.stages[0].final_cost() <= 1e-8);
        assert!(r.ansatz.params().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn rejects_bad_depth() {
        let ctx = CostContext::new(QuantumState::basis(2, 0));
        let cfg = OptimizerConfig::default();
        let start = ParamAnsatz::identity_layered(2, 1.0).unwrap();
        assert!(layer_growth_train(&ctx, 1.0, &start, 0.3, &cfg, &ShotPlan::exact()).is_err());
        assert!(layer_growth_train(&ctx, 1.0, &start, 0.0, &cfg, &ShotPlan::exact()).is_err());
        assert!(layer_growth_train(&ctx, 1.0, &start, 0.5, &cfg, &ShotPlan::exact()).is_err());
        let free = ParamAnsatz::free(2, vec![]).unwrap();
        assert!(layer_growth_train(&ctx, 1.0, &free, 1.0, &cfg, &ShotPlan::exact()).is_err());
    }

    #[test]
    fn product_state_solved_at_one_layer() {
        let mut rng = seeded(5);
        let rho = product_state(&ProductAngles::random_xyz(2, &mut rng)).unwrap();
        let ctx = CostContext::new(rho);
        let cfg = OptimizerConfig::with_method(Method::Powell);
        let start = ParamAnsatz::random_layered(2, 0.5, 0.1, &mut rng).unwrap();
        let r = layer_growth_train(&ctx, 1.0, &start, 1.5, &cfg, &ShotPlan::exact()).unwrap();
        assert_eq!(r.stages.len(), 3);
        for s in &r.stages[1..] {
            assert!(s.final_cost() <= 1e-6, "p = {}: {}", s.p, s.final_cost());
        }
        for w in r.stages.windows(2) {
            assert!(w[1].final_cost() <= w[0].final_cost());
            let (before, after) = w[1].growth_check.unwrap();
            assert!((before - after).abs() <= 1e-10);
        }
    }
}
