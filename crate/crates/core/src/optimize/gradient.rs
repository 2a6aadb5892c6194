use super::trace::{stalled, OptimizationTrace, OptimizerConfig, Step, StopReason, Tracker};
use crate::Result;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 40;
/// Consecutive stalled steps before stopping.
const PATIENCE: usize = 5;

/// Central-difference gradient `∂f/∂xᵢ ≈ (f(x + h eᵢ) − f(x − h eᵢ)) / 2h`.
fn gradient(tracker: &mut Tracker, x: &[f64], h: f64) -> Step<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = tracker.eval(&probe)?;
        probe[i] = x[i] - h;
        let fm = tracker.eval(&probe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Plain central-difference gradient, outside any trace.
pub fn fd_gradient(objective: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let cfg = OptimizerConfig { max_evals: usize::MAX, ..Default::default() };
    let mut tracker = Tracker::new(objective, &cfg);
    match gradient(&mut tracker, x, h) {
        Ok(g) => g,
        Err(_) => vec![f64::NAN; x.len()],
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient descent on a central-difference gradient. Trial steps use the
/// Barzilai-Borwein length and are shortened by backtracking until the
/// Armijo condition holds, so every accepted step lowers the cost.
pub fn fd_gradient_minimize(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let mut tracker = Tracker::new(objective, cfg);
    let outcome = run(&mut tracker, x0, cfg);
    tracker.finish(outcome)
}

fn run(tracker: &mut Tracker, x0: &[f64], cfg: &OptimizerConfig) -> Step<StopReason> {
    let mut x = x0.to_vec();
    let mut fx = tracker.eval(&x)?;
    if x.is_empty() {
        return Ok(StopReason::ParamTolerance);
    }
    let mut g = gradient(tracker, &x, cfg.fd_step)?;
    let mut step = 1.0;
    let mut stall = 0;
    loop {
        tracker.cycles += 1;
        let gg = dot(&g, &g);
        if gg.sqrt() < cfg.param_tolerance * 1e-3 {
            return Ok(StopReason::ParamTolerance);
        }
        let mut accepted = None;
        let mut t = step;
        for _ in 0..MAX_BACKTRACK {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let ft = tracker.eval(&trial)?;
            if ft <= fx - ARMIJO * t * gg {
                accepted = Some((trial, ft, t));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, t_used)) = accepted else {
            return Ok(StopReason::ParamTolerance);
        };
        if t_used * gg.sqrt() < cfg.param_tolerance * 1e-3 {
            return Ok(StopReason::ParamTolerance);
        }
        let g_new = gradient(tracker, &x_new, cfg.fd_step)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-6, 1e6) } else { t_used * 2.0 };
        if stalled(fx, f_new, cfg.cost_tolerance) {
            stall += 1;
            if stall >= PATIENCE {
                return Ok(StopReason::CostTolerance);
            }
        } else {
            stall = 0;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
}
