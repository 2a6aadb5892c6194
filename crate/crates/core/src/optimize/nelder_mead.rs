use super::trace::{OptimizationTrace, OptimizerConfig, Step, StopReason, Tracker};
use crate::Result;

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Nelder-Mead simplex with reflection, expansion, contraction and shrink.
/// The initial simplex offsets each coordinate of `x0` by `cfg.simplex_step`.
pub fn nelder_mead_minimize(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let mut tracker = Tracker::new(objective, cfg);
    let outcome = run(&mut tracker, x0, cfg);
    tracker.finish(outcome)
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn run(tracker: &mut Tracker, x0: &[f64], cfg: &OptimizerConfig) -> Step<StopReason> {
    let dim = x0.len();
    let f0 = tracker.eval(x0)?;
    if dim == 0 {
        return Ok(StopReason::ParamTolerance);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += cfg.simplex_step;
        let f = tracker.eval(&x)?;
        simplex.push((x, f));
    }
    loop {
        tracker.cycles += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let f_spread = simplex.iter().map(|(_, f)| (f - best.1).abs()).fold(0.0, f64::max);
        let x_spread = simplex
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= cfg.cost_tolerance && x_spread <= cfg.param_tolerance {
            return Ok(StopReason::CostTolerance);
        }
        if x_spread <= cfg.param_tolerance * 1e-3 {
            return Ok(StopReason::ParamTolerance);
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let (worst, f_worst) = simplex[dim].clone();
        let f_second = simplex[dim - 1].1;
        let f_best = simplex[0].1;

        let xr = combine(&centroid, &worst, -ALPHA);
        let fr = tracker.eval(&xr)?;
        if fr < f_best {
            let xe = combine(&centroid, &worst, -GAMMA);
            let fe = tracker.eval(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = combine(&centroid, &xr, RHO);
            let fc = tracker.eval(&xc)?;
            (xc, fc)
        } else {
            let xc = combine(&centroid, &worst, RHO);
            let fc = tracker.eval(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best_x = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = combine(&best_x, &entry.0, SIGMA);
            let f = tracker.eval(&x)?;
            *entry = (x, f);
        }
    }
}
