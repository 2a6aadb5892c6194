use super::trace::{stalled, OptimizationTrace, OptimizerConfig, Step, StopReason, Tracker};
use crate::Result;
use nalgebra::DMatrix;

const GOLD: f64 = 1.618_034;
const CGOLD: f64 = 0.381_966_0;
const GLIMIT: f64 = 110.0;
const TINY: f64 = 1e-21;
const ZEPS: f64 = 1e-12;
const BRENT_ITERS: usize = 100;

/// Line objective `s ↦ f(x + s·d)`.
struct Line<'t, 'a> {
    tracker: &'t mut Tracker<'a>,
    x: &'t [f64],
    d: &'t [f64],
    buf: Vec<f64>,
}

impl Line<'_, '_> {
    fn at(&mut self, s: f64) -> Step<f64> {
        for ((b, x), d) in self.buf.iter_mut().zip(self.x).zip(self.d) {
            *b = x + s * d;
        }
        let buf = std::mem::take(&mut self.buf);
        let v = self.tracker.eval(&buf);
        self.buf = buf;
        v
    }
}

/// Downhill bracket `(a, b, c)` with `f(b) ≤ f(a), f(c)`, starting from `a = 0`
/// whose value is known.
fn bracket(line: &mut Line, f0: f64, step: f64) -> Step<[(f64, f64); 3]> {
    let (mut a, mut fa) = (0.0, f0);
    let mut b = step;
    let mut fb = line.at(b)?;
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = line.at(c)?;
    while fb > fc {
        let r = (b - a) * (fb - fc);
        let q = (b - c) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(TINY).copysign(q - r);
        let mut u = b - ((b - c) * q - (b - a) * r) / denom;
        let ulim = b + GLIMIT * (c - b);
        let fu;
        if (b - u) * (u - c) > 0.0 {
            let fu1 = line.at(u)?;
            if fu1 < fc {
                return Ok(order([(b, fb), (u, fu1), (c, fc)]));
            } else if fu1 > fb {
                return Ok(order([(a, fa), (b, fb), (u, fu1)]));
            }
            u = c + GOLD * (c - b);
            fu = line.at(u)?;
        } else if (c - u) * (u - ulim) > 0.0 {
            let fu1 = line.at(u)?;
            if fu1 < fc {
                b = c;
                fb = fc;
                c = u;
                fc = fu1;
                u = c + GOLD * (c - b);
                fu = line.at(u)?;
            } else {
                fu = fu1;
            }
        } else if (u - ulim) * (ulim - c) >= 0.0 {
            u = ulim;
            fu = line.at(u)?;
        } else {
            u = c + GOLD * (c - b);
            fu = line.at(u)?;
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = u;
        fc = fu;
    }
    Ok(order([(a, fa), (b, fb), (c, fc)]))
}

fn order(mut t: [(f64, f64); 3]) -> [(f64, f64); 3] {
    if t[0].0 > t[2].0 {
        t.swap(0, 2);
    }
    t
}

/// Brent's parabolic/golden minimization inside a bracket. Returns `(s, f(s))`.
fn brent(line: &mut Line, br: [(f64, f64); 3], tol: f64) -> Step<(f64, f64)> {
    let (mut a, mut b) = (br[0].0.min(br[2].0), br[0].0.max(br[2].0));
    let (mut x, mut fx) = br[1];
    let (mut w, mut fw) = (x, fx);
    let (mut v, mut fv) = (x, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..BRENT_ITERS {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x) {
                e = if x >= xm { a - x } else { b - x };
                d = CGOLD * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
            }
        } else {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = line.at(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}

/// Minimizes along `d` from `x` (value `fx`); moves `x` to the line minimum
/// when it improves.
fn line_minimize(tracker: &mut Tracker, x: &mut Vec<f64>, fx: &mut f64, d: &[f64], tol: f64) -> Step<()> {
    let mut line = Line { tracker, x, d, buf: vec![0.0; x.len()] };
    let br = bracket(&mut line, *fx, 1.0)?;
    let (s, fs) = brent(&mut line, br, tol)?;
    if fs < *fx {
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += s * di;
        }
        *fx = fs;
    }
    Ok(())
}

fn normalize(d: &mut [f64]) -> f64 {
    let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        d.iter_mut().for_each(|v| *v /= n);
    }
    n
}

fn axes(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect()
}

fn degenerate(dirs: &[Vec<f64>]) -> bool {
    let dim = dirs.len();
    let m = DMatrix::from_fn(dim, dim, |r, c| dirs[c][r]);
    m.determinant().abs() < 1e-12
}

/// Powell's conjugate-direction method with Brent line searches.
pub fn powell_minimize(
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
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut fx = tracker.eval(&x)?;
    if dim == 0 {
        return Ok(StopReason::ParamTolerance);
    }
    let line_tol = cfg.param_tolerance.sqrt().min(1e-2);
    let mut dirs = axes(dim);
    loop {
        tracker.cycles += 1;
        let x_start = x.clone();
        let f_start = fx;
        let mut biggest = 0.0;
        let mut ibig = 0;
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            line_minimize(tracker, &mut x, &mut fx, d, line_tol)?;
            if before - fx > biggest {
                biggest = before - fx;
                ibig = i;
            }
        }
        if stalled(f_start, fx, cfg.cost_tolerance) {
            return Ok(StopReason::CostTolerance);
        }
        let moved = x.iter().zip(&x_start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved < cfg.param_tolerance {
            return Ok(StopReason::ParamTolerance);
        }
        let extrap: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| 2.0 * a - b).collect();
        let fe = tracker.eval(&extrap)?;
        if fe < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + fe) * (f_start - fx - biggest).powi(2) - biggest * (f_start - fe).powi(2);
            if t < 0.0 {
                let mut d: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
                if normalize(&mut d) > 0.0 {
                    line_minimize(tracker, &mut x, &mut fx, &d, line_tol)?;
                    dirs[ibig] = dirs[dim - 1].clone();
                    dirs[dim - 1] = d;
                    if degenerate(&dirs) {
                        dirs = axes(dim);
                    }
                }
            }
        }
    }
}
