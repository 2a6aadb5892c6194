use crate::{Result, VqsdError};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Powell,
    NelderMead,
    FdGradient,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Powell => "powell",
            Method::NelderMead => "nelder_mead",
            Method::FdGradient => "fd_gradient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_evals: usize,
    pub param_tolerance: f64,
    pub cost_tolerance: f64,
    /// Central-difference step of the gradient method.
    pub fd_step: f64,
    /// Initial simplex edge of Nelder-Mead.
    pub simplex_step: f64,
    /// Stop as soon as the cost drops to this value.
    pub target_cost: Option<f64>,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Powell,
            max_evals: 20_000,
            param_tolerance: 1e-6,
            cost_tolerance: 1e-10,
            fd_step: 1e-5,
            simplex_step: 0.1,
            target_cost: None,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_method(method: Method) -> Self {
        OptimizerConfig { method, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(VqsdError::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        if self.max_evals == 0 {
            return Err(VqsdError::InvalidArgument("max_evals must be positive".into()));
        }
        positive("param_tolerance", self.param_tolerance)?;
        positive("cost_tolerance", self.cost_tolerance)?;
        positive("fd_step", self.fd_step)?;
        positive("simplex_step", self.simplex_step)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Objective call at which this improvement was found.
    pub evaluation: usize,
    pub params: Vec<f64>,
    pub cost: f64,
    pub gates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CostTolerance,
    ParamTolerance,
    MaxEvals,
    TargetCost,
}

/// Strict improvements of one minimization run. Record 0 is the start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub evaluations: usize,
    pub wall_time: f64,
    /// Outer iterations of the method (direction-set cycles, simplex steps or
    /// gradient steps).
    pub cycles: usize,
    pub stop: StopReason,
}

impl OptimizationTrace {
    pub fn best(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the start point")
    }

    pub fn final_cost(&self) -> f64 {
        self.best().cost
    }

    pub fn initial_cost(&self) -> f64 {
        self.records[0].cost
    }

    pub fn best_params(&self) -> &[f64] {
        &self.best().params
    }

    pub fn set_gate_count(&mut self, gates: usize) {
        for r in &mut self.records {
            r.gates = gates;
        }
    }

    /// CSV body: `iteration,cost,D,wall_time`. The time column is the
    /// cumulative evaluation fraction scaled to the run's wall time so that it
    /// stays monotone; pass `include_time = false` for byte-stable output.
    pub fn to_csv(&self, include_time: bool) -> String {
        let mut out = String::from("iteration,cost,D,wall_time\n");
        for r in &self.records {
            let t = if include_time && self.evaluations > 0 {
                self.wall_time * r.evaluation as f64 / self.evaluations as f64
            } else {
                0.0
            };
            out.push_str(&format!("{},{:e},{},{:e}\n", r.iteration, r.cost, r.gates, t));
        }
        out
    }

    /// Parameter vectors of every record, for the sidecar JSON.
    pub fn params_json(&self) -> Result<String> {
        let rows: Vec<&Vec<f64>> = self.records.iter().map(|r| &r.params).collect();
        Ok(serde_json::to_string(&rows)?)
    }
}

/// Why an optimizer loop stopped early.
pub(crate) enum Halt {
    Budget,
    Target,
    Nan(usize),
}

pub(crate) type Step<T> = std::result::Result<T, Halt>;

/// Wraps the objective: counts calls, enforces the budget, rejects NaN, and
/// records strict improvements.
pub(crate) struct Tracker<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    max_evals: usize,
    target: Option<f64>,
    pub evals: usize,
    pub cycles: usize,
    pub best_cost: f64,
    records: Vec<TraceRecord>,
    start: Instant,
}

impl<'a> Tracker<'a> {
    pub fn new(f: &'a mut dyn FnMut(&[f64]) -> f64, cfg: &OptimizerConfig) -> Self {
        Tracker {
            f,
            max_evals: cfg.max_evals,
            target: cfg.target_cost,
            evals: 0,
            cycles: 0,
            best_cost: f64::INFINITY,
            records: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> Step<f64> {
        if self.evals >= self.max_evals {
            return Err(Halt::Budget);
        }
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            return Err(Halt::Nan(self.evals));
        }
        if v < self.best_cost {
            self.best_cost = v;
            self.records.push(TraceRecord {
                iteration: self.records.len(),
                evaluation: self.evals,
                params: x.to_vec(),
                cost: v,
                gates: 0,
            });
            if let Some(t) = self.target {
                if v <= t {
                    return Err(Halt::Target);
                }
            }
        }
        Ok(v)
    }

    pub fn finish(self, outcome: Step<StopReason>) -> Result<OptimizationTrace> {
        let stop = match outcome {
            Ok(reason) => reason,
            Err(Halt::Budget) => StopReason::MaxEvals,
            Err(Halt::Target) => StopReason::TargetCost,
            Err(Halt::Nan(evaluation)) => return Err(VqsdError::NanObjective { evaluation }),
        };
        if self.records.is_empty() {
            return Err(VqsdError::InvalidArgument("optimizer stopped before evaluating the start point".into()));
        }
        Ok(OptimizationTrace {
            records: self.records,
            evaluations: self.evals,
            wall_time: self.start.elapsed().as_secs_f64(),
            cycles: self.cycles,
            stop,
        })
    }
}

/// `2|a − b| ≤ tol(|a| + |b|) + tiny`, the usual relative stall test.
pub(crate) fn stalled(a: f64, b: f64, tol: f64) -> bool {
    2.0 * (a - b).abs() <= tol * (a.abs() + b.abs()) + 1e-30
}
