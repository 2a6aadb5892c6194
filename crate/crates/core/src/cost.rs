//! Diagonalization costs `C1`, `C2`, their weighted mix `C`, and the eigenvalue
//! and eigenvector error metrics they bound.
//!
//! With `ρ̃ = UρU†`:
//!
//! - `C1 = Tr(ρ²) − Tr(Z(ρ̃)²)`
//! - `C2 = Tr(ρ²) − (1/n) Σⱼ Tr(Z_j(ρ̃)²)`
//! - `C = q·C1 + (1−q)·C2`, and `Δλ, Δv ≤ β·C` with `β = n / (1 + q(n−1))`.

use crate::ansatz::Diagonalizer;
use crate::circuits::{destructive_swap_test, dip_test, pdip_test, EvalMode, ShotPlan};
use crate::gates::qubit_mask;
use crate::random::Rng;
use crate::state::QuantumState;
use crate::{CMatrix, Result, VqsdError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub q: f64,
    pub mode: EvalMode,
    pub shots: u64,
    pub tr_rho_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub delta_lambda: f64,
    pub delta_v: f64,
    pub beta: f64,
}

pub fn beta(n: usize, q: f64) -> f64 {
    n as f64 / (1.0 + q * (n as f64 - 1.0))
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(VqsdError::InvalidArgument(format!("q = {q} is outside [0, 1]")));
    }
    Ok(())
}

/// `ρ̃ = UρU†`, keeping pure inputs in vector form.
pub fn rotate<D: Diagonalizer>(rho: &QuantumState, u: &D) -> Result<QuantumState> {
    if u.n_qubits() != rho.n_qubits() {
        return Err(VqsdError::QubitMismatch { left: rho.n_qubits(), right: u.n_qubits() });
    }
    Ok(match rho {
        QuantumState::Pure { n_qubits, amps } => {
            let mut a = amps.clone();
            u.apply_to_amps(a.as_mut_slice());
            QuantumState::pure_unchecked(*n_qubits, a)
        }
        QuantumState::Mixed { n_qubits, rho } => {
            let mut m = rho.clone();
            u.apply_to_density(&mut m);
            QuantumState::density_unchecked(*n_qubits, m)
        }
    })
}

/// `Tr(Z(ρ)²)`: sum of squared diagonal entries.
pub fn dephased_purity(rho: &QuantumState) -> f64 {
    rho.diagonal().iter().map(|p| p * p).sum()
}

/// `Tr(Z_j(ρ)²)`.
pub fn local_dephased_purity(rho: &QuantumState, j: usize) -> f64 {
    let n = rho.n_qubits();
    let m = qubit_mask(n, j);
    match rho {
        QuantumState::Pure { amps, .. } => {
            let p1: f64 = amps.iter().enumerate().filter(|(x, _)| x & m != 0).map(|(_, a)| a.norm_sqr()).sum();
            let p0: f64 = amps.iter().enumerate().filter(|(x, _)| x & m == 0).map(|(_, a)| a.norm_sqr()).sum();
            p0 * p0 + p1 * p1
        }
        QuantumState::Mixed { rho, .. } => {
            let d = rho.nrows();
            let mut acc = 0.0;
            for c in 0..d {
                for r in 0..d {
                    if (r ^ c) & m == 0 {
                        acc += rho[(r, c)].norm_sqr();
                    }
                }
            }
            acc
        }
    }
}

/// Per-problem data fixed for the whole optimization: the state and its
/// purity, evaluated once.
#[derive(Debug, Clone)]
pub struct CostContext {
    rho: QuantumState,
    tr_rho_sq: f64,
}

impl CostContext {
    /// Exact-mode context.
    pub fn new(rho: QuantumState) -> Self {
        let tr_rho_sq = rho.purity();
        CostContext { rho, tr_rho_sq }
    }

    /// Context whose purity follows `plan`: a destructive swap test of `ρ`
    /// with itself in sampled mode.
    pub fn with_plan(rho: QuantumState, plan: &ShotPlan, rng: &mut Rng) -> Result<Self> {
        plan.validate()?;
        let tr_rho_sq = if plan.is_exact() { rho.purity() } else { destructive_swap_test(&rho, &rho, plan, rng)?.value };
        Ok(CostContext { rho, tr_rho_sq })
    }

    pub fn state(&self) -> &QuantumState {
        &self.rho
    }

    pub fn n_qubits(&self) -> usize {
        self.rho.n_qubits()
    }

    pub fn tr_rho_sq(&self) -> f64 {
        self.tr_rho_sq
    }

    fn global_term(&self, rt: &QuantumState, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
        Ok(if plan.is_exact() { dephased_purity(rt) } else { dip_test(rt, rt, plan, rng)?.value })
    }

    fn local_term(&self, rt: &QuantumState, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
        let n = rt.n_qubits();
        let mut acc = 0.0;
        for j in 0..n {
            acc += if plan.is_exact() { local_dephased_purity(rt, j) } else { pdip_test(rt, rt, &[j], plan, rng)?.value };
        }
        Ok(acc / n as f64)
    }

    pub fn c1<D: Diagonalizer>(&self, u: &D, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
        plan.validate()?;
        let rt = rotate(&self.rho, u)?;
        Ok(self.tr_rho_sq - self.global_term(&rt, plan, rng)?)
    }

    pub fn c2<D: Diagonalizer>(&self, u: &D, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
        plan.validate()?;
        let rt = rotate(&self.rho, u)?;
        Ok(self.tr_rho_sq - self.local_term(&rt, plan, rng)?)
    }

    /// Full report. Only the terms with non-zero weight are sampled; the other
    /// term is still reported, evaluated exactly in exact mode and sampled
    /// otherwise.
    pub fn evaluate<D: Diagonalizer>(&self, u: &D, q: f64, plan: &ShotPlan, rng: &mut Rng) -> Result<CostReport> {
        check_q(q)?;
        plan.validate()?;
        let rt = rotate(&self.rho, u)?;
        let c1 = self.tr_rho_sq - self.global_term(&rt, plan, rng)?;
        let c2 = if rt.n_qubits() == 1 && plan.is_exact() { c1 } else { self.tr_rho_sq - self.local_term(&rt, plan, rng)? };
        Ok(CostReport {
            c: q * c1 + (1.0 - q) * c2,
            c1,
            c2,
            q,
            mode: plan.mode,
            shots: if plan.is_exact() { 0 } else { plan.shots },
            tr_rho_sq: self.tr_rho_sq,
        })
    }

    /// Weighted cost only, skipping the zero-weight term.
    pub fn weighted<D: Diagonalizer>(&self, u: &D, q: f64, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
        check_q(q)?;
        plan.validate()?;
        let rt = rotate(&self.rho, u)?;
        let mut c = 0.0;
        if q > 0.0 {
            c += q * (self.tr_rho_sq - self.global_term(&rt, plan, rng)?);
        }
        if q < 1.0 {
            c += (1.0 - q) * (self.tr_rho_sq - self.local_term(&rt, plan, rng)?);
        }
        Ok(c)
    }

    /// `Δλ`, `Δv` and `β` for the unitary `u`.
    pub fn error_metrics<D: Diagonalizer>(&self, u: &D, q: f64) -> Result<ErrorMetrics> {
        check_q(q)?;
        let rt = rotate(&self.rho, u)?;
        let exact = self.rho.exact_eigendecomposition()?;
        let dim = self.rho.dim();
        let delta_lambda = eigenvalue_error(&exact.eigenvalues, &rt.diagonal(), dim)?;
        let vectors = u.unitary().adjoint();
        let delta_v = eigenvector_error(&self.rho, &vectors)?;
        Ok(ErrorMetrics { delta_lambda, delta_v, beta: beta(self.n_qubits(), q) })
    }
}

/// Free-function form of [`CostContext::c1`].
pub fn cost_c1<D: Diagonalizer>(rho: &QuantumState, u: &D, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
    CostContext::with_plan(rho.clone(), plan, rng)?.c1(u, plan, rng)
}

/// Free-function form of [`CostContext::c2`].
pub fn cost_c2<D: Diagonalizer>(rho: &QuantumState, u: &D, plan: &ShotPlan, rng: &mut Rng) -> Result<f64> {
    CostContext::with_plan(rho.clone(), plan, rng)?.c2(u, plan, rng)
}

/// Free-function form of [`CostContext::evaluate`].
pub fn cost<D: Diagonalizer>(rho: &QuantumState, u: &D, q: f64, plan: &ShotPlan, rng: &mut Rng) -> Result<CostReport> {
    check_q(q)?;
    CostContext::with_plan(rho.clone(), plan, rng)?.evaluate(u, q, plan, rng)
}

fn sorted_padded(v: &[f64], dim: usize) -> Result<Vec<f64>> {
    if v.len() > dim {
        return Err(VqsdError::DimensionMismatch { expected: dim, found: v.len() });
    }
    let mut out = v.to_vec();
    out.resize(dim, 0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `Δλ = Σᵢ (λᵢ − λ̃ᵢ)²` after sorting both descending and zero-padding to `dim`.
pub fn eigenvalue_error(true_spectrum: &[f64], inferred: &[f64], dim: usize) -> Result<f64> {
    let a = sorted_padded(true_spectrum, dim)?;
    let b = sorted_padded(inferred, dim)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `Δv = Σ_z ‖ρ|ṽ_z⟩ − λ̃_z|ṽ_z⟩‖²` over the columns of `vectors`, with
/// `λ̃_z = ⟨ṽ_z|ρ|ṽ_z⟩`. Columns must be orthonormal within 1e-8.
pub fn eigenvector_error(rho: &QuantumState, vectors: &CMatrix) -> Result<f64> {
    let d = rho.dim();
    if vectors.nrows() != d {
        return Err(VqsdError::DimensionMismatch { expected: d, found: vectors.nrows() });
    }
    let k = vectors.ncols();
    let gram = vectors.adjoint() * vectors;
    let dev = (gram - CMatrix::identity(k, k)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(VqsdError::InvalidArgument(format!("inferred vectors are not orthonormal (deviation {dev:.3e})")));
    }
    let rv = rho.matrix().as_ref() * vectors;
    let mut total = 0.0;
    for z in 0..k {
        let v = vectors.column(z);
        let w = rv.column(z);
        let lambda = v.dotc(&w);
        total += (w - v * lambda).norm_squared();
    }
    Ok(total)
}
