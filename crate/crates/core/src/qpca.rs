//! One-bit qPCA on a single-qubit input: exponential swap, its controlled and
//! compiled forms, and the phase-estimation circuit with an optional noise
//! wrapper.
//!
//! Register layout: qubit 0 is the ancilla, qubit 1 the target `A`, qubits
//! `2..2+k` the copies `B_1..B_k`.

use crate::circuits::ShotPlan;
use crate::gates::{apply_1q_density, apply_cnot_density, apply_2q_density, qubit_mask, rz, Mat2, Mat4};
use crate::io::{fmt_f64, CsvWriter};
use crate::random::Rng;
use crate::state::QuantumState;
use crate::{CMatrix, Result, VqsdError, C64};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Total simulated qubits allowed (ancilla + target + copies).
pub const MAX_TOTAL_QUBITS: usize = 12;

/// `e^{−iSΔt} = cos Δt·I − i sin Δt·S`.
pub fn exp_swap(dt: f64) -> Mat4 {
    let z = C64::new(0.0, 0.0);
    let c = C64::new(dt.cos(), 0.0);
    let s = C64::new(0.0, -dt.sin());
    [[c + s, z, z, z], [z, c, s, z], [z, s, c, z], [z, z, z, c + s]]
}

/// `|0⟩⟨0|⊗I + |1⟩⟨1|⊗e^{−iSΔt}` on (control, A, B).
pub fn controlled_exp_swap(dt: f64) -> CMatrix {
    let mut m = CMatrix::identity(8, 8);
    let e = exp_swap(dt);
    for r in 0..4 {
        for c in 0..4 {
            m[(4 + r, 4 + c)] = e[r][c];
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompiledGate {
    Cnot { control: usize, target: usize },
    Single { qubit: usize, gate: Mat2 },
}

fn u2(dt: f64) -> Mat2 {
    let h = FRAC_1_SQRT_2;
    [
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::from_polar(h, -(PI - dt) / 2.0), C64::from_polar(h, (PI + dt) / 2.0)],
    ]
}

fn u6(dt: f64) -> Mat2 {
    let h = FRAC_1_SQRT_2;
    [
        [C64::new(h, 0.0), C64::from_polar(h, -(PI + dt) / 2.0)],
        [C64::new(0.0, -h), C64::from_polar(h, -dt / 2.0)],
    ]
}

/// The 7-CNOT, 8-single-qubit-gate sequence for the controlled exponential
/// swap, in time order, on local qubits (0 = control, 1 = A, 2 = B).
pub fn compiled_controlled_exp_swap(dt: f64) -> Vec<CompiledGate> {
    use CompiledGate::*;
    let cx = |control, target| Cnot { control, target };
    let one = |qubit, gate| Single { qubit, gate };
    let u1 = rz(-(PI + dt) / 2.0);
    vec![
        cx(0, 2),
        cx(1, 2),
        one(2, u1),
        one(1, u2(dt)),
        cx(0, 1),
        cx(0, 2),
        one(1, rz((PI - dt) / 2.0)),
        cx(2, 1),
        one(2, rz(dt / 2.0)),
        one(1, rz((PI + dt) / 2.0)),
        cx(0, 1),
        one(1, u6(dt)),
        cx(1, 2),
        one(0, u1),
        one(2, rz(PI / 2.0)),
    ]
}

/// Dense 8×8 unitary of a compiled sequence.
pub fn sequence_unitary(seq: &[CompiledGate]) -> CMatrix {
    use crate::gates::{embed_1q, embed_cnot};
    let mut u = CMatrix::identity(8, 8);
    for g in seq {
        let m = match *g {
            CompiledGate::Cnot { control, target } => embed_cnot(3, control, target),
            CompiledGate::Single { qubit, gate } => embed_1q(&gate, 3, qubit),
        };
        u = m * u;
    }
    u
}

/// Largest entrywise deviation after removing the best global phase.
pub fn phase_aligned_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Two-qubit depolarizing probability after every CNOT.
    pub p_depol: f64,
    /// Ancilla readout flip probability.
    pub p_readout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { p_depol: 0.01, p_readout: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// The inferred pair is the x-basis outcome distribution `{p(+), p(−)}`.
    #[default]
    OutcomeFrequency,
    /// Inverts `⟨X⟩ = λ cos(λt) + (1−λ) cos((1−λ)t)` for `λ ∈ [½, 1]`.
    TwoPointInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpcaConfig {
    pub t: f64,
    pub k: usize,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub estimator: Estimator,
}

impl QpcaConfig {
    pub fn new(t: f64, k: usize) -> Self {
        QpcaConfig { t, k, noise: None, estimator: Estimator::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(VqsdError::InvalidArgument(format!("t = {} must be finite and non-negative", self.t)));
        }
        if self.k == 0 {
            return Err(VqsdError::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(n) = self.noise {
            if !(0.0..=1.0).contains(&n.p_depol) || !(0.0..=1.0).contains(&n.p_readout) {
                return Err(VqsdError::InvalidArgument("noise probabilities must lie in [0, 1]".into()));
            }
        }
        if 2 + self.k > MAX_TOTAL_QUBITS {
            return Err(VqsdError::ResourceLimit(format!(
                "k = {} needs {} qubits, limit is {MAX_TOTAL_QUBITS}",
                self.k,
                2 + self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpcaEstimate {
    /// Probability (or frequency) of the `+` outcome.
    pub p_plus: f64,
    /// Larger member of the inferred pair.
    pub top: f64,
    pub shots_used: u64,
}

/// `ρ ← (1−p)ρ + p·I/4 ⊗ Tr_ab ρ`.
pub fn depolarize_pair(rho: &mut CMatrix, n: usize, a: usize, b: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let (ma, mb) = (qubit_mask(n, a), qubit_mask(n, b));
    let pair = ma | mb;
    let offs = [0, mb, ma, ma | mb];
    let d = rho.nrows();
    for c0 in (0..d).filter(|c| c & pair == 0) {
        for r0 in (0..d).filter(|r| r & pair == 0) {
            let s: C64 = offs.iter().map(|&o| rho[(r0 | o, c0 | o)]).sum();
            for &x in &offs {
                for &y in &offs {
                    let v = &mut rho[(r0 | x, c0 | y)];
                    *v *= 1.0 - p;
                    if x == y {
                        *v += s * (p / 4.0);
                    }
                }
            }
        }
    }
}

fn run_sequence(rho: &mut CMatrix, n: usize, map: [usize; 3], seq: &[CompiledGate], p_depol: f64) {
    for g in seq {
        match *g {
            CompiledGate::Cnot { control, target } => {
                apply_cnot_density(rho, n, map[control], map[target]);
                depolarize_pair(rho, n, map[control], map[target], p_depol);
            }
            CompiledGate::Single { qubit, gate } => apply_1q_density(rho, n, map[qubit], &gate),
        }
    }
}

/// Probability of the ancilla `+` outcome before readout error.
fn ancilla_plus(rho: &CMatrix, n: usize) -> f64 {
    let half = 1usize << (n - 1);
    let off: f64 = (0..half).map(|r| rho[(r, r + half)].re).sum();
    (0.5 + off).clamp(0.0, 1.0)
}

/// `λ ∈ [½, 1]` reproducing `x = ⟨X⟩` most closely; ties and flat responses
/// resolve to the smallest candidate, so `t = 0` yields ½.
pub fn invert_two_point(x: f64, t: f64) -> f64 {
    let f = |l: f64| l * (l * t).cos() + (1.0 - l) * ((1.0 - l) * t).cos();
    const GRID: usize = 4000;
    let at = |i: usize| 0.5 + 0.5 * i as f64 / GRID as f64;
    let mut best = 0;
    for i in 1..=GRID {
        if (f(at(i)) - x).abs() < (f(at(best)) - x).abs() {
            best = i;
        }
    }
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at((best + 1).min(GRID)));
    for _ in 0..60 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if (f(m1) - x).abs() <= (f(m2) - x).abs() {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let refined = 0.5 * (lo + hi);
    if (f(refined) - x).abs() < (f(at(best)) - x).abs() {
        refined
    } else {
        at(best)
    }
}

/// `Re Tr(ρ e^{−iρt})`, the ancilla `⟨X⟩` under exact exponentiation.
pub fn ideal_ancilla_x(rho: &QuantumState, t: f64) -> Result<f64> {
    let spec = rho.exact_eigendecomposition()?;
    Ok(spec.eigenvalues.iter().map(|&l| l.max(0.0) * (l.max(0.0) * t).cos()).sum())
}

/// Runs the one-bit circuit and returns the larger inferred eigenvalue.
pub fn qpca_one_bit(rho: &QuantumState, cfg: &QpcaConfig, plan: &ShotPlan, rng: &mut Rng) -> Result<QpcaEstimate> {
    cfg.validate()?;
    plan.validate()?;
    if rho.n_qubits() != 1 {
        return Err(VqsdError::InvalidArgument(format!("qPCA input must be one qubit, got {}", rho.n_qubits())));
    }
    let n = 2 + cfg.k;
    let r1 = rho.matrix().into_owned();
    // ancilla after the Hadamard: |+⟩⟨+|
    let mut state = CMatrix::from_element(2, 2, C64::new(0.5, 0.0));
    for _ in 0..=cfg.k {
        state = crate::gates::kron(&state, &r1);
    }
    let dt = cfg.t / cfg.k as f64;
    let seq = compiled_controlled_exp_swap(dt);
    let p_depol = cfg.noise.map_or(0.0, |m| m.p_depol);
    for j in 0..cfg.k {
        run_sequence(&mut state, n, [0, 1, 2 + j], &seq, p_depol);
    }
    let mut p_plus = ancilla_plus(&state, n);
    if let Some(m) = cfg.noise {
        p_plus = p_plus * (1.0 - m.p_readout) + (1.0 - p_plus) * m.p_readout;
    }
    let shots_used = if plan.is_exact() {
        0
    } else {
        let hits = Binomial::new(plan.shots, p_plus.clamp(0.0, 1.0))
            .map_err(|e| VqsdError::InvalidArgument(e.to_string()))?
            .sample(rng);
        p_plus = hits as f64 / plan.shots as f64;
        plan.shots
    };
    let top = match cfg.estimator {
        Estimator::OutcomeFrequency => p_plus.max(1.0 - p_plus),
        Estimator::TwoPointInversion => invert_two_point(2.0 * p_plus - 1.0, cfg.t),
    };
    Ok(QpcaEstimate { p_plus, top, shots_used })
}

/// `‖Tr_B[W(σ⊗ρ^{⊗k})W†] − VσV†‖₂²` with `V = e^{−iρt}`.
pub fn exponentiation_error(rho: &QuantumState, sigma: &QuantumState, t: f64, k: usize) -> Result<f64> {
    if rho.n_qubits() != 1 || sigma.n_qubits() != 1 || k == 0 || 1 + k > MAX_TOTAL_QUBITS {
        return Err(VqsdError::InvalidArgument("single-qubit inputs and 1 ≤ k ≤ 11 required".into()));
    }
    let n = 1 + k;
    let r1 = rho.matrix().into_owned();
    let mut state = sigma.matrix().into_owned();
    for _ in 0..k {
        state = crate::gates::kron(&state, &r1);
    }
    let u = exp_swap(t / k as f64);
    for j in 0..k {
        apply_2q_density(&mut state, n, 0, 1 + j, &u);
    }
    let reduced = QuantumState::density_with_tol(state, 1e-8)?.partial_trace(&[0])?;
    let v = rho.exact_eigendecomposition()?;
    let d = CMatrix::from_diagonal(&crate::CVector::from_iterator(
        2,
        v.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)),
    ));
    let vm = &v.eigenvectors * d * v.eigenvectors.adjoint();
    let target = &vm * sigma.matrix().as_ref() * vm.adjoint();
    crate::state::hs_distance(&reduced.matrix(), &target)
}

/// CSV rows of `(t, k, noise, estimate)`.
pub fn qpca_csv(rows: &[(f64, usize, bool, f64)]) -> String {
    let mut w = CsvWriter::new(&["t", "k", "noise", "estimate"]);
    for (t, k, noisy, est) in rows {
        w.row(&[fmt_f64(*t), k.to_string(), noisy.to_string(), fmt_f64(*est)]);
    }
    w.finish()
}
