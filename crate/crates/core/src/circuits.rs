//! Purity test circuits on two input registers `σ` and `τ`.
//!
//! - Destructive Swap Test: CNOT from each `σ` qubit onto its `τ` partner,
//!   Hadamard on the `σ` qubits, measure everything; the shot value is the
//!   parity `(−1)^{Σ aᵢbᵢ}` and its mean is `Tr(στ)`.
//! - DIP Test: CNOT from each `τ` qubit onto its `σ` partner, measure the `σ`
//!   register; the shot value is the all-zeros indicator and its mean is
//!   `Tr(Z(σ)Z(τ))`.
//! - PDIP Test: the DIP wiring on the dephased qubits, the swap-test wiring on
//!   the rest; the shot value is the indicator times the complement parity and
//!   its mean is `Tr(Z_j(σ)Z_j(τ))`.
//!
//! In sampled mode every shot value lies in `{−1, 0, +1}`, so shots are drawn
//! from the law of that value under the circuit's outcome distribution. For
//! registers of up to [`GATE_LEVEL_MAX_QUBITS`] qubits that law is obtained by
//! simulating the circuit gate by gate on every pair of eigenvectors of the
//! inputs. Larger registers use the closed-form law, which the gate-level
//! simulation is tested against.

use crate::gates::{apply_1q_vec, apply_cnot_vec, hadamard, qubit_mask};
use crate::random::Rng;
use crate::state::QuantumState;
use crate::{Result, VqsdError, C64};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Largest per-register size simulated gate by gate in sampled mode.
pub const GATE_LEVEL_MAX_QUBITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub mode: EvalMode,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_shots() -> u64 {
    10_000
}

impl Default for ShotPlan {
    fn default() -> Self {
        ShotPlan::exact()
    }
}

impl ShotPlan {
    pub fn exact() -> Self {
        ShotPlan { mode: EvalMode::Exact, shots: 0, seed: 0 }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        ShotPlan { mode: EvalMode::Sampled, shots, seed }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == EvalMode::Exact
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == EvalMode::Sampled && self.shots == 0 {
            return Err(VqsdError::InvalidArgument("sampled mode requires at least one shot".into()));
        }
        Ok(())
    }

    /// Same plan with the seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        ShotPlan { seed, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitEstimate {
    pub value: f64,
    pub std_error: f64,
    pub shots_used: u64,
}

impl CircuitEstimate {
    fn exact(value: f64) -> Self {
        CircuitEstimate { value, std_error: 0.0, shots_used: 0 }
    }
}

/// Which qubits get the DIP wiring; the rest get the swap-test wiring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestCircuit {
    DestructiveSwap,
    Dip,
    Pdip(Vec<usize>),
}

impl TestCircuit {
    fn dip_mask(&self, n: usize) -> Vec<bool> {
        match self {
            TestCircuit::DestructiveSwap => vec![false; n],
            TestCircuit::Dip => vec![true; n],
            TestCircuit::Pdip(js) => {
                let mut m = vec![false; n];
                for &j in js {
                    m[j] = true;
                }
                m
            }
        }
    }
}

fn check_pair(sigma: &QuantumState, tau: &QuantumState) -> Result<usize> {
    if sigma.n_qubits() != tau.n_qubits() {
        return Err(VqsdError::QubitMismatch { left: sigma.n_qubits(), right: tau.n_qubits() });
    }
    Ok(sigma.n_qubits())
}

/// `Σ_{x,y : x⊕y ∈ keep-mask} Re(σ_xy τ_yx)`; mask bits select dephased qubits.
fn masked_overlap(sigma: &QuantumState, tau: &QuantumState, dephase_mask: usize) -> f64 {
    let s = sigma.matrix();
    let t = tau.matrix();
    let d = s.nrows();
    let mut acc = 0.0;
    for x in 0..d {
        for y in 0..d {
            if (x ^ y) & dephase_mask == 0 {
                acc += (s[(x, y)] * t[(y, x)]).re;
            }
        }
    }
    acc
}

fn mask_of(n: usize, dip: &[bool]) -> usize {
    dip.iter().enumerate().filter(|(_, &b)| b).map(|(q, _)| qubit_mask(n, q)).sum()
}

/// Estimates `Tr(στ)`.
pub fn destructive_swap_test(
    sigma: &QuantumState,
    tau: &QuantumState,
    plan: &ShotPlan,
    rng: &mut Rng,
) -> Result<CircuitEstimate> {
    run_test(&TestCircuit::DestructiveSwap, sigma, tau, plan, rng)
}

/// Estimates `Tr(Z(σ)Z(τ))`.
pub fn dip_test(sigma: &QuantumState, tau: &QuantumState, plan: &ShotPlan, rng: &mut Rng) -> Result<CircuitEstimate> {
    run_test(&TestCircuit::Dip, sigma, tau, plan, rng)
}

/// Estimates `Tr(Z_j(σ)Z_j(τ))` for the dephased qubit set `dip_qubits`.
pub fn pdip_test(
    sigma: &QuantumState,
    tau: &QuantumState,
    dip_qubits: &[usize],
    plan: &ShotPlan,
    rng: &mut Rng,
) -> Result<CircuitEstimate> {
    let n = check_pair(sigma, tau)?;
    for (i, &j) in dip_qubits.iter().enumerate() {
        if j >= n {
            return Err(VqsdError::QubitOutOfRange { index: j, n_qubits: n });
        }
        if dip_qubits[..i].contains(&j) {
            return Err(VqsdError::InvalidSubset(format!("qubit {j} listed twice")));
        }
    }
    run_test(&TestCircuit::Pdip(dip_qubits.to_vec()), sigma, tau, plan, rng)
}

/// Runs any of the three tests.
pub fn run_test(
    circuit: &TestCircuit,
    sigma: &QuantumState,
    tau: &QuantumState,
    plan: &ShotPlan,
    rng: &mut Rng,
) -> Result<CircuitEstimate> {
    let n = check_pair(sigma, tau)?;
    plan.validate()?;
    let dip = circuit.dip_mask(n);
    if plan.is_exact() {
        return Ok(CircuitEstimate::exact(masked_overlap(sigma, tau, mask_of(n, &dip))));
    }
    let law = if n <= GATE_LEVEL_MAX_QUBITS {
        gate_level_value_law(&dip, sigma, tau)?
    } else {
        closed_form_value_law(&dip, sigma, tau)
    };
    Ok(sample_values(&law, plan.shots, rng))
}

/// Probabilities of the shot values `(+1, −1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueLaw {
    pub plus: f64,
    pub minus: f64,
    pub zero: f64,
}

impl ValueLaw {
    pub fn mean(&self) -> f64 {
        self.plus - self.minus
    }
}

/// Shot-value law from `P(indicator = 1)` and `E[value]`.
pub fn closed_form_value_law(dip: &[bool], sigma: &QuantumState, tau: &QuantumState) -> ValueLaw {
    let n = sigma.n_qubits();
    let mask = mask_of(n, dip);
    let expectation = masked_overlap(sigma, tau, mask);
    // P(all dephased σ-bits read 0) = Σ_z p_σ(z) p_τ(z) over the dephased marginals.
    let (ps, pt) = (sigma.diagonal(), tau.diagonal());
    let mut marg_s = std::collections::BTreeMap::<usize, f64>::new();
    let mut marg_t = std::collections::BTreeMap::<usize, f64>::new();
    for (x, (&a, &b)) in ps.iter().zip(pt.iter()).enumerate() {
        *marg_s.entry(x & mask).or_default() += a;
        *marg_t.entry(x & mask).or_default() += b;
    }
    let p_ind: f64 = marg_s.iter().map(|(k, a)| a * marg_t.get(k).copied().unwrap_or(0.0)).sum();
    let p_ind = p_ind.clamp(0.0, 1.0);
    let plus = ((p_ind + expectation) / 2.0).clamp(0.0, 1.0);
    let minus = ((p_ind - expectation) / 2.0).clamp(0.0, 1.0);
    ValueLaw { plus, minus, zero: (1.0 - plus - minus).max(0.0) }
}

fn pure_components(state: &QuantumState) -> Result<Vec<(f64, Vec<C64>)>> {
    match state {
        QuantumState::Pure { amps, .. } => Ok(vec![(1.0, amps.iter().cloned().collect())]),
        QuantumState::Mixed { .. } => {
            let spec = state.exact_eigendecomposition()?;
            Ok(spec
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 1e-14)
                .map(|(k, &l)| (l, spec.eigenvectors.column(k).iter().cloned().collect()))
                .collect())
        }
    }
}

/// Outcome distribution over the `2n` measured bits (σ-register bits high,
/// τ-register bits low) of the wired circuit on a product of pure inputs.
pub fn pure_outcome_distribution(dip: &[bool], psi: &[C64], phi: &[C64]) -> Vec<f64> {
    let n = dip.len();
    let total = 2 * n;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << total];
    let d = 1usize << n;
    for a in 0..d {
        if psi[a] == C64::new(0.0, 0.0) {
            continue;
        }
        for b in 0..d {
            amps[(a << n) | b] = psi[a] * phi[b];
        }
    }
    let h = hadamard();
    for (i, &is_dip) in dip.iter().enumerate() {
        let s = i;
        let t = n + i;
        if is_dip {
            apply_cnot_vec(&mut amps, total, t, s);
        } else {
            apply_cnot_vec(&mut amps, total, s, t);
            apply_1q_vec(&mut amps, total, s, &h);
        }
    }
    amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Shot value of one measured outcome.
pub fn shot_value(dip: &[bool], outcome: usize) -> i8 {
    let n = dip.len();
    let mut parity = 0usize;
    for (i, &is_dip) in dip.iter().enumerate() {
        let a = (outcome >> (2 * n - 1 - i)) & 1;
        let b = (outcome >> (n - 1 - i)) & 1;
        if is_dip {
            if a == 1 {
                return 0;
            }
        } else {
            parity ^= a & b;
        }
    }
    if parity == 0 {
        1
    } else {
        -1
    }
}

/// Shot-value law from gate-level simulation over eigenvector pairs.
pub fn gate_level_value_law(dip: &[bool], sigma: &QuantumState, tau: &QuantumState) -> Result<ValueLaw> {
    let n = sigma.n_qubits();
    if n > GATE_LEVEL_MAX_QUBITS + 3 {
        return Err(VqsdError::ResourceLimit(format!("gate-level simulation of {} qubits", 2 * n)));
    }
    let values: Vec<i8> = (0..1usize << (2 * n)).map(|o| shot_value(dip, o)).collect();
    let (mut plus, mut minus) = (0.0, 0.0);
    for (ls, psi) in pure_components(sigma)? {
        for (lt, phi) in pure_components(tau)? {
            let w = ls * lt;
            for (p, &v) in pure_outcome_distribution(dip, &psi, &phi).iter().zip(values.iter()) {
                match v {
                    1 => plus += w * p,
                    -1 => minus += w * p,
                    _ => {}
                }
            }
        }
    }
    let plus = plus.clamp(0.0, 1.0);
    let minus = minus.clamp(0.0, 1.0);
    Ok(ValueLaw { plus, minus, zero: (1.0 - plus - minus).max(0.0) })
}

fn binomial(n: u64, p: f64, rng: &mut Rng) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|b| b.sample(rng)).unwrap_or(0)
}

/// Draws `shots` values from the law and summarizes them.
pub fn sample_values(law: &ValueLaw, shots: u64, rng: &mut Rng) -> CircuitEstimate {
    let n_plus = binomial(shots, law.plus, rng);
    let rest = shots - n_plus;
    let denom = 1.0 - law.plus;
    let n_minus = if denom > 0.0 { binomial(rest, (law.minus / denom).min(1.0), rng) } else { 0 };
    let n_zero = shots - n_plus - n_minus;
    summarize(n_plus, n_minus, n_zero)
}

fn summarize(n_plus: u64, n_minus: u64, n_zero: u64) -> CircuitEstimate {
    let shots = n_plus + n_minus + n_zero;
    let nf = shots as f64;
    let mean = (n_plus as f64 - n_minus as f64) / nf;
    let second = (n_plus + n_minus) as f64 / nf;
    let std_error = if shots > 1 {
        let var = ((second - mean * mean) * nf / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    CircuitEstimate { value: mean, std_error, shots_used: shots }
}
