//! Eigenvalue readout from the computational-basis statistics of `ρ̃`,
//! eigenvector preparation `|ṽ_z⟩ = U†|z⟩`, and observable resolution.

use crate::ansatz::Diagonalizer;
use crate::cost::rotate;
use crate::io::{fmt_f64, CsvWriter};
use crate::random::{seeded, Rng};
use crate::state::{parse_bitstring, Observable, QuantumState, SpectralDecomposition};
use crate::{CMatrix, CVector, Result, VqsdError};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub bitstring: String,
    pub index: usize,
    pub frequency: u64,
    pub estimate: f64,
    /// `√N / f_z`.
    pub rel_error: f64,
    pub accepted: bool,
}

/// Draws multinomial counts by sequential binomials.
pub fn multinomial(probs: &[f64], shots: u64, rng: &mut Rng) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        let k = if i + 1 == probs.len() || p >= mass {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, (p / mass).min(1.0)).expect("valid binomial").sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

fn build_estimates(n: usize, counts: &[u64], shots: u64) -> Vec<EigenEstimate> {
    let mut out: Vec<EigenEstimate> = counts
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0)
        .map(|(idx, &f)| EigenEstimate {
            bitstring: QuantumState::bitstring(n, idx),
            index: idx,
            frequency: f,
            estimate: f as f64 / shots as f64,
            rel_error: (shots as f64).sqrt() / f as f64,
            accepted: true,
        })
        .collect();
    out.sort_by(|a, b| b.estimate.total_cmp(&a.estimate).then(a.index.cmp(&b.index)));
    out
}

/// Samples `N` bitstrings from `⟨z|ρ̃|z⟩` and returns one estimate per observed
/// bitstring, largest first. All observed outcomes start out accepted; apply
/// [`threshold`] to set the flags.
pub fn infer_eigenvalues<D: Diagonalizer>(
    rho: &QuantumState,
    u: &D,
    n_readout: u64,
    seed: u64,
) -> Result<Vec<EigenEstimate>> {
    if n_readout == 0 {
        return Err(VqsdError::InvalidArgument("N_readout must be at least 1".into()));
    }
    let probs = rotate(rho, u)?.diagonal();
    let counts = multinomial(&probs, n_readout, &mut seeded(seed));
    Ok(build_estimates(rho.n_qubits(), &counts, n_readout))
}

/// Noise-free readout: every diagonal entry of `ρ̃` above `floor`, largest
/// first. `frequency` is 0 and `rel_error` 0 in this form.
pub fn exact_eigenvalues<D: Diagonalizer>(rho: &QuantumState, u: &D, floor: f64) -> Result<Vec<EigenEstimate>> {
    let n = rho.n_qubits();
    let probs = rotate(rho, u)?.diagonal();
    let mut out: Vec<EigenEstimate> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > floor)
        .map(|(idx, &p)| EigenEstimate {
            bitstring: QuantumState::bitstring(n, idx),
            index: idx,
            frequency: 0,
            estimate: p,
            rel_error: 0.0,
            accepted: true,
        })
        .collect();
    out.sort_by(|a, b| b.estimate.total_cmp(&a.estimate).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// Sets `accepted ⇔ ε_z ≤ ε_max` and returns `m`, the accepted count.
pub fn threshold(estimates: &mut [EigenEstimate], eps_max: f64) -> usize {
    let mut m = 0;
    for e in estimates.iter_mut() {
        e.accepted = e.frequency > 0 && e.rel_error <= eps_max;
        m += e.accepted as usize;
    }
    m
}

/// `|ṽ_z⟩ = U†|z⟩`.
pub fn prepare_eigenvector<D: Diagonalizer>(u: &D, z: &str) -> Result<QuantumState> {
    let n = u.n_qubits();
    if z.len() != n {
        return Err(VqsdError::InvalidArgument(format!("bitstring {z:?} has length {}, expected {n}", z.len())));
    }
    let idx = parse_bitstring(z)?;
    prepare_eigenvector_index(u, idx)
}

pub fn prepare_eigenvector_index<D: Diagonalizer>(u: &D, idx: usize) -> Result<QuantumState> {
    let d = 1usize << u.n_qubits();
    if idx >= d {
        return Err(VqsdError::InvalidArgument(format!("basis index {idx} out of range")));
    }
    // ⟨x|U†|z⟩ = conj(⟨z|U|x⟩)
    let full = u.unitary();
    let v = CVector::from_iterator(d, (0..d).map(|x| full[(idx, x)].conj()));
    QuantumState::pure(v)
}

/// `⟨ṽ|M|ṽ⟩`.
pub fn resolve_observable(vector: &QuantumState, obs: &Observable) -> Result<f64> {
    if !vector.is_pure_form() {
        return Err(VqsdError::InvalidState("observable resolution expects a pure vector".into()));
    }
    vector.expectation(obs)
}

/// Splits a descending list into runs whose consecutive gaps are at most
/// `tol(a, b)`. Returns index ranges.
pub fn group_degenerate(values: &[f64], tol: impl Fn(f64, f64) -> f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > tol(values[i - 1], values[i]) {
            if start < i {
                groups.push(start..i);
            }
            start = i;
        }
    }
    groups
}

/// Two-sigma multinomial grouping tolerance for estimates from `N` shots.
pub fn two_sigma(n_readout: u64) -> impl Fn(f64, f64) -> f64 {
    move |a: f64, b: f64| {
        let s = |p: f64| (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n_readout as f64).sqrt();
        2.0 * (s(a).powi(2) + s(b).powi(2)).sqrt()
    }
}

/// Observable values resolved inside a group of inferred eigenvectors:
/// eigenvalues of `M` restricted to their span, descending. A single vector
/// gives its plain expectation value.
pub fn resolve_in_span<D: Diagonalizer>(u: &D, indices: &[usize], obs: &Observable) -> Result<Vec<f64>> {
    let d = 1usize << u.n_qubits();
    if obs.dim() != d {
        return Err(VqsdError::DimensionMismatch { expected: d, found: obs.dim() });
    }
    let full = u.unitary();
    let basis = CMatrix::from_fn(d, indices.len(), |x, c| full[(indices[c], x)].conj());
    let restricted = basis.adjoint() * &obs.matrix * &basis;
    Ok(SpectralDecomposition::of_hermitian(&restricted)?.eigenvalues)
}

pub fn eigenvalue_report_csv(estimates: &[EigenEstimate]) -> String {
    let mut w = CsvWriter::new(&["bitstring", "frequency", "estimate", "rel_error", "accepted"]);
    for e in estimates {
        w.row(&[
            e.bitstring.clone(),
            e.frequency.to_string(),
            fmt_f64(e.estimate),
            fmt_f64(e.rel_error),
            e.accepted.to_string(),
        ]);
    }
    w.finish()
}

/// `bitstring, estimate, observable` rows.
pub fn observable_report_csv(rows: &[(String, f64, f64)]) -> String {
    let mut w = CsvWriter::new(&["bitstring", "estimate", "observable"]);
    for (z, est, val) in rows {
        w.row(&[z.clone(), fmt_f64(*est), fmt_f64(*val)]);
    }
    w.finish()
}

/// Builds the observable report for the given estimates.
pub fn observable_report<D: Diagonalizer>(
    u: &D,
    estimates: &[EigenEstimate],
    obs: &Observable,
) -> Result<Vec<(String, f64, f64)>> {
    estimates
        .iter()
        .map(|e| {
            let v = prepare_eigenvector_index(u, e.index)?;
            Ok((e.bitstring.clone(), e.estimate, resolve_observable(&v, obs)?))
        })
        .collect()
}

/// `⟨ṽ|ρ|ṽ⟩` for a pure `ṽ`.
pub fn rayleigh(rho: &QuantumState, v: &QuantumState) -> Result<f64> {
    let a = v.amplitudes().ok_or(VqsdError::InvalidState("expected a pure vector".into()))?;
    let m = rho.matrix();
    if m.nrows() != a.len() {
        return Err(VqsdError::DimensionMismatch { expected: m.nrows(), found: a.len() });
    }
    Ok(a.dotc(&(m.as_ref() * a)).re)
}
