//! Quantum states, observables and the dense linear algebra on them.
//!
//! A [`QuantumState`] is either a normalized amplitude vector or a density
//! matrix. Pure states stay as vectors and are promoted to matrices only when
//! an operation needs one.

use crate::gates::{qubit_bit, qubit_mask};
use crate::{CMatrix, CVector, Result, VqsdError, C64, DEFAULT_TOL};
use nalgebra::SymmetricEigen;
use std::borrow::Cow;

/// Largest register handled in density-matrix form.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { n_qubits: usize, amps: CVector },
    Mixed { n_qubits: usize, rho: CMatrix },
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(VqsdError::InvalidState(format!("dimension {dim} is not 2^n with n ≥ 1")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(VqsdError::ResourceLimit(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
    }
    Ok(n)
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev = 0.0f64;
    for r in 0..d {
        for c in r..d {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// Largest entrywise modulus of `U†U − I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    let d = p.nrows();
    let mut dev = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let target = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((p[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

impl QuantumState {
    /// Validated pure state from amplitudes.
    pub fn pure(amps: CVector) -> Result<Self> {
        Self::pure_with_tol(amps, DEFAULT_TOL)
    }

    pub fn pure_with_tol(amps: CVector, tol: f64) -> Result<Self> {
        let n_qubits = qubits_for_dim(amps.len())?;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol {
            return Err(VqsdError::InvalidState(format!("squared norm {norm_sq} differs from 1")));
        }
        Ok(QuantumState::Pure { n_qubits, amps })
    }

    /// Validated density matrix: Hermitian, unit trace, positive semidefinite.
    pub fn density(rho: CMatrix) -> Result<Self> {
        Self::density_with_tol(rho, DEFAULT_TOL)
    }

    pub fn density_with_tol(rho: CMatrix, tol: f64) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(VqsdError::DimensionMismatch { expected: rho.nrows(), found: rho.ncols() });
        }
        let n_qubits = qubits_for_dim(rho.nrows())?;
        let dev = hermiticity_deviation(&rho);
        if dev > tol {
            return Err(VqsdError::NotHermitian { deviation: dev });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(VqsdError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = SymmetricEigen::new(rho.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return Err(VqsdError::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(QuantumState::Mixed { n_qubits, rho })
    }

    /// Skips validation. For matrices produced by trace- and
    /// positivity-preserving maps of an already valid state.
    pub(crate) fn density_unchecked(n_qubits: usize, rho: CMatrix) -> Self {
        QuantumState::Mixed { n_qubits, rho }
    }

    pub(crate) fn pure_unchecked(n_qubits: usize, amps: CVector) -> Self {
        QuantumState::Pure { n_qubits, amps }
    }

    /// Computational basis state `|idx⟩`.
    pub fn basis(n_qubits: usize, idx: usize) -> Self {
        let d = 1usize << n_qubits;
        QuantumState::Pure { n_qubits, amps: crate::gates::basis_vector(d, idx) }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let rho = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        QuantumState::Mixed { n_qubits, rho }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure { n_qubits, .. } | QuantumState::Mixed { n_qubits, .. } => *n_qubits,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn is_pure_form(&self) -> bool {
        matches!(self, QuantumState::Pure { .. })
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match self {
            QuantumState::Pure { amps, .. } => Some(amps),
            QuantumState::Mixed { .. } => None,
        }
    }

    /// Density matrix view; borrows in matrix form, builds `|ψ⟩⟨ψ|` otherwise.
    pub fn matrix(&self) -> Cow<'_, CMatrix> {
        match self {
            QuantumState::Pure { amps, .. } => Cow::Owned(amps * amps.adjoint()),
            QuantumState::Mixed { rho, .. } => Cow::Borrowed(rho),
        }
    }

    /// Promotes to matrix form.
    pub fn to_density(&self) -> QuantumState {
        QuantumState::Mixed { n_qubits: self.n_qubits(), rho: self.matrix().into_owned() }
    }

    /// Diagonal of the density matrix, `⟨z|ρ|z⟩` for every basis state.
    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).collect(),
            QuantumState::Mixed { rho, .. } => (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        }
    }

    /// `UρU†` or `U|ψ⟩`.
    pub fn apply_unitary(&self, u: &CMatrix) -> Result<QuantumState> {
        self.apply_unitary_with_tol(u, DEFAULT_TOL)
    }

    pub fn apply_unitary_with_tol(&self, u: &CMatrix, tol: f64) -> Result<QuantumState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(VqsdError::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let dev = unitarity_deviation(u);
        if dev > tol {
            return Err(VqsdError::NotUnitary { deviation: dev });
        }
        Ok(self.apply_unitary_unchecked(u))
    }

    pub(crate) fn apply_unitary_unchecked(&self, u: &CMatrix) -> QuantumState {
        match self {
            QuantumState::Pure { n_qubits, amps } => QuantumState::Pure { n_qubits: *n_qubits, amps: u * amps },
            QuantumState::Mixed { n_qubits, rho } => {
                QuantumState::Mixed { n_qubits: *n_qubits, rho: u * rho * u.adjoint() }
            }
        }
    }

    fn require_density(&self) -> Result<&CMatrix> {
        match self {
            QuantumState::Mixed { rho, .. } => Ok(rho),
            QuantumState::Pure { .. } => Err(VqsdError::RequiresDensity),
        }
    }

    fn check_qubit(&self, j: usize) -> Result<()> {
        if j >= self.n_qubits() {
            return Err(VqsdError::QubitOutOfRange { index: j, n_qubits: self.n_qubits() });
        }
        Ok(())
    }

    /// Global dephasing `Z(ρ)`: keeps the diagonal, zeroes everything else.
    pub fn dephase_global(&self) -> Result<QuantumState> {
        let rho = self.require_density()?;
        let d = rho.nrows();
        let out = CMatrix::from_fn(d, d, |r, c| if r == c { rho[(r, c)] } else { C64::new(0.0, 0.0) });
        Ok(QuantumState::density_unchecked(self.n_qubits(), out))
    }

    /// Local dephasing `Z_j(ρ)` of qubit `j`.
    pub fn dephase_local(&self, j: usize) -> Result<QuantumState> {
        self.dephase_qubits(&[j])
    }

    /// Dephases every qubit in `qubits` (the empty set is the identity channel).
    pub fn dephase_qubits(&self, qubits: &[usize]) -> Result<QuantumState> {
        let rho = self.require_density()?;
        let n = self.n_qubits();
        let mut mask = 0usize;
        for &j in qubits {
            self.check_qubit(j)?;
            mask |= qubit_mask(n, j);
        }
        let d = rho.nrows();
        let out = CMatrix::from_fn(d, d, |r, c| if (r ^ c) & mask == 0 { rho[(r, c)] } else { C64::new(0.0, 0.0) });
        Ok(QuantumState::density_unchecked(n, out))
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => {
                let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                norm_sq * norm_sq
            }
            QuantumState::Mixed { rho, .. } => rho.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// Reduced state on the qubits in `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumState> {
        let n = self.n_qubits();
        if keep.is_empty() {
            return Err(VqsdError::InvalidSubset("keep set is empty".into()));
        }
        for (i, &q) in keep.iter().enumerate() {
            self.check_qubit(q)?;
            if keep[..i].contains(&q) {
                return Err(VqsdError::InvalidSubset(format!("qubit {q} listed twice")));
            }
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let dk = 1usize << k;
        let dt = 1usize << traced.len();
        // full index of (kept index a, traced index t)
        let compose = |a: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if (a >> (k - 1 - pos)) & 1 == 1 {
                    idx |= qubit_mask(n, q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if (t >> (traced.len() - 1 - pos)) & 1 == 1 {
                    idx |= qubit_mask(n, q);
                }
            }
            idx
        };
        let out = match self {
            QuantumState::Pure { amps, .. } => {
                let m = CMatrix::from_fn(dk, dt, |a, t| amps[compose(a, t)]);
                &m * m.adjoint()
            }
            QuantumState::Mixed { rho, .. } => {
                let map: Vec<Vec<usize>> = (0..dk).map(|a| (0..dt).map(|t| compose(a, t)).collect()).collect();
                CMatrix::from_fn(dk, dk, |a, b| (0..dt).map(|t| rho[(map[a][t], map[b][t])]).sum())
            }
        };
        Ok(QuantumState::density_unchecked(k, out))
    }

    /// Full spectral decomposition, eigenvalues descending.
    pub fn exact_eigendecomposition(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::of_hermitian(&self.matrix())
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> Result<usize> {
        Ok(self.exact_eigendecomposition()?.eigenvalues.iter().filter(|&&l| l > threshold).count())
    }

    /// `H(ρ) = −Σ λ log₂ λ`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        if self.is_pure_form() {
            return Ok(0.0);
        }
        let spec = self.exact_eigendecomposition()?;
        Ok(spec.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum::<f64>().max(0.0))
    }

    /// `H₂(ρ) = −log₂ Tr(ρ²)`.
    pub fn renyi2_entropy(&self) -> f64 {
        (-self.purity().log2()).max(0.0)
    }

    /// Expectation value `Tr(ρ M)`.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.dim() != self.dim() {
            return Err(VqsdError::DimensionMismatch { expected: self.dim(), found: obs.dim() });
        }
        Ok(match self {
            QuantumState::Pure { amps, .. } => (amps.adjoint() * &obs.matrix * amps)[(0, 0)].re,
            QuantumState::Mixed { rho, .. } => (rho * &obs.matrix).trace().re,
        })
    }

    /// Bitstring label of basis index `idx`, qubit 0 leftmost.
    pub fn bitstring(n_qubits: usize, idx: usize) -> String {
        (0..n_qubits).map(|q| if qubit_bit(n_qubits, q, idx) == 1 { '1' } else { '0' }).collect()
    }
}

/// `Tr((A−B)†(A−B))`.
pub fn hs_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(VqsdError::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum())
}

/// Parses a bitstring like `"0110"` into a basis index (qubit 0 leftmost).
pub fn parse_bitstring(z: &str) -> Result<usize> {
    let mut idx = 0usize;
    for ch in z.chars() {
        idx <<= 1;
        match ch {
            '0' => {}
            '1' => idx |= 1,
            other => return Err(VqsdError::Parse(format!("invalid bit {other:?} in bitstring"))),
        }
    }
    Ok(idx)
}

/// Hermitian operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub n_qubits: usize,
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::new_with_tol(matrix, DEFAULT_TOL)
    }

    pub fn new_with_tol(matrix: CMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(VqsdError::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let n_qubits = qubits_for_dim(matrix.nrows())?;
        let dev = hermiticity_deviation(&matrix);
        if dev > tol {
            return Err(VqsdError::NotHermitian { deviation: dev });
        }
        Ok(Observable { n_qubits, matrix })
    }

    /// Sum of local terms, each a dense operator on the listed qubits.
    pub fn from_local_terms(n_qubits: usize, terms: &[(Vec<usize>, CMatrix)]) -> Result<Self> {
        let d = 1usize << n_qubits;
        let mut total = CMatrix::zeros(d, d);
        for (support, op) in terms {
            let k = support.len();
            if op.nrows() != 1 << k || op.ncols() != 1 << k {
                return Err(VqsdError::DimensionMismatch { expected: 1 << k, found: op.nrows() });
            }
            for &q in support {
                if q >= n_qubits {
                    return Err(VqsdError::QubitOutOfRange { index: q, n_qubits });
                }
            }
            let local = |idx: usize| -> usize {
                support.iter().fold(0usize, |acc, &q| (acc << 1) | qubit_bit(n_qubits, q, idx))
            };
            let mask: usize = support.iter().map(|&q| qubit_mask(n_qubits, q)).sum();
            for r in 0..d {
                for c in 0..d {
                    if (r ^ c) & !mask == 0 {
                        total[(r, c)] += op[(local(r), local(c))];
                    }
                }
            }
        }
        Observable::new(total)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Observable) -> CMatrix {
        &self.matrix * &other.matrix - &other.matrix * &self.matrix
    }
}

/// Eigenvalues sorted descending with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn of_hermitian(m: &CMatrix) -> Result<Self> {
        let dev = hermiticity_deviation(m);
        if dev > 1e-8 {
            return Err(VqsdError::NotHermitian { deviation: dev });
        }
        let eig = SymmetricEigen::new(m.clone());
        let d = m.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralDecomposition { eigenvalues, eigenvectors })
    }

    /// `‖Σ λ_k v_k v_k† − M‖_max`.
    pub fn reconstruction_error(&self, m: &CMatrix) -> f64 {
        let d = m.nrows();
        let lam = CMatrix::from_diagonal(&CVector::from_iterator(
            d,
            self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        ));
        let rec = &self.eigenvectors * lam * self.eigenvectors.adjoint();
        (rec - m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{embed_1q, hadamard};
    use crate::random::{random_density, random_unitary, seeded};

    fn plus() -> QuantumState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::pure(CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])).unwrap()
    }

    fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_invalid_states() {
        let v = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(QuantumState::pure(v).is_err());
        let m = CMatrix::from_vec(2, 2, vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0)]);
        assert!(matches!(QuantumState::density(m), Err(VqsdError::NotHermitian { .. })));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(QuantumState::density(m).is_err());
        let m = CMatrix::identity(3, 3) / C64::new(3.0, 0.0);
        assert!(QuantumState::density(m).is_err());
    }

    #[test]
    fn apply_unitary_cases() {
        let mut rng = seeded(1);
        let rho = random_density(2, 4, &mut rng);
        let id = CMatrix::identity(4, 4);
        assert!(max_dev(&rho.apply_unitary(&id).unwrap().matrix(), &rho.matrix()) < 1e-15);

        let zero = QuantumState::basis(1, 0);
        let out = zero.apply_unitary(&embed_1q(&hadamard(), 1, 0)).unwrap();
        assert!(max_dev(&out.matrix(), &plus().matrix()) < 1e-15);

        let rho = random_density(3, 8, &mut rng);
        let u = random_unitary(8, &mut rng);
        let out = rho.apply_unitary(&u).unwrap();
        // naive triple-loop oracle
        let r = rho.matrix();
        let mut oracle = CMatrix::zeros(8, 8);
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..8 {
                    for l in 0..8 {
                        acc += u[(i, k)] * r[(k, l)] * u[(j, l)].conj();
                    }
                }
                oracle[(i, j)] = acc;
            }
        }
        assert!(max_dev(&out.matrix(), &oracle) < 1e-12);

        assert!(matches!(rho.apply_unitary(&CMatrix::identity(4, 4)), Err(VqsdError::DimensionMismatch { .. })));
        let not_u = CMatrix::identity(8, 8) * C64::new(2.0, 0.0);
        assert!(matches!(rho.apply_unitary(&not_u), Err(VqsdError::NotUnitary { .. })));
    }

    #[test]
    fn dephasing_cases() {
        let mut rng = seeded(2);
        let diag = QuantumState::density(CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(0.7, 0.0),
            C64::new(0.3, 0.0),
        ])))
        .unwrap();
        assert_eq!(diag.dephase_global().unwrap(), diag);
        let p = plus().to_density().dephase_global().unwrap();
        assert!(max_dev(&p.matrix(), &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0))) < 1e-15);
        assert!(matches!(plus().dephase_global(), Err(VqsdError::RequiresDensity)));

        let rho = random_density(2, 4, &mut rng);
        let z = rho.dephase_global().unwrap();
        let m = rho.matrix();
        let oracle = CMatrix::from_fn(4, 4, |r, c| if r == c { m[(r, c)] } else { C64::new(0.0, 0.0) });
        assert_eq!(*z.matrix(), oracle);

        let one = random_density(1, 2, &mut rng);
        assert_eq!(one.dephase_local(0).unwrap(), one.dephase_global().unwrap());
        assert!(matches!(one.dephase_local(1), Err(VqsdError::QubitOutOfRange { .. })));
    }

    #[test]
    fn local_dephasing_matches_kraus_sum() {
        let mut rng = seeded(3);
        let rho = random_density(3, 8, &mut rng);
        let n = 3;
        let j = 1;
        let m = rho.matrix();
        let mut oracle = CMatrix::zeros(8, 8);
        for z in 0..2 {
            let proj = CMatrix::from_fn(8, 8, |r, c| {
                if r == c && qubit_bit(n, j, r) == z { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            oracle += &proj * m.as_ref() * &proj;
        }
        assert!(max_dev(&rho.dephase_local(j).unwrap().matrix(), &oracle) < 1e-15);
    }

    #[test]
    fn local_dephasing_acts_on_one_factor() {
        let mut rng = seeded(4);
        let a = random_density(1, 2, &mut rng);
        let b = random_density(2, 4, &mut rng);
        let ab = QuantumState::density(a.matrix().kronecker(b.matrix().as_ref())).unwrap();
        let expect = a.dephase_global().unwrap().matrix().kronecker(b.matrix().as_ref());
        assert!(max_dev(&ab.dephase_local(0).unwrap().matrix(), &expect) < 1e-15);
    }

    #[test]
    fn purity_cases() {
        let mut rng = seeded(5);
        assert!((plus().purity() - 1.0).abs() < 1e-14);
        assert!((plus().to_density().purity() - 1.0).abs() < 1e-14);
        for n in 1..=4 {
            let mm = QuantumState::maximally_mixed(n);
            assert!((mm.purity() - 0.5f64.powi(n as i32)).abs() < 1e-14);
        }
        let rho = random_density(3, 5, &mut rng);
        let spec = rho.exact_eigendecomposition().unwrap();
        let oracle: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
        assert!((rho.purity() - oracle).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_cases() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::pure(CVector::from_vec(vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ]))
        .unwrap();
        let r = bell.partial_trace(&[0]).unwrap();
        assert!(max_dev(&r.matrix(), &(CMatrix::identity(2, 2) * C64::new(0.5, 0.0))) < 1e-15);

        let mut rng = seeded(6);
        let psi = crate::random::random_pure(1, &mut rng);
        let phi = crate::random::random_pure(2, &mut rng);
        let prod = QuantumState::pure(psi.amplitudes().unwrap().kronecker(phi.amplitudes().unwrap())).unwrap();
        let r = prod.partial_trace(&[0]).unwrap();
        assert!(max_dev(&r.matrix(), &psi.matrix()) < 1e-14);
        let r = prod.to_density().partial_trace(&[1, 2]).unwrap();
        assert!(max_dev(&r.matrix(), &phi.matrix()) < 1e-14);

        assert!(prod.partial_trace(&[]).is_err());
        assert!(prod.partial_trace(&[3]).is_err());
        assert!(prod.partial_trace(&[1, 1]).is_err());
    }

    #[test]
    fn eigendecomposition_cases() {
        let spec = plus().exact_eigendecomposition().unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-14 && spec.eigenvalues[1].abs() < 1e-14);
        let spec = QuantumState::maximally_mixed(1).exact_eigendecomposition().unwrap();
        assert!(spec.eigenvalues.iter().all(|l| (l - 0.5).abs() < 1e-14));

        let mut rng = seeded(7);
        let rho = random_density(4, 16, &mut rng);
        let spec = rho.exact_eigendecomposition().unwrap();
        assert!(spec.reconstruction_error(&rho.matrix()) <= 1e-8);
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        assert!(max_dev(&gram, &CMatrix::identity(16, 16)) < 1e-8);

        let bad = CMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(SpectralDecomposition::of_hermitian(&bad).is_err());
    }

    #[test]
    fn hs_distance_cases() {
        let mut rng = seeded(8);
        let a = random_density(2, 4, &mut rng);
        assert_eq!(hs_distance(&a.matrix(), &a.matrix()).unwrap(), 0.0);
        let d = hs_distance(&QuantumState::basis(1, 0).matrix(), &QuantumState::basis(1, 1).matrix()).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        let b = random_density(2, 4, &mut rng);
        let (ma, mb) = (a.matrix(), b.matrix());
        let diff = ma.as_ref() - mb.as_ref();
        let via_trace = (diff.adjoint() * &diff).trace().re;
        let entrywise: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| (ma[(i, j)] - mb[(i, j)]).norm_sqr()).sum();
        let got = hs_distance(&ma, &mb).unwrap();
        assert!((got - entrywise).abs() < 1e-14 && (got - via_trace).abs() < 1e-12);
        assert!(hs_distance(&ma, &CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(plus().von_neumann_entropy().unwrap(), 0.0);
        assert!(plus().to_density().von_neumann_entropy().unwrap().abs() < 1e-10);
        assert!(plus().renyi2_entropy().abs() < 1e-14);
        for n in 1..=3 {
            let mm = QuantumState::maximally_mixed(n);
            assert!((mm.von_neumann_entropy().unwrap() - n as f64).abs() < 1e-12);
            assert!((mm.renyi2_entropy() - n as f64).abs() < 1e-12);
        }
        let mut rng = seeded(9);
        for _ in 0..20 {
            let rho = random_density(3, 4, &mut rng);
            let spec = rho.exact_eigendecomposition().unwrap();
            let oracle: f64 = spec.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
            let h = rho.von_neumann_entropy().unwrap();
            assert!((h - oracle).abs() < 1e-12);
            assert!(rho.renyi2_entropy() <= h + 1e-10);
        }
    }

    #[test]
    fn bitstrings_round_trip() {
        assert_eq!(QuantumState::bitstring(3, 0b100), "100");
        assert_eq!(parse_bitstring("0110").unwrap(), 6);
        assert!(parse_bitstring("01x").is_err());
    }
}
