//! Physics workloads: the periodic Heisenberg chain, its ground state and
//! reduced states, product and classically correlated test families, and the
//! total `S_z` observable. Site `j` is qubit `j`; `|0⟩` is spin up.

use crate::gates::{mat2_to_dense, mul2, qubit_mask, rx, ry, rz};
use crate::random::Rng;
use crate::state::{Observable, QuantumState, SpectralDecomposition};
use crate::{CMatrix, CVector, Result, VqsdError, C64};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinChainSpec {
    pub sites: usize,
    #[serde(default = "default_true")]
    pub periodic: bool,
    /// First site of the contiguous subsystem.
    pub subsystem_start: usize,
    pub subsystem_len: usize,
}

fn default_true() -> bool {
    true
}

impl SpinChainSpec {
    pub fn new(sites: usize, subsystem_len: usize) -> Self {
        SpinChainSpec { sites, periodic: true, subsystem_start: 0, subsystem_len }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || self.sites % 2 != 0 {
            return Err(VqsdError::InvalidArgument(format!("chain needs an even number of sites ≥ 2, got {}", self.sites)));
        }
        if self.sites > MAX_SITES {
            return Err(VqsdError::ResourceLimit(format!("{} sites exceed the limit of {MAX_SITES}", self.sites)));
        }
        if self.subsystem_len == 0 || self.subsystem_start + self.subsystem_len > self.sites {
            return Err(VqsdError::InvalidSubset(format!(
                "subsystem [{}, {}) is empty or outside the chain",
                self.subsystem_start,
                self.subsystem_start + self.subsystem_len
            )));
        }
        Ok(())
    }

    pub fn subsystem(&self) -> Vec<usize> {
        (self.subsystem_start..self.subsystem_start + self.subsystem_len).collect()
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<(usize, usize)> = (0..self.sites - 1).map(|j| (j, j + 1)).collect();
        if self.periodic && self.sites > 2 {
            b.push((self.sites - 1, 0));
        }
        b
    }
}

/// `⟨y|H|x⟩` contributions of `S⃗ᵢ·S⃗ⱼ = ¼(XX + YY + ZZ)` on basis state `x`:
/// the diagonal `±¼` and, for anti-aligned spins, a hop of amplitude `½`.
fn bond_action(n: usize, x: usize, (i, j): (usize, usize)) -> (f64, Option<usize>) {
    let (mi, mj) = (qubit_mask(n, i), qubit_mask(n, j));
    let aligned = ((x & mi) != 0) == ((x & mj) != 0);
    if aligned {
        (0.25, None)
    } else {
        (-0.25, Some(x ^ mi ^ mj))
    }
}

/// `H = Σⱼ S⃗^(j)·S⃗^(j+1)` with `S⃗ = ½(X, Y, Z)`, as a dense observable.
pub fn heisenberg_hamiltonian(spec: &SpinChainSpec) -> Result<Observable> {
    spec.validate()?;
    let n = spec.sites;
    let d = 1usize << n;
    let mut h = CMatrix::zeros(d, d);
    for x in 0..d {
        for &bond in &spec.bonds() {
            let (diag, hop) = bond_action(n, x, bond);
            h[(x, x)] += C64::new(diag, 0.0);
            if let Some(y) = hop {
                h[(y, x)] += C64::new(0.5, 0.0);
            }
        }
    }
    Observable::new(h)
}

/// `½ Σⱼ Z_j`.
pub fn total_sz(n: usize) -> Observable {
    let d = 1usize << n;
    let diag = CVector::from_iterator(d, (0..d).map(|x| C64::new(n as f64 / 2.0 - x.count_ones() as f64, 0.0)));
    Observable { n_qubits: n, matrix: CMatrix::from_diagonal(&diag) }
}

/// Multiplies by the phase that makes the first entry with modulus above
/// `1e-8` real and positive.
fn fix_phase(v: &mut CVector) {
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-8) {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Lowest-eigenvalue eigenvector of `h`. A degenerate ground space is resolved
/// to its state of largest `⟨S_z⟩`, phase-fixed so the leading amplitude is
/// real and positive.
pub fn ground_state(h: &Observable) -> Result<QuantumState> {
    let n = h.n_qubits;
    let dec = SpectralDecomposition::of_hermitian(&h.matrix)?;
    let d = h.dim();
    let e0 = dec.eigenvalues[d - 1];
    let tol = 1e-9 * (1.0 + e0.abs());
    let ground: Vec<usize> = (0..d).filter(|&k| (dec.eigenvalues[k] - e0).abs() <= tol).collect();
    let basis = CMatrix::from_fn(d, ground.len(), |r, c| dec.eigenvectors[(r, ground[c])]);
    let mut v = if ground.len() == 1 {
        basis.column(0).into_owned()
    } else {
        let sz = total_sz(n).matrix;
        let restricted = basis.adjoint() * sz * &basis;
        let inner = SpectralDecomposition::of_hermitian(&restricted)?;
        &basis * inner.eigenvector(0)
    };
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    fix_phase(&mut v);
    QuantumState::pure(v)
}

/// Ground state of the chain by exact diagonalization inside each fixed-`S_z`
/// sector. Ties between sectors go to the largest `S_z`; the phase is fixed as
/// in [`ground_state`].
pub fn heisenberg_ground_state(spec: &SpinChainSpec) -> Result<(f64, QuantumState)> {
    spec.validate()?;
    let n = spec.sites;
    let d = 1usize << n;
    let bonds = spec.bonds();
    let mut best: Option<(f64, usize, DVector<f64>, Vec<usize>)> = None;
    // sector by number of down spins, from largest S_z downward
    for downs in 0..=n {
        let states: Vec<usize> = (0..d).filter(|x| x.count_ones() as usize == downs).collect();
        let index: std::collections::HashMap<usize, usize> = states.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let m = states.len();
        let mut h = DMatrix::<f64>::zeros(m, m);
        for (c, &x) in states.iter().enumerate() {
            for &bond in &bonds {
                let (diag, hop) = bond_action(n, x, bond);
                h[(c, c)] += diag;
                if let Some(y) = hop {
                    h[(index[&y], c)] += 0.5;
                }
            }
        }
        let eig = SymmetricEigen::new(h);
        let (k, &e) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let better = match &best {
            None => true,
            Some((eb, ..)) => e < eb - 1e-9 * (1.0 + eb.abs()),
        };
        if better {
            best = Some((e, downs, eig.eigenvectors.column(k).into_owned(), states));
        }
    }
    let (e0, _, vec, states) = best.unwrap();
    let mut amps = CVector::zeros(d);
    for (i, &x) in states.iter().enumerate() {
        amps[x] = C64::new(vec[i], 0.0);
    }
    let norm = amps.norm();
    amps /= C64::new(norm, 0.0);
    fix_phase(&mut amps);
    Ok((e0, QuantumState::pure(amps)?))
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|` for the chain's ground state.
pub fn reduced_ground_state(spec: &SpinChainSpec) -> Result<QuantumState> {
    let (_, psi) = heisenberg_ground_state(spec)?;
    psi.partial_trace(&spec.subsystem())
}

/// Single-qubit preparation `V_j` applied to `|0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductAngles {
    /// `V_j = Rx(θ_j)`.
    Rx(Vec<f64>),
    /// `V_j = Rx(a)·Ry(b)·Rz(c)` with `[a, b, c]` per qubit.
    Xyz(Vec<[f64; 3]>),
}

impl ProductAngles {
    pub fn n_qubits(&self) -> usize {
        match self {
            ProductAngles::Rx(v) => v.len(),
            ProductAngles::Xyz(v) => v.len(),
        }
    }

    /// Uniform angles in `[0, 2π)` for the `Rx·Ry·Rz` family.
    pub fn random_xyz(n: usize, rng: &mut Rng) -> Self {
        ProductAngles::Xyz((0..n).map(|_| [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)]).collect())
    }
}

/// `⊗ⱼ V_j|0⟩`.
pub fn product_state(angles: &ProductAngles) -> Result<QuantumState> {
    let n = angles.n_qubits();
    if n == 0 || n > crate::state::MAX_QUBITS {
        return Err(VqsdError::InvalidArgument(format!("unsupported qubit count {n}")));
    }
    let gates: Vec<_> = match angles {
        ProductAngles::Rx(v) => v.iter().map(|&t| rx(t)).collect(),
        ProductAngles::Xyz(v) => v.iter().map(|[a, b, c]| mul2(&mul2(&rx(*a), &ry(*b)), &rz(*c))).collect(),
    };
    let mut amps = CVector::from_element(1, C64::new(1.0, 0.0));
    for g in &gates {
        let local = CVector::from_vec(vec![g[0][0], g[1][0]]);
        amps = amps.kronecker(&local);
    }
    Ok(QuantumState::pure_unchecked(n, amps))
}

/// `Σ_z p_z ⊗ⱼ |b^(j)_{z_j}⟩⟨b^(j)_{z_j}|`, where the columns of the 2×2 unitary
/// `bases[j]` are `|b^(j)_0⟩, |b^(j)_1⟩`.
pub fn classically_correlated_state(p: &[f64], bases: &[CMatrix]) -> Result<QuantumState> {
    let n = bases.len();
    if n == 0 || p.len() != 1usize << n {
        return Err(VqsdError::DimensionMismatch { expected: 1usize << n, found: p.len() });
    }
    if p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(VqsdError::InvalidArgument("p is not a probability vector".into()));
    }
    for b in bases {
        if b.nrows() != 2 || b.ncols() != 2 || crate::state::unitarity_deviation(b) > 1e-10 {
            return Err(VqsdError::NotUnitary { deviation: crate::state::unitarity_deviation(b) });
        }
    }
    let mut u = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for b in bases {
        u = u.kronecker(b);
    }
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0))));
    QuantumState::density(&u * diag * u.adjoint())
}

/// Random local basis `Rz·Ry·Rz` as a 2×2 unitary.
pub fn random_local_basis(rng: &mut Rng) -> CMatrix {
    let g = mul2(&mul2(&rz(rng.random_range(0.0..TAU)), &ry(rng.random_range(0.0..TAU))), &rz(rng.random_range(0.0..TAU)));
    mat2_to_dense(&g)
}

/// Sector value `⟨S_z⟩` of each exact eigenvector of `ρ`, with eigenvalues
/// descending. Degenerate eigenspaces are rotated onto definite-`S_z` states
/// first, which is always possible when `ρ` commutes with `S_z`.
pub fn sz_resolved_spectrum(rho: &QuantumState, degeneracy_tol: f64) -> Result<Vec<(f64, f64)>> {
    let n = rho.n_qubits();
    let dec = rho.exact_eigendecomposition()?;
    let sz = total_sz(n).matrix;
    let d = rho.dim();
    let mut out = Vec::with_capacity(d);
    let mut k = 0;
    while k < d {
        let mut end = k + 1;
        while end < d && (dec.eigenvalues[k] - dec.eigenvalues[end]).abs() <= degeneracy_tol {
            end += 1;
        }
        let basis = CMatrix::from_fn(d, end - k, |r, c| dec.eigenvectors[(r, k + c)]);
        let restricted = basis.adjoint() * &sz * &basis;
        let inner = SpectralDecomposition::of_hermitian(&restricted)?;
        for (i, m) in inner.eigenvalues.iter().enumerate() {
            out.push((dec.eigenvalues[k + i], *m));
        }
        k = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn two_site_spectrum() {
        let h = heisenberg_hamiltonian(&SpinChainSpec::new(2, 1)).unwrap();
        let e = SpectralDecomposition::of_hermitian(&h.matrix).unwrap().eigenvalues;
        let expected = [0.25, 0.25, 0.25, -0.75];
        for (a, b) in e.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let psi = ground_state(&h).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)]);
        assert!((psi.amplitudes().unwrap().dotc(&singlet).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_commutes_with_sz() {
        for sites in [2, 4, 6, 8] {
            let h = heisenberg_hamiltonian(&SpinChainSpec::new(sites, 1)).unwrap();
            assert!(max_abs(&h.commutator(&total_sz(sites))) < 1e-10);
        }
    }

    #[test]
    fn eight_site_ground_state() {
        let spec = SpinChainSpec::new(8, 4);
        let h = heisenberg_hamiltonian(&spec).unwrap();
        let oracle = SymmetricEigen::new(h.matrix.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let (e0, psi) = heisenberg_ground_state(&spec).unwrap();
        assert!((e0 - oracle).abs() < 1e-9);
        assert!((psi.expectation(&h).unwrap() - oracle).abs() < 1e-9);
        // literature value for the 8-site periodic chain
        assert!((e0 + 3.651_093_408_9).abs() < 1e-8, "{e0}");
        let dense = ground_state(&h).unwrap();
        assert!((dense.expectation(&h).unwrap() - oracle).abs() < 1e-9);
        let overlap = dense.amplitudes().unwrap().dotc(psi.amplitudes().unwrap()).norm();
        assert!((overlap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_hamiltonian_ground_state() {
        let d = CVector::from_vec([3.0, -1.0, 2.0, 0.5].iter().map(|&x| C64::new(x, 0.0)).collect());
        let h = Observable::new(CMatrix::from_diagonal(&d)).unwrap();
        let g = ground_state(&h).unwrap();
        assert!((g.amplitudes().unwrap()[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reduced_state_properties() {
        let spec = SpinChainSpec::new(8, 4);
        let rho = reduced_ground_state(&spec).unwrap();
        assert!(QuantumState::density(rho.matrix().into_owned()).is_ok());
        // definite-S_z ground state ⇒ block diagonal in S_z
        let m = rho.matrix();
        for r in 0..16usize {
            for c in 0..16usize {
                if r.count_ones() != c.count_ones() {
                    assert!(m[(r, c)].norm() < 1e-10);
                }
            }
        }
        // A ↔ B spectra agree
        let (_, psi) = heisenberg_ground_state(&spec).unwrap();
        let other = psi.partial_trace(&[4, 5, 6, 7]).unwrap();
        let a = rho.exact_eigendecomposition().unwrap().eigenvalues;
        let b = other.exact_eigendecomposition().unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(heisenberg_hamiltonian(&SpinChainSpec::new(14, 4)).is_err());
        assert!(SpinChainSpec::new(7, 2).validate().is_err());
        assert!(SpinChainSpec { sites: 8, periodic: true, subsystem_start: 6, subsystem_len: 4 }.validate().is_err());
    }

    #[test]
    fn product_states() {
        let zero = product_state(&ProductAngles::Rx(vec![0.0; 3])).unwrap();
        assert!((zero.amplitudes().unwrap()[0].norm() - 1.0).abs() < 1e-15);
        let one = product_state(&ProductAngles::Rx(vec![std::f64::consts::PI])).unwrap();
        assert!((one.amplitudes().unwrap()[1].norm() - 1.0).abs() < 1e-15);
        let mut rng = seeded(1);
        let r = product_state(&ProductAngles::random_xyz(6, &mut rng)).unwrap();
        assert!((r.purity() - 1.0).abs() < 1e-12);
        for j in 0..6 {
            assert!((r.partial_trace(&[j]).unwrap().purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classically_correlated_family() {
        let id = CMatrix::identity(2, 2);
        let mixed = classically_correlated_state(&[0.25; 4], &[id.clone(), id.clone()]).unwrap();
        assert!(max_abs(&(mixed.matrix().into_owned() - QuantumState::maximally_mixed(2).matrix().into_owned())) < 1e-15);
        let mut rng = seeded(2);
        let bases: Vec<CMatrix> = (0..3).map(|_| random_local_basis(&mut rng)).collect();
        let point = classically_correlated_state(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &bases).unwrap();
        assert!((point.purity() - 1.0).abs() < 1e-12);
        let p: Vec<f64> = {
            let raw: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let rho = classically_correlated_state(&p, &bases).unwrap();
        let mut sorted = p.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let spec = rho.exact_eigendecomposition().unwrap().eigenvalues;
        for (a, b) in spec.iter().zip(&sorted) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(classically_correlated_state(&[0.5, 0.6], &[id]).is_err());
    }

    #[test]
    fn total_sz_values() {
        let sz = total_sz(3);
        assert_eq!(QuantumState::basis(3, 0).expectation(&sz).unwrap(), 1.5);
        assert_eq!(QuantumState::basis(3, 7).expectation(&sz).unwrap(), -1.5);
        let h = heisenberg_hamiltonian(&SpinChainSpec::new(2, 1)).unwrap();
        assert!(ground_state(&h).unwrap().expectation(&total_sz(2)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sz_resolution_handles_degeneracy() {
        let rho = reduced_ground_state(&SpinChainSpec::new(8, 4)).unwrap();
        let resolved = sz_resolved_spectrum(&rho, 1e-8).unwrap();
        for (_, m) in &resolved {
            assert!((m - m.round()).abs() < 1e-8, "{m}");
        }
    }
}
