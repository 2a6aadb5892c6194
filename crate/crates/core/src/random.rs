//! Seeded randomness: reproducible streams and random states/unitaries.

use crate::state::QuantumState;
use crate::{CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; mixes a master seed with a stream index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream `index` of a master seed.
pub fn substream(master: u64, index: u64) -> Rng {
    seeded(derive_seed(master, index))
}

fn gaussian_c64<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn ginibre<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = gaussian_c64(rng);
        }
    }
    m
}

/// Haar-random pure state on `n` qubits.
pub fn random_pure<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> QuantumState {
    let d = 1usize << n;
    let mut v = CVector::from_iterator(d, (0..d).map(|_| gaussian_c64(rng)));
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    QuantumState::pure_unchecked(n, v)
}

/// Random density matrix of the given rank (induced Ginibre measure).
pub fn random_density<R: rand::Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> QuantumState {
    let d = 1usize << n;
    let g = ginibre(d, rank.clamp(1, d), rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    QuantumState::density_unchecked(n, rho)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
pub fn random_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..d {
        let diag = r[(c, c)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    q
}
