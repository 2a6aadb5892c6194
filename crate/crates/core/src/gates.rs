//! Small fixed-size gates and their in-place action on state vectors and
//! density matrices.
//!
//! Gate matrices act on the local basis of their support in the order the
//! support is given: for a two-qubit gate on `(a, b)`, local index `2·z_a + z_b`.

use crate::{CMatrix, CVector, C64};
use std::f64::consts::FRAC_1_SQRT_2;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub fn hadamard() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `exp(-i θ X / 2)`.
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

/// `exp(-i θ Y / 2)`.
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

/// `exp(-i θ Z / 2)`.
pub fn rz(theta: f64) -> Mat2 {
    [
        [C64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, C64::from_polar(1.0, theta / 2.0)],
    ]
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
        }
    }
    out
}

pub fn mat2_to_dense(g: &Mat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| g[r][c])
}

pub fn mat4_to_dense(g: &Mat4) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| g[r][c])
}

pub fn dense_to_mat4(m: &CMatrix) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

/// Bit mask of qubit `q` in an `n`-qubit basis index (qubit 0 is the MSB).
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Value (0 or 1) of qubit `q` in basis index `idx`.
#[inline]
pub fn qubit_bit(n: usize, q: usize, idx: usize) -> usize {
    (idx >> (n - 1 - q)) & 1
}

/// Applies a single-qubit gate to an `n`-qubit state vector in place.
pub fn apply_1q_vec(amps: &mut [C64], n: usize, q: usize, g: &Mat2) {
    let mask = qubit_mask(n, q);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = g[0][0] * a0 + g[0][1] * a1;
        amps[i1] = g[1][0] * a0 + g[1][1] * a1;
    }
}

/// Applies a two-qubit gate on `(qa, qb)` to an `n`-qubit state vector in place.
pub fn apply_2q_vec(amps: &mut [C64], n: usize, qa: usize, qb: usize, g: &Mat4) {
    let ma = qubit_mask(n, qa);
    let mb = qubit_mask(n, qb);
    for base in 0..amps.len() {
        if base & (ma | mb) != 0 {
            continue;
        }
        let idx = [base, base | mb, base | ma, base | ma | mb];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            amps[idx[r]] = g[r][0] * v[0] + g[r][1] * v[1] + g[r][2] * v[2] + g[r][3] * v[3];
        }
    }
}

/// Applies a CNOT (control `c`, target `t`) to a state vector in place.
pub fn apply_cnot_vec(amps: &mut [C64], n: usize, c: usize, t: usize) {
    let mc = qubit_mask(n, c);
    let mt = qubit_mask(n, t);
    for i in 0..amps.len() {
        if i & mc != 0 && i & mt == 0 {
            amps.swap(i, i | mt);
        }
    }
}

/// `ρ ← G ρ G†` for a two-qubit gate `G` on `(qa, qb)`.
pub fn apply_2q_density(rho: &mut CMatrix, n: usize, qa: usize, qb: usize, g: &Mat4) {
    let d = rho.nrows();
    // Left action: every column is a state vector.
    {
        let data = rho.as_mut_slice();
        for col in data.chunks_exact_mut(d) {
            apply_2q_vec(col, n, qa, qb, g);
        }
    }
    // Right action by G†: (ρ G†)_{r,·} = conj(G (ρ_{r,·})†). Act on the
    // conjugated rows, which for column-major storage are strided.
    let ma = qubit_mask(n, qa);
    let mb = qubit_mask(n, qb);
    let gc: Mat4 = {
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = g[i][j].conj();
            }
        }
        out
    };
    let data = rho.as_mut_slice();
    for base in 0..d {
        if base & (ma | mb) != 0 {
            continue;
        }
        let idx = [base, base | mb, base | ma, base | ma | mb];
        for r in 0..d {
            let v = [
                data[idx[0] * d + r],
                data[idx[1] * d + r],
                data[idx[2] * d + r],
                data[idx[3] * d + r],
            ];
            for k in 0..4 {
                data[idx[k] * d + r] =
                    gc[k][0] * v[0] + gc[k][1] * v[1] + gc[k][2] * v[2] + gc[k][3] * v[3];
            }
        }
    }
}

/// `ρ ← G ρ G†` for a single-qubit gate.
pub fn apply_1q_density(rho: &mut CMatrix, n: usize, q: usize, g: &Mat2) {
    let d = rho.nrows();
    {
        let data = rho.as_mut_slice();
        for col in data.chunks_exact_mut(d) {
            apply_1q_vec(col, n, q, g);
        }
    }
    let m = qubit_mask(n, q);
    let data = rho.as_mut_slice();
    for c0 in 0..d {
        if c0 & m != 0 {
            continue;
        }
        let c1 = c0 | m;
        for r in 0..d {
            let (a0, a1) = (data[c0 * d + r], data[c1 * d + r]);
            data[c0 * d + r] = g[0][0].conj() * a0 + g[0][1].conj() * a1;
            data[c1 * d + r] = g[1][0].conj() * a0 + g[1][1].conj() * a1;
        }
    }
}

/// `ρ ← CNOT ρ CNOT`.
pub fn apply_cnot_density(rho: &mut CMatrix, n: usize, c: usize, t: usize) {
    let d = rho.nrows();
    let mc = qubit_mask(n, c);
    let mt = qubit_mask(n, t);
    let perm: Vec<usize> = (0..d).map(|i| if i & mc != 0 { i ^ mt } else { i }).collect();
    let old = rho.clone();
    for col in 0..d {
        for row in 0..d {
            rho[(row, col)] = old[(perm[row], perm[col])];
        }
    }
}

/// Full `2^n × 2^n` matrix of a single-qubit gate acting on qubit `q`.
pub fn embed_1q(g: &Mat2, n: usize, q: usize) -> CMatrix {
    let d = 1 << n;
    let mut m = CMatrix::identity(d, d);
    for col in m.as_mut_slice().chunks_exact_mut(d) {
        apply_1q_vec(col, n, q, g);
    }
    m
}

/// Full `2^n × 2^n` matrix of a two-qubit gate acting on `(qa, qb)`.
pub fn embed_2q(g: &Mat4, n: usize, qa: usize, qb: usize) -> CMatrix {
    let d = 1 << n;
    let mut m = CMatrix::identity(d, d);
    for col in m.as_mut_slice().chunks_exact_mut(d) {
        apply_2q_vec(col, n, qa, qb, g);
    }
    m
}

/// Full matrix of a CNOT with control `c` and target `t`.
pub fn embed_cnot(n: usize, c: usize, t: usize) -> CMatrix {
    let d = 1 << n;
    let mut m = CMatrix::identity(d, d);
    for col in m.as_mut_slice().chunks_exact_mut(d) {
        apply_cnot_vec(col, n, c, t);
    }
    m
}

/// Kronecker product of dense matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Basis vector `|idx⟩` of dimension `d`.
pub fn basis_vector(d: usize, idx: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[idx] = ONE;
    v
}
