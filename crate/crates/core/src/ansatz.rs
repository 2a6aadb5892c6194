//! Trainable diagonalizing unitaries.
//!
//! [`ParamAnsatz`] is a sequence of general two-qubit gates, each carrying 15
//! parameters. The sequence is listed in circuit (time) order, so the
//! synthesized unitary is `U = G_D ⋯ G_2 G_1`. The flattened parameter vector is
//! the gates' parameters concatenated in that order, 15 slots per gate:
//!
//! | slots  | role                                   |
//! |--------|----------------------------------------|
//! | 0..3   | `Rz·Ry·Rz` on the first support qubit, applied first  |
//! | 3..6   | `Rz·Ry·Rz` on the second support qubit, applied first |
//! | 6..9   | `θx, θy, θz` of `exp(−i(θx XX + θy YY + θz ZZ))`     |
//! | 9..12  | `Rz·Ry·Rz` on the first support qubit, applied last   |
//! | 12..15 | `Rz·Ry·Rz` on the second support qubit, applied last  |
//!
//! All-zero parameters give the identity gate, which is what the growth
//! operations insert.

use crate::gates::{
    apply_1q_density, apply_1q_vec, apply_2q_density, apply_2q_vec, identity2, kron2, mul2, mul4, pauli_x,
    pauli_y, pauli_z, rx, ry, rz, Mat2, Mat4,
};
use crate::random::Rng;
use crate::{CMatrix, Result, VqsdError, C64};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub const PARAMS_PER_GATE: usize = 15;

/// Anything that acts as a unitary on `n` qubits through a parameter vector.
pub trait Diagonalizer: Clone + Send + Sync {
    fn n_qubits(&self) -> usize;
    fn n_params(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    /// `|ψ⟩ ← U|ψ⟩`.
    fn apply_to_amps(&self, amps: &mut [C64]);
    /// `ρ ← UρU†`.
    fn apply_to_density(&self, rho: &mut CMatrix);

    /// Dense `2^n × 2^n` matrix of `U`.
    fn unitary(&self) -> CMatrix {
        let d = 1usize << self.n_qubits();
        let mut m = CMatrix::identity(d, d);
        for col in m.as_mut_slice().chunks_exact_mut(d) {
            self.apply_to_amps(col);
        }
        m
    }

    fn with_params(&self, params: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_params(params)?;
        Ok(out)
    }
}

fn check_len(expected: usize, params: &[f64]) -> Result<()> {
    if params.len() != expected {
        return Err(VqsdError::ParamCount { expected, found: params.len() });
    }
    Ok(())
}

/// `Rz(a)·Ry(b)·Rz(c)`.
pub fn euler_rotation(a: f64, b: f64, c: f64) -> Mat2 {
    mul2(&mul2(&rz(a), &ry(b)), &rz(c))
}

fn pauli_exp(theta: f64, p: &Mat2) -> Mat4 {
    let pp = kron2(p, p);
    let id = kron2(&identity2(), &identity2());
    let (s, c) = theta.sin_cos();
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = id[i][j] * c + pp[i][j] * C64::new(0.0, -s);
        }
    }
    out
}

/// Canonical interaction `exp(−i(θx X⊗X + θy Y⊗Y + θz Z⊗Z))`.
pub fn canonical_interaction(tx: f64, ty: f64, tz: f64) -> Mat4 {
    // The three Pauli products commute.
    mul4(&mul4(&pauli_exp(tx, &pauli_x()), &pauli_exp(ty, &pauli_y())), &pauli_exp(tz, &pauli_z()))
}

/// General two-qubit gate `(A₁⊗A₂)·N(θ)·(B₁⊗B₂)` from 15 parameters.
pub fn two_qubit_gate(p: &[f64]) -> Mat4 {
    debug_assert_eq!(p.len(), PARAMS_PER_GATE);
    let before = kron2(&euler_rotation(p[0], p[1], p[2]), &euler_rotation(p[3], p[4], p[5]));
    let inter = canonical_interaction(p[6], p[7], p[8]);
    let after = kron2(&euler_rotation(p[9], p[10], p[11]), &euler_rotation(p[12], p[13], p[14]));
    mul4(&after, &mul4(&inter, &before))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzGate {
    pub support: (usize, usize),
    pub params: [f64; PARAMS_PER_GATE],
}

impl AnsatzGate {
    pub fn identity(support: (usize, usize)) -> Self {
        AnsatzGate { support, params: [0.0; PARAMS_PER_GATE] }
    }

    pub fn matrix(&self) -> Mat4 {
        two_qubit_gate(&self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// `rows` alternating nearest-neighbor rows; `p = rows / 2`.
    Layered { rows: usize },
    Free,
}

impl Structure {
    pub fn layers(&self) -> Option<f64> {
        match self {
            Structure::Layered { rows } => Some(*rows as f64 / 2.0),
            Structure::Free => None,
        }
    }
}

/// Gate supports of one row of the layered ansatz. Even rows pair `(0,1),
/// (2,3), …`; odd rows pair `(1,2), (3,4), …` and wrap `(n−1, 0)` when `n` is even.
pub fn layer_row(n: usize, row: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if row % 2 == 0 {
        (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect()
    } else {
        let mut out = Vec::new();
        let mut k = 1;
        while k < n {
            let next = (k + 1) % n;
            if next == 0 && n % 2 == 1 {
                break;
            }
            out.push((k, next));
            k += 2;
        }
        out
    }
}

/// Number of gates of a layered ansatz with `rows` rows on `n` qubits.
pub fn layered_gate_count(n: usize, rows: usize) -> usize {
    (0..rows).map(|r| layer_row(n, r).len()).sum()
}

fn rows_for_layers(p: f64) -> Result<usize> {
    let rows = p * 2.0;
    if !(rows >= 0.0) || (rows - rows.round()).abs() > 1e-12 {
        return Err(VqsdError::InvalidArgument(format!("layer count {p} is not a non-negative half-integer")));
    }
    Ok(rows.round() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamAnsatz {
    pub n_qubits: usize,
    pub gates: Vec<AnsatzGate>,
    pub structure: Structure,
}

impl ParamAnsatz {
    /// Layered ansatz with `p` (half-integer) layers and the given parameters.
    pub fn build_layered(n: usize, p: f64, params: &[f64]) -> Result<Self> {
        let rows = rows_for_layers(p)?;
        let supports: Vec<(usize, usize)> = (0..rows).flat_map(|r| layer_row(n, r)).collect();
        check_len(supports.len() * PARAMS_PER_GATE, params)?;
        let gates = supports
            .into_iter()
            .zip(params.chunks_exact(PARAMS_PER_GATE))
            .map(|(support, chunk)| AnsatzGate { support, params: chunk.try_into().unwrap() })
            .collect();
        Ok(ParamAnsatz { n_qubits: n, gates, structure: Structure::Layered { rows } })
    }

    pub fn identity_layered(n: usize, p: f64) -> Result<Self> {
        let rows = rows_for_layers(p)?;
        Self::build_layered(n, p, &vec![0.0; layered_gate_count(n, rows) * PARAMS_PER_GATE])
    }

    /// Layered ansatz with parameters uniform in `[−scale, scale]`.
    pub fn random_layered(n: usize, p: f64, scale: f64, rng: &mut Rng) -> Result<Self> {
        let rows = rows_for_layers(p)?;
        let count = layered_gate_count(n, rows) * PARAMS_PER_GATE;
        let params: Vec<f64> = (0..count).map(|_| rng.random_range(-scale..=scale)).collect();
        Self::build_layered(n, p, &params)
    }

    /// Free-structure ansatz from explicit gates.
    pub fn free(n: usize, gates: Vec<AnsatzGate>) -> Result<Self> {
        let a = ParamAnsatz { n_qubits: n, gates, structure: Structure::Free };
        a.validate()?;
        Ok(a)
    }

    /// `count` identity gates on random supports.
    pub fn random_free(n: usize, count: usize, rng: &mut Rng) -> Result<Self> {
        if n < 2 {
            return Err(VqsdError::InvalidArgument("free ansatz needs at least two qubits".into()));
        }
        let gates = (0..count).map(|_| AnsatzGate::identity(random_pair(n, None, rng))).collect();
        Self::free(n, gates)
    }

    /// Copy with every parameter shifted by an independent uniform draw from
    /// `[−scale, scale]`.
    pub fn perturbed(&self, scale: f64, rng: &mut Rng) -> Self {
        let mut out = self.clone();
        if scale > 0.0 {
            for g in &mut out.gates {
                for x in g.params.iter_mut() {
                    *x += rng.random_range(-scale..=scale);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let (a, b) = g.support;
            if a == b {
                return Err(VqsdError::InvalidArgument(format!("gate support ({a}, {b}) repeats a qubit")));
            }
            for q in [a, b] {
                if q >= self.n_qubits {
                    return Err(VqsdError::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
                }
            }
        }
        if let Structure::Layered { rows } = self.structure {
            let expected: Vec<(usize, usize)> = (0..rows).flat_map(|r| layer_row(self.n_qubits, r)).collect();
            let found: Vec<(usize, usize)> = self.gates.iter().map(|g| g.support).collect();
            if expected != found {
                return Err(VqsdError::InvalidArgument("gate supports do not match the layered structure".into()));
            }
        }
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Dense unitary; same as [`Diagonalizer::unitary`].
    pub fn synthesize(&self) -> CMatrix {
        self.unitary()
    }

    /// Appends `k` identity rows of the layered pattern.
    pub fn grow_identity_rows(&self, k: usize) -> Result<Self> {
        let Structure::Layered { rows } = self.structure else {
            return Err(VqsdError::InvalidArgument("row growth requires a layered ansatz".into()));
        };
        let mut out = self.clone();
        for r in rows..rows + k {
            out.gates.extend(layer_row(self.n_qubits, r).into_iter().map(AnsatzGate::identity));
        }
        out.structure = Structure::Layered { rows: rows + k };
        Ok(out)
    }

    /// Appends one full identity layer (`p → p + 1`).
    pub fn grow_identity_layer(&self) -> Result<Self> {
        self.grow_identity_rows(2)
    }

    /// Reassigns the support of 1 to `max_modified` random gates. Parameters
    /// are carried over and every modified gate gets a different support.
    pub fn random_structure_update(&self, max_modified: usize, rng: &mut Rng) -> Result<Self> {
        if self.structure != Structure::Free {
            return Err(VqsdError::InvalidArgument("structure updates require a free ansatz".into()));
        }
        if self.n_qubits < 2 || self.gates.is_empty() || max_modified == 0 {
            return Ok(self.clone());
        }
        let upper = max_modified.min(self.gates.len());
        let count = rng.random_range(1..=upper);
        let mut chosen: Vec<usize> = Vec::with_capacity(count);
        while chosen.len() < count {
            let g = rng.random_range(0..self.gates.len());
            if !chosen.contains(&g) {
                chosen.push(g);
            }
        }
        let mut out = self.clone();
        for g in chosen {
            let old = out.gates[g].support;
            out.gates[g].support = random_pair(self.n_qubits, Some(old), rng);
        }
        Ok(out)
    }

    /// Inserts an identity gate on a random support at a random position.
    pub fn grow_identity_gate(&self, rng: &mut Rng) -> Result<Self> {
        if self.structure != Structure::Free {
            return Err(VqsdError::InvalidArgument("gate growth requires a free ansatz".into()));
        }
        if self.n_qubits < 2 {
            return Err(VqsdError::InvalidArgument("gate growth needs at least two qubits".into()));
        }
        let support = random_pair(self.n_qubits, None, rng);
        let pos = rng.random_range(0..=self.gates.len());
        let mut out = self.clone();
        out.gates.insert(pos, AnsatzGate::identity(support));
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&AnsatzFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AnsatzFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

fn random_pair(n: usize, exclude: Option<(usize, usize)>, rng: &mut Rng) -> (usize, usize) {
    loop {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n - 1);
        let b = if b >= a { b + 1 } else { b };
        if Some((a, b)) != exclude {
            return (a, b);
        }
    }
}

impl Diagonalizer for ParamAnsatz {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        self.gates.len() * PARAMS_PER_GATE
    }

    fn params(&self) -> Vec<f64> {
        self.gates.iter().flat_map(|g| g.params.iter().copied()).collect()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.n_params(), params)?;
        for (g, chunk) in self.gates.iter_mut().zip(params.chunks_exact(PARAMS_PER_GATE)) {
            g.params.copy_from_slice(chunk);
        }
        Ok(())
    }

    fn apply_to_amps(&self, amps: &mut [C64]) {
        for g in &self.gates {
            apply_2q_vec(amps, self.n_qubits, g.support.0, g.support.1, &g.matrix());
        }
    }

    fn apply_to_density(&self, rho: &mut CMatrix) {
        for g in &self.gates {
            apply_2q_density(rho, self.n_qubits, g.support.0, g.support.1, &g.matrix());
        }
    }
}

/// Per-qubit single-qubit rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalKind {
    /// `Rx(π/2)·Rz(α)`, one parameter per qubit.
    RxHalfPiRz,
    /// `Rx(α)`, one parameter per qubit.
    Rx,
    /// `Rz(a)·Ry(b)·Rz(c)`, three parameters per qubit.
    Euler,
}

impl LocalKind {
    pub fn params_per_qubit(&self) -> usize {
        match self {
            LocalKind::RxHalfPiRz | LocalKind::Rx => 1,
            LocalKind::Euler => 3,
        }
    }
}

/// Tensor product of independent single-qubit rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAnsatz {
    pub n_qubits: usize,
    pub kind: LocalKind,
    pub params: Vec<f64>,
}

impl LocalAnsatz {
    pub fn new(n_qubits: usize, kind: LocalKind, params: Vec<f64>) -> Result<Self> {
        check_len(n_qubits * kind.params_per_qubit(), &params)?;
        Ok(LocalAnsatz { n_qubits, kind, params })
    }

    fn gate(&self, q: usize) -> Mat2 {
        let k = self.kind.params_per_qubit();
        let p = &self.params[q * k..(q + 1) * k];
        match self.kind {
            LocalKind::RxHalfPiRz => mul2(&rx(FRAC_PI_2), &rz(p[0])),
            LocalKind::Rx => rx(p[0]),
            LocalKind::Euler => euler_rotation(p[0], p[1], p[2]),
        }
    }
}

impl Diagonalizer for LocalAnsatz {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.params.len(), params)?;
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn apply_to_amps(&self, amps: &mut [C64]) {
        for q in 0..self.n_qubits {
            apply_1q_vec(amps, self.n_qubits, q, &self.gate(q));
        }
    }

    fn apply_to_density(&self, rho: &mut CMatrix) {
        for q in 0..self.n_qubits {
            apply_1q_density(rho, self.n_qubits, q, &self.gate(q));
        }
    }
}

/// JSON form: `{n, structure, gates: [{support: [i, j], params: [15 floats]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzFile {
    pub n: usize,
    pub structure: StructureFile,
    pub gates: Vec<GateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StructureFile {
    Layered { p: f64 },
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    pub support: [usize; 2],
    pub params: Vec<f64>,
}

impl From<&ParamAnsatz> for AnsatzFile {
    fn from(a: &ParamAnsatz) -> Self {
        AnsatzFile {
            n: a.n_qubits,
            structure: match a.structure {
                Structure::Layered { rows } => StructureFile::Layered { p: rows as f64 / 2.0 },
                Structure::Free => StructureFile::Free,
            },
            gates: a
                .gates
                .iter()
                .map(|g| GateFile { support: [g.support.0, g.support.1], params: g.params.to_vec() })
                .collect(),
        }
    }
}

impl TryFrom<AnsatzFile> for ParamAnsatz {
    type Error = VqsdError;

    fn try_from(f: AnsatzFile) -> Result<Self> {
        if f.n == 0 || f.n > crate::state::MAX_QUBITS {
            return Err(VqsdError::InvalidArgument(format!("unsupported qubit count {}", f.n)));
        }
        let structure = match f.structure {
            StructureFile::Layered { p } => Structure::Layered { rows: rows_for_layers(p)? },
            StructureFile::Free => Structure::Free,
        };
        let mut gates = Vec::with_capacity(f.gates.len());
        for g in f.gates {
            let params: [f64; PARAMS_PER_GATE] = g
                .params
                .as_slice()
                .try_into()
                .map_err(|_| VqsdError::ParamCount { expected: PARAMS_PER_GATE, found: g.params.len() })?;
            if params.iter().any(|p| !p.is_finite()) {
                return Err(VqsdError::InvalidArgument("non-finite gate parameter".into()));
            }
            gates.push(AnsatzGate { support: (g.support[0], g.support[1]), params });
        }
        let a = ParamAnsatz { n_qubits: f.n, gates, structure };
        a.validate()?;
        Ok(a)
    }
}
