//! Dense statevector simulation: gate application, measurement probabilities,
//! overlaps, and finite-shot outcome sampling.
//!
//! Bitstring convention is little-endian throughout: qubit 0 is the least
//! significant bit of a basis-state index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-10;

/// Single-qubit Pauli operator label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Normalized pure state on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits >= 1, "need at least one qubit");
        let dim = 1 << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// |0...0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    /// Build from raw amplitudes, normalizing if needed.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                got: amps.len().trailing_zeros() as usize,
            });
        }
        let mut sv = Self { n_qubits, amps };
        let norm = sv.norm();
        if norm == 0.0 {
            return Err(Error::Parse("zero-norm amplitude vector".into()));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            sv.amps.iter_mut().for_each(|a| *a /= norm);
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn as_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn from_dvector(n_qubits: usize, v: &DVector<C64>) -> Result<Self> {
        Self::from_amplitudes(n_qubits, v.as_slice().to_vec())
    }
}

/// |⟨a|b⟩|²; infidelity is one minus this.
pub fn overlap_squared(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Outcome probabilities over bitstrings s ∈ {0,1}^n.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub n_qubits: usize,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// probs_s = |amplitude_s|².
pub fn outcome_probabilities(state: &StateVector) -> OutcomeDistribution {
    OutcomeDistribution {
        n_qubits: state.n_qubits,
        probs: state.amps.iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// Empirical distribution counts/shots from multinomial sampling.
pub fn sample_outcomes<R: Rng>(
    dist: &OutcomeDistribution,
    shots: u64,
    rng: &mut R,
) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut cumulative = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for &p in &dist.probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; dist.probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u);
        let last = counts.len() - 1;
        counts[idx.min(last)] += 1;
    }
    Ok(OutcomeDistribution {
        n_qubits: dist.n_qubits,
        probs: counts.iter().map(|&c| c as f64 / shots as f64).collect(),
    })
}

/// One gate in a circuit. Fixed gates are parameter-free; `Rotation` is
/// R_P(θ) = exp(−iθP/2) on a single qubit, reading θ from the bound
/// parameter vector at `param`.
#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    Rotation {
        axis: Pauli,
        qubit: usize,
        param: usize,
    },
    /// Explicit small unitary on the listed target qubits. `targets[0]` is
    /// the least significant bit of the local index.
    Unitary {
        matrix: DMatrix<C64>,
        targets: Vec<usize>,
    },
}

impl GateOp {
    pub fn targets(&self) -> Vec<usize> {
        match self {
            GateOp::H(q) | GateOp::S(q) | GateOp::X(q) | GateOp::Y(q) | GateOp::Z(q) => vec![*q],
            GateOp::Cx(a, b) | GateOp::Cz(a, b) | GateOp::Swap(a, b) => vec![*a, *b],
            GateOp::Rotation { qubit, .. } => vec![*qubit],
            GateOp::Unitary { targets, .. } => targets.clone(),
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match self {
            GateOp::Rotation { param, .. } => Some(*param),
            _ => None,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let targets = self.targets();
        for &t in &targets {
            if t >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    n_qubits,
                });
            }
        }
        for (i, &a) in targets.iter().enumerate() {
            if targets[i + 1..].contains(&a) {
                return Err(Error::QubitOutOfRange {
                    index: a,
                    n_qubits,
                });
            }
        }
        if let GateOp::Unitary { matrix, targets } = self {
            let dim = 1usize << targets.len();
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: targets.len(),
                    got: matrix.nrows().trailing_zeros() as usize,
                });
            }
            let gram = matrix.adjoint() * matrix;
            let dev = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| {
                    let expect = if r == c { 1.0 } else { 0.0 };
                    (gram[(r, c)] - C64::new(expect, 0.0)).norm()
                })
                .fold(0.0f64, f64::max);
            if dev > NORM_TOL {
                return Err(Error::NonUnitaryMatrix { deviation: dev });
            }
        }
        Ok(())
    }
}

fn apply_single(amps: &mut [C64], qubit: usize, m: [[C64; 2]; 2]) {
    let bit = 1usize << qubit;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_multi(amps: &mut [C64], targets: &[usize], matrix: &DMatrix<C64>) {
    let k = targets.len();
    let sub = 1usize << k;
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let mut scratch = vec![C64::new(0.0, 0.0); sub];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (local, slot) in scratch.iter_mut().enumerate() {
            let mut idx = base;
            for (j, &t) in targets.iter().enumerate() {
                if local & (1 << j) != 0 {
                    idx |= 1 << t;
                }
            }
            *slot = amps[idx];
        }
        for row in 0..sub {
            let mut acc = C64::new(0.0, 0.0);
            for (col, &s) in scratch.iter().enumerate() {
                acc += matrix[(row, col)] * s;
            }
            let mut idx = base;
            for (j, &t) in targets.iter().enumerate() {
                if row & (1 << j) != 0 {
                    idx |= 1 << t;
                }
            }
            amps[idx] = acc;
        }
    }
}

/// Apply a gate, reading rotation angles from `theta`. Returns a new state.
pub fn apply_gate(state: &StateVector, gate: &GateOp, theta: &[f64]) -> Result<StateVector> {
    gate.validate(state.n_qubits)?;
    let mut amps = state.amps.clone();
    apply_gate_in_place(&mut amps, gate, theta)?;
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amps,
    })
}

pub(crate) fn apply_gate_in_place(amps: &mut [C64], gate: &GateOp, theta: &[f64]) -> Result<()> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match gate {
        GateOp::H(q) => {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            apply_single(amps, *q, [[h, h], [h, -h]]);
        }
        GateOp::S(q) => apply_single(amps, *q, [[l, o], [o, C64::new(0.0, 1.0)]]),
        GateOp::X(q) => apply_single(amps, *q, Pauli::X.matrix()),
        GateOp::Y(q) => apply_single(amps, *q, Pauli::Y.matrix()),
        GateOp::Z(q) => apply_single(amps, *q, Pauli::Z.matrix()),
        GateOp::Cx(c, t) => {
            let (cb, tb) = (1usize << c, 1usize << t);
            for i in 0..amps.len() {
                if i & cb != 0 && i & tb == 0 {
                    amps.swap(i, i | tb);
                }
            }
        }
        GateOp::Cz(a, b) => {
            let (ab, bb) = (1usize << a, 1usize << b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & ab != 0 && i & bb != 0 {
                    *amp = -*amp;
                }
            }
        }
        GateOp::Swap(a, b) => {
            let (ab, bb) = (1usize << a, 1usize << b);
            for i in 0..amps.len() {
                if i & ab != 0 && i & bb == 0 {
                    amps.swap(i, (i & !ab) | bb);
                }
            }
        }
        GateOp::Rotation { axis, qubit, param } => {
            let angle = *theta.get(*param).ok_or(Error::ParamOutOfRange {
                index: *param,
                count: theta.len(),
            })?;
            let c = C64::new((angle / 2.0).cos(), 0.0);
            let s = C64::new(0.0, -(angle / 2.0).sin());
            let p = axis.matrix();
            let m = [
                [c + s * p[0][0], s * p[0][1]],
                [s * p[1][0], c + s * p[1][1]],
            ];
            apply_single(amps, *qubit, m);
        }
        GateOp::Unitary { matrix, targets } => apply_multi(amps, targets, matrix),
    }
    Ok(())
}

/// Apply a dense 2^n × 2^n matrix to a state (used for sampled rotators).
pub fn apply_dense(state: &StateVector, matrix: &DMatrix<C64>) -> Result<StateVector> {
    if matrix.nrows() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits,
            got: matrix.nrows().trailing_zeros() as usize,
        });
    }
    let v = matrix * state.as_dvector();
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amps: v.as_slice().to_vec(),
    })
}

/// Unchecked constructor for internal use where amplitudes are already valid
/// (e.g. derivative states, which are intentionally unnormalized).
pub(crate) fn raw_state(n_qubits: usize, amps: Vec<C64>) -> StateVector {
    StateVector { n_qubits, amps }
}
