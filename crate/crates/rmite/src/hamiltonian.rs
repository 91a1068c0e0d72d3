//! Pauli-sum observables: energy and energy gradients, plus the exact
//! diagonalization and exact imaginary-time-evolution oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, ParameterizedCircuit};
use crate::error::{Error, Result};
use crate::state::{raw_state, Pauli, StateVector};

const MAX_DENSE_QUBITS: usize = 12;

/// Tensor product of single-qubit Paulis; character j acts on qubit j.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn parse(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidPauliChar {
                    ch: other,
                    string: s.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn to_string(&self) -> String {
        self.ops
            .iter()
            .map(|p| match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }

    // (x-flip mask, phase-relevant mask, #Y) for index/sign application
    fn masks(&self) -> (usize, usize, u32) {
        let mut xmask = 0usize;
        let mut phase_mask = 0usize;
        let mut n_y = 0u32;
        for (j, p) in self.ops.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => xmask |= 1 << j,
                Pauli::Y => {
                    xmask |= 1 << j;
                    phase_mask |= 1 << j;
                    n_y += 1;
                }
                Pauli::Z => phase_mask |= 1 << j,
            }
        }
        (xmask, phase_mask, n_y)
    }

    /// P|φ⟩ by index permutation and sign, no dense matrix.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.len() != state.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: state.n_qubits(),
                got: self.len(),
            });
        }
        let (xmask, phase_mask, n_y) = self.masks();
        let i_pow = match n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let amps = state.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (s, &a) in amps.iter().enumerate() {
            let sign = if (s & phase_mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[s ^ xmask] = i_pow * sign * a;
        }
        Ok(raw_state(state.n_qubits(), out))
    }
}

/// Hermitian observable H = Σ_t c_t P_t with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSumHamiltonian {
    pub name: Option<String>,
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSumHamiltonian {
    /// Builds the canonical form: duplicate Pauli strings merged by summing
    /// coefficients, exact zeros dropped, first-occurrence order kept.
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut canonical: Vec<(f64, PauliString)> = Vec::new();
        for (coeff, pauli) in terms {
            if !coeff.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    string: pauli.to_string(),
                });
            }
            if pauli.len() != n_qubits {
                return Err(Error::PauliLengthMismatch {
                    string: pauli.to_string(),
                    got: pauli.len(),
                    expected: n_qubits,
                });
            }
            match canonical.iter_mut().find(|(_, p)| *p == pauli) {
                Some((c, _)) => *c += coeff,
                None => canonical.push((coeff, pauli)),
            }
        }
        canonical.retain(|(c, _)| *c != 0.0);
        Ok(Self {
            name: None,
            n_qubits,
            terms: canonical,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// H|φ⟩ (unnormalized).
    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        let mut out = DVector::from_element(state.dim(), C64::new(0.0, 0.0));
        for (coeff, pauli) in &self.terms {
            let applied = pauli.apply(state)?;
            for (o, a) in out.iter_mut().zip(applied.amplitudes()) {
                *o += C64::new(*coeff, 0.0) * a;
            }
        }
        Ok(out)
    }

    /// ⟨φ|H|φ⟩; the sub-1e-10 imaginary residue is discarded.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        // fixed term order keeps the accumulation reproducible
        for (coeff, pauli) in &self.terms {
            let (xmask, phase_mask, n_y) = pauli.masks();
            let i_pow = match n_y % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            let amps = state.amplitudes();
            let mut term = C64::new(0.0, 0.0);
            for (s, &a) in amps.iter().enumerate() {
                let sign = if (s & phase_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                term += amps[s ^ xmask].conj() * i_pow * sign * a;
            }
            acc += C64::new(*coeff, 0.0) * term;
        }
        debug_assert!(acc.im.abs() < 1e-10);
        Ok(acc.re)
    }

    /// Dense 2^n × 2^n matrix; only used by the verification oracles.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                context: "dense Hamiltonian",
                n_qubits: self.n_qubits,
                max: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for (coeff, pauli) in &self.terms {
            let (xmask, phase_mask, n_y) = pauli.masks();
            let i_pow = match n_y % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            for s in 0..dim {
                let sign = if (s & phase_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                h[(s ^ xmask, s)] += C64::new(*coeff, 0.0) * i_pow * sign;
            }
        }
        Ok(h)
    }
}

/// ∂E/∂θ_i by parameter shift on the expectation:
/// ½[E(θ+(π/2)e_i) − E(θ−(π/2)e_i)]. Costs exactly 2m state preparations.
pub fn energy_gradient(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    h: &PauliSumHamiltonian,
    initial: &StateVector,
) -> Result<Vec<f64>> {
    let m = circuit.n_params();
    let mut grad = Vec::with_capacity(m);
    let mut shifted = theta.to_vec();
    for i in 0..m {
        shifted[i] = theta[i] + std::f64::consts::FRAC_PI_2;
        let e_plus = h.expectation(&prepare_state(circuit, &shifted, initial)?)?;
        shifted[i] = theta[i] - std::f64::consts::FRAC_PI_2;
        let e_minus = h.expectation(&prepare_state(circuit, &shifted, initial)?)?;
        shifted[i] = theta[i];
        grad.push(0.5 * (e_plus - e_minus));
    }
    Ok(grad)
}

/// Minimal eigenvalue and a unit-norm eigenvector of the dense matrix.
pub fn exact_ground_state(h: &PauliSumHamiltonian) -> Result<(f64, StateVector)> {
    let dense = h.to_dense()?;
    let eig = nalgebra::SymmetricEigen::new(dense);
    let (mut min_idx, mut min_val) = (0, f64::INFINITY);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < min_val {
            min_val = v;
            min_idx = i;
        }
    }
    let col = eig.eigenvectors.column(min_idx);
    let state = StateVector::from_amplitudes(h.n_qubits, col.iter().copied().collect())?;
    Ok((min_val, state))
}

/// e^{−Hτ}|ψ(0)⟩ / ‖e^{−Hτ}|ψ(0)⟩‖ in the exact eigenbasis.
pub fn exact_imaginary_time_evolve(
    h: &PauliSumHamiltonian,
    initial: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    if initial.n_qubits() != h.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: h.n_qubits,
            got: initial.n_qubits(),
        });
    }
    if tau < 0.0 {
        return Err(Error::InvalidConfig("tau must be non-negative".into()));
    }
    let dense = h.to_dense()?;
    let eig = nalgebra::SymmetricEigen::new(dense);
    let coeffs = eig.eigenvectors.adjoint() * initial.as_dvector();
    let e_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    // shift by e_min so the exponentials stay bounded
    let scaled = DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &e)| c * C64::new((-(e - e_min) * tau).exp(), 0.0)),
    );
    let evolved = &eig.eigenvectors * scaled;
    StateVector::from_dvector(h.n_qubits, &evolved)
}

/// Serialized form:
/// `{ "name": string, "n_qubits": int, "terms": [ {"coeff": float, "pauli": "IXYZ-string"} ] }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: f64,
    pub pauli: String,
}

/// Parses and canonicalizes a Hamiltonian document.
pub fn load_hamiltonian(json: &str) -> Result<PauliSumHamiltonian> {
    let doc: HamiltonianDoc = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let terms = doc
        .terms
        .iter()
        .map(|t| Ok((t.coeff, PauliString::parse(&t.pauli)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut h = PauliSumHamiltonian::new(doc.n_qubits, terms)?;
    h.name = doc.name;
    Ok(h)
}

pub fn to_document(h: &PauliSumHamiltonian) -> HamiltonianDoc {
    HamiltonianDoc {
        name: h.name.clone(),
        n_qubits: h.n_qubits,
        terms: h
            .terms
            .iter()
            .map(|(coeff, pauli)| TermDoc {
                coeff: *coeff,
                pauli: pauli.to_string(),
            })
            .collect(),
    }
}

fn single_site(n: usize, site: usize, p: char) -> PauliString {
    let s: String = (0..n).map(|j| if j == site { p } else { 'I' }).collect();
    PauliString::parse(&s).expect("valid pauli chars")
}

fn two_site(n: usize, a: usize, b: usize, p: char) -> PauliString {
    let s: String = (0..n)
        .map(|j| if j == a || j == b { p } else { 'I' })
        .collect();
    PauliString::parse(&s).expect("valid pauli chars")
}

/// Open-chain transverse-field Ising model:
/// H = −J Σ Z_i Z_{i+1} − g Σ X_i.
pub fn transverse_field_ising(n_qubits: usize, coupling: f64, field: f64) -> PauliSumHamiltonian {
    let mut terms = Vec::new();
    for i in 0..n_qubits.saturating_sub(1) {
        terms.push((-coupling, two_site(n_qubits, i, i + 1, 'Z')));
    }
    for i in 0..n_qubits {
        terms.push((-field, single_site(n_qubits, i, 'X')));
    }
    let mut h = PauliSumHamiltonian::new(n_qubits, terms).expect("well-formed builtin");
    h.name = Some(format!("tfim-{n_qubits}"));
    h
}

/// Open-chain Heisenberg model: H = J Σ (X_iX_{i+1} + Y_iY_{i+1} + Z_iZ_{i+1}).
pub fn heisenberg_chain(n_qubits: usize, coupling: f64) -> PauliSumHamiltonian {
    let mut terms = Vec::new();
    for i in 0..n_qubits.saturating_sub(1) {
        for p in ['X', 'Y', 'Z'] {
            terms.push((coupling, two_site(n_qubits, i, i + 1, p)));
        }
    }
    let mut h = PauliSumHamiltonian::new(n_qubits, terms).expect("well-formed builtin");
    h.name = Some(format!("heisenberg-{n_qubits}"));
    h
}

/// Single-qubit H = Z, the smallest sanity target.
pub fn single_z() -> PauliSumHamiltonian {
    let mut h = PauliSumHamiltonian::new(1, vec![(1.0, PauliString::parse("Z").unwrap())])
        .expect("well-formed builtin");
    h.name = Some("z".into());
    h
}
