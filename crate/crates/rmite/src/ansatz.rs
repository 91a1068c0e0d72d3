//! Parameterized circuits θ ↦ |φ(θ)⟩, exact derivative states, and
//! parameter-shift derivatives of rotated measurement probabilities.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensembles::SampledRotator;
use crate::error::{Error, Result};
use crate::state::{
    apply_gate_in_place, outcome_probabilities, raw_state, GateOp, Pauli, StateVector,
};

/// Ordered gate list with `n_params` distinct rotation parameters. Each
/// Pauli rotation owns exactly one parameter index; indices form a
/// contiguous range starting at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterizedCircuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
    n_params: usize,
    /// gate position owning each parameter index
    param_positions: Vec<usize>,
}

impl ParameterizedCircuit {
    pub fn new(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        let mut positions: Vec<Option<usize>> = Vec::new();
        for (pos, gate) in gates.iter().enumerate() {
            for &t in &gate.targets() {
                if t >= n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: t,
                        n_qubits,
                    });
                }
            }
            if let Some(p) = gate.param_index() {
                if p >= positions.len() {
                    positions.resize(p + 1, None);
                }
                if positions[p].is_some() {
                    return Err(Error::InvalidConfig(format!(
                        "parameter {p} is shared by more than one rotation"
                    )));
                }
                positions[p] = Some(pos);
            }
        }
        let param_positions: Vec<usize> = positions
            .iter()
            .enumerate()
            .map(|(p, slot)| {
                slot.ok_or_else(|| Error::InvalidConfig(format!("parameter {p} is unused")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n_qubits,
            n_params: param_positions.len(),
            gates,
            param_positions,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::ParamCountMismatch {
                expected: self.n_params,
                got: theta.len(),
            });
        }
        Ok(())
    }
}

/// Applies the circuit's gates in order with bound parameters.
/// Exactly one circuit execution per call (the accounting unit).
pub fn prepare_state(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    initial: &StateVector,
) -> Result<StateVector> {
    circuit.check_theta(theta)?;
    if initial.n_qubits() != circuit.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits,
            got: initial.n_qubits(),
        });
    }
    let mut amps = initial.amplitudes().to_vec();
    for gate in &circuit.gates {
        apply_gate_in_place(&mut amps, gate, theta)?;
    }
    Ok(raw_state(circuit.n_qubits, amps))
}

/// Exact ∂|φ(θ)⟩/∂θ_i, computed by inserting the rotation generator −(i/2)P
/// immediately after the owning gate. Generally unnormalized.
pub fn derivative_state(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    param: usize,
    initial: &StateVector,
) -> Result<DVector<C64>> {
    circuit.check_theta(theta)?;
    if param >= circuit.n_params {
        return Err(Error::ParamOutOfRange {
            index: param,
            count: circuit.n_params,
        });
    }
    let insert_after = circuit.param_positions[param];
    let axis = match &circuit.gates[insert_after] {
        GateOp::Rotation { axis, qubit, .. } => (*axis, *qubit),
        _ => unreachable!("param_positions always points at a rotation"),
    };
    let mut amps = initial.amplitudes().to_vec();
    for (pos, gate) in circuit.gates.iter().enumerate() {
        apply_gate_in_place(&mut amps, gate, theta)?;
        if pos == insert_after {
            apply_generator(&mut amps, axis.0, axis.1);
        }
    }
    Ok(DVector::from_vec(amps))
}

// multiplies by −(i/2) P on the given qubit
fn apply_generator(amps: &mut [C64], axis: Pauli, qubit: usize) {
    let bit = 1usize << qubit;
    let half_mi = C64::new(0.0, -0.5);
    match axis {
        Pauli::I => {
            for a in amps.iter_mut() {
                *a *= half_mi;
            }
        }
        Pauli::X => {
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
            for a in amps.iter_mut() {
                *a *= half_mi;
            }
        }
        Pauli::Y => {
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let lo = amps[i];
                    let hi = amps[i | bit];
                    // Y|0> = i|1>, Y|1> = -i|0>
                    amps[i] = C64::new(0.0, -1.0) * hi * half_mi;
                    amps[i | bit] = C64::new(0.0, 1.0) * lo * half_mi;
                }
            }
        }
        Pauli::Z => {
            for (i, a) in amps.iter_mut().enumerate() {
                let sign = if i & bit == 0 { 1.0 } else { -1.0 };
                *a *= half_mi * sign;
            }
        }
    }
}

/// ∂p_s^U/∂θ_i for all outcomes s via the parameter-shift rule:
/// ½[p^U(θ + (π/2)e_i) − p^U(θ − (π/2)e_i)]. Entries sum to zero.
pub fn probability_derivative(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    rotator: &SampledRotator,
    param: usize,
    initial: &StateVector,
) -> Result<Vec<f64>> {
    circuit.check_theta(theta)?;
    if param >= circuit.n_params {
        return Err(Error::ParamOutOfRange {
            index: param,
            count: circuit.n_params,
        });
    }
    if rotator.n_qubits() != circuit.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits,
            got: rotator.n_qubits(),
        });
    }
    let plus = shifted_probs(circuit, theta, rotator, param, std::f64::consts::FRAC_PI_2, initial)?;
    let minus =
        shifted_probs(circuit, theta, rotator, param, -std::f64::consts::FRAC_PI_2, initial)?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| 0.5 * (p - m))
        .collect())
}

pub(crate) fn shifted_probs(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    rotator: &SampledRotator,
    param: usize,
    shift: f64,
    initial: &StateVector,
) -> Result<Vec<f64>> {
    let mut shifted = theta.to_vec();
    shifted[param] += shift;
    let state = prepare_state(circuit, &shifted, initial)?;
    let rotated = rotator.apply(&state)?;
    Ok(outcome_probabilities(&rotated).probs)
}

/// Ansatz families recognized by the experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzSpec {
    /// Per layer: R_y then R_x on every qubit, then a CZ ring
    /// (nearest-neighbour plus wraparound). m = 2·n·layers.
    #[serde(rename_all = "kebab-case")]
    HardwareEfficient { n_qubits: usize, layers: usize },
    ExplicitGateList(GateListDoc),
}

impl AnsatzSpec {
    pub fn build(&self) -> Result<ParameterizedCircuit> {
        match self {
            AnsatzSpec::HardwareEfficient { n_qubits, layers } => {
                hardware_efficient_circuit(*n_qubits, *layers)
            }
            AnsatzSpec::ExplicitGateList(doc) => doc.build(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            AnsatzSpec::HardwareEfficient { n_qubits, .. } => *n_qubits,
            AnsatzSpec::ExplicitGateList(doc) => doc.n_qubits,
        }
    }
}

/// R_y/R_x rotation pairs per qubit followed by a CZ ring, repeated `layers`
/// times.
pub fn hardware_efficient_circuit(n_qubits: usize, layers: usize) -> Result<ParameterizedCircuit> {
    if n_qubits == 0 || layers == 0 {
        return Err(Error::InvalidConfig(
            "hardware-efficient ansatz needs n_qubits >= 1 and layers >= 1".into(),
        ));
    }
    let mut gates = Vec::new();
    let mut param = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            gates.push(GateOp::Rotation {
                axis: Pauli::Y,
                qubit: q,
                param,
            });
            param += 1;
            gates.push(GateOp::Rotation {
                axis: Pauli::X,
                qubit: q,
                param,
            });
            param += 1;
        }
        for q in 0..n_qubits.saturating_sub(1) {
            gates.push(GateOp::Cz(q, q + 1));
        }
        if n_qubits > 2 {
            gates.push(GateOp::Cz(n_qubits - 1, 0));
        }
    }
    ParameterizedCircuit::new(n_qubits, gates)
}

/// R_y layer + open CZ chain per layer, with a closing R_y layer; keeps all
/// amplitudes real. m = n·(layers + 1).
pub fn real_amplitude_circuit(n_qubits: usize, layers: usize) -> Result<ParameterizedCircuit> {
    if n_qubits == 0 || layers == 0 {
        return Err(Error::InvalidConfig(
            "real-amplitude ansatz needs n_qubits >= 1 and layers >= 1".into(),
        ));
    }
    let mut gates = Vec::new();
    let mut param = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            gates.push(GateOp::Rotation {
                axis: Pauli::Y,
                qubit: q,
                param,
            });
            param += 1;
        }
        for q in 0..n_qubits.saturating_sub(1) {
            gates.push(GateOp::Cz(q, q + 1));
        }
    }
    for q in 0..n_qubits {
        gates.push(GateOp::Rotation {
            axis: Pauli::Y,
            qubit: q,
            param,
        });
        param += 1;
    }
    ParameterizedCircuit::new(n_qubits, gates)
}

/// Random circuit of single-qubit Pauli rotations interleaved with CZ
/// entanglers; one parameter per rotation. Used by estimator-accuracy
/// experiments and randomized checks.
pub fn random_rotation_circuit(
    n_qubits: usize,
    n_rotations: usize,
    rng: &mut impl rand::Rng,
) -> ParameterizedCircuit {
    let mut gates = Vec::new();
    for p in 0..n_rotations {
        let axis = match rng.gen_range(0..3u8) {
            0 => Pauli::X,
            1 => Pauli::Y,
            _ => Pauli::Z,
        };
        gates.push(GateOp::Rotation {
            axis,
            qubit: rng.gen_range(0..n_qubits),
            param: p,
        });
        if n_qubits > 1 && rng.gen::<bool>() {
            let a = rng.gen_range(0..n_qubits);
            let b = (a + 1 + rng.gen_range(0..n_qubits - 1)) % n_qubits;
            gates.push(GateOp::Cz(a, b));
        }
    }
    ParameterizedCircuit::new(n_qubits, gates).expect("contiguous parameters by construction")
}

/// JSON gate-list document:
/// `{ "n_qubits": int, "gates": [ {"kind": "ry"|"rx"|"rz"|"h"|"cx"|"cz",
/// "targets": [int...], "param": int|null} ] }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateListDoc {
    pub n_qubits: usize,
    pub gates: Vec<GateDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDoc {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub param: Option<usize>,
}

impl GateListDoc {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<ParameterizedCircuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| g.to_gate())
            .collect::<Result<Vec<_>>>()?;
        ParameterizedCircuit::new(self.n_qubits, gates)
    }
}

impl GateDoc {
    fn to_gate(&self) -> Result<GateOp> {
        let one = |targets: &[usize]| -> Result<usize> {
            if targets.len() == 1 {
                Ok(targets[0])
            } else {
                Err(Error::Parse(format!(
                    "gate \"{}\" takes 1 target, got {}",
                    self.kind,
                    targets.len()
                )))
            }
        };
        let two = |targets: &[usize]| -> Result<(usize, usize)> {
            if targets.len() == 2 {
                Ok((targets[0], targets[1]))
            } else {
                Err(Error::Parse(format!(
                    "gate \"{}\" takes 2 targets, got {}",
                    self.kind,
                    targets.len()
                )))
            }
        };
        let rotation = |axis: Pauli| -> Result<GateOp> {
            let qubit = one(&self.targets)?;
            let param = self.param.ok_or_else(|| {
                Error::Parse(format!("rotation \"{}\" is missing \"param\"", self.kind))
            })?;
            Ok(GateOp::Rotation { axis, qubit, param })
        };
        match self.kind.as_str() {
            "rx" => rotation(Pauli::X),
            "ry" => rotation(Pauli::Y),
            "rz" => rotation(Pauli::Z),
            "h" => Ok(GateOp::H(one(&self.targets)?)),
            "cx" => {
                let (a, b) = two(&self.targets)?;
                Ok(GateOp::Cx(a, b))
            }
            "cz" => {
                let (a, b) = two(&self.targets)?;
                Ok(GateOp::Cz(a, b))
            }
            other => Err(Error::Parse(format!("unknown gate kind \"{other}\""))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::overlap_squared;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_ry() -> ParameterizedCircuit {
        ParameterizedCircuit::new(
            1,
            vec![GateOp::Rotation {
                axis: Pauli::Y,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap()
    }

    use super::random_rotation_circuit as random_circuit;

    #[test]
    fn identity_rotation_keeps_zero() {
        let c = single_ry();
        let s = prepare_state(&c, &[0.0], &StateVector::zero(1)).unwrap();
        assert_abs_diff_eq!(
            overlap_squared(&s, &StateVector::zero(1)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn full_flip() {
        let c = single_ry();
        let s = prepare_state(&c, &[std::f64::consts::PI], &StateVector::zero(1)).unwrap();
        assert_abs_diff_eq!(
            overlap_squared(&s, &StateVector::basis(1, 1)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn param_count_checked() {
        let c = single_ry();
        assert!(prepare_state(&c, &[0.1, 0.2], &StateVector::zero(1)).is_err());
    }

    #[test]
    fn hardware_efficient_matches_direct_matrix_product() {
        // 2-qubit, 1 layer, all theta = 0: only the CZ entangler acts.
        let c = hardware_efficient_circuit(2, 1).unwrap();
        assert_eq!(c.n_params(), 4);
        let s = prepare_state(&c, &[0.0; 4], &StateVector::zero(2)).unwrap();
        // CZ |00> = |00>; verify against explicit 4x4 product on the basis state
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let cz = DMatrix::from_row_slice(4, 4, &[
            l, o, o, o, //
            o, l, o, o, //
            o, o, l, o, //
            o, o, o, -l,
        ]);
        let expect = &cz * StateVector::zero(2).as_dvector();
        for (a, b) in s.amplitudes().iter().zip(expect.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hardware_efficient_param_count() {
        let c = hardware_efficient_circuit(4, 3).unwrap();
        assert_eq!(c.n_params(), 24);
    }

    #[test]
    fn real_amplitude_param_count_and_real_state() {
        let c = real_amplitude_circuit(3, 2).unwrap();
        assert_eq!(c.n_params(), 9);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta: Vec<f64> = (0..9).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
        let s = prepare_state(&c, &theta, &StateVector::zero(3)).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_of_single_ry_at_zero() {
        let c = single_ry();
        let d = derivative_state(&c, &[0.0], 0, &StateVector::zero(1)).unwrap();
        assert_abs_diff_eq!(d[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn derivative_orthogonality() {
        // Re<d_i phi | phi> = 0, forced by norm conservation.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let c = random_circuit(3, 6, &mut rng);
            let theta: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
            let init = StateVector::zero(3);
            let phi = prepare_state(&c, &theta, &init).unwrap().as_dvector();
            for i in 0..6 {
                let d = derivative_state(&c, &theta, i, &init).unwrap();
                assert_abs_diff_eq!(d.dotc(&phi).re, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eps = 1e-4;
        for _ in 0..5 {
            let c = random_circuit(3, 5, &mut rng);
            let theta: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
            let init = StateVector::zero(3);
            for i in 0..5 {
                let d = derivative_state(&c, &theta, i, &init).unwrap();
                let mut tp = theta.clone();
                tp[i] += eps;
                let mut tm = theta.clone();
                tm[i] -= eps;
                let fp = prepare_state(&c, &tp, &init).unwrap().as_dvector();
                let fm = prepare_state(&c, &tm, &init).unwrap().as_dvector();
                let fd = (fp - fm) / C64::new(2.0 * eps, 0.0);
                assert!((&fd - &d).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn probability_derivative_single_ry() {
        let c = single_ry();
        let rot = SampledRotator::identity(1);
        let d = probability_derivative(
            &c,
            &[std::f64::consts::FRAC_PI_2],
            &rot,
            0,
            &StateVector::zero(1),
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn probability_derivative_sums_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = random_circuit(3, 6, &mut rng);
        let theta: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
        let rot = crate::ensembles::sample_haar(3, &mut rng).unwrap();
        for i in 0..6 {
            let d = probability_derivative(&c, &theta, &rot, i, &StateVector::zero(3)).unwrap();
            assert_abs_diff_eq!(d.iter().sum::<f64>(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn shift_rule_matches_exact_derivative() {
        // p_s = |<s|U|phi>|^2 so dp_s/dt = 2 Re[<s|U|d_i phi> <phi|U'|s>].
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let c = random_circuit(3, 8, &mut rng);
            let theta: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
            let init = StateVector::zero(3);
            let rot = crate::ensembles::sample_haar(3, &mut rng).unwrap();
            let u = rot.to_dense();
            let phi = prepare_state(&c, &theta, &init).unwrap().as_dvector();
            let u_phi = &u * &phi;
            for i in 0..8 {
                let d_state = &u * derivative_state(&c, &theta, i, &init).unwrap();
                let shift = probability_derivative(&c, &theta, &rot, i, &init).unwrap();
                for s in 0..8 {
                    let exact = 2.0 * (u_phi[s].conj() * d_state[s]).re;
                    assert_abs_diff_eq!(shift[s], exact, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn gate_list_document_round_trip() {
        let json = r#"{"n_qubits":2,"gates":[
            {"kind":"ry","targets":[0],"param":0},
            {"kind":"cx","targets":[0,1]},
            {"kind":"rz","targets":[1],"param":1}
        ]}"#;
        let doc = GateListDoc::parse(json).unwrap();
        let c = doc.build().unwrap();
        assert_eq!(c.n_params(), 2);
        assert_eq!(c.gates().len(), 3);
    }

    #[test]
    fn gate_list_rejects_unknown_kind() {
        let json = r#"{"n_qubits":1,"gates":[{"kind":"toffoli","targets":[0]}]}"#;
        let doc = GateListDoc::parse(json).unwrap();
        assert!(doc.build().is_err());
    }

    #[test]
    fn shared_parameter_rejected() {
        let gates = vec![
            GateOp::Rotation {
                axis: Pauli::Y,
                qubit: 0,
                param: 0,
            },
            GateOp::Rotation {
                axis: Pauli::X,
                qubit: 0,
                param: 0,
            },
        ];
        assert!(ParameterizedCircuit::new(1, gates).is_err());
    }

    #[test]
    fn gap_in_parameter_indices_rejected() {
        let gates = vec![GateOp::Rotation {
            axis: Pauli::Y,
            qubit: 0,
            param: 1,
        }];
        assert!(ParameterizedCircuit::new(1, gates).is_err());
    }
}
