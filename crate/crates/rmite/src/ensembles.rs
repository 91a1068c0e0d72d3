//! Unitary ensembles for random measurements: Haar, uniform Clifford, and
//! random hardware-efficient circuits, plus the analytic Haar moment
//! operators used as verification oracles.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::state::{apply_dense, apply_gate_in_place, GateOp, Pauli, StateVector};

const MAX_DENSE_QUBITS: usize = 12;

/// Which distribution a rotator was drawn from.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Haar,
    CliffordGroup,
    HardwareEfficient { layers: usize },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnitaryEnsemble {
    pub kind: EnsembleKind,
    pub n_qubits: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum RotatorRepr {
    Identity,
    Dense(DMatrix<C64>),
    Gates(Vec<GateOp>),
}

/// A concrete unitary drawn from an ensemble, stored either densely or as a
/// gate list.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledRotator {
    n_qubits: usize,
    repr: RotatorRepr,
    pub ensemble: Option<EnsembleKind>,
}

impl SampledRotator {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            repr: RotatorRepr::Identity,
            ensemble: None,
        }
    }

    pub fn from_dense(matrix: DMatrix<C64>) -> Self {
        let n_qubits = matrix.nrows().trailing_zeros() as usize;
        Self {
            n_qubits,
            repr: RotatorRepr::Dense(matrix),
            ensemble: None,
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<GateOp>) -> Self {
        Self {
            n_qubits,
            repr: RotatorRepr::Gates(gates),
            ensemble: None,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gate_count(&self) -> usize {
        match &self.repr {
            RotatorRepr::Gates(g) => g.len(),
            _ => 0,
        }
    }

    /// U|state⟩.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        match &self.repr {
            RotatorRepr::Identity => Ok(state.clone()),
            RotatorRepr::Dense(m) => apply_dense(state, m),
            RotatorRepr::Gates(gates) => {
                let mut amps = state.amplitudes().to_vec();
                for g in gates {
                    apply_gate_in_place(&mut amps, g, &[])?;
                }
                Ok(crate::state::raw_state(self.n_qubits, amps))
            }
        }
    }

    /// Dense 2^n × 2^n matrix form.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits;
        match &self.repr {
            RotatorRepr::Identity => DMatrix::identity(dim, dim),
            RotatorRepr::Dense(m) => m.clone(),
            RotatorRepr::Gates(gates) => {
                let mut cols = Vec::with_capacity(dim);
                for basis in 0..dim {
                    let mut amps = vec![C64::new(0.0, 0.0); dim];
                    amps[basis] = C64::new(1.0, 0.0);
                    for g in gates {
                        apply_gate_in_place(&mut amps, g, &[]).expect("fixed gate application");
                    }
                    cols.push(amps);
                }
                DMatrix::from_fn(dim, dim, |r, c| cols[c][r])
            }
        }
    }

    /// Max elementwise deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let u = self.to_dense();
        let gram = u.adjoint() * &u;
        let dim = gram.nrows();
        let mut dev = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((gram[(r, c)] - C64::new(expect, 0.0)).norm());
            }
        }
        dev
    }
}

/// Haar-uniform unitary via QR of a complex Ginibre matrix, with the phases
/// of the triangular factor's diagonal folded back in to make the
/// construction measure-correct.
pub fn sample_haar<R: Rng>(n_qubits: usize, rng: &mut R) -> Result<SampledRotator> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            context: "Haar sampling",
            n_qubits,
            max: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(sample_std_normal(rng), sample_std_normal(rng))
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    let mut rot = SampledRotator::from_dense(q);
    rot.ensemble = Some(EnsembleKind::Haar);
    Ok(rot)
}

// Box-Muller; avoids pulling a distributions crate for one density.
fn sample_std_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            let v: f64 = rng.gen();
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

/// Random rotator built from per-qubit Pauli rotations with uniformly random
/// axis and angle, followed by an open chain of CZ entanglers, per layer.
pub fn sample_hardware_efficient<R: Rng>(
    n_qubits: usize,
    layers: usize,
    rng: &mut R,
) -> Result<SampledRotator> {
    if layers == 0 {
        return Err(Error::InvalidConfig("layers must be >= 1".into()));
    }
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..n_qubits {
            let axis = match rng.gen_range(0..3u8) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            let angle: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            gates.push(fixed_rotation(axis, q, angle));
        }
        for q in 0..n_qubits.saturating_sub(1) {
            gates.push(GateOp::Cz(q, q + 1));
        }
    }
    let mut rot = SampledRotator::from_gates(n_qubits, gates);
    rot.ensemble = Some(EnsembleKind::HardwareEfficient { layers });
    Ok(rot)
}

/// exp(−i angle P / 2) as a fixed (parameter-free) gate.
pub fn fixed_rotation(axis: Pauli, qubit: usize, angle: f64) -> GateOp {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(angle / 2.0).sin());
    let p = axis.matrix();
    let m = DMatrix::from_row_slice(2, 2, &[
        c + s * p[0][0],
        s * p[0][1],
        s * p[1][0],
        c + s * p[1][1],
    ]);
    GateOp::Unitary {
        matrix: m,
        targets: vec![qubit],
    }
}

/// Draws one rotator from the named ensemble.
pub fn sample_from_ensemble<R: Rng>(
    ensemble: &UnitaryEnsemble,
    rng: &mut R,
) -> Result<SampledRotator> {
    match ensemble.kind {
        EnsembleKind::Haar => sample_haar(ensemble.n_qubits, rng),
        EnsembleKind::CliffordGroup => sample_clifford(ensemble.n_qubits, rng),
        EnsembleKind::HardwareEfficient { layers } => {
            sample_hardware_efficient(ensemble.n_qubits, layers, rng)
        }
    }
}

// ---------------------------------------------------------------------------
// Uniform Clifford sampling via tableau canonical-form reduction: draw a
// random anticommuting stabilizer/destabilizer pair per qubit and record the
// H/S/CX gates that bring it to canonical form.
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
struct BitPair {
    a: bool,
    b: bool,
}

struct Tableau {
    n: usize,
    x: Vec<BitPair>,
    z: Vec<BitPair>,
    sign: BitPair,
    gates: Vec<GateOp>,
}

impl Tableau {
    fn new(n: usize) -> Self {
        Self {
            n,
            x: vec![BitPair::default(); n],
            z: vec![BitPair::default(); n],
            sign: BitPair::default(),
            gates: Vec::new(),
        }
    }

    fn set(&mut self, a: &[Pauli], a_sign: bool, b: &[Pauli], b_sign: bool) {
        for j in 0..self.n {
            let (xa, za) = pauli_bits(a[j]);
            let (xb, zb) = pauli_bits(b[j]);
            self.x[j] = BitPair { a: xa, b: xb };
            self.z[j] = BitPair { a: za, b: zb };
        }
        self.sign = BitPair { a: a_sign, b: b_sign };
    }

    fn h(&mut self, k: usize) {
        let xk = self.x[k];
        self.x[k] = self.z[k];
        self.z[k] = xk;
        self.sign.a ^= self.x[k].a && self.z[k].a;
        self.sign.b ^= self.x[k].b && self.z[k].b;
        self.gates.push(GateOp::H(k));
    }

    fn s(&mut self, k: usize) {
        self.sign.a ^= self.x[k].a && self.z[k].a;
        self.sign.b ^= self.x[k].b && self.z[k].b;
        self.z[k].a ^= self.x[k].a;
        self.z[k].b ^= self.x[k].b;
        self.gates.push(GateOp::S(k));
    }

    fn cx(&mut self, c: usize, t: usize) {
        self.x[t].a ^= self.x[c].a;
        self.x[t].b ^= self.x[c].b;
        self.z[c].a ^= self.z[t].a;
        self.z[c].b ^= self.z[t].b;
        self.sign.a ^= self.x[c].a && self.z[t].a && self.x[t].a && self.z[c].a;
        self.sign.a ^= self.x[c].a && self.z[t].a && !self.x[t].a && !self.z[c].a;
        self.sign.b ^= self.x[c].b && self.z[t].b && self.x[t].b && self.z[c].b;
        self.sign.b ^= self.x[c].b && self.z[t].b && !self.x[t].b && !self.z[c].b;
        self.gates.push(GateOp::Cx(c, t));
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.x.swap(a, b);
        self.z.swap(a, b);
        self.gates.push(GateOp::Swap(a, b));
    }

    fn clear_row(&mut self, llim: usize, row_b: bool) -> Vec<usize> {
        let row = |p: &BitPair| if row_b { p.b } else { p.a };
        // z-part to zero with H (pure Z) or S (Y)
        let hs: Vec<usize> = (llim..self.n)
            .filter(|&j| row(&self.z[j]) && !row(&self.x[j]))
            .collect();
        for j in hs {
            self.h(j);
        }
        let ss: Vec<usize> = (llim..self.n)
            .filter(|&j| row(&self.z[j]) && row(&self.x[j]))
            .collect();
        for j in ss {
            self.s(j);
        }
        // reduce the x support to a single column with a CX cascade
        let mut support: Vec<usize> = (llim..self.n).filter(|&j| row(&self.x[j])).collect();
        while support.len() > 1 {
            let mut next = Vec::with_capacity(support.len() / 2 + 1);
            for pair in support.chunks(2) {
                if pair.len() == 2 {
                    self.cx(pair[0], pair[1]);
                }
                next.push(pair[0]);
            }
            support = next;
        }
        support
    }

    fn sweep(&mut self, llim: usize) {
        let support = self.clear_row(llim, false);
        if let Some(&j) = support.first() {
            if j != llim {
                self.swap(j, llim);
            }
        }
        // second row must become Z on the pivot; conjugate by H if not already
        let needs_fix = !self.z[llim].b
            || self.x[llim].b
            || (llim + 1..self.n).any(|j| self.x[j].b || self.z[j].b);
        if needs_fix {
            self.h(llim);
            self.clear_row(llim, true);
            self.h(llim);
        }
        match self.sign {
            BitPair { a: false, b: false } => {}
            BitPair { a: false, b: true } => self.gates.push(GateOp::X(llim)),
            BitPair { a: true, b: true } => self.gates.push(GateOp::Y(llim)),
            BitPair { a: true, b: false } => self.gates.push(GateOp::Z(llim)),
        }
    }
}

fn pauli_bits(p: Pauli) -> (bool, bool) {
    match p {
        Pauli::I => (false, false),
        Pauli::X => (true, false),
        Pauli::Y => (true, true),
        Pauli::Z => (false, true),
    }
}

fn random_pauli<R: Rng>(rng: &mut R) -> Pauli {
    match rng.gen_range(0..4u8) {
        0 => Pauli::I,
        1 => Pauli::X,
        2 => Pauli::Y,
        _ => Pauli::Z,
    }
}

fn anticommute_on_tail(a: &[Pauli], b: &[Pauli], skip: usize) -> bool {
    a.iter()
        .zip(b)
        .skip(skip)
        .filter(|(x, y)| {
            !matches!((x, y), (Pauli::I, _) | (_, Pauli::I)) && x != y
        })
        .count()
        % 2
        == 1
}

/// Uniformly random Clifford element as a gate list over H, S, CX (plus
/// swaps and a Pauli layer).
pub fn sample_clifford<R: Rng>(n_qubits: usize, rng: &mut R) -> Result<SampledRotator> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            context: "Clifford sampling",
            n_qubits,
            max: MAX_DENSE_QUBITS,
        });
    }
    let mut tab = Tableau::new(n_qubits);
    for llim in 0..n_qubits {
        let mut a: Vec<Pauli> = (0..n_qubits).map(|_| random_pauli(rng)).collect();
        while a.iter().skip(llim).all(|&p| p == Pauli::I) {
            a = (0..n_qubits).map(|_| random_pauli(rng)).collect();
        }
        let mut b: Vec<Pauli> = (0..n_qubits).map(|_| random_pauli(rng)).collect();
        while !anticommute_on_tail(&a, &b, llim) {
            b = (0..n_qubits).map(|_| random_pauli(rng)).collect();
        }
        let a_sign = rng.gen::<bool>();
        let b_sign = rng.gen::<bool>();
        tab.set(&a, a_sign, &b, b_sign);
        tab.sweep(llim);
    }
    let mut rot = SampledRotator::from_gates(n_qubits, tab.gates);
    rot.ensemble = Some(EnsembleKind::CliffordGroup);
    Ok(rot)
}

/// Canonical hashable key for a unitary modulo global phase.
pub(crate) fn phase_canonical_key(u: &DMatrix<C64>) -> Vec<(i64, i64)> {
    let mut phase = C64::new(1.0, 0.0);
    'outer: for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            let e = u[(r, c)];
            if e.norm() > 1e-8 {
                phase = e.conj() / e.norm();
                break 'outer;
            }
        }
    }
    let mut key = Vec::with_capacity(u.nrows() * u.ncols());
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            let e = u[(r, c)] * phase;
            key.push(((e.re * 1e6).round() as i64, (e.im * 1e6).round() as i64));
        }
    }
    key
}

/// Complete Clifford group modulo global phase, as dense matrices.
/// Supported for n ≤ 2 (|Cl(1)| = 24, |Cl(2)| = 11520).
pub fn enumerate_clifford_group(n_qubits: usize) -> Result<Vec<SampledRotator>> {
    if n_qubits == 0 || n_qubits > 2 {
        return Err(Error::TooManyQubits {
            context: "Clifford enumeration",
            n_qubits,
            max: 2,
        });
    }
    let dim = 1usize << n_qubits;
    let generators: Vec<DMatrix<C64>> = {
        let mut gens: Vec<Vec<GateOp>> = Vec::new();
        for q in 0..n_qubits {
            gens.push(vec![GateOp::H(q)]);
            gens.push(vec![GateOp::S(q)]);
        }
        if n_qubits == 2 {
            gens.push(vec![GateOp::Cx(0, 1)]);
            gens.push(vec![GateOp::Cx(1, 0)]);
        }
        gens.iter()
            .map(|g| SampledRotator::from_gates(n_qubits, g.clone()).to_dense())
            .collect()
    };

    let identity = DMatrix::<C64>::identity(dim, dim);
    let mut seen: HashMap<Vec<(i64, i64)>, DMatrix<C64>> = HashMap::new();
    seen.insert(phase_canonical_key(&identity), identity.clone());
    let mut frontier = vec![identity];
    while let Some(u) = frontier.pop() {
        for g in &generators {
            let v = g * &u;
            let key = phase_canonical_key(&v);
            if !seen.contains_key(&key) {
                seen.insert(key, v.clone());
                frontier.push(v);
            }
        }
    }
    let mut entries: Vec<(Vec<(i64, i64)>, DMatrix<C64>)> = seen.into_iter().collect();
    // fixed ordering so group averages accumulate identically across runs
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(entries
        .into_iter()
        .map(|(_, m)| {
            let mut rot = SampledRotator::from_dense(m);
            rot.ensemble = Some(EnsembleKind::CliffordGroup);
            rot
        })
        .collect())
}

/// Memoized [`enumerate_clifford_group`]; the two-qubit group is expensive
/// to rebuild per call.
pub fn clifford_group_cached(n_qubits: usize) -> Result<&'static [SampledRotator]> {
    use std::sync::OnceLock;
    static GROUPS: [OnceLock<Vec<SampledRotator>>; 2] = [OnceLock::new(), OnceLock::new()];
    if n_qubits == 0 || n_qubits > 2 {
        return Err(Error::TooManyQubits {
            context: "Clifford enumeration",
            n_qubits,
            max: 2,
        });
    }
    let cell = &GROUPS[n_qubits - 1];
    if cell.get().is_none() {
        let group = enumerate_clifford_group(n_qubits)?;
        let _ = cell.set(group);
    }
    Ok(cell.get().expect("initialized above").as_slice())
}

/// SWAP operator on (C^d)⊗2.
pub fn swap_operator(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d * d, d * d, |r, c| {
        let (r1, r2) = (r / d, r % d);
        let (c1, c2) = (c / d, c % d);
        if r1 == c2 && r2 == c1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Analytic second Haar moment E[U⊗² O U†⊗²] =
/// [Tr(O) − d⁻¹Tr(SO)]/(d²−1)·I + [Tr(SO) − d⁻¹Tr(O)]/(d²−1)·S.
pub fn haar_second_moment(op: &DMatrix<C64>, d: usize) -> Result<DMatrix<C64>> {
    let dd = d * d;
    if op.nrows() != dd || op.ncols() != dd {
        return Err(Error::DimensionMismatch {
            expected: dd,
            got: op.nrows(),
        });
    }
    let swap = swap_operator(d);
    let tr_o: C64 = op.trace();
    let tr_so: C64 = (&swap * op).trace();
    let df = d as f64;
    let denom = df * df - 1.0;
    let ci = (tr_o - tr_so / df) / denom;
    let cs = (tr_so - tr_o / df) / denom;
    Ok(DMatrix::identity(dd, dd) * ci + swap * cs)
}

/// Analytic first Haar moment E[U O U†] = Tr(O)/d · I.
pub fn haar_first_moment(op: &DMatrix<C64>, d: usize) -> Result<DMatrix<C64>> {
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: op.nrows(),
        });
    }
    Ok(DMatrix::identity(d, d) * (op.trace() / d as f64))
}
