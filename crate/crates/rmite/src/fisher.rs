//! Quantum and classical Fisher information matrices, the two randomized
//! estimators built from measurement-probability derivatives, and the
//! random-measurement fidelity reconstruction.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{derivative_state, prepare_state, shifted_probs, ParameterizedCircuit};
use crate::ensembles::{
    haar_second_moment, sample_from_ensemble, sample_haar, SampledRotator, UnitaryEnsemble,
};
use crate::error::{Error, Result};
use crate::exec::{child_seed, map_indexed, ExecMode};
use crate::state::{outcome_probabilities, sample_outcomes, StateVector};

pub const DEFAULT_PROBABILITY_FLOOR: f64 = 1e-12;

/// How a Fisher matrix was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FisherProvenance {
    ExactQfim,
    Cfim,
    TwoDesignEstimate,
    AverageCfimEstimate,
}

/// Symmetric m×m information matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    entries: DMatrix<f64>,
    pub provenance: FisherProvenance,
}

impl FisherMatrix {
    pub fn new(entries: DMatrix<f64>, provenance: FisherProvenance) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self { entries, provenance }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        eig.eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Relative Frobenius-norm error ‖approx − exact‖_F / ‖exact‖_F.
pub fn estimator_error(approx: &FisherMatrix, exact: &FisherMatrix) -> f64 {
    let denom = exact.entries.norm();
    if denom == 0.0 {
        return (approx.entries.clone() - &exact.entries).norm();
    }
    (approx.entries.clone() - &exact.entries).norm() / denom
}

/// Exact quantum Fisher information for the pure variational state:
/// [F]_ij = 4 Re[⟨∂_iφ|∂_jφ⟩ − ⟨∂_iφ|φ⟩⟨φ|∂_jφ⟩].
pub fn exact_qfim(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    initial: &StateVector,
) -> Result<FisherMatrix> {
    let m = circuit.n_params();
    let phi = prepare_state(circuit, theta, initial)?.as_dvector();
    let derivs: Vec<_> = (0..m)
        .map(|i| derivative_state(circuit, theta, i, initial))
        .collect::<Result<_>>()?;
    let mut f = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let di_phi = derivs[i].dotc(&phi);
        for j in i..m {
            let val = 4.0 * (derivs[i].dotc(&derivs[j]) - di_phi * phi.dotc(&derivs[j])).re;
            f[(i, j)] = val;
            f[(j, i)] = val;
        }
    }
    Ok(FisherMatrix::new(f, FisherProvenance::ExactQfim))
}

/// Classical Fisher information of the outcome distribution after the rotator:
/// [F]_ij = Σ_s ∂_i p_s ∂_j p_s / p_s, skipping outcomes at or below `floor`.
pub fn cfim(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    rotator: &SampledRotator,
    initial: &StateVector,
    floor: f64,
) -> Result<FisherMatrix> {
    let probs = outcome_probabilities(&rotator.apply(&prepare_state(circuit, theta, initial)?)?);
    let derivs = probability_derivatives_exact(circuit, theta, rotator, initial)?;
    cfim_from_parts(&probs.probs, &derivs, floor)
}

fn cfim_from_parts(probs: &[f64], derivs: &[Vec<f64>], floor: f64) -> Result<FisherMatrix> {
    let m = derivs.len();
    let mut f = DMatrix::<f64>::zeros(m, m);
    let mut any = false;
    for (s, &p) in probs.iter().enumerate() {
        if p <= floor {
            continue;
        }
        any = true;
        for i in 0..m {
            for j in i..m {
                let val = derivs[i][s] * derivs[j][s] / p;
                f[(i, j)] += val;
                if i != j {
                    f[(j, i)] += val;
                }
            }
        }
    }
    if !any {
        return Err(Error::DegenerateCfim);
    }
    Ok(FisherMatrix::new(f, FisherProvenance::Cfim))
}

fn probability_derivatives_exact(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    rotator: &SampledRotator,
    initial: &StateVector,
) -> Result<Vec<Vec<f64>>> {
    (0..circuit.n_params())
        .map(|i| crate::ansatz::probability_derivative(circuit, theta, rotator, i, initial))
        .collect()
}

// parameter-shift derivatives from finite-shot empirical distributions
fn probability_derivatives_sampled(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    rotator: &SampledRotator,
    initial: &StateVector,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    (0..circuit.n_params())
        .map(|i| {
            let plus = shifted_probs(circuit, theta, rotator, i, half_pi, initial)?;
            let minus = shifted_probs(circuit, theta, rotator, i, -half_pi, initial)?;
            let dist = |probs: Vec<f64>, rng: &mut ChaCha8Rng| {
                let dist = crate::state::OutcomeDistribution {
                    n_qubits: circuit.n_qubits(),
                    probs,
                };
                sample_outcomes(&dist, shots, rng).map(|d| d.probs)
            };
            let p_hat = dist(plus, rng)?;
            let m_hat = dist(minus, rng)?;
            Ok(p_hat
                .iter()
                .zip(&m_hat)
                .map(|(p, m)| 0.5 * (p - m))
                .collect())
        })
        .collect()
}

/// Which randomized estimator to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// 2(d+1) × mean over rotators of Σ_s ∂_i p_s ∂_j p_s.
    TwoDesign,
    /// Mean CFIM over rotators, optionally rescaled by 2.
    AverageCfim,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub ensemble: UnitaryEnsemble,
    /// Number of sampled rotators, K.
    pub samples: usize,
    /// When set, measurement probabilities come from finite-shot sampling.
    pub shots: Option<u64>,
    pub probability_floor: f64,
    /// Applies the conjectured factor 2 to the average-CFIM estimate.
    pub rescale_average_cfim: bool,
    pub exec: ExecMode,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, ensemble: UnitaryEnsemble, samples: usize) -> Self {
        Self {
            kind,
            ensemble,
            samples,
            shots: None,
            probability_floor: DEFAULT_PROBABILITY_FLOOR,
            rescale_average_cfim: false,
            exec: ExecMode::default(),
        }
    }
}

/// Runs the configured estimator with per-sample child seeds derived from
/// `seed`, so results are independent of execution mode and sample order.
pub fn estimate_fisher(
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    initial: &StateVector,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<FisherMatrix> {
    if config.samples == 0 {
        return Err(Error::ZeroSamples);
    }
    if config.ensemble.n_qubits != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: config.ensemble.n_qubits,
        });
    }
    let m = circuit.n_params();
    let per_sample = |k: usize| -> Result<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, k as u64));
        let rotator = sample_from_ensemble(&config.ensemble, &mut rng)?;
        let derivs = match config.shots {
            None => probability_derivatives_exact(circuit, theta, &rotator, initial)?,
            Some(shots) => probability_derivatives_sampled(
                circuit, theta, &rotator, initial, shots, &mut rng,
            )?,
        };
        match config.kind {
            EstimatorKind::TwoDesign => {
                let mut g = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    for j in i..m {
                        let val: f64 =
                            derivs[i].iter().zip(&derivs[j]).map(|(a, b)| a * b).sum();
                        g[(i, j)] = val;
                        g[(j, i)] = val;
                    }
                }
                Ok(g)
            }
            EstimatorKind::AverageCfim => {
                let probs = match config.shots {
                    None => {
                        outcome_probabilities(
                            &rotator.apply(&prepare_state(circuit, theta, initial)?)?,
                        )
                        .probs
                    }
                    Some(shots) => {
                        let exact = outcome_probabilities(
                            &rotator.apply(&prepare_state(circuit, theta, initial)?)?,
                        );
                        sample_outcomes(&exact, shots, &mut rng)?.probs
                    }
                };
                cfim_from_parts(&probs, &derivs, config.probability_floor)
                    .map(|f| f.entries)
            }
        }
    };
    let results = map_indexed(config.exec, config.samples, per_sample);
    // fixed fold order keeps the sum bitwise reproducible
    let mut acc = DMatrix::<f64>::zeros(m, m);
    for r in results {
        acc += r?;
    }
    acc /= config.samples as f64;
    let (scale, provenance) = match config.kind {
        EstimatorKind::TwoDesign => {
            let d = (1usize << circuit.n_qubits()) as f64;
            (2.0 * (d + 1.0), FisherProvenance::TwoDesignEstimate)
        }
        EstimatorKind::AverageCfim => (
            if config.rescale_average_cfim { 2.0 } else { 1.0 },
            FisherProvenance::AverageCfimEstimate,
        ),
    };
    acc *= scale;
    let sym = (acc.clone() + acc.transpose()) * 0.5;
    Ok(FisherMatrix::new(sym, provenance))
}

/// How the pair-correlation matrix E_U[p₁^U(s) p₂^U(s')] is obtained when
/// reconstructing overlap from randomized measurements.
#[derive(Clone, Debug, PartialEq)]
pub enum FidelityMode {
    /// Analytic Haar second moment; exact.
    ExactSecondMoment,
    /// Uniform average over the full Clifford group; exact, small n only.
    CliffordEnumeration,
    /// Empirical average over K Haar draws.
    MonteCarlo { samples: usize, seed: u64 },
}

/// |⟨ψ₁|ψ₂⟩|² reconstructed from randomized-measurement statistics:
/// d · Σ_s X[s,s] − Σ_{s≠s'} X[s,s'] with X[s,s'] = E_U[p₁^U(s) p₂^U(s')].
pub fn fidelity_random_measurement(
    a: &StateVector,
    b: &StateVector,
    mode: &FidelityMode,
) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.n_qubits(),
            got: b.n_qubits(),
        });
    }
    let n = a.n_qubits();
    let d = a.dim();
    let x = match mode {
        FidelityMode::ExactSecondMoment => {
            let rho_a = a.as_dvector() * a.as_dvector().adjoint();
            let rho_b = b.as_dvector() * b.as_dvector().adjoint();
            let twirled = haar_second_moment(&rho_a.kronecker(&rho_b), d)?;
            DMatrix::from_fn(d, d, |s, t| twirled[(s * d + t, s * d + t)].re)
        }
        FidelityMode::CliffordEnumeration => {
            let group = crate::ensembles::clifford_group_cached(n)?;
            let mut x = DMatrix::<f64>::zeros(d, d);
            for u in group {
                let pa = outcome_probabilities(&u.apply(a)?).probs;
                let pb = outcome_probabilities(&u.apply(b)?).probs;
                for s in 0..d {
                    for t in 0..d {
                        x[(s, t)] += pa[s] * pb[t];
                    }
                }
            }
            x / group.len() as f64
        }
        FidelityMode::MonteCarlo { samples, seed } => {
            if *samples == 0 {
                return Err(Error::ZeroSamples);
            }
            let mut x = DMatrix::<f64>::zeros(d, d);
            for k in 0..*samples {
                let mut rng = ChaCha8Rng::seed_from_u64(child_seed(*seed, k as u64));
                let u = sample_haar(n, &mut rng)?;
                let pa = outcome_probabilities(&u.apply(a)?).probs;
                let pb = outcome_probabilities(&u.apply(b)?).probs;
                for s in 0..d {
                    for t in 0..d {
                        x[(s, t)] += pa[s] * pb[t];
                    }
                }
            }
            x / *samples as f64
        }
    };
    let diag: f64 = (0..d).map(|s| x[(s, s)]).sum();
    let total: f64 = x.iter().sum();
    Ok(d as f64 * diag - (total - diag))
}
