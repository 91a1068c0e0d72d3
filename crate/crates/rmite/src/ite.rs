//! Imaginary-time evolution loops over the variational parameters: the
//! deterministic exact-metric method and its randomized-estimator variant,
//! with a state-preparation cost model and descent diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, ParameterizedCircuit};
use crate::error::{Error, Result};
use crate::exec::child_seed;
use crate::fisher::{
    cfim, estimate_fisher, exact_qfim, EstimatorConfig, EstimatorKind, FisherMatrix,
};
use crate::hamiltonian::{energy_gradient, PauliSumHamiltonian};
use crate::state::StateVector;

pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
const SVD_RELATIVE_CUTOFF: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Euler step δt.
    pub dt: f64,
    pub steps: usize,
    /// Tikhonov shift λ added to the metric before solving.
    pub regularization: f64,
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            regularization: DEFAULT_REGULARIZATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt < 0.0 {
            return Err(Error::InvalidConfig("dt must be finite and >= 0".into()));
        }
        if !self.regularization.is_finite() || self.regularization < 0.0 {
            return Err(Error::InvalidConfig(
                "regularization must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// One logged iteration. `state_preps` is cumulative under the cost model
/// below; energy logging itself is not billed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub tau: f64,
    pub energy: f64,
    pub theta: Vec<f64>,
    pub update_norm: f64,
    /// Minimal eigenvalue of the regularized metric used for this step.
    pub min_eig: f64,
    pub state_preps: u64,
    /// g·θ̇ for the step taken; non-positive updates decrease energy to
    /// first order.
    pub directional_derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub records: Vec<TraceRecord>,
    pub final_theta: Vec<f64>,
    pub final_energy: f64,
    pub total_state_preps: u64,
}

impl EvolutionTrace {
    /// CSV with the fixed schema `iter,tau,energy,update_norm,min_eig,state_preps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,tau,energy,update_norm,min_eig,state_preps\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.tau, r.energy, r.update_norm, r.min_eig, r.state_preps
            ));
        }
        out
    }
}

/// Number of violations of the first-order descent property g·θ̇ ≤ tol.
pub fn descent_violations(trace: &EvolutionTrace, tol: f64) -> usize {
    trace
        .records
        .iter()
        .filter(|r| r.directional_derivative > tol)
        .count()
}

/// Upper bound on the relative first-order energy-decrease error incurred by
/// replacing the exact metric with an estimate: λ_max(exact)/λ_min(estimate) − 1.
pub fn relative_error_bound(exact: &FisherMatrix, estimate: &FisherMatrix) -> f64 {
    exact.max_eigenvalue() / estimate.min_eigenvalue() - 1.0
}

/// Solves (F + λI) θ̇ = −2g. Cholesky when the shifted metric is positive
/// definite, otherwise the minimum-norm SVD pseudo-inverse solution.
pub fn solve_update(metric: &FisherMatrix, grad: &[f64], regularization: f64) -> Result<DVector<f64>> {
    let m = metric.dim();
    if grad.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: grad.len(),
        });
    }
    let a = metric.entries() + DMatrix::<f64>::identity(m, m) * regularization;
    let rhs = DVector::from_iterator(m, grad.iter().map(|g| -2.0 * g));
    if let Some(chol) = a.clone().cholesky() {
        return Ok(chol.solve(&rhs));
    }
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    svd.solve(&rhs, SVD_RELATIVE_CUTOFF * max_sv)
        .map_err(|_| Error::SingularMatrix {
            min_eig: metric.min_eigenvalue(),
        })
}

/// Which metric drives the evolution; determines the state-preparation bill.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrepCostModel {
    /// Gradient 2m, metric 2m² (shift-rule measurement of every entry).
    ExactMetric,
    /// Gradient 2m, plus 2m shifted preparations per rotator.
    TwoDesign { k: usize },
    /// Gradient 2m, plus 2m shifted and 1 unshifted preparation per rotator.
    AverageCfim { k: usize },
}

/// State preparations billed for one iteration with m parameters.
pub fn preps_per_iteration(model: PrepCostModel, m: usize) -> u64 {
    let m = m as u64;
    match model {
        PrepCostModel::ExactMetric => 2 * m + 2 * m * m,
        PrepCostModel::TwoDesign { k } => 2 * m + 2 * m * k as u64,
        PrepCostModel::AverageCfim { k } => 2 * m + (2 * m + 1) * k as u64,
    }
}

pub fn total_preps(model: PrepCostModel, m: usize, iterations: usize) -> u64 {
    preps_per_iteration(model, m) * iterations as u64
}

fn run_loop<F>(
    circuit: &ParameterizedCircuit,
    h: &PauliSumHamiltonian,
    initial: &StateVector,
    theta0: &[f64],
    config: &EvolutionConfig,
    preps_per_iter: u64,
    mut metric_at: F,
) -> Result<EvolutionTrace>
where
    F: FnMut(usize, &[f64]) -> Result<FisherMatrix>,
{
    config.validate()?;
    if theta0.len() != circuit.n_params() {
        return Err(Error::ParamCountMismatch {
            expected: circuit.n_params(),
            got: theta0.len(),
        });
    }
    let mut theta = theta0.to_vec();
    let mut records = Vec::with_capacity(config.steps);
    let mut preps: u64 = 0;
    for iter in 0..config.steps {
        let energy = h.expectation(&prepare_state(circuit, &theta, initial)?)?;
        let grad = energy_gradient(circuit, &theta, h, initial)?;
        let metric = metric_at(iter, &theta)?;
        let shifted_min_eig = metric.min_eigenvalue() + config.regularization;
        let update = solve_update(&metric, &grad, config.regularization)?;
        let directional: f64 = grad.iter().zip(update.iter()).map(|(g, u)| g * u).sum();
        preps += preps_per_iter;
        records.push(TraceRecord {
            iter,
            tau: iter as f64 * config.dt,
            energy,
            theta: theta.clone(),
            update_norm: update.norm(),
            min_eig: shifted_min_eig,
            state_preps: preps,
            directional_derivative: directional,
        });
        for (t, u) in theta.iter_mut().zip(update.iter()) {
            *t += config.dt * u;
        }
    }
    let final_energy = h.expectation(&prepare_state(circuit, &theta, initial)?)?;
    Ok(EvolutionTrace {
        records,
        final_theta: theta,
        final_energy,
        total_state_preps: preps,
    })
}

/// Exact-metric imaginary-time evolution: F_Q θ̇ = −2∇E, explicit Euler.
pub fn varqite_run(
    circuit: &ParameterizedCircuit,
    h: &PauliSumHamiltonian,
    initial: &StateVector,
    theta0: &[f64],
    config: &EvolutionConfig,
) -> Result<EvolutionTrace> {
    let per_iter = preps_per_iteration(PrepCostModel::ExactMetric, circuit.n_params());
    run_loop(circuit, h, initial, theta0, config, per_iter, |_, theta| {
        exact_qfim(circuit, theta, initial)
    })
}

/// Randomized-metric evolution: each iteration draws fresh rotators (child
/// seed per iteration) and replaces F_Q with the configured estimate.
pub fn rmite_run(
    circuit: &ParameterizedCircuit,
    h: &PauliSumHamiltonian,
    initial: &StateVector,
    theta0: &[f64],
    config: &EvolutionConfig,
    estimator: &EstimatorConfig,
    seed: u64,
) -> Result<EvolutionTrace> {
    let model = match estimator.kind {
        EstimatorKind::TwoDesign => PrepCostModel::TwoDesign {
            k: estimator.samples,
        },
        EstimatorKind::AverageCfim => PrepCostModel::AverageCfim {
            k: estimator.samples,
        },
    };
    let per_iter = preps_per_iteration(model, circuit.n_params());
    run_loop(circuit, h, initial, theta0, config, per_iter, |iter, theta| {
        estimate_fisher(circuit, theta, initial, estimator, child_seed(seed, iter as u64))
    })
}

/// Evolution driven by the classical Fisher matrix of one fixed rotator;
/// exposed for diagnostics and comparisons.
pub fn cfim_run(
    circuit: &ParameterizedCircuit,
    h: &PauliSumHamiltonian,
    initial: &StateVector,
    theta0: &[f64],
    config: &EvolutionConfig,
    rotator: &crate::ensembles::SampledRotator,
    floor: f64,
) -> Result<EvolutionTrace> {
    let per_iter =
        preps_per_iteration(PrepCostModel::AverageCfim { k: 1 }, circuit.n_params());
    run_loop(circuit, h, initial, theta0, config, per_iter, |_, theta| {
        cfim(circuit, theta, rotator, initial, floor)
    })
}
