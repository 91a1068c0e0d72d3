//! Config-driven experiment runner: evolution traces, method comparisons,
//! and estimator accuracy sweeps, with reproducible on-disk artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, GateListDoc, ParameterizedCircuit};
use crate::ensembles::{EnsembleKind, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::exec::{child_seed, ExecMode};
use crate::fisher::{
    estimate_fisher, estimator_error, exact_qfim, EstimatorConfig, EstimatorKind,
    DEFAULT_PROBABILITY_FLOOR,
};
use crate::hamiltonian::{
    exact_ground_state, heisenberg_chain, load_hamiltonian, single_z, transverse_field_ising,
    HamiltonianDoc, PauliSumHamiltonian,
};
use crate::ite::{rmite_run, varqite_run, EvolutionConfig, EvolutionTrace, DEFAULT_REGULARIZATION};
use crate::state::StateVector;

/// Environment variable naming the default root for experiment outputs.
pub const OUTPUT_ROOT_ENV: &str = "RMITE_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// One evolution run producing a trace.
    Evolution,
    /// Estimator error versus sample count at a fixed parameter point.
    EstimatorAccuracy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub hamiltonian: HamiltonianSection,
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub theta0: Theta0Spec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorSection>,
    /// Labeled methods for `compare`; ignored by `run`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodSection>>,
    /// Sample counts swept by the estimator-accuracy experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
}

/// Either a builtin model, an inline term list, or a reference to a
/// Hamiltonian document on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct HamiltonianSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<HamiltonianDoc>,
}

impl HamiltonianSection {
    pub fn resolve(&self, base_dir: &Path) -> Result<PauliSumHamiltonian> {
        let set = [
            self.builtin.is_some(),
            self.file.is_some(),
            self.inline.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if set != 1 {
            return Err(Error::InvalidConfig(
                "hamiltonian: exactly one of `builtin`, `file`, `inline` must be set".into(),
            ));
        }
        if let Some(file) = &self.file {
            let path = resolve_path(base_dir, file);
            let json = fs::read_to_string(&path)?;
            return load_hamiltonian(&json);
        }
        if let Some(doc) = &self.inline {
            return load_hamiltonian(&serde_json::to_string(doc).map_err(|e| Error::Parse(e.to_string()))?);
        }
        let name = self.builtin.as_deref().unwrap();
        let n = self.n_qubits.ok_or_else(|| {
            Error::InvalidConfig("hamiltonian: builtin models require `n-qubits`".into())
        })?;
        match name {
            "tfim" => Ok(transverse_field_ising(
                n,
                self.coupling.unwrap_or(1.0),
                self.field.unwrap_or(1.0),
            )),
            "heisenberg" => Ok(heisenberg_chain(n, self.coupling.unwrap_or(1.0))),
            "z" => {
                if n != 1 {
                    return Err(Error::InvalidConfig(
                        "hamiltonian: builtin `z` is single-qubit".into(),
                    ));
                }
                Ok(single_z())
            }
            other => Err(Error::InvalidConfig(format!(
                "hamiltonian: unknown builtin `{other}` (expected tfim, heisenberg, or z)"
            ))),
        }
    }
}

/// An ansatz family inline or a gate-list document on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct AnsatzSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, flatten, skip_serializing_if = "Option::is_none")]
    pub spec: Option<AnsatzSpec>,
}

impl AnsatzSection {
    pub fn resolve(&self, base_dir: &Path) -> Result<ParameterizedCircuit> {
        match (&self.file, &self.spec) {
            (Some(file), None) => {
                let path = resolve_path(base_dir, file);
                let json = fs::read_to_string(&path)?;
                GateListDoc::parse(&json)?.build()
            }
            (None, Some(spec)) => spec.build(),
            _ => Err(Error::InvalidConfig(
                "ansatz: exactly one of `file` or an inline spec must be set".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theta0Spec {
    Zeros,
    /// Independent uniform draws from [−scale, scale), seeded from the
    /// experiment seed.
    RandomUniform { scale: f64 },
    Explicit(Vec<f64>),
}

impl Default for Theta0Spec {
    fn default() -> Self {
        Theta0Spec::Zeros
    }
}

impl Theta0Spec {
    pub fn resolve(&self, n_params: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            Theta0Spec::Zeros => Ok(vec![0.0; n_params]),
            Theta0Spec::RandomUniform { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0x7e7a));
                Ok((0..n_params)
                    .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * scale)
                    .collect())
            }
            Theta0Spec::Explicit(v) => {
                if v.len() != n_params {
                    return Err(Error::InvalidConfig(format!(
                        "theta0: got {} values, ansatz has {} parameters",
                        v.len(),
                        n_params
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Varqite,
    Rmite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvolutionSection {
    pub method: MethodKind,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
}

impl EvolutionSection {
    pub fn to_config(&self) -> Result<EvolutionConfig> {
        let steps = match (self.steps, self.total_time) {
            (Some(s), None) => s,
            (None, Some(t)) => {
                if self.dt <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "evolution: `total-time` requires dt > 0".into(),
                    ));
                }
                (t / self.dt).round() as usize
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "evolution: exactly one of `steps` or `total-time` must be set".into(),
                ))
            }
        };
        let config = EvolutionConfig {
            dt: self.dt,
            steps,
            regularization: self.regularization.unwrap_or(DEFAULT_REGULARIZATION),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EstimatorSection {
    pub kind: EstimatorKind,
    pub ensemble: EnsembleKind,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability_floor: Option<f64>,
    #[serde(default)]
    pub rescale_average_cfim: bool,
}

impl EstimatorSection {
    pub fn to_config(&self, n_qubits: usize) -> Result<EstimatorConfig> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("estimator: `samples` must be >= 1".into()));
        }
        Ok(EstimatorConfig {
            kind: self.kind,
            ensemble: UnitaryEnsemble {
                kind: self.ensemble.clone(),
                n_qubits,
            },
            samples: self.samples,
            shots: self.shots,
            probability_floor: self.probability_floor.unwrap_or(DEFAULT_PROBABILITY_FLOOR),
            rescale_average_cfim: self.rescale_average_cfim,
            exec: ExecMode::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MethodSection {
    pub name: String,
    pub method: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorSection>,
}

/// Parses a config document; errors name the offending field.
pub fn parse_experiment_config(json: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(json).map_err(|e| Error::InvalidConfig(e.to_string()))
}

pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let json = fs::read_to_string(path)?;
    parse_experiment_config(&json)
}

/// Output directory resolution: CLI flag, then the config's `output-dir`,
/// then `$RMITE_OUTPUT_ROOT/<name>`, then `./runs/<name>`.
pub fn resolve_output_dir(config: &ExperimentConfig, cli_out: Option<&Path>) -> PathBuf {
    if let Some(out) = cli_out {
        return out.to_path_buf();
    }
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    let root = std::env::var(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("runs"));
    let name = config
        .name
        .clone()
        .unwrap_or_else(|| format!("seed-{}", config.seed));
    root.join(name)
}

fn resolve_path(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub n_qubits: usize,
    pub n_params: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_state_preps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_errors_by_k: Option<Vec<(usize, f64)>>,
    pub files: Vec<String>,
}

struct ResolvedProblem {
    h: PauliSumHamiltonian,
    circuit: ParameterizedCircuit,
    theta0: Vec<f64>,
    initial: StateVector,
}

fn resolve_problem(config: &ExperimentConfig, base_dir: &Path) -> Result<ResolvedProblem> {
    let h = config.hamiltonian.resolve(base_dir)?;
    let circuit = config.ansatz.resolve(base_dir)?;
    if circuit.n_qubits() != h.n_qubits() {
        return Err(Error::InvalidConfig(format!(
            "ansatz acts on {} qubits but hamiltonian has {}",
            circuit.n_qubits(),
            h.n_qubits()
        )));
    }
    let theta0 = config.theta0.resolve(circuit.n_params(), config.seed)?;
    let initial = StateVector::zero(circuit.n_qubits());
    Ok(ResolvedProblem {
        h,
        circuit,
        theta0,
        initial,
    })
}

fn run_method(
    problem: &ResolvedProblem,
    evolution: &EvolutionConfig,
    method: MethodKind,
    estimator: Option<&EstimatorSection>,
    seed: u64,
) -> Result<EvolutionTrace> {
    match method {
        MethodKind::Varqite => varqite_run(
            &problem.circuit,
            &problem.h,
            &problem.initial,
            &problem.theta0,
            evolution,
        ),
        MethodKind::Rmite => {
            let section = estimator.ok_or_else(|| {
                Error::InvalidConfig("rmite method requires an `estimator` section".into())
            })?;
            let est = section.to_config(problem.circuit.n_qubits())?;
            rmite_run(
                &problem.circuit,
                &problem.h,
                &problem.initial,
                &problem.theta0,
                evolution,
                &est,
                seed,
            )
        }
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str, files: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    files.push(name.to_string());
    Ok(())
}

fn write_manifest(dir: &Path, config: &ExperimentConfig, files: &mut Vec<String>) -> Result<()> {
    let manifest = serde_json::json!({
        "config": config,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_artifact(
        dir,
        "manifest.json",
        &format!("{:#}\n", manifest),
        files,
    )
}

/// Runs one experiment, writing `trace.csv` (or `accuracy.csv`),
/// `summary.json`, and `manifest.json` into `out_dir`. Reruns with the same
/// config produce byte-identical files.
pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let problem = resolve_problem(config, base_dir)?;
    let mut files = Vec::new();
    let mut summary = RunSummary {
        experiment: config.experiment,
        seed: config.seed,
        n_qubits: problem.circuit.n_qubits(),
        n_params: problem.circuit.n_params(),
        final_energy: None,
        ground_energy: None,
        energy_error: None,
        total_state_preps: None,
        median_errors_by_k: None,
        files: Vec::new(),
    };
    match config.experiment {
        ExperimentKind::Evolution => {
            let section = config.evolution.as_ref().ok_or_else(|| {
                Error::InvalidConfig("evolution experiments require an `evolution` section".into())
            })?;
            let evolution = section.to_config()?;
            let trace = run_method(
                &problem,
                &evolution,
                section.method,
                config.estimator.as_ref(),
                config.seed,
            )?;
            let (ground_energy, _) = exact_ground_state(&problem.h)?;
            write_artifact(out_dir, "trace.csv", &trace.to_csv(), &mut files)?;
            summary.final_energy = Some(trace.final_energy);
            summary.ground_energy = Some(ground_energy);
            summary.energy_error = Some((trace.final_energy - ground_energy).abs());
            summary.total_state_preps = Some(trace.total_state_preps);
        }
        ExperimentKind::EstimatorAccuracy => {
            let section = config.estimator.as_ref().ok_or_else(|| {
                Error::InvalidConfig(
                    "estimator-accuracy experiments require an `estimator` section".into(),
                )
            })?;
            let k_values = config.k_values.clone().unwrap_or_else(|| vec![10, 100, 1000]);
            let repeats = config.repeats.unwrap_or(20);
            if k_values.is_empty() || repeats == 0 {
                return Err(Error::InvalidConfig(
                    "estimator-accuracy requires non-empty `k-values` and `repeats` >= 1".into(),
                ));
            }
            let exact = exact_qfim(&problem.circuit, &problem.theta0, &problem.initial)?;
            let mut csv = String::from("k,repeat,error\n");
            let mut medians = Vec::new();
            for (ki, &k) in k_values.iter().enumerate() {
                let mut errors = Vec::with_capacity(repeats);
                for r in 0..repeats {
                    let mut section = section.clone();
                    section.samples = k;
                    let est_config = section.to_config(problem.circuit.n_qubits())?;
                    let sample_seed = child_seed(config.seed, (ki * repeats + r) as u64);
                    let est = estimate_fisher(
                        &problem.circuit,
                        &problem.theta0,
                        &problem.initial,
                        &est_config,
                        sample_seed,
                    )?;
                    let err = estimator_error(&est, &exact);
                    csv.push_str(&format!("{},{},{}\n", k, r, err));
                    errors.push(err);
                }
                errors.sort_by(|a, b| a.total_cmp(b));
                let median = if repeats % 2 == 1 {
                    errors[repeats / 2]
                } else {
                    0.5 * (errors[repeats / 2 - 1] + errors[repeats / 2])
                };
                medians.push((k, median));
            }
            write_artifact(out_dir, "accuracy.csv", &csv, &mut files)?;
            summary.median_errors_by_k = Some(medians);
        }
    }
    write_manifest(out_dir, config, &mut files)?;
    summary.files = files.clone();
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(out_dir.join("summary.json"), format!("{json}\n"))?;
    summary.files.push("summary.json".to_string());
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub seed: u64,
    pub ground_energy: f64,
    pub methods: Vec<CompareMethodSummary>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareMethodSummary {
    pub name: String,
    pub final_energy: f64,
    pub energy_error: f64,
    pub total_state_preps: u64,
}

/// Runs every labeled method on the shared problem and writes per-method
/// traces plus an aligned energy-versus-preparations table.
pub fn compare_methods(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<CompareSummary> {
    let methods = config
        .methods
        .as_ref()
        .filter(|m| m.len() >= 2)
        .ok_or_else(|| {
            Error::InvalidConfig("compare requires a `methods` list with at least 2 entries".into())
        })?;
    let mut seen = std::collections::HashSet::new();
    for m in methods {
        if !seen.insert(&m.name) {
            return Err(Error::InvalidConfig(format!(
                "compare: duplicate method name `{}`",
                m.name
            )));
        }
    }
    let section = config.evolution.as_ref().ok_or_else(|| {
        Error::InvalidConfig("compare requires an `evolution` section".into())
    })?;
    let evolution = section.to_config()?;
    fs::create_dir_all(out_dir)?;
    let problem = resolve_problem(config, base_dir)?;
    let (ground_energy, _) = exact_ground_state(&problem.h)?;
    let mut files = Vec::new();
    let mut traces = Vec::new();
    for m in methods {
        let trace = run_method(
            &problem,
            &evolution,
            m.method,
            m.estimator.as_ref().or(config.estimator.as_ref()),
            config.seed,
        )?;
        write_artifact(
            out_dir,
            &format!("trace_{}.csv", m.name),
            &trace.to_csv(),
            &mut files,
        )?;
        traces.push(trace);
    }
    let mut csv = String::from("iter,tau");
    for m in methods {
        csv.push_str(&format!(",energy_{0},preps_{0}", m.name));
    }
    csv.push('\n');
    for i in 0..evolution.steps {
        csv.push_str(&format!("{},{}", i, i as f64 * evolution.dt));
        for t in &traces {
            let r = &t.records[i];
            csv.push_str(&format!(",{},{}", r.energy, r.state_preps));
        }
        csv.push('\n');
    }
    write_artifact(out_dir, "compare.csv", &csv, &mut files)?;
    write_manifest(out_dir, config, &mut files)?;
    let mut summary = CompareSummary {
        seed: config.seed,
        ground_energy,
        methods: methods
            .iter()
            .zip(&traces)
            .map(|(m, t)| CompareMethodSummary {
                name: m.name.clone(),
                final_energy: t.final_energy,
                energy_error: (t.final_energy - ground_energy).abs(),
                total_state_preps: t.total_state_preps,
            })
            .collect(),
        files: files.clone(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(out_dir.join("summary.json"), format!("{json}\n"))?;
    summary.files.push("summary.json".to_string());
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evolution_config_json() -> String {
        r#"{
            "experiment": "evolution",
            "seed": 11,
            "hamiltonian": {"builtin": "tfim", "n-qubits": 2},
            "ansatz": {"hardware-efficient": {"n-qubits": 2, "layers": 1}},
            "theta0": {"random-uniform": {"scale": 0.1}},
            "evolution": {"method": "varqite", "dt": 0.05, "steps": 30}
        }"#
        .to_string()
    }

    #[test]
    fn parse_and_run_evolution() {
        let config = parse_experiment_config(&evolution_config_json()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&config, Path::new("."), dir.path()).unwrap();
        assert_eq!(summary.n_params, 4);
        assert!(summary.energy_error.unwrap() < summary.ground_energy.unwrap().abs());
        for f in ["trace.csv", "summary.json", "manifest.json"] {
            assert!(dir.path().join(f).exists(), "missing {f}");
        }
        let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        assert!(csv.starts_with("iter,tau,energy,update_norm,min_eig,state_preps\n"));
        assert_eq!(csv.lines().count(), 31);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let config = parse_experiment_config(&evolution_config_json()).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run_experiment(&config, Path::new("."), d1.path()).unwrap();
        run_experiment(&config, Path::new("."), d2.path()).unwrap();
        for f in ["trace.csv", "summary.json", "manifest.json"] {
            let a = fs::read(d1.path().join(f)).unwrap();
            let b = fs::read(d2.path().join(f)).unwrap();
            assert_eq!(a, b, "{f} differs between reruns");
        }
    }

    #[test]
    fn unknown_field_is_named_in_error() {
        let err = parse_experiment_config(
            r#"{"experiment": "evolution", "seed": 1, "bogus": true,
                "hamiltonian": {"builtin": "z", "n-qubits": 1},
                "ansatz": {"hardware-efficient": {"n-qubits": 1, "layers": 1}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn missing_evolution_section_rejected() {
        let config = parse_experiment_config(
            r#"{"experiment": "evolution", "seed": 1,
                "hamiltonian": {"builtin": "z", "n-qubits": 1},
                "ansatz": {"hardware-efficient": {"n-qubits": 1, "layers": 1}}}"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_experiment(&config, Path::new("."), dir.path()).unwrap_err();
        assert!(err.to_string().contains("evolution"));
    }

    #[test]
    fn hamiltonian_file_loading() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("h.json"),
            r#"{"n_qubits": 1, "terms": [{"coeff": 1.0, "pauli": "Z"}]}"#,
        )
        .unwrap();
        let section = HamiltonianSection {
            file: Some(PathBuf::from("h.json")),
            ..Default::default()
        };
        let h = section.resolve(dir.path()).unwrap();
        assert_eq!(h.n_qubits(), 1);
        let missing = HamiltonianSection {
            file: Some(PathBuf::from("absent.json")),
            ..Default::default()
        };
        assert!(matches!(missing.resolve(dir.path()), Err(Error::Io(_))));
    }

    #[test]
    fn ansatz_file_loading() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("circ.json"),
            r#"{"n_qubits": 1, "gates": [{"kind": "ry", "targets": [0], "param": 0}]}"#,
        )
        .unwrap();
        let section = AnsatzSection {
            file: Some(PathBuf::from("circ.json")),
            spec: None,
        };
        let c = section.resolve(dir.path()).unwrap();
        assert_eq!(c.n_params(), 1);
    }

    #[test]
    fn estimator_accuracy_experiment() {
        let config = parse_experiment_config(
            r#"{
                "experiment": "estimator-accuracy",
                "seed": 5,
                "hamiltonian": {"builtin": "z", "n-qubits": 1},
                "ansatz": {"hardware-efficient": {"n-qubits": 1, "layers": 1}},
                "theta0": {"random-uniform": {"scale": 1.0}},
                "estimator": {"kind": "two-design", "ensemble": "haar", "samples": 1},
                "k-values": [5, 50],
                "repeats": 4
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&config, Path::new("."), dir.path()).unwrap();
        let medians = summary.median_errors_by_k.unwrap();
        assert_eq!(medians.len(), 2);
        assert!(medians[1].1 < medians[0].1, "error should shrink with K");
        assert!(dir.path().join("accuracy.csv").exists());
    }

    #[test]
    fn compare_two_methods() {
        let config = parse_experiment_config(
            r#"{
                "experiment": "evolution",
                "seed": 8,
                "hamiltonian": {"builtin": "tfim", "n-qubits": 2},
                "ansatz": {"hardware-efficient": {"n-qubits": 2, "layers": 1}},
                "theta0": {"random-uniform": {"scale": 0.1}},
                "evolution": {"method": "varqite", "dt": 0.05, "steps": 20},
                "estimator": {"kind": "two-design", "ensemble": "haar", "samples": 2},
                "methods": [
                    {"name": "exact", "method": "varqite"},
                    {"name": "randomized", "method": "rmite"}
                ]
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = compare_methods(&config, Path::new("."), dir.path()).unwrap();
        assert_eq!(summary.methods.len(), 2);
        assert!(summary.methods[1].total_state_preps < summary.methods[0].total_state_preps);
        let csv = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
        assert!(csv.starts_with("iter,tau,energy_exact,preps_exact,energy_randomized,preps_randomized\n"));
        assert_eq!(csv.lines().count(), 21);
        assert!(dir.path().join("trace_exact.csv").exists());
        assert!(dir.path().join("trace_randomized.csv").exists());
    }

    #[test]
    fn compare_requires_two_methods() {
        let mut config = parse_experiment_config(&evolution_config_json()).unwrap();
        config.methods = Some(vec![MethodSection {
            name: "only".into(),
            method: MethodKind::Varqite,
            estimator: None,
        }]);
        let dir = tempfile::tempdir().unwrap();
        assert!(compare_methods(&config, Path::new("."), dir.path()).is_err());
    }

    #[test]
    fn output_dir_resolution_order() {
        let mut config = parse_experiment_config(&evolution_config_json()).unwrap();
        let cli = PathBuf::from("/tmp/cli-out");
        assert_eq!(resolve_output_dir(&config, Some(&cli)), cli);
        config.output_dir = Some(PathBuf::from("/tmp/from-config"));
        assert_eq!(
            resolve_output_dir(&config, None),
            PathBuf::from("/tmp/from-config")
        );
        config.output_dir = None;
        config.name = Some("demo".into());
        let fallback = resolve_output_dir(&config, None);
        assert!(fallback.ends_with("demo"));
    }
}
