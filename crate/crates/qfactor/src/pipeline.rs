//! End-to-end wiring of the factorization protocol plus the report
//! rendering used by the command-line front end.
//!
//! Every report embeds the full run configuration and the library
//! version; with a fixed configuration and seed the rendered output is
//! byte-identical across runs.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::bitpoly::VarId;
use crate::circuit::{
    compile_diffuser, compile_phase_oracle, export_qasm, CircuitError, Gate, GateCircuit,
};
use crate::grover::{self, GroverError, GroverPlan, OracleMode, StateVector};
use crate::hamiltonian::{DiagonalHamiltonian, HamiltonianError};
use crate::reduction::{
    build_multiplication_table, decode_factors, hamiltonian_polynomial,
    minimize, EquationSystem, FactorTemplate, HamiltonianMode, HamiltonianPoly, ReducedSystem,
    ReductionError,
};
use crate::tomography::{
    fidelity, reconstruct, simulate_settings, stokes, theoretical_dm, DensityMatrix,
    TomographyError,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// CLI exit code: 1 usage, 2 contradiction/unsatisfiable,
    /// 3 verification failure, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 1,
            PipelineError::Unsatisfiable(_) => 2,
            PipelineError::Verification(_) => 3,
            PipelineError::Io(_) => 4,
        }
    }
}

impl From<ReductionError> for PipelineError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::CompositeNotOdd
            | ReductionError::AlphaTooSmall
            | ReductionError::BitLengthOutOfRange(_)
            | ReductionError::TooManyVariables(_) => PipelineError::Usage(e.to_string()),
            ReductionError::NoBitLength | ReductionError::Contradiction(_) => {
                PipelineError::Unsatisfiable(e.to_string())
            }
            ReductionError::ProductMismatch { .. }
            | ReductionError::MissingVariable(_)
            | ReductionError::Poly(_) => PipelineError::Verification(e.to_string()),
        }
    }
}

impl From<HamiltonianError> for PipelineError {
    fn from(e: HamiltonianError) -> Self {
        PipelineError::Verification(e.to_string())
    }
}

impl From<GroverError> for PipelineError {
    fn from(e: GroverError) -> Self {
        match e {
            GroverError::InvalidIterations { .. } | GroverError::MarkedCountOutOfRange { .. } => {
                PipelineError::Usage(e.to_string())
            }
            GroverError::DimensionMismatch { .. } => PipelineError::Verification(e.to_string()),
        }
    }
}

impl From<TomographyError> for PipelineError {
    fn from(e: TomographyError) -> Self {
        PipelineError::Verification(e.to_string())
    }
}

impl From<CircuitError> for PipelineError {
    fn from(e: CircuitError) -> Self {
        PipelineError::Verification(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
    Csv,
}

/// Full run configuration, embedded into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(serialize_with = "serialize_biguint")]
    pub composite: BigUint,
    pub alpha: u32,
    /// Inclusive sweep range; when set, the first α with a consistent
    /// reduction wins and `alpha` is ignored.
    pub alpha_range: Option<(u32, u32)>,
    pub bit_len: Option<u32>,
    pub hamiltonian_mode: HamiltonianMode,
    pub oracle_mode: OracleMode,
    pub iterations: Option<u32>,
    pub shots: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub psd_projection: bool,
}

fn serialize_biguint<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(n)
}

impl RunConfig {
    pub fn new(composite: BigUint, alpha: u32) -> Self {
        RunConfig {
            composite,
            alpha,
            alpha_range: None,
            bit_len: None,
            hamiltonian_mode: HamiltonianMode::Paper,
            oracle_mode: OracleMode::Projector,
            iterations: None,
            shots: 8192,
            seed: 1,
            format: OutputFormat::Json,
            psd_projection: false,
        }
    }
}

/// Output of the reduction stage.
#[derive(Debug)]
pub struct ReduceArtifacts {
    pub template: FactorTemplate,
    pub system: EquationSystem,
    pub reduced: ReducedSystem,
}

fn reduce_with_alpha(config: &RunConfig, alpha: u32) -> Result<ReduceArtifacts, PipelineError> {
    let template = match config.bit_len {
        Some(l) => FactorTemplate::new(config.composite.clone(), alpha, l)?,
        None => FactorTemplate::infer(config.composite.clone(), alpha)?,
    };
    let system = build_multiplication_table(&template);
    let reduced = minimize(&system)?;
    Ok(ReduceArtifacts {
        template,
        system,
        reduced,
    })
}

/// Runs the reduction, sweeping α when a range is configured.
pub fn reduce_pipeline(config: &RunConfig) -> Result<ReduceArtifacts, PipelineError> {
    match config.alpha_range {
        None => reduce_with_alpha(config, config.alpha),
        Some((lo, hi)) => {
            if lo > hi || lo < 2 {
                return Err(PipelineError::Usage(format!(
                    "bad alpha range {lo}..{hi}"
                )));
            }
            let mut last = None;
            for alpha in lo..=hi {
                match reduce_with_alpha(config, alpha) {
                    Ok(a) => return Ok(a),
                    Err(e @ (PipelineError::Unsatisfiable(_) | PipelineError::Usage(_))) => {
                        last = Some(e)
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(last.unwrap_or_else(|| {
                PipelineError::Unsatisfiable("empty alpha range".to_string())
            }))
        }
    }
}

/// Output of the amplification stage.
pub struct FactorArtifacts {
    pub reduce: ReduceArtifacts,
    pub poly: HamiltonianPoly,
    pub hamiltonian: DiagonalHamiltonian,
    pub ground_states: Vec<u64>,
    /// None when amplification is skipped (no free qubits, or every basis
    /// state is already marked).
    pub plan: Option<GroverPlan>,
    pub state: StateVector,
    pub success_probability: f64,
    pub counts: BTreeMap<u64, u64>,
    pub factors: Vec<Vec<BigUint>>,
}

/// Reconstructs a full variable assignment from a ground-state index and
/// decodes it into factor values. Returns None when the eliminated
/// variable's back-substitution leaves the binary domain (a kernel state
/// that does not extend to a solution).
fn decode_ground_state(
    index: u64,
    poly: &HamiltonianPoly,
    art: &ReduceArtifacts,
) -> Result<Option<Vec<BigUint>>, PipelineError> {
    let n = poly.qubit_vars.len();
    let mut assignment: BTreeMap<VarId, u8> = poly
        .qubit_vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), (index >> (n - 1 - i) & 1) as u8))
        .collect();
    if let Some((var, expr)) = &poly.eliminated {
        let value = expr
            .evaluate(&assignment)
            .map_err(|e| PipelineError::Verification(e.to_string()))?;
        let bit = if value == 0u8.into() {
            0
        } else if value == 1u8.into() {
            1
        } else {
            return Ok(None);
        };
        assignment.insert(var.clone(), bit);
    }
    match decode_factors(&assignment, &art.template, &art.reduced) {
        Ok(fs) => Ok(Some(fs)),
        Err(ReductionError::ProductMismatch { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Full protocol: reduce → Hamiltonian → plan → simulate → sample → decode.
pub fn factor_pipeline(config: &RunConfig) -> Result<FactorArtifacts, PipelineError> {
    let reduce = reduce_pipeline(config)?;
    let poly = hamiltonian_polynomial(&reduce.reduced, config.hamiltonian_mode)?;
    let hamiltonian = DiagonalHamiltonian::from_polynomial(&poly.poly, &poly.qubit_vars)?;
    let ground_states = hamiltonian.ground_states();
    let n = hamiltonian.n_qubits();
    let m = ground_states.len() as u64;
    if m == 0 {
        return Err(PipelineError::Verification(
            "Hamiltonian kernel is empty although the reduction was consistent".to_string(),
        ));
    }

    let (plan, state) = if m == hamiltonian.dim() as u64 {
        // Everything is marked (includes the zero-qubit case): the uniform
        // state already solves the instance, amplification is a no-op.
        (None, grover::initial_state(n))
    } else {
        let plan = grover::plan(
            m,
            n,
            config.iterations,
            config.oracle_mode,
            -1, // default matched-phase convention: e^{-iθ}
        )?;
        let state = grover::run(&hamiltonian, &plan)?;
        (Some(plan), state)
    };

    let success_probability = grover::success_probability(&state, &ground_states);
    let counts = if config.shots > 0 {
        grover::sample(&state, config.shots, config.seed)
    } else {
        BTreeMap::new()
    };

    let mut factors = Vec::new();
    for &g in &ground_states {
        if let Some(fs) = decode_ground_state(g, &poly, &reduce)? {
            factors.push(fs);
        }
    }
    if factors.is_empty() {
        return Err(PipelineError::Verification(format!(
            "no kernel state decodes to factors of {}",
            config.composite
        )));
    }
    for fs in &factors {
        let product: BigUint = fs.iter().product();
        if product != config.composite {
            return Err(PipelineError::Verification(format!(
                "decoded product {product} does not equal {}",
                config.composite
            )));
        }
    }

    Ok(FactorArtifacts {
        reduce,
        poly,
        hamiltonian,
        ground_states,
        plan,
        state,
        success_probability,
        counts,
        factors,
    })
}

/// Output of the tomography stage.
pub struct TomographyArtifacts {
    pub factor: FactorArtifacts,
    pub records: Vec<crate::tomography::MeasurementRecord>,
    pub edm: DensityMatrix,
    pub edm_projected: Option<DensityMatrix>,
    pub tdm: DensityMatrix,
    pub fidelity: f64,
}

pub fn tomography_pipeline(config: &RunConfig) -> Result<TomographyArtifacts, PipelineError> {
    let factor = factor_pipeline(config)?;
    let n = factor.hamiltonian.n_qubits();
    let records = simulate_settings(&factor.state, config.shots, config.seed);
    let expectations = stokes(&records)?;
    let edm = reconstruct(&expectations, n)?;
    let edm_projected = config.psd_projection.then(|| edm.psd_projected());
    let tdm = theoretical_dm(&factor.ground_states, n)?;
    let f = fidelity(&tdm, edm_projected.as_ref().unwrap_or(&edm))?;
    Ok(TomographyArtifacts {
        factor,
        records,
        edm,
        edm_projected,
        tdm,
        fidelity: f,
    })
}

/// Initialization + j iterations (oracle, diffuser) as one gate circuit,
/// using the mode-appropriate oracle compilation.
pub fn full_circuit(art: &FactorArtifacts) -> Result<GateCircuit, PipelineError> {
    let n = art.hamiltonian.n_qubits();
    let mut circuit = GateCircuit::new(n);
    for q in 0..n {
        circuit.push(Gate::Hadamard { target: q });
    }
    if let Some(plan) = &art.plan {
        let oracle = match plan.oracle_mode {
            OracleMode::Literal => compile_phase_oracle(&art.hamiltonian, plan.theta),
            OracleMode::Projector => {
                // e^{i·sign·θ·Π_kernel} compiled as the literal exponential
                // of the kernel indicator with angle -sign·θ.
                let indicator: Vec<num_bigint::BigInt> = (0..art.hamiltonian.dim())
                    .map(|x| {
                        if art.ground_states.contains(&(x as u64)) {
                            1.into()
                        } else {
                            0.into()
                        }
                    })
                    .collect();
                let ind = DiagonalHamiltonian::new(n, indicator)?;
                compile_phase_oracle(&ind, -(plan.diffuser_sign as f64) * plan.theta)
            }
        };
        let diffuser = compile_diffuser(n, plan.theta, plan.diffuser_sign);
        for _ in 0..plan.iterations {
            circuit.global_phase += oracle.global_phase;
            for g in &oracle.gates {
                circuit.push(g.clone());
            }
            for g in &diffuser.gates {
                circuit.push(g.clone());
            }
        }
    }
    Ok(circuit)
}

fn bitstring(index: u64, n: usize) -> String {
    (0..n)
        .map(|q| if index >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn reduced_json(art: &ReduceArtifacts) -> serde_json::Value {
    json!({
        "bit_len": art.template.bit_len,
        "alpha": art.template.alpha,
        "equations": art.reduced.equations,
        "equations_display": art.reduced.equations.iter().map(|e| format!("{e} = 0")).collect::<Vec<_>>(),
        "ordering": art.reduced.ordering.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "fixed": art.reduced.fixed.iter().map(|(v, b)| (v.to_string(), *b)).collect::<BTreeMap<_, _>>(),
        "deductions": art.reduced.deductions,
    })
}

/// `reduce` command: raw system, deduction log, reduced system.
pub fn cmd_reduce(config: &RunConfig) -> Result<String, PipelineError> {
    let art = reduce_pipeline(config)?;
    match config.format {
        OutputFormat::Json => {
            let report = json!({
                "version": VERSION,
                "command": "reduce",
                "config": config,
                "raw_system": {
                    "columns": art.system.columns,
                    "columns_display": art.system.columns.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                },
                "reduced": reduced_json(&art),
            });
            Ok(format!("{:#}", report))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "reduce {} (alpha = {}, L = {})\n",
                config.composite, art.template.alpha, art.template.bit_len
            ));
            out.push_str(&format!(
                "raw system: {} column equations\n",
                art.system.columns.len()
            ));
            for d in &art.reduced.deductions {
                out.push_str(&format!("  [{}] {} = {}\n", d.rule, d.var, d.value));
            }
            out.push_str("reduced system:\n");
            for e in &art.reduced.equations {
                out.push_str(&format!("  {e} = 0\n"));
            }
            out.push_str(&format!(
                "free variables: {}\n",
                art.reduced
                    .ordering
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            Ok(out)
        }
        OutputFormat::Csv => {
            let mut out = String::from("rule,var,value\n");
            for d in &art.reduced.deductions {
                out.push_str(&format!("{},{},{}\n", d.rule, d.var, d.value));
            }
            Ok(out)
        }
    }
}

fn plan_json(plan: &Option<GroverPlan>) -> serde_json::Value {
    match plan {
        Some(p) => json!({
            "n_qubits": p.n_qubits,
            "space_size": p.space_size,
            "marked_count": p.marked_count,
            "phi": p.phi,
            "theta": p.theta,
            "iterations": p.iterations,
            "oracle_mode": p.oracle_mode,
            "diffuser_sign": p.diffuser_sign,
        }),
        None => json!(null),
    }
}

/// `factor` command: plan, outcomes, decoded factors, success probability.
pub fn cmd_factor(config: &RunConfig) -> Result<String, PipelineError> {
    let art = factor_pipeline(config)?;
    let n = art.hamiltonian.n_qubits();
    let factors_json: Vec<Vec<String>> = art
        .factors
        .iter()
        .map(|fs| fs.iter().map(|f| f.to_string()).collect())
        .collect();
    match config.format {
        OutputFormat::Json => {
            let outcomes: Vec<serde_json::Value> = art
                .counts
                .iter()
                .map(|(idx, count)| {
                    json!({
                        "index": idx,
                        "state": bitstring(*idx, n),
                        "count": count,
                    })
                })
                .collect();
            let report = json!({
                "version": VERSION,
                "command": "factor",
                "config": config,
                "reduced": reduced_json(&art.reduce),
                "hamiltonian": {
                    "mode_used": art.poly.mode_used,
                    "fallback_notice": art.poly.fallback_notice,
                    "qubit_vars": art.poly.qubit_vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "diag": art.hamiltonian.diag().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "ground_states": art.ground_states,
                },
                "plan": plan_json(&art.plan),
                "success_probability": art.success_probability,
                "outcomes": outcomes,
                "factors": factors_json,
                "product_verified": true,
            });
            Ok(format!("{:#}", report))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("factor {}\n", config.composite));
            if let Some(p) = &art.plan {
                out.push_str(&format!(
                    "plan: n = {}, M = {}, phi = {:.6}, theta = {:.6}, j = {}\n",
                    p.n_qubits, p.marked_count, p.phi, p.theta, p.iterations
                ));
            } else {
                out.push_str("plan: amplification skipped (all states marked)\n");
            }
            out.push_str(&format!(
                "success probability: {:.6}\n",
                art.success_probability
            ));
            for fs in &factors_json {
                out.push_str(&format!("factors: {}\n", fs.join(" x ")));
            }
            Ok(out)
        }
        OutputFormat::Csv => {
            let probs = art.state.probabilities();
            let mut out = String::from("index,state,probability,count\n");
            for (i, p) in probs.iter().enumerate() {
                let c = art.counts.get(&(i as u64)).copied().unwrap_or(0);
                out.push_str(&format!("{i},{},{p:.12},{c}\n", bitstring(i as u64, n)));
            }
            Ok(out)
        }
    }
}

fn dm_csv(dm: &DensityMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..dm.dim() {
        for j in 0..dm.dim() {
            let v = dm.matrix[(i, j)];
            out.push_str(&format!("{i},{j},{:.12},{:.12}\n", v.re, v.im));
        }
    }
    out
}

/// `tomography` command: EDM, TDM, fidelity, per-setting counts.
pub fn cmd_tomography(config: &RunConfig) -> Result<String, PipelineError> {
    let art = tomography_pipeline(config)?;
    match config.format {
        OutputFormat::Json => {
            let report = json!({
                "version": VERSION,
                "command": "tomography",
                "config": config,
                "ground_states": art.factor.ground_states,
                "fidelity": art.fidelity,
                "psd_projected": config.psd_projection,
                "edm": art.edm.to_json(),
                "edm_projected": art.edm_projected.as_ref().map(|m| m.to_json()),
                "tdm": art.tdm.to_json(),
                "records": art.records,
            });
            Ok(format!("{:#}", report))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "tomography {} (shots = {}, seed = {})\n",
                config.composite, config.shots, config.seed
            ));
            out.push_str(&format!("fidelity: {:.6}\n", art.fidelity));
            out.push_str("EDM:\n");
            out.push_str(&art.edm.to_string());
            out.push_str("TDM:\n");
            out.push_str(&art.tdm.to_string());
            Ok(out)
        }
        OutputFormat::Csv => {
            let shown = art.edm_projected.as_ref().unwrap_or(&art.edm);
            Ok(dm_csv(shown))
        }
    }
}

/// `export-qasm` command: the full circuit as OpenQASM 2.0 text.
pub fn cmd_export_qasm(config: &RunConfig) -> Result<String, PipelineError> {
    let art = factor_pipeline(config)?;
    let circuit = full_circuit(&art)?;
    Ok(export_qasm(&circuit, true))
}
