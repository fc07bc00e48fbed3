//! Generalized (phase-matched) Grover amplification on an exact
//! state-vector simulator.
//!
//! The plan computes φ = arcsin(√(M/2^n)), the smallest iteration count j
//! with sin(π/(4j+2)) ≤ sin φ, and the matched rotation angle
//! θ = 2·arcsin(sin(π/(4j+2))/sin φ). With the oracle and diffuser both
//! applying the phase e^{i·sign·θ} the search lands on the marked
//! subspace exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::{eigenvalue_to_f64, DiagonalHamiltonian};

#[derive(Debug, Error)]
pub enum GroverError {
    #[error("marked count {m} must satisfy 1 <= M < 2^n = {space}")]
    MarkedCountOutOfRange { m: u64, space: u64 },
    #[error("iteration override {j} makes theta complex: sin(pi/(4j+2)) = {lhs:.6} > sin(phi) = {rhs:.6}")]
    InvalidIterations { j: u32, lhs: f64, rhs: f64 },
    #[error("state vector has {state} amplitudes but the Hamiltonian dimension is {ham}")]
    DimensionMismatch { state: usize, ham: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Apply `e^{-i·diag[x]·θ}` literally (non-uniform unmarked phases).
    Literal,
    /// Phase the kernel states by `e^{i·sign·θ}` (phase-matched exact search).
    Projector,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroverPlan {
    pub n_qubits: usize,
    pub space_size: u64,
    pub marked_count: u64,
    pub phi: f64,
    pub theta: f64,
    pub iterations: u32,
    pub oracle_mode: OracleMode,
    /// Sign s of the matched phase e^{i·s·θ}; the default convention is
    /// e^{-iθ}, i.e. -1.
    pub diffuser_sign: i8,
}

/// Computes the amplification plan for `m` marked states in `n` qubits.
pub fn plan(
    m: u64,
    n: usize,
    j_override: Option<u32>,
    oracle_mode: OracleMode,
    diffuser_sign: i8,
) -> Result<GroverPlan, GroverError> {
    let space = 1u64 << n;
    if m == 0 || m >= space {
        return Err(GroverError::MarkedCountOutOfRange { m, space });
    }
    let sin_phi = ((m as f64) / (space as f64)).sqrt();
    let phi = sin_phi.asin();
    let theta_for = |j: u32| -> Result<f64, GroverError> {
        if j == 0 {
            // Degenerate debugging plan: no iterations, no rotation.
            return Ok(0.0);
        }
        let lhs = (PI / (4.0 * j as f64 + 2.0)).sin();
        if lhs > sin_phi + 1e-12 {
            return Err(GroverError::InvalidIterations {
                j,
                lhs,
                rhs: sin_phi,
            });
        }
        Ok(2.0 * (lhs / sin_phi).min(1.0).asin())
    };
    let iterations = match j_override {
        Some(j) => j,
        None => {
            let mut j = 1;
            while theta_for(j).is_err() {
                j += 1;
            }
            j
        }
    };
    let theta = theta_for(iterations)?;
    Ok(GroverPlan {
        n_qubits: n,
        space_size: space,
        marked_count: m,
        phi,
        theta,
        iterations,
        oracle_mode,
        diffuser_sign: if diffuser_sign >= 0 { 1 } else { -1 },
    })
}

/// Dense complex state vector; index bit order matches the Hamiltonian
/// (qubit 0 = most significant bit).
#[derive(Debug, Clone)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "dimension must be 2^n");
        StateVector { amps }
    }

    /// Computational basis state |index⟩.
    pub fn basis(n: usize, index: u64) -> Self {
        let mut amps = vec![Complex64::zero(); 1 << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// CSV dump: one `index,probability` row per basis state.
    pub fn probabilities_csv(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (i, p) in self.probabilities().iter().enumerate() {
            out.push_str(&format!("{i},{p:.12}\n"));
        }
        out
    }
}

/// Uniform superposition `H^{⊗n}|0…0⟩`.
pub fn initial_state(n: usize) -> StateVector {
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    StateVector {
        amps: vec![amp; dim],
    }
}

/// One oracle application according to the plan's mode.
pub fn apply_oracle(
    s: &StateVector,
    h: &DiagonalHamiltonian,
    plan: &GroverPlan,
) -> Result<StateVector, GroverError> {
    if s.dim() != h.dim() {
        return Err(GroverError::DimensionMismatch {
            state: s.dim(),
            ham: h.dim(),
        });
    }
    let mut amps = s.amps.clone();
    match plan.oracle_mode {
        OracleMode::Literal => {
            for (x, a) in amps.iter_mut().enumerate() {
                let e = eigenvalue_to_f64(h.eigenvalue(x as u64));
                *a *= Complex64::from_polar(1.0, -e * plan.theta);
            }
        }
        OracleMode::Projector => {
            let phase = Complex64::from_polar(1.0, plan.diffuser_sign as f64 * plan.theta);
            for (x, a) in amps.iter_mut().enumerate() {
                if h.eigenvalue(x as u64).is_zero() {
                    *a *= phase;
                }
            }
        }
    }
    Ok(StateVector { amps })
}

/// Diffuser: `s ← s + (e^{i·sign·θ} - 1)·⟨ψ₀|s⟩·ψ₀`, the
/// Hadamard-conjugated phase shift of |0…0⟩.
pub fn apply_diffuser(s: &StateVector, plan: &GroverPlan) -> StateVector {
    let dim = s.dim() as f64;
    let overlap: Complex64 = s.amps.iter().sum::<Complex64>() / dim.sqrt();
    let factor =
        (Complex64::from_polar(1.0, plan.diffuser_sign as f64 * plan.theta) - 1.0) * overlap
            / dim.sqrt();
    StateVector {
        amps: s.amps.iter().map(|a| a + factor).collect(),
    }
}

/// Full protocol: ψ₀ followed by j iterations of (oracle, diffuser).
pub fn run(h: &DiagonalHamiltonian, plan: &GroverPlan) -> Result<StateVector, GroverError> {
    let mut s = initial_state(plan.n_qubits);
    for _ in 0..plan.iterations {
        s = apply_oracle(&s, h, plan)?;
        s = apply_diffuser(&s, plan);
    }
    Ok(s)
}

/// Total probability mass on the marked basis indices.
pub fn success_probability(s: &StateVector, marked: &[u64]) -> f64 {
    marked
        .iter()
        .map(|&x| s.amps[x as usize].norm_sqr())
        .sum()
}

/// Multinomial sampling of the measurement distribution, deterministic
/// per seed. Returns counts keyed by basis index (zero-count outcomes
/// omitted).
pub fn sample(s: &StateVector, shots: u64, seed: u64) -> BTreeMap<u64, u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_distribution(&s.probabilities(), shots, &mut rng)
}

/// Inverse-CDF multinomial sampling from an unnormalized distribution.
pub fn sample_distribution(
    probs: &[f64],
    shots: u64,
    rng: &mut impl Rng,
) -> BTreeMap<u64, u64> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|c| *c < u).min(probs.len() - 1);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{
        build_multiplication_table, hamiltonian_polynomial, minimize, FactorTemplate,
        HamiltonianMode,
    };
    use approx::assert_abs_diff_eq;
    use num_bigint::{BigInt, BigUint};

    fn hamiltonian_for(n: u64, alpha: u32) -> DiagonalHamiltonian {
        let t = FactorTemplate::infer(BigUint::from(n), alpha).unwrap();
        let rs = minimize(&build_multiplication_table(&t)).unwrap();
        let hp = hamiltonian_polynomial(&rs, HamiltonianMode::Paper).unwrap();
        DiagonalHamiltonian::from_polynomial(&hp.poly, &hp.qubit_vars).unwrap()
    }

    #[test]
    fn plan_875_matches_closed_form() {
        let p = plan(4, 3, Some(1), OracleMode::Projector, -1).unwrap();
        assert_abs_diff_eq!(p.phi, PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.theta, PI / 2.0, epsilon = 1e-12);
        // Auto-selection also lands on j = 1.
        let auto = plan(4, 3, None, OracleMode::Projector, -1).unwrap();
        assert_eq!(auto.iterations, 1);
    }

    #[test]
    fn plan_4375_matches_reference_values() {
        let p = plan(5, 4, Some(2), OracleMode::Projector, -1).unwrap();
        assert_abs_diff_eq!(p.phi, (5.0f64.sqrt() / 4.0).asin(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.theta, 1.1714, epsilon = 5e-4);
        // j = 1 also satisfies the reality condition for this instance.
        assert!(plan(5, 4, Some(1), OracleMode::Projector, -1).is_ok());
    }

    #[test]
    fn plan_rejects_bad_marked_count_and_bad_override() {
        assert!(plan(0, 3, None, OracleMode::Projector, -1).is_err());
        assert!(plan(8, 3, None, OracleMode::Projector, -1).is_err());
        // M=1 in 6 qubits: sin(phi)=1/8 < sin(pi/6), so j=1 is invalid.
        assert!(matches!(
            plan(1, 6, Some(1), OracleMode::Projector, -1),
            Err(GroverError::InvalidIterations { .. })
        ));
        assert!(plan(1, 6, None, OracleMode::Projector, -1).unwrap().iterations > 1);
    }

    #[test]
    fn initial_state_is_uniform() {
        let s = initial_state(3);
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 1.0 / (2.0 * 2.0f64.sqrt()), epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn literal_oracle_phases_follow_the_phase_table() {
        let h = hamiltonian_for(875, 4);
        let p = plan(4, 3, Some(1), OracleMode::Literal, -1).unwrap();
        let s = apply_oracle(&initial_state(3), &h, &p).unwrap();
        // |011⟩ picks up e^{-2iθ} = e^{-iπ} = -1 relative to |000⟩.
        let rel = s.amplitude(0b011) / s.amplitude(0b000);
        assert_abs_diff_eq!(rel.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rel.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn projector_mode_is_exact_for_875() {
        let h = hamiltonian_for(875, 4);
        let p = plan(4, 3, Some(1), OracleMode::Projector, -1).unwrap();
        let s = run(&h, &p).unwrap();
        assert!((success_probability(&s, &h.ground_states()) - 1.0).abs() < 1e-9);
        let probs = s.probabilities();
        for (x, expected) in [(0usize, 0.25), (1, 0.25), (2, 0.25), (3, 0.0), (4, 0.25)] {
            assert_abs_diff_eq!(probs[x], expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn projector_mode_is_exact_for_4375() {
        let h = hamiltonian_for(4375, 5);
        for j in [1u32, 2] {
            let p = plan(5, 4, Some(j), OracleMode::Projector, -1).unwrap();
            let s = run(&h, &p).unwrap();
            assert!(
                (success_probability(&s, &h.ground_states()) - 1.0).abs() < 1e-9,
                "j = {j}"
            );
        }
    }

    #[test]
    fn projector_exactness_holds_for_both_signs() {
        let h = hamiltonian_for(875, 4);
        for sign in [-1i8, 1] {
            let p = plan(4, 3, Some(1), OracleMode::Projector, sign).unwrap();
            let s = run(&h, &p).unwrap();
            assert!((success_probability(&s, &h.ground_states()) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn literal_mode_success_probability_875() {
        let h = hamiltonian_for(875, 4);
        let p = plan(4, 3, Some(1), OracleMode::Literal, -1).unwrap();
        let s = run(&h, &p).unwrap();
        // Direct 8-dimensional computation gives exactly 17/32.
        assert_abs_diff_eq!(
            success_probability(&s, &h.ground_states()),
            17.0 / 32.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn oracle_and_diffuser_preserve_norm() {
        let h = hamiltonian_for(4375, 5);
        let p = plan(5, 4, Some(2), OracleMode::Literal, -1).unwrap();
        let mut s = initial_state(4);
        for _ in 0..p.iterations {
            s = apply_oracle(&s, &h, &p).unwrap();
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
            s = apply_diffuser(&s, &p);
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn projector_final_state_is_uniform_within_marked_and_unmarked() {
        let h = hamiltonian_for(4375, 5);
        let p = plan(5, 4, Some(2), OracleMode::Projector, -1).unwrap();
        let s = run(&h, &p).unwrap();
        let marked = h.ground_states();
        let ref_marked = s.amplitude(marked[0]);
        let ref_unmarked = s.amplitude(3); // first non-ground index
        for x in 0..16u64 {
            let a = s.amplitude(x);
            let r = if marked.contains(&x) { ref_marked } else { ref_unmarked };
            assert!((a - r).norm() < 1e-10, "index {x}");
        }
    }

    #[test]
    fn literal_equals_projector_for_matched_two_valued_diagonal() {
        // diag in {0, 3} on 2 qubits with θ = π and sign +1: the literal
        // phase e^{-3iπ} = e^{iπ} matches the projector's marked phase up
        // to the global factor e^{-3iπ}.
        let diag = vec![
            BigInt::from(0),
            BigInt::from(3),
            BigInt::from(3),
            BigInt::from(0),
        ];
        let h = DiagonalHamiltonian::new(2, diag).unwrap();
        let base = plan(2, 2, Some(1), OracleMode::Projector, 1).unwrap();
        let forced = GroverPlan {
            theta: PI,
            ..base
        };
        let lit = GroverPlan {
            oracle_mode: OracleMode::Literal,
            ..forced
        };
        let a = run(&h, &forced).unwrap();
        let b = run(&h, &lit).unwrap();
        for x in 0..4 {
            assert_abs_diff_eq!(
                a.probabilities()[x],
                b.probabilities()[x],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn run_composes_single_iterations() {
        let h = hamiltonian_for(4375, 5);
        let p = plan(5, 4, Some(2), OracleMode::Literal, -1).unwrap();
        let full = run(&h, &p).unwrap();
        let mut step = initial_state(4);
        for _ in 0..2 {
            step = apply_diffuser(&apply_oracle(&step, &h, &p).unwrap(), &p);
        }
        for x in 0..16 {
            assert!((full.amplitude(x) - step.amplitude(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_iterations_returns_initial_state() {
        let h = hamiltonian_for(875, 4);
        let p = plan(4, 3, Some(0), OracleMode::Projector, -1).unwrap();
        let s = run(&h, &p).unwrap();
        for (a, b) in s.amplitudes().iter().zip(initial_state(3).amplitudes()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn diffuser_with_theta_pi_and_plus_sign_negates_the_mean() {
        let p = GroverPlan {
            n_qubits: 3,
            space_size: 8,
            marked_count: 4,
            phi: PI / 4.0,
            theta: PI,
            iterations: 1,
            oracle_mode: OracleMode::Projector,
            diffuser_sign: 1,
        };
        let s = apply_diffuser(&initial_state(3), &p);
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, -1.0 / (2.0 * 2.0f64.sqrt()), epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_concentrated() {
        let s = StateVector::basis(3, 0);
        let counts = sample(&s, 100, 7);
        assert_eq!(counts.get(&0), Some(&100));
        assert_eq!(counts.len(), 1);

        let u = initial_state(1);
        let c1 = sample(&u, 1_000_000, 42);
        let c2 = sample(&u, 1_000_000, 42);
        assert_eq!(c1, c2);
        let zero = *c1.get(&0).unwrap() as f64 / 1e6;
        assert!((zero - 0.5).abs() < 0.002, "{zero}");
    }

    #[test]
    fn success_probability_examples() {
        let s = initial_state(3);
        assert_abs_diff_eq!(success_probability(&s, &[0, 1, 2, 4]), 0.5, epsilon = 1e-12);
        assert_eq!(success_probability(&s, &[]), 0.0);
    }
}
