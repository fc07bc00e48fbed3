//! Simulated state tomography: multi-basis measurement, Stokes/Pauli
//! expectation estimation, linear-inversion density-matrix
//! reconstruction, and fidelity against the theoretical density matrix.
//!
//! Measurement bases use the standard rotations: X outcomes are read
//! after a Hadamard (|+⟩ = H|0⟩), Y outcomes after S† then Hadamard
//! (|+i⟩ = SH|0⟩), Z outcomes directly. The experimental density matrix
//! is raw linear inversion — Hermitian and trace one, but not necessarily
//! positive semidefinite; an eigenvalue-clipping PSD projection is
//! offered as explicit post-processing.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Gate, GateCircuit};
use crate::grover::{sample_distribution, StateVector};

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("missing measurement record for setting {0}")]
    MissingSetting(String),
    #[error("expected all {expected} Pauli expectations, got {got}")]
    IncompleteExpectations { expected: usize, got: usize },
    #[error("target density matrix is not pure: tr(rho^2) = {purity}")]
    TargetNotPure { purity: f64 },
    #[error("marked set must be nonempty")]
    EmptyMarkedSet,
}

/// Per-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

/// One basis letter per qubit.
pub type MeasurementSetting = Vec<Basis>;

fn setting_name(setting: &[Basis]) -> String {
    setting
        .iter()
        .map(|b| match b {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        })
        .collect()
}

/// All 3^n settings in lexicographic (X < Y < Z) order.
pub fn all_settings(n: usize) -> Vec<MeasurementSetting> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                [Basis::X, Basis::Y, Basis::Z].into_iter().map(move |b| {
                    let mut s = prefix.clone();
                    s.push(b);
                    s
                })
            })
            .collect();
    }
    out
}

/// Outcome counts for one measurement setting. `shots == 0` marks the
/// exact-probability mode (infinite-shot limit): `exact` carries the full
/// outcome distribution and `counts` is empty.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub setting: MeasurementSetting,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
    pub exact: Option<Vec<f64>>,
}

impl MeasurementRecord {
    /// Outcome relative frequencies, dense over all 2^n outcomes.
    pub fn frequencies(&self, dim: usize) -> Vec<f64> {
        if let Some(exact) = &self.exact {
            return exact.clone();
        }
        let mut f = vec![0.0; dim];
        for (outcome, count) in &self.counts {
            f[*outcome as usize] = *count as f64 / self.shots as f64;
        }
        f
    }
}

/// Rotates the state into the measurement basis of `setting`.
fn rotated_probabilities(s: &StateVector, setting: &[Basis]) -> Vec<f64> {
    let n = s.n_qubits();
    let mut c = GateCircuit::new(n);
    for (q, b) in setting.iter().enumerate() {
        match b {
            Basis::X => c.push(Gate::Hadamard { target: q }),
            Basis::Y => {
                // S† then H maps the σ_y eigenbasis onto the computational one.
                c.push(Gate::PhaseU1 {
                    target: q,
                    angle: -std::f64::consts::FRAC_PI_2,
                });
                c.push(Gate::Hadamard { target: q });
            }
            Basis::Z => {}
        }
    }
    let mut amps = s.amplitudes().to_vec();
    c.apply(&mut amps);
    amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Simulates every one of the 3^n measurement settings.
///
/// Per-setting randomness comes from stream `i` (the setting index) of a
/// ChaCha generator seeded with `seed`, so results are deterministic and
/// independent of any execution order. `shots == 0` records exact outcome
/// probabilities instead of sampling.
pub fn simulate_settings(s: &StateVector, shots: u64, seed: u64) -> Vec<MeasurementRecord> {
    let n = s.n_qubits();
    all_settings(n)
        .into_iter()
        .enumerate()
        .map(|(i, setting)| {
            let probs = rotated_probabilities(s, &setting);
            if shots == 0 {
                MeasurementRecord {
                    setting,
                    shots: 0,
                    counts: BTreeMap::new(),
                    exact: Some(probs),
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                MeasurementRecord {
                    setting,
                    shots,
                    counts: sample_distribution(&probs, shots, &mut rng),
                    exact: None,
                }
            }
        })
        .collect()
}

/// Pauli string over n qubits; `None` is the identity letter.
type PauliString = Vec<Option<Basis>>;

fn pauli_name(p: &[Option<Basis>]) -> String {
    p.iter()
        .map(|l| match l {
            None => 'I',
            Some(Basis::X) => 'X',
            Some(Basis::Y) => 'Y',
            Some(Basis::Z) => 'Z',
        })
        .collect()
}

fn all_pauli_strings(n: usize) -> Vec<PauliString> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                [None, Some(Basis::X), Some(Basis::Y), Some(Basis::Z)]
                    .into_iter()
                    .map(move |l| {
                        let mut s = prefix.clone();
                        s.push(l);
                        s
                    })
            })
            .collect();
    }
    out
}

/// Estimates every Pauli-string expectation from the canonical compatible
/// setting: identity positions read from the setting measuring Z there.
pub fn stokes(records: &[MeasurementRecord]) -> Result<BTreeMap<String, f64>, TomographyError> {
    let n = records
        .first()
        .map(|r| r.setting.len())
        .unwrap_or_default();
    let dim = 1usize << n;
    let by_setting: BTreeMap<MeasurementSetting, &MeasurementRecord> =
        records.iter().map(|r| (r.setting.clone(), r)).collect();

    let mut out = BTreeMap::new();
    for p in all_pauli_strings(n) {
        let name = pauli_name(&p);
        if p.iter().all(Option::is_none) {
            // S_0...0 is exactly 1 by normalization.
            out.insert(name, 1.0);
            continue;
        }
        let canonical: MeasurementSetting =
            p.iter().map(|l| l.unwrap_or(Basis::Z)).collect();
        let record = by_setting
            .get(&canonical)
            .ok_or_else(|| TomographyError::MissingSetting(setting_name(&canonical)))?;
        let freqs = record.frequencies(dim);
        let mut expectation = 0.0;
        for (outcome, f) in freqs.iter().enumerate() {
            let mut parity = 0u32;
            for (q, letter) in p.iter().enumerate() {
                if letter.is_some() {
                    parity ^= (outcome >> (n - 1 - q)) as u32 & 1;
                }
            }
            expectation += if parity == 0 { *f } else { -f };
        }
        out.insert(name, expectation);
    }
    Ok(out)
}

/// Dense complex density matrix. Linear-inversion results are Hermitian
/// with unit trace but may have negative eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn from_pure(s: &StateVector) -> Self {
        let dim = s.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = s.amplitude(i as u64) * s.amplitude(j as u64).conj();
            }
        }
        DensityMatrix { matrix: m }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                max = max.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        max
    }

    /// tr(ρ²), real part; 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        (0..self.dim()).map(|i| sq[(i, i)].re).sum()
    }

    /// Largest negative eigenvalue magnitude (0 when PSD).
    pub fn negativity(&self) -> f64 {
        let eig = self.matrix.clone().symmetric_eigen();
        eig.eigenvalues
            .iter()
            .map(|l| -l.min(0.0))
            .fold(0.0, f64::max)
    }

    /// Projects onto the nearest PSD unit-trace matrix by clipping
    /// negative eigenvalues and renormalizing.
    pub fn psd_projected(&self) -> DensityMatrix {
        let eig = self.matrix.clone().symmetric_eigen();
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, l) in clipped.iter().enumerate() {
            if *l == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let w = l / total;
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += v[i] * v[j].conj() * Complex64::new(w, 0.0);
                }
            }
        }
        DensityMatrix { matrix: m }
    }

    /// JSON: nested arrays of [re, im] pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                    .collect()
            })
            .collect();
        serde_json::json!(rows)
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.matrix[(i, j)];
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:+.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Single-qubit Pauli matrices in the computational basis.
fn pauli_matrix(letter: Option<Basis>) -> DMatrix<Complex64> {
    let z = Complex64::zero;
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    match letter {
        None => DMatrix::from_row_slice(2, 2, &[r(1.0), z(), z(), r(1.0)]),
        Some(Basis::X) => DMatrix::from_row_slice(2, 2, &[z(), r(1.0), r(1.0), z()]),
        Some(Basis::Y) => DMatrix::from_row_slice(2, 2, &[z(), i(-1.0), i(1.0), z()]),
        Some(Basis::Z) => DMatrix::from_row_slice(2, 2, &[r(1.0), z(), z(), r(-1.0)]),
    }
}

fn pauli_string_matrix(p: &[Option<Basis>]) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::identity(1, 1);
    for letter in p {
        m = m.kronecker(&pauli_matrix(*letter));
    }
    m
}

/// Linear inversion: ρ = 2^{-n} Σ_P ⟨P⟩ · P over all 4^n Pauli strings.
pub fn reconstruct(
    expectations: &BTreeMap<String, f64>,
    n: usize,
) -> Result<DensityMatrix, TomographyError> {
    let strings = all_pauli_strings(n);
    if expectations.len() != strings.len() {
        return Err(TomographyError::IncompleteExpectations {
            expected: strings.len(),
            got: expectations.len(),
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for p in &strings {
        let name = pauli_name(p);
        let value = *expectations
            .get(&name)
            .ok_or(TomographyError::IncompleteExpectations {
                expected: strings.len(),
                got: expectations.len(),
            })?;
        if value != 0.0 {
            m += pauli_string_matrix(p) * Complex64::new(value / dim as f64, 0.0);
        }
    }
    Ok(DensityMatrix { matrix: m })
}

/// Theoretical density matrix: a pure uniform superposition over the
/// marked basis states.
pub fn theoretical_dm(marked: &[u64], n: usize) -> Result<DensityMatrix, TomographyError> {
    if marked.is_empty() {
        return Err(TomographyError::EmptyMarkedSet);
    }
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (marked.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::zero(); dim];
    for x in marked {
        amps[*x as usize] = amp;
    }
    Ok(DensityMatrix::from_pure(&StateVector::from_amplitudes(
        amps,
    )))
}

/// Uhlmann fidelity specialized to a pure target:
/// `F = sqrt(max(0, Re tr(ρ_T ρ_E)))`. Negative traces from raw linear
/// inversion are clamped to zero.
pub fn fidelity(rho_t: &DensityMatrix, rho_e: &DensityMatrix) -> Result<f64, TomographyError> {
    let purity = rho_t.purity();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(TomographyError::TargetNotPure { purity });
    }
    let prod = &rho_t.matrix * &rho_e.matrix;
    let tr: Complex64 = (0..prod.nrows()).map(|i| prod[(i, i)]).sum();
    Ok(tr.re.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::{self, initial_state, OracleMode};
    use crate::hamiltonian::DiagonalHamiltonian;
    use crate::reduction::{
        build_multiplication_table, hamiltonian_polynomial, minimize, FactorTemplate,
        HamiltonianMode,
    };
    use approx::assert_abs_diff_eq;
    use num_bigint::BigUint;

    fn final_state_875(mode: OracleMode) -> (DiagonalHamiltonian, StateVector) {
        let t = FactorTemplate::infer(BigUint::from(875u32), 4).unwrap();
        let rs = minimize(&build_multiplication_table(&t)).unwrap();
        let hp = hamiltonian_polynomial(&rs, HamiltonianMode::Paper).unwrap();
        let h = DiagonalHamiltonian::from_polynomial(&hp.poly, &hp.qubit_vars).unwrap();
        let plan = grover::plan(4, 3, Some(1), mode, -1).unwrap();
        let s = grover::run(&h, &plan).unwrap();
        (h, s)
    }

    #[test]
    fn setting_count_is_three_to_the_n() {
        assert_eq!(all_settings(3).len(), 27);
        let records = simulate_settings(&initial_state(3), 16, 1);
        assert_eq!(records.len(), 27);
    }

    #[test]
    fn z_measurement_of_zero_state_is_deterministic() {
        let s = StateVector::basis(1, 0);
        let records = simulate_settings(&s, 100, 5);
        let z = records
            .iter()
            .find(|r| r.setting == vec![Basis::Z])
            .unwrap();
        assert_eq!(z.counts.get(&0), Some(&100));

        // |+⟩ measured in X lands on outcome 0 every shot.
        let plus = initial_state(1);
        let records = simulate_settings(&plus, 100, 5);
        let x = records
            .iter()
            .find(|r| r.setting == vec![Basis::X])
            .unwrap();
        assert_eq!(x.counts.get(&0), Some(&100));
    }

    #[test]
    fn stokes_exact_mode_basics() {
        let s = StateVector::basis(1, 0);
        let exp = stokes(&simulate_settings(&s, 0, 0)).unwrap();
        assert_eq!(exp["I"], 1.0);
        assert_abs_diff_eq!(exp["Z"], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exp["X"], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exp["Y"], 0.0, epsilon = 1e-12);

        let plus = initial_state(1);
        let exp = stokes(&simulate_settings(&plus, 0, 0)).unwrap();
        assert_abs_diff_eq!(exp["X"], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn stokes_sampled_within_binomial_bound() {
        let s = StateVector::basis(1, 0);
        let shots = 8192u64;
        let exp = stokes(&simulate_settings(&s, shots, 11)).unwrap();
        // 3 sigma for a fair coin at 8192 shots.
        let bound = 3.0 / (shots as f64).sqrt();
        assert!(exp["X"].abs() < bound, "{}", exp["X"]);
        assert!(exp["Y"].abs() < bound, "{}", exp["Y"]);
        assert_abs_diff_eq!(exp["Z"], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_round_trip_reconstructs_the_pure_state() {
        let (_, s) = final_state_875(OracleMode::Projector);
        let exp = stokes(&simulate_settings(&s, 0, 0)).unwrap();
        let rho = reconstruct(&exp, 3).unwrap();
        let expected = DensityMatrix::from_pure(&s);
        let mut max = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                max = max.max((rho.matrix[(i, j)] - expected.matrix[(i, j)]).norm());
            }
        }
        assert!(max < 1e-10, "{max}");
    }

    #[test]
    fn reconstruct_single_qubit_z_up() {
        let mut exp = BTreeMap::new();
        exp.insert("I".to_string(), 1.0);
        exp.insert("X".to_string(), 0.0);
        exp.insert("Y".to_string(), 0.0);
        exp.insert("Z".to_string(), 1.0);
        let rho = reconstruct(&exp, 1).unwrap();
        assert_abs_diff_eq!(rho.matrix[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix[(1, 1)].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reconstruction_is_hermitian_with_unit_trace_for_any_counts() {
        let (_, s) = final_state_875(OracleMode::Projector);
        let exp = stokes(&simulate_settings(&s, 64, 3)).unwrap();
        let rho = reconstruct(&exp, 3).unwrap();
        assert!(rho.hermiticity_defect() < 1e-12);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rho.trace().im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn theoretical_dm_fixtures() {
        let rho = theoretical_dm(&[0, 1, 2, 4], 3).unwrap();
        for i in [0usize, 1, 2, 4] {
            for j in [0usize, 1, 2, 4] {
                assert_abs_diff_eq!(rho.matrix[(i, j)].re, 0.25, epsilon = 1e-12);
            }
        }
        assert_eq!(rho.matrix[(3, 3)], Complex64::zero());

        let rho5 = theoretical_dm(&[0, 1, 2, 4, 8], 4).unwrap();
        assert_abs_diff_eq!(rho5.matrix[(1, 8)].re, 0.2, epsilon = 1e-12);

        let proj = theoretical_dm(&[5], 3).unwrap();
        assert_abs_diff_eq!(proj.matrix[(5, 5)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(proj.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_basics() {
        let rho = theoretical_dm(&[0, 1, 2, 4], 3).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
        let zero = theoretical_dm(&[0], 3).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &zero).unwrap(), 0.5, epsilon = 1e-12);

        // Mixed target is rejected.
        let mixed = DensityMatrix {
            matrix: DMatrix::identity(8, 8) * Complex64::new(1.0 / 8.0, 0.0),
        };
        assert!(matches!(
            fidelity(&mixed, &rho),
            Err(TomographyError::TargetNotPure { .. })
        ));
    }

    #[test]
    fn literal_mode_fidelity_is_sqrt_17_over_32() {
        let (h, s) = final_state_875(OracleMode::Literal);
        let target = theoretical_dm(&h.ground_states(), 3).unwrap();
        let edm = DensityMatrix::from_pure(&s);
        assert_abs_diff_eq!(
            fidelity(&target, &edm).unwrap(),
            (17.0f64 / 32.0).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sampled_fidelity_is_high_at_8192_shots() {
        let (h, s) = final_state_875(OracleMode::Projector);
        let target = theoretical_dm(&h.ground_states(), 3).unwrap();
        let exp = stokes(&simulate_settings(&s, 8192, 12345)).unwrap();
        let edm = reconstruct(&exp, 3).unwrap();
        let f = fidelity(&target, &edm).unwrap();
        assert!(f > 0.97, "{f}");
    }

    #[test]
    fn psd_projection_clips_negativity_and_keeps_trace() {
        let (h, s) = final_state_875(OracleMode::Projector);
        let target = theoretical_dm(&h.ground_states(), 3).unwrap();
        let exp = stokes(&simulate_settings(&s, 256, 9)).unwrap();
        let raw = reconstruct(&exp, 3).unwrap();
        // Raw linear inversion at low shots is typically not PSD.
        let projected = raw.psd_projected();
        assert!(projected.negativity() < 1e-10);
        assert_abs_diff_eq!(projected.trace().re, 1.0, epsilon = 1e-9);
        assert!(projected.hermiticity_defect() < 1e-9);
        // Projection should not hurt fidelity dramatically.
        let f_raw = fidelity(&target, &raw).unwrap();
        let f_proj = fidelity(&target, &projected).unwrap();
        assert!((f_raw - f_proj).abs() < 0.2, "{f_raw} vs {f_proj}");
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let (_, s) = final_state_875(OracleMode::Projector);
        let a = simulate_settings(&s, 512, 77);
        let b = simulate_settings(&s, 512, 77);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.counts, y.counts);
        }
    }

    #[test]
    fn missing_setting_is_reported() {
        let s = StateVector::basis(1, 0);
        let mut records = simulate_settings(&s, 16, 2);
        records.retain(|r| r.setting != vec![Basis::Y]);
        assert!(matches!(
            stokes(&records),
            Err(TomographyError::MissingSetting(_))
        ));
    }
}
