//! Diagonal cost Hamiltonian, its Pauli-Z expansion, kernel, and phase table.
//!
//! The polynomial is mapped with the projectors `â_i = (I - σ_z^i)/2`,
//! which is definitionally the same as evaluating it at every basis
//! index, so the operator is stored as its exact integer diagonal.
//! Basis convention (pinned here for every module): qubit 0 is the
//! leftmost ket symbol, i.e. the most significant bit of the index.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bitpoly::{BitPoly, PolyError, VarId};

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("polynomial is negative at basis index {index}: {value}")]
    NegativeEigenvalue { index: u64, value: BigInt },
    #[error("{0} qubits is too large for a dense diagonal")]
    TooManyQubits(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Largest dense diagonal we are willing to materialize (2^20 entries).
const MAX_QUBITS: usize = 20;

/// Diagonal operator with exact non-negative integer eigenvalues.
///
/// `diag[x]` is the eigenvalue of basis state `|x⟩` with qubit 0 read as
/// the most significant bit of `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalHamiltonian {
    n_qubits: usize,
    diag: Vec<BigInt>,
}

/// Exact rational coefficients of `Ĥ = Σ_S c_S · Z_S`, keyed by the
/// Z-support subset as a qubit-index bitmask (bit i set = σ_z on qubit i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliZExpansion {
    n_qubits: usize,
    coeffs: BTreeMap<u64, BigRational>,
}

impl DiagonalHamiltonian {
    pub fn new(n_qubits: usize, diag: Vec<BigInt>) -> Result<Self, HamiltonianError> {
        assert_eq!(diag.len(), 1 << n_qubits, "diagonal length must be 2^n");
        if n_qubits > MAX_QUBITS {
            return Err(HamiltonianError::TooManyQubits(n_qubits));
        }
        for (i, v) in diag.iter().enumerate() {
            if v.is_negative() {
                return Err(HamiltonianError::NegativeEigenvalue {
                    index: i as u64,
                    value: v.clone(),
                });
            }
        }
        Ok(DiagonalHamiltonian { n_qubits, diag })
    }

    /// Evaluates `p` on every binary point of `var_order` (first variable
    /// = qubit 0 = most significant index bit).
    pub fn from_polynomial(p: &BitPoly, var_order: &[VarId]) -> Result<Self, HamiltonianError> {
        let n = var_order.len();
        if n > MAX_QUBITS {
            return Err(HamiltonianError::TooManyQubits(n));
        }
        let mut diag = Vec::with_capacity(1 << n);
        for x in 0u64..(1 << n) {
            let assignment: BTreeMap<VarId, u8> = var_order
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), (x >> (n - 1 - i) & 1) as u8))
                .collect();
            diag.push(p.evaluate(&assignment)?);
        }
        DiagonalHamiltonian::new(n, diag)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[BigInt] {
        &self.diag
    }

    pub fn eigenvalue(&self, index: u64) -> &BigInt {
        &self.diag[index as usize]
    }

    /// All basis indices with zero eigenvalue, ascending.
    pub fn ground_states(&self) -> Vec<u64> {
        self.diag
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(i, _)| i as u64)
            .collect()
    }

    /// Walsh–Hadamard transform onto the Pauli-Z basis:
    /// `c_S = 2^{-n} Σ_x (-1)^{|x∧S|} diag[x]`, exact rationals.
    pub fn pauli_coefficients(&self) -> PauliZExpansion {
        let n = self.n_qubits;
        let dim = self.diag.len();
        // In-place fast transform over the index bits; index bit b of x
        // corresponds to qubit n-1-b.
        let mut work: Vec<BigInt> = self.diag.clone();
        let mut h = 1;
        while h < dim {
            for start in (0..dim).step_by(h * 2) {
                for i in start..start + h {
                    let a = work[i].clone();
                    let b = work[i + h].clone();
                    work[i] = &a + &b;
                    work[i + h] = a - b;
                }
            }
            h *= 2;
        }
        let denom = BigInt::from(dim as u64);
        let mut coeffs = BTreeMap::new();
        for (s, v) in work.into_iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            // Re-key from index-bit mask to qubit-index mask.
            let mut mask = 0u64;
            for b in 0..n {
                if s >> b & 1 == 1 {
                    mask |= 1 << (n - 1 - b);
                }
            }
            coeffs.insert(mask, BigRational::new(v, denom.clone()));
        }
        PauliZExpansion {
            n_qubits: n,
            coeffs,
        }
    }

    /// Relative phase of every basis state under `e^{-iĤθ}`: the
    /// zero-eigenvalue reference gets 0, state `x` gets `-diag[x]·θ`.
    pub fn phase_table(&self, theta: f64) -> Vec<PhaseEntry> {
        self.diag
            .iter()
            .enumerate()
            .map(|(x, v)| PhaseEntry {
                basis_index: x as u64,
                eigenvalue: v.clone(),
                phase: -eigenvalue_to_f64(v) * theta,
            })
            .collect()
    }

    /// CSV dump: one `index,eigenvalue` row per basis state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.diag.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

pub fn eigenvalue_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().expect("eigenvalue fits in f64")
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseEntry {
    pub basis_index: u64,
    #[serde(serialize_with = "crate::hamiltonian::serialize_bigint")]
    pub eigenvalue: BigInt,
    pub phase: f64,
}

pub(crate) fn serialize_bigint<S: serde::Serializer>(
    v: &BigInt,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl PauliZExpansion {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Nonzero coefficients keyed by qubit-index bitmask.
    pub fn coeffs(&self) -> &BTreeMap<u64, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u64) -> BigRational {
        self.coeffs.get(&mask).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Inverse transform back to the exact diagonal.
    pub fn to_diagonal(&self) -> Result<DiagonalHamiltonian, HamiltonianError> {
        let n = self.n_qubits;
        let mut diag = Vec::with_capacity(1 << n);
        for x in 0u64..(1 << n) {
            let mut total = BigRational::zero();
            for (mask, c) in &self.coeffs {
                let sign = if (x & mask).count_ones() % 2 == 0 { 1 } else { -1 };
                total += c * BigRational::from_integer(sign.into());
            }
            assert!(
                total.is_integer(),
                "expansion of an integer diagonal must invert to integers"
            );
            diag.push(total.to_integer());
        }
        DiagonalHamiltonian::new(n, diag)
    }

    /// JSON emission: subset bitmask plus numerator/denominator strings.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(mask, c)| {
                serde_json::json!({
                    "z_mask": mask,
                    "numerator": c.numer().to_string(),
                    "denominator": c.denom().to_string(),
                })
            })
            .collect();
        serde_json::json!({ "n_qubits": self.n_qubits, "coefficients": entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{
        build_multiplication_table, hamiltonian_polynomial, minimize, FactorTemplate,
        HamiltonianMode,
    };
    use num_bigint::BigUint;

    fn diag_u64(h: &DiagonalHamiltonian) -> Vec<u64> {
        use num_traits::ToPrimitive;
        h.diag().iter().map(|v| v.to_u64().unwrap()).collect()
    }

    fn hamiltonian_for(n: u64, alpha: u32) -> DiagonalHamiltonian {
        let t = FactorTemplate::infer(BigUint::from(n), alpha).unwrap();
        let rs = minimize(&build_multiplication_table(&t)).unwrap();
        let hp = hamiltonian_polynomial(&rs, HamiltonianMode::Paper).unwrap();
        DiagonalHamiltonian::from_polynomial(&hp.poly, &hp.qubit_vars).unwrap()
    }

    #[test]
    fn diag_875_matches_fixture() {
        let h = hamiltonian_for(875, 4);
        assert_eq!(diag_u64(&h), vec![0, 0, 0, 2, 0, 2, 2, 11]);
        assert_eq!(h.ground_states(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn diag_4375_matches_fixture() {
        let h = hamiltonian_for(4375, 5);
        assert_eq!(
            diag_u64(&h),
            vec![0, 0, 0, 2, 0, 2, 2, 24, 0, 2, 2, 24, 2, 24, 24, 61]
        );
        assert_eq!(h.ground_states(), vec![0, 1, 2, 4, 8]);
    }

    #[test]
    fn pauli_coefficients_875() {
        let h = hamiltonian_for(875, 4);
        let exp = h.pauli_coefficients();
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(exp.coeff(0b000), r(17, 8));
        for mask in [0b100u64, 0b010, 0b001] {
            assert_eq!(exp.coeff(mask), r(-13, 8), "mask {mask:03b}");
        }
        for mask in [0b110u64, 0b101, 0b011] {
            assert_eq!(exp.coeff(mask), r(9, 8), "mask {mask:03b}");
        }
        assert_eq!(exp.coeff(0b111), r(-5, 8));
        assert_eq!(exp.coeffs().len(), 8);
    }

    #[test]
    fn pauli_coefficients_4375() {
        let h = hamiltonian_for(4375, 5);
        let exp = h.pauli_coefficients();
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(exp.coeff(0), r(169, 16));
        for mask in 1u64..16 {
            let expected = match mask.count_ones() {
                1 => r(-109, 16),
                2 => r(57, 16),
                3 => r(-13, 16),
                _ => r(-23, 16),
            };
            assert_eq!(exp.coeff(mask), expected, "mask {mask:04b}");
        }
    }

    #[test]
    fn walsh_hadamard_round_trip_exact() {
        let h = hamiltonian_for(4375, 5);
        assert_eq!(h.pauli_coefficients().to_diagonal().unwrap(), h);
    }

    #[test]
    fn zero_polynomial_gives_zero_diag_and_empty_expansion() {
        let vars = [VarId::named("a"), VarId::named("b")];
        let h = DiagonalHamiltonian::from_polynomial(&BitPoly::zero(), &vars).unwrap();
        assert_eq!(diag_u64(&h), vec![0, 0, 0, 0]);
        assert!(h.pauli_coefficients().coeffs().is_empty());
        assert_eq!(h.ground_states(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn negative_polynomial_is_rejected() {
        let p = BitPoly::var(VarId::named("a")).neg();
        let err = DiagonalHamiltonian::from_polynomial(&p, &[VarId::named("a")]);
        assert!(matches!(
            err,
            Err(HamiltonianError::NegativeEigenvalue { index: 1, .. })
        ));
    }

    #[test]
    fn phase_table_875() {
        let h = hamiltonian_for(875, 4);
        let theta = 0.5;
        let table = h.phase_table(theta);
        assert_eq!(table[0b011].phase, -2.0 * theta);
        assert_eq!(table[0b111].phase, -11.0 * theta);
        assert_eq!(table[0].phase, 0.0);
    }

    #[test]
    fn expansion_coefficients_are_bounded_by_max_eigenvalue() {
        let h = hamiltonian_for(875, 4);
        let max = h.diag().iter().max().unwrap().clone();
        for c in h.pauli_coefficients().coeffs().values() {
            assert!(c.abs() <= BigRational::from_integer(max.clone()));
        }
    }

    #[test]
    fn csv_dump_shape() {
        let h = hamiltonian_for(875, 4);
        let csv = h.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "index,eigenvalue");
        assert_eq!(lines[8], "7,11");
    }
}
