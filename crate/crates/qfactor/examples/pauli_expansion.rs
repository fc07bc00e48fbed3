//! Build a diagonal cost operator directly and expand it over Pauli-Z
//! strings with exact rational coefficients, then round-trip back.
//!
//! ```bash
//! cargo run --example pauli_expansion
//! ```

use num_bigint::BigInt;
use qfactor::hamiltonian::DiagonalHamiltonian;

fn label(mask: u64, n: usize) -> String {
    (0..n)
        .map(|q| if mask >> q & 1 == 1 { 'Z' } else { 'I' })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The 3-qubit cost operator for 875 (qubit 0 is the most significant
    // index bit).
    let diag: Vec<BigInt> = [0, 0, 0, 2, 0, 2, 2, 11].map(BigInt::from).into();
    let h = DiagonalHamiltonian::new(3, diag)?;

    println!("H = diag{:?}", h.diag());
    println!("ground states (kernel): {:?}", h.ground_states());

    let expansion = h.pauli_coefficients();
    println!("\nH = sum of Pauli-Z strings:");
    for (mask, coeff) in expansion.coeffs() {
        println!("  {:>6}  *  {}", coeff.to_string(), label(*mask, 3));
    }

    let back = expansion.to_diagonal()?;
    assert_eq!(back, h, "expansion round trip is exact");
    println!("\nround trip through the expansion is exact");

    println!("\nphase table at theta = pi/2:");
    for entry in h.phase_table(std::f64::consts::FRAC_PI_2) {
        println!(
            "  |{:03b}>  E = {:>2}  phase = {:+.6} rad",
            entry.basis_index, entry.eigenvalue, entry.phase
        );
    }
    Ok(())
}
