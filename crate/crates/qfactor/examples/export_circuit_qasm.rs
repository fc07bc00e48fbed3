//! Compile the full search circuit for N = 875 to gates, export it as
//! OpenQASM 2.0, re-import the text, and verify the replay reproduces the
//! simulator's final state.
//!
//! ```bash
//! cargo run --example export_circuit_qasm
//! ```

use num_bigint::BigUint;
use num_complex::Complex64;
use qfactor::circuit::{export_qasm, import_qasm};
use qfactor::grover::StateVector;
use qfactor::pipeline::{factor_pipeline, full_circuit, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::new(BigUint::from(875u32), 4);
    let art = factor_pipeline(&config)?;
    let circuit = full_circuit(&art)?;

    let qasm = export_qasm(&circuit, true);
    println!("{qasm}");

    // Round trip: parse the exported text and replay it on |0...0>.
    let imported = import_qasm(&qasm)?;
    let mut amps = StateVector::basis(circuit.n_qubits, 0).amplitudes().to_vec();
    imported.apply(&mut amps);

    let max_err = art
        .state
        .amplitudes()
        .iter()
        .zip(&amps)
        // The QASM text drops the tracked global phase; realign before
        // comparing.
        .map(|(a, b)| (a - b * Complex64::from_polar(1.0, circuit.global_phase)).norm())
        .fold(0.0f64, f64::max);
    println!("// replay max amplitude error: {max_err:.3e}");
    assert!(max_err < 1e-12);
    Ok(())
}
