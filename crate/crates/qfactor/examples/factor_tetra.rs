//! Factor N = 875 end to end: reduction, cost Hamiltonian, phase-matched
//! amplification on the exact state-vector simulator, and decoding.
//!
//! ```bash
//! cargo run --example factor_tetra
//! ```

use num_bigint::BigUint;
use qfactor::pipeline::{factor_pipeline, RunConfig};

fn pauli_label(mask: u64, n: usize) -> String {
    (0..n)
        .map(|q| if mask >> q & 1 == 1 { 'Z' } else { 'I' })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::new(BigUint::from(875u32), 4);
    let art = factor_pipeline(&config)?;

    let n = art.hamiltonian.n_qubits();
    println!("cost Hamiltonian on {n} qubits:");
    println!("  diag = {:?}", art.hamiltonian.diag());
    println!("  Pauli-Z expansion:");
    for (mask, coeff) in art.hamiltonian.pauli_coefficients().coeffs() {
        println!("    {}  {}", pauli_label(*mask, n), coeff);
    }

    let plan = art.plan.as_ref().expect("875 needs amplification");
    println!("\namplification plan:");
    println!("  marked M = {} of {}", plan.marked_count, plan.space_size);
    println!("  phi   = {:.12}", plan.phi);
    println!("  theta = {:.12}", plan.theta);
    println!("  iterations j = {}", plan.iterations);

    println!("\nfinal state probabilities:");
    for (x, p) in art.state.probabilities().iter().enumerate() {
        let marked = if art.ground_states.contains(&(x as u64)) { " (marked)" } else { "" };
        println!("  |{x:03b}>  {p:.6}{marked}");
    }
    println!("success probability = {:.12}", art.success_probability);

    println!("\ndecoded factorizations:");
    for tuple in &art.factors {
        let strs: Vec<String> = tuple.iter().map(|f| f.to_string()).collect();
        println!("  875 = {}", strs.join(" x "));
    }
    Ok(())
}
