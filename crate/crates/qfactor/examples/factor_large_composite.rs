//! Factor N = 1269636549803 = 1061^3 · 1063, a 41-bit tetra composite.
//!
//! Minimization fixes every interior factor bit except position 1, so the
//! quantum search still needs only three qubits.
//!
//! ```bash
//! cargo run --example factor_large_composite
//! ```

use num_bigint::BigUint;
use qfactor::pipeline::{factor_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: BigUint = "1269636549803".parse()?;
    let config = RunConfig::new(n.clone(), 4);
    let art = factor_pipeline(&config)?;

    println!(
        "N = {n}: four odd {}-bit factors, {} variables after folding",
        art.reduce.template.bit_len,
        art.reduce.reduced.fixed.len() + art.reduce.reduced.ordering.len(),
    );

    let bit_fixes: Vec<String> = art
        .reduce
        .reduced
        .fixed
        .iter()
        .filter(|(v, _)| v.to_string().starts_with(['p', 'q', 'r', 's']))
        .map(|(v, b)| format!("{v}={b}"))
        .collect();
    println!("\nfixed factor bits ({}):", bit_fixes.len());
    println!("  {}", bit_fixes.join(" "));

    println!("\nresidual system:");
    for e in &art.reduce.reduced.equations {
        println!("  {e} = 0");
    }

    println!(
        "\n{} qubits, success probability = {:.12}",
        art.hamiltonian.n_qubits(),
        art.success_probability
    );
    for tuple in &art.factors {
        let strs: Vec<String> = tuple.iter().map(|f| f.to_string()).collect();
        println!("{n} = {}", strs.join(" x "));
    }
    Ok(())
}
