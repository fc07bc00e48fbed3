//! Compare the two oracle conventions on N = 875.
//!
//! The projector oracle applies the matched phase only to kernel states and
//! reaches success probability 1. Taking the cost Hamiltonian exponential
//! e^{-iH·theta} literally gives excited states unequal phases instead of a
//! selective marking, and the success probability stalls at 17/32.
//!
//! ```bash
//! cargo run --example literal_vs_projector
//! ```

use num_bigint::BigUint;
use qfactor::grover::OracleMode;
use qfactor::pipeline::{factor_pipeline, tomography_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::new(BigUint::from(875u32), 4);
    config.shots = 0; // exact tomography

    for mode in [OracleMode::Projector, OracleMode::Literal] {
        config.oracle_mode = mode;
        let art = factor_pipeline(&config)?;
        println!("{mode:?} oracle:");
        println!("  success probability = {:.12}", art.success_probability);
        for (x, p) in art.state.probabilities().iter().enumerate() {
            println!("    |{x:03b}>  {p:.6}");
        }
        let tomo = tomography_pipeline(&config)?;
        println!("  exact TDM fidelity  = {:.12}", tomo.fidelity);
        println!();
    }

    println!("17/32        = {:.12}", 17.0 / 32.0);
    println!("sqrt(17/32)  = {:.12}", (17.0f64 / 32.0).sqrt());
    Ok(())
}
