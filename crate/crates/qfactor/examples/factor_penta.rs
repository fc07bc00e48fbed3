//! Factor the penta composite N = 4375 = 5^4·7 with the reference
//! two-iteration plan.
//!
//! ```bash
//! cargo run --example factor_penta
//! ```

use num_bigint::BigUint;
use qfactor::pipeline::{factor_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::new(BigUint::from(4375u32), 5);
    // The minimal plan uses a single iteration; two iterations trade a
    // smaller rotation angle for an extra oracle call and stay exact.
    config.iterations = Some(2);
    let art = factor_pipeline(&config)?;

    println!("reduced system:");
    for e in &art.reduce.reduced.equations {
        println!("  {e} = 0");
    }

    println!("\ndiag = {:?}", art.hamiltonian.diag());
    println!("ground states = {:?}", art.ground_states);

    let plan = art.plan.as_ref().unwrap();
    println!(
        "\nplan: phi = {:.6}, theta = {:.6}, j = {}",
        plan.phi, plan.theta, plan.iterations
    );
    println!("success probability = {:.12}", art.success_probability);

    println!("\nsampled counts ({} shots, seed {}):", config.shots, config.seed);
    for (x, c) in &art.counts {
        println!("  |{x:04b}>  {c}");
    }

    for tuple in &art.factors {
        let strs: Vec<String> = tuple.iter().map(|f| f.to_string()).collect();
        println!("4375 = {}", strs.join(" x "));
    }
    Ok(())
}
