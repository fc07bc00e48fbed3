//! Tomography of the 875 search output: simulate all 27 measurement
//! settings, reconstruct the experimental density matrix by linear
//! inversion, and compute the fidelity against the theoretical one.
//!
//! ```bash
//! cargo run --example tomography_fidelity
//! ```

use num_bigint::BigUint;
use qfactor::pipeline::{tomography_pipeline, RunConfig};
use qfactor::tomography::stokes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::new(BigUint::from(875u32), 4);
    config.shots = 8192;
    config.seed = 7;
    let art = tomography_pipeline(&config)?;

    println!(
        "{} settings x {} shots (seed {})",
        art.records.len(),
        config.shots,
        config.seed
    );

    let expectations = stokes(&art.records)?;
    println!("\nselected Stokes parameters:");
    for name in ["III", "ZZZ", "XXZ", "ZII", "IZI", "IIZ"] {
        println!("  <{name}> = {:+.5}", expectations[name]);
    }

    println!("\nreconstructed EDM:");
    println!("{}", art.edm);
    println!("purity = {:.6}", art.edm.purity());
    println!("sampled fidelity F(EDM, TDM) = {:.6}", art.fidelity);

    // Shot count 0 switches to exact Born probabilities: the linear
    // inversion then returns the pure state itself.
    config.shots = 0;
    let exact = tomography_pipeline(&config)?;
    println!("exact-probability fidelity  = {:.12}", exact.fidelity);
    Ok(())
}
