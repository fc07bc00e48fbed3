//! Reduce the multiplication table of N = 875 = 5·5·5·7 to its minimal
//! symbolic equation system.
//!
//! ```bash
//! cargo run --example reduce_tetra
//! ```

use num_bigint::BigUint;
use qfactor::reduction::{build_multiplication_table, minimize, FactorTemplate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let template = FactorTemplate::infer(BigUint::from(875u32), 4)?;
    println!(
        "N = {}  as a product of {} odd {}-bit factors",
        template.composite, template.alpha, template.bit_len
    );

    let system = build_multiplication_table(&template);
    println!("\nfolded multiplication table ({} column equations):", system.columns.len());
    for col in &system.columns {
        println!("  {col}");
    }

    let reduced = minimize(&system)?;
    println!("\ndeductions ({}):", reduced.deductions.len());
    for d in &reduced.deductions {
        println!("  [{}] {} = {}", d.rule, d.var, d.value);
    }

    println!("\nminimal system over ({}):",
        reduced
            .ordering
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    for e in &reduced.equations {
        println!("  {e} = 0");
    }
    Ok(())
}
