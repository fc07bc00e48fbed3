//! Factorization of odd composites whose prime factors share a bit-length,
//! by reducing the binary multiplication table to a pseudo-Boolean system,
//! encoding its solutions as the kernel of a diagonal Hamiltonian, and
//! amplifying the kernel states with a phase-matched generalized Grover
//! search on an exact state-vector simulator.
//!
//! The pipeline, end to end:
//!
//! 1. [`reduction`] builds the column equations of the multiplication table
//!    and shrinks them with binary-arithmetic deduction rules.
//! 2. [`hamiltonian`] turns the resulting polynomial into a diagonal
//!    operator with its exact Pauli-Z expansion.
//! 3. [`grover`] plans the search angles and runs the simulation.
//! 4. [`circuit`] compiles oracle and diffuser to gates and exports
//!    OpenQASM 2.0.
//! 5. [`tomography`] simulates multi-basis measurement, reconstructs the
//!    density matrix and reports fidelity.
//!
//! See the crate `examples/` directory for one runnable program per
//! capability, or the `qfactor` binary for the command-line front end.

pub mod bitpoly;
pub mod circuit;
pub mod grover;
pub mod hamiltonian;
pub mod pipeline;
pub mod reduction;
pub mod tomography;
