//! Gate-level circuit representation, compilation of the phase oracle and
//! diffuser, dense unitary reconstruction, and OpenQASM 2.0 interchange.
//!
//! Global phases are recorded as circuit metadata and never gated; every
//! equivalence check is modulo global phase. Qubit 0 is the most
//! significant index bit, matching the Hamiltonian convention.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::hamiltonian::DiagonalHamiltonian;

/// Dense reconstruction cap: 2^12 × 2^12 complex entries.
const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("dense unitary reconstruction is capped at {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("QASM parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    Hadamard { target: usize },
    PauliX { target: usize },
    /// diag(1, e^{iφ}) on the target.
    PhaseU1 { target: usize, angle: f64 },
    /// Phase e^{iφ} when control and target are both 1.
    ControlledU1 { control: usize, target: usize, angle: f64 },
    ControlledNot { control: usize, target: usize },
    /// diag(e^{-iφ/2}, e^{iφ/2}) on the target.
    Rz { target: usize, angle: f64 },
    /// Phase e^{iφ} when every control and the target are 1; IR-level
    /// primitive, decomposed only at export time.
    MultiControlledU1 { controls: Vec<usize>, target: usize, angle: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Hadamard { target }
            | Gate::PauliX { target }
            | Gate::PhaseU1 { target, .. }
            | Gate::Rz { target, .. } => vec![*target],
            Gate::ControlledU1 { control, target, .. }
            | Gate::ControlledNot { control, target } => vec![*control, *target],
            Gate::MultiControlledU1 { controls, target, .. } => {
                let mut qs = controls.clone();
                qs.push(*target);
                qs
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GateCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Accumulated phase e^{i·global_phase} factored out of the gate list.
    pub global_phase: f64,
}

impl GateCircuit {
    pub fn new(n_qubits: usize) -> Self {
        GateCircuit {
            n_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.qubits().iter().all(|q| *q < self.n_qubits));
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Applies the circuit (including the global phase) to a state vector
    /// given as a mutable amplitude slice.
    pub fn apply(&self, amps: &mut [Complex64]) {
        assert_eq!(amps.len(), 1 << self.n_qubits);
        for g in &self.gates {
            apply_gate(g, amps, self.n_qubits);
        }
        if self.global_phase != 0.0 {
            let ph = Complex64::from_polar(1.0, self.global_phase);
            for a in amps.iter_mut() {
                *a *= ph;
            }
        }
    }
}

fn bit(index: usize, qubit: usize, n: usize) -> bool {
    index >> (n - 1 - qubit) & 1 == 1
}

fn apply_gate(g: &Gate, amps: &mut [Complex64], n: usize) {
    let dim = amps.len();
    match g {
        Gate::Hadamard { target } => {
            let stride = 1usize << (n - 1 - target);
            let s = 1.0 / 2.0f64.sqrt();
            for i in 0..dim {
                if i & stride == 0 {
                    let a = amps[i];
                    let b = amps[i | stride];
                    amps[i] = s * (a + b);
                    amps[i | stride] = s * (a - b);
                }
            }
        }
        Gate::PauliX { target } => {
            let stride = 1usize << (n - 1 - target);
            for i in 0..dim {
                if i & stride == 0 {
                    amps.swap(i, i | stride);
                }
            }
        }
        Gate::PhaseU1 { target, angle } => {
            let ph = Complex64::from_polar(1.0, *angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if bit(i, *target, n) {
                    *a *= ph;
                }
            }
        }
        Gate::ControlledU1 { control, target, angle } => {
            let ph = Complex64::from_polar(1.0, *angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if bit(i, *control, n) && bit(i, *target, n) {
                    *a *= ph;
                }
            }
        }
        Gate::ControlledNot { control, target } => {
            let stride = 1usize << (n - 1 - target);
            for i in 0..dim {
                if bit(i, *control, n) && i & stride == 0 {
                    amps.swap(i, i | stride);
                }
            }
        }
        Gate::Rz { target, angle } => {
            let lo = Complex64::from_polar(1.0, -angle / 2.0);
            let hi = Complex64::from_polar(1.0, angle / 2.0);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if bit(i, *target, n) { hi } else { lo };
            }
        }
        Gate::MultiControlledU1 { controls, target, angle } => {
            let ph = Complex64::from_polar(1.0, *angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if bit(i, *target, n) && controls.iter().all(|c| bit(i, *c, n)) {
                    *a *= ph;
                }
            }
        }
    }
}

/// Compiles `e^{-iĤθ}` from the Pauli-Z expansion: the identity term
/// becomes recorded global phase, singleton Z-supports become Rz gates,
/// larger supports get CNOT parity ladders around an Rz.
pub fn compile_phase_oracle(h: &DiagonalHamiltonian, theta: f64) -> GateCircuit {
    let expansion = h.pauli_coefficients();
    let n = h.n_qubits();
    let mut c = GateCircuit::new(n);
    for (mask, coeff) in expansion.coeffs() {
        let angle = 2.0 * coeff.to_f64().expect("coefficient fits in f64") * theta;
        let qubits: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        match qubits.as_slice() {
            [] => c.global_phase -= angle / 2.0,
            [q] => c.push(Gate::Rz { target: *q, angle }),
            many => {
                let target = *many.last().unwrap();
                for w in many.windows(2) {
                    c.push(Gate::ControlledNot { control: w[0], target: w[1] });
                }
                c.push(Gate::Rz { target, angle });
                for w in many.windows(2).rev() {
                    c.push(Gate::ControlledNot { control: w[0], target: w[1] });
                }
            }
        }
    }
    c
}

/// Compiles the diffuser `I + (e^{i·sign·θ} - 1)|ψ₀⟩⟨ψ₀|` as
/// `H^{⊗n} X^{⊗n} MCU1(sign·θ) X^{⊗n} H^{⊗n}`.
pub fn compile_diffuser(n: usize, theta: f64, sign: i8) -> GateCircuit {
    let angle = sign as f64 * theta;
    let mut c = GateCircuit::new(n);
    for q in 0..n {
        c.push(Gate::Hadamard { target: q });
    }
    for q in 0..n {
        c.push(Gate::PauliX { target: q });
    }
    if n == 1 {
        c.push(Gate::PhaseU1 { target: 0, angle });
    } else {
        c.push(Gate::MultiControlledU1 {
            controls: (0..n - 1).collect(),
            target: n - 1,
            angle,
        });
    }
    for q in 0..n {
        c.push(Gate::PauliX { target: q });
    }
    for q in 0..n {
        c.push(Gate::Hadamard { target: q });
    }
    c
}

/// Dense unitary of the circuit (global phase included), column by column.
pub fn circuit_unitary(c: &GateCircuit) -> Result<DMatrix<Complex64>, CircuitError> {
    if c.n_qubits > MAX_DENSE_QUBITS {
        return Err(CircuitError::TooManyQubits(c.n_qubits));
    }
    let dim = 1usize << c.n_qubits;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    let mut col = vec![Complex64::zero(); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|a| *a = Complex64::zero());
        col[j] = Complex64::new(1.0, 0.0);
        c.apply(&mut col);
        for (i, a) in col.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    Ok(u)
}

/// Exact decomposition of a multi-controlled U1 into the export gate set:
/// the conjunction phase is expanded over parities,
/// `θ·Πx_i = Σ_{∅≠S} (-1)^{|S|+1} 2^{1-m} θ · XOR_S(x)`,
/// each parity realized with a CNOT ladder around a u1 rotation.
///
/// The expansion is exact (no global-phase residue) but necessarily uses
/// 2^m - 1 phase rotations: a diagonal circuit built from u1/cu1/cx can
/// only accumulate as many Walsh components as it has phase gates, and
/// the conjunction has full Walsh support.
pub fn decompose_mcu1(controls: &[usize], target: usize, angle: f64) -> Vec<Gate> {
    let mut qubits: Vec<usize> = controls.to_vec();
    qubits.push(target);
    let m = qubits.len();
    if m == 1 {
        return vec![Gate::PhaseU1 { target, angle }];
    }
    if m == 2 {
        return vec![Gate::ControlledU1 { control: qubits[0], target, angle }];
    }
    let mut gates = Vec::new();
    for subset in 1u64..(1 << m) {
        let members: Vec<usize> = (0..m).filter(|i| subset >> i & 1 == 1).map(|i| qubits[i]).collect();
        let sub_angle = if members.len() % 2 == 1 { angle } else { -angle }
            / (1u64 << (m - 1)) as f64;
        if members.len() == 1 {
            gates.push(Gate::PhaseU1 { target: members[0], angle: sub_angle });
        } else {
            let t = *members.last().unwrap();
            for w in members.windows(2) {
                gates.push(Gate::ControlledNot { control: w[0], target: w[1] });
            }
            gates.push(Gate::PhaseU1 { target: t, angle: sub_angle });
            for w in members.windows(2).rev() {
                gates.push(Gate::ControlledNot { control: w[0], target: w[1] });
            }
        }
    }
    gates
}

/// Pretty-prints an angle as a rational multiple of pi when one matches
/// within 1e-12, decimal otherwise.
fn format_angle(a: f64) -> String {
    if a == 0.0 {
        return "0".to_string();
    }
    for denom in 1u64..=64 {
        let numer = (a * denom as f64 / PI).round();
        if numer.abs() <= 512.0
            && numer != 0.0
            && (numer * PI / denom as f64 - a).abs() < 1e-12
        {
            let g = gcd(numer.abs() as u64, denom);
            let (numer, denom) = (numer as i64 / g as i64, denom / g);
            return match (numer, denom) {
                (1, 1) => "pi".to_string(),
                (-1, 1) => "-pi".to_string(),
                (nu, 1) => format!("{nu}*pi"),
                (1, de) => format!("pi/{de}"),
                (-1, de) => format!("-pi/{de}"),
                (nu, de) => format!("{nu}*pi/{de}"),
            };
        }
    }
    format!("{a:.15}")
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// OpenQASM 2.0 export. Multi-controlled U1 gates are decomposed into the
/// {h, x, cx, u1, cu1, rz} set; the global phase is noted in a comment
/// (OpenQASM 2.0 cannot express it).
pub fn export_qasm(c: &GateCircuit, with_measurement: bool) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    if c.global_phase != 0.0 {
        let _ = writeln!(out, "// global phase: {:.15}", c.global_phase);
    }
    let _ = writeln!(out, "qreg q[{}];", c.n_qubits);
    if with_measurement {
        let _ = writeln!(out, "creg c[{}];", c.n_qubits);
    }
    let emit = |g: &Gate, out: &mut String| {
        let line = match g {
            Gate::Hadamard { target } => format!("h q[{target}];"),
            Gate::PauliX { target } => format!("x q[{target}];"),
            Gate::PhaseU1 { target, angle } => {
                format!("u1({}) q[{target}];", format_angle(*angle))
            }
            Gate::ControlledU1 { control, target, angle } => {
                format!("cu1({}) q[{control}],q[{target}];", format_angle(*angle))
            }
            Gate::ControlledNot { control, target } => {
                format!("cx q[{control}],q[{target}];")
            }
            Gate::Rz { target, angle } => {
                format!("rz({}) q[{target}];", format_angle(*angle))
            }
            Gate::MultiControlledU1 { .. } => unreachable!("decomposed before emission"),
        };
        out.push_str(&line);
        out.push('\n');
    };
    for g in &c.gates {
        match g {
            Gate::MultiControlledU1 { controls, target, angle } => {
                for sub in decompose_mcu1(controls, *target, *angle) {
                    emit(&sub, &mut out);
                }
            }
            other => emit(other, &mut out),
        }
    }
    if with_measurement {
        for q in 0..c.n_qubits {
            let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
        }
    }
    out
}

/// Parses the OpenQASM 2.0 subset produced by [`export_qasm`]: qreg/creg
/// declarations, the export gate set, measure statements, and `pi`
/// arithmetic in angle expressions.
pub fn import_qasm(text: &str) -> Result<GateCircuit, CircuitError> {
    let mut circuit = GateCircuit::new(0);
    let mut seen_qreg = false;
    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw.find("//") {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        for stmt in line.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse { line: line_no, message };
            if stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("qreg") {
                circuit.n_qubits = parse_reg_size(rest.trim())
                    .ok_or_else(|| err(format!("bad qreg declaration: {stmt}")))?;
                seen_qreg = true;
                continue;
            }
            if stmt.starts_with("creg") || stmt.starts_with("measure") || stmt.starts_with("barrier")
            {
                continue;
            }
            if !seen_qreg {
                return Err(err("gate before qreg declaration".to_string()));
            }
            let gate = parse_gate(stmt).map_err(|m| err(m))?;
            if gate.qubits().iter().any(|q| *q >= circuit.n_qubits) {
                return Err(err(format!("qubit index out of range in: {stmt}")));
            }
            circuit.gates.push(gate);
        }
    }
    if !seen_qreg {
        return Err(CircuitError::Parse {
            line: 0,
            message: "missing qreg declaration".to_string(),
        });
    }
    Ok(circuit)
}

fn parse_reg_size(s: &str) -> Option<usize> {
    // "q[5]" or "c[5]"
    let open = s.find('[')?;
    let close = s.find(']')?;
    s[open + 1..close].parse().ok()
}

fn parse_qubit(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let open = s.find('[').ok_or_else(|| format!("bad qubit ref: {s}"))?;
    let close = s.find(']').ok_or_else(|| format!("bad qubit ref: {s}"))?;
    s[open + 1..close]
        .parse()
        .map_err(|_| format!("bad qubit index: {s}"))
}

fn parse_gate(stmt: &str) -> Result<Gate, String> {
    let (head, args) = match stmt.find(char::is_whitespace) {
        Some(i) => (&stmt[..i], stmt[i..].trim()),
        None => return Err(format!("bad gate statement: {stmt}")),
    };
    let (name, angle) = match head.find('(') {
        Some(i) => {
            let close = head.rfind(')').ok_or_else(|| format!("unbalanced parens: {head}"))?;
            (&head[..i], Some(parse_angle(&head[i + 1..close])?))
        }
        None => (head, None),
    };
    let qubits: Vec<usize> = args
        .split(',')
        .map(parse_qubit)
        .collect::<Result<_, _>>()?;
    match (name, angle, qubits.as_slice()) {
        ("h", None, [t]) => Ok(Gate::Hadamard { target: *t }),
        ("x", None, [t]) => Ok(Gate::PauliX { target: *t }),
        ("u1", Some(a), [t]) => Ok(Gate::PhaseU1 { target: *t, angle: a }),
        ("rz", Some(a), [t]) => Ok(Gate::Rz { target: *t, angle: a }),
        ("cx", None, [c, t]) => Ok(Gate::ControlledNot { control: *c, target: *t }),
        ("cu1", Some(a), [c, t]) => Ok(Gate::ControlledU1 { control: *c, target: *t, angle: a }),
        _ => Err(format!("unsupported gate statement: {stmt}")),
    }
}

/// Tiny expression evaluator for angle text: numbers, `pi`, `+ - * /`,
/// unary minus, parentheses.
fn parse_angle(text: &str) -> Result<f64, String> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl<'a> P<'a> {
        fn skip(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn expr(&mut self) -> Result<f64, String> {
            let mut v = self.term()?;
            loop {
                self.skip();
                match self.s.get(self.i) {
                    Some(b'+') => {
                        self.i += 1;
                        v += self.term()?;
                    }
                    Some(b'-') => {
                        self.i += 1;
                        v -= self.term()?;
                    }
                    _ => return Ok(v),
                }
            }
        }
        fn term(&mut self) -> Result<f64, String> {
            let mut v = self.factor()?;
            loop {
                self.skip();
                match self.s.get(self.i) {
                    Some(b'*') => {
                        self.i += 1;
                        v *= self.factor()?;
                    }
                    Some(b'/') => {
                        self.i += 1;
                        v /= self.factor()?;
                    }
                    _ => return Ok(v),
                }
            }
        }
        fn factor(&mut self) -> Result<f64, String> {
            self.skip();
            match self.s.get(self.i) {
                Some(b'-') => {
                    self.i += 1;
                    Ok(-self.factor()?)
                }
                Some(b'(') => {
                    self.i += 1;
                    let v = self.expr()?;
                    self.skip();
                    if self.s.get(self.i) != Some(&b')') {
                        return Err("missing closing paren".to_string());
                    }
                    self.i += 1;
                    Ok(v)
                }
                Some(b'p') if self.s[self.i..].starts_with(b"pi") => {
                    self.i += 2;
                    Ok(PI)
                }
                Some(c) if c.is_ascii_digit() || *c == b'.' => {
                    let start = self.i;
                    while self.i < self.s.len()
                        && (self.s[self.i].is_ascii_digit()
                            || matches!(self.s[self.i], b'.' | b'e' | b'E')
                            || (matches!(self.s[self.i], b'+' | b'-')
                                && matches!(self.s[self.i - 1], b'e' | b'E')))
                    {
                        self.i += 1;
                    }
                    std::str::from_utf8(&self.s[start..self.i])
                        .unwrap()
                        .parse()
                        .map_err(|_| "bad number".to_string())
                }
                _ => Err(format!(
                    "unexpected token in angle: {}",
                    String::from_utf8_lossy(self.s)
                )),
            }
        }
    }
    let mut p = P {
        s: text.as_bytes(),
        i: 0,
    };
    let v = p.expr()?;
    p.skip();
    if p.i != p.s.len() {
        return Err(format!("trailing input in angle: {text}"));
    }
    Ok(v)
}

/// Maximum elementwise deviation between two unitaries after aligning
/// global phase on the largest entry of `a`.
pub fn unitary_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut pivot = (0usize, 0usize);
    let mut best = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)].norm() > best {
                best = a[(i, j)].norm();
                pivot = (i, j);
            }
        }
    }
    let phase = if b[pivot].norm() > 1e-14 {
        a[pivot] / b[pivot] / (a[pivot] / b[pivot]).norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut max = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            max = max.max((a[(i, j)] - b[(i, j)] * phase).norm());
        }
    }
    max
}

/// Elementwise `e^{-i·diag·θ}` reference unitary for oracle checks.
pub fn diagonal_exponential(h: &DiagonalHamiltonian, theta: f64) -> DMatrix<Complex64> {
    let dim = h.dim();
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..dim {
        let e = crate::hamiltonian::eigenvalue_to_f64(h.eigenvalue(x as u64));
        u[(x, x)] = Complex64::from_polar(1.0, -e * theta);
    }
    u
}
