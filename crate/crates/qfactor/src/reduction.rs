//! Multiplication-table equation systems and their rule-based minimization.
//!
//! A factor template pins the leading and trailing bit of every factor to 1
//! (factors are odd, equal bit-length) and leaves the interior bits as
//! binary variables. The binary product is folded factor by factor; each
//! fold resolves column sums into a fresh digit variable plus power-of-two
//! carries, and the final fold equates columns with the bits of the
//! composite. Minimization shrinks the system with binary-arithmetic
//! deduction rules until only factor-bit variables survive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bitpoly::{BitPoly, Monomial, PolyError, VarId};

/// Support cap for the per-equation feasibility enumeration rule.
const LOCAL_ENUM_CAP: usize = 12;
/// Cap on free variables for exhaustive solution enumeration.
const BRUTE_FORCE_CAP: usize = 24;
/// Cap on interior bits per factor for the divisor-guided enumeration.
const DIVISOR_ENUM_CAP: u32 = 26;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("composite must be odd and greater than one")]
    CompositeNotOdd,
    #[error("factor count must be at least 2")]
    AlphaTooSmall,
    #[error("no equal-bit-length factorization is possible for this composite and factor count")]
    NoBitLength,
    #[error("bit length {0} is out of range for this composite")]
    BitLengthOutOfRange(u32),
    #[error("contradiction while minimizing: {0}")]
    Contradiction(String),
    #[error("too many free variables ({0}) for exhaustive enumeration")]
    TooManyVariables(usize),
    #[error("decoded factor product does not match the composite: {product} != {expected}")]
    ProductMismatch { product: BigUint, expected: BigUint },
    #[error("solution assignment is missing variable {0}")]
    MissingVariable(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Template for factoring `composite` into `alpha` odd factors of
/// `bit_len` bits each.
#[derive(Debug, Clone, Serialize)]
pub struct FactorTemplate {
    #[serde(serialize_with = "serialize_biguint")]
    pub composite: BigUint,
    pub alpha: u32,
    pub bit_len: u32,
}

fn serialize_biguint<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(n)
}

/// All bit lengths L such that `alpha` odd L-bit factors can multiply to `n`.
pub fn candidate_bitlengths(n: &BigUint, alpha: u32) -> Vec<u32> {
    let mut out = Vec::new();
    if alpha < 2 {
        return out;
    }
    for l in 2..=n.bits() as u32 {
        let lo = (BigUint::one() << (l - 1)) + BigUint::one();
        let hi = (BigUint::one() << l) - BigUint::one();
        let lo_pow = lo.pow(alpha);
        if &lo_pow > n {
            break;
        }
        if *n <= hi.pow(alpha) {
            out.push(l);
        }
    }
    out
}

impl FactorTemplate {
    pub fn new(composite: BigUint, alpha: u32, bit_len: u32) -> Result<Self, ReductionError> {
        if composite <= BigUint::one() || composite.is_even() {
            return Err(ReductionError::CompositeNotOdd);
        }
        if alpha < 2 {
            return Err(ReductionError::AlphaTooSmall);
        }
        if !candidate_bitlengths(&composite, alpha).contains(&bit_len) {
            return Err(ReductionError::BitLengthOutOfRange(bit_len));
        }
        Ok(FactorTemplate {
            composite,
            alpha,
            bit_len,
        })
    }

    /// Template with the smallest feasible bit length.
    pub fn infer(composite: BigUint, alpha: u32) -> Result<Self, ReductionError> {
        let ls = candidate_bitlengths(&composite, alpha);
        let l = *ls.first().ok_or(ReductionError::NoBitLength)?;
        FactorTemplate::new(composite, alpha, l)
    }

    pub fn factor_letter(&self, factor: u32) -> char {
        if self.alpha == 2 {
            if factor == 0 {
                'b'
            } else {
                'c'
            }
        } else {
            char::from(b'p' + (factor % 11) as u8)
        }
    }

    pub fn bit_var(&self, factor: u32, pos: u32) -> VarId {
        VarId::Bit {
            factor,
            pos,
            letter: self.factor_letter(factor),
        }
    }

    /// Digit polynomial of one factor at one bit position: pinned 1 at both
    /// ends, a fresh variable in the interior.
    pub fn digit_poly(&self, factor: u32, pos: u32) -> BitPoly {
        if pos == 0 || pos == self.bit_len - 1 {
            BitPoly::one()
        } else {
            BitPoly::var(self.bit_var(factor, pos))
        }
    }

    /// All interior-bit variables, sorted (factor-major, position-minor).
    pub fn free_vars(&self) -> Vec<VarId> {
        let mut vs = Vec::new();
        for f in 0..self.alpha {
            for pos in 1..self.bit_len.saturating_sub(1) {
                vs.push(self.bit_var(f, pos));
            }
        }
        vs.sort();
        vs
    }
}

/// One column of a fold: `lhs = rhs_const + Σ weight·var`.
///
/// `rhs_vars` holds the fresh digit (weight 1, intermediate stages only)
/// and the power-of-two carries emitted by this column.
#[derive(Debug, Clone, Serialize)]
pub struct ColumnEquation {
    pub stage: u32,
    pub column: u32,
    pub lhs: BitPoly,
    pub rhs_const: u8,
    pub rhs_vars: Vec<(VarId, u64)>,
}

impl ColumnEquation {
    /// Constraint form: `lhs - rhs_const - Σ weight·var = 0`.
    pub fn constraint(&self) -> BitPoly {
        let mut p = self.lhs.sub(&BitPoly::constant(self.rhs_const as i64));
        for (v, w) in &self.rhs_vars {
            p = p.sub(&BitPoly::var(v.clone()).scale(&BigInt::from(*w)));
        }
        p
    }
}

impl fmt::Display for ColumnEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs_const)?;
        for (v, w) in &self.rhs_vars {
            if *w == 1 {
                write!(f, " + {v}")?;
            } else {
                write!(f, " + {w}*{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationSystem {
    pub template: FactorTemplate,
    pub columns: Vec<ColumnEquation>,
}

/// One entry of the minimization log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deduction {
    pub rule: String,
    pub var: String,
    pub value: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedSystem {
    /// Surviving constraints, each `≡ 0`, over `ordering` only.
    pub equations: Vec<BitPoly>,
    /// Variable order used for qubit assignment (ascending VarId order).
    pub ordering: Vec<VarId>,
    /// Every variable fixed during minimization (carries, digits, bits).
    pub fixed: BTreeMap<VarId, u8>,
    pub deductions: Vec<Deduction>,
}

/// Builds the folded multiplication table for a template.
pub fn build_multiplication_table(t: &FactorTemplate) -> EquationSystem {
    let l = t.bit_len;
    let mut columns = Vec::new();
    let mut prefix: Vec<BitPoly> = (0..l).map(|p| t.digit_poly(0, p)).collect();

    for s in 1..t.alpha {
        let stage = s - 1;
        let final_stage = s == t.alpha - 1;
        let factor: Vec<BitPoly> = (0..l).map(|p| t.digit_poly(s, p)).collect();

        // Raw convolution of the running product with the next factor.
        let mut raw: Vec<BitPoly> = vec![BitPoly::zero(); prefix.len() + factor.len() - 1];
        for (i, a) in prefix.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                raw[i + j] = raw[i + j].add(&a.mul(b));
            }
        }

        let n_bits = t.composite.bits() as usize;
        let mut width = raw.len();
        if final_stage {
            width = width.max(n_bits);
        }
        let mut carry_in: BTreeMap<usize, Vec<VarId>> = BTreeMap::new();
        let mut next_prefix: Vec<BitPoly> = Vec::new();

        let mut k = 0;
        while k < width || carry_in.range(k..).next().is_some() {
            let mut lhs = raw.get(k).cloned().unwrap_or_else(BitPoly::zero);
            for v in carry_in.remove(&k).unwrap_or_default() {
                lhs = lhs.add(&BitPoly::var(v));
            }
            let max = lhs.cube_max();

            let mut rhs_vars = Vec::new();
            let rhs_const = if final_stage {
                t.composite.bit(k as u64) as u8
            } else {
                let d = VarId::Digit {
                    stage,
                    col: k as u32,
                };
                rhs_vars.push((d.clone(), 1u64));
                next_prefix.push(BitPoly::var(d));
                0
            };

            // Enough carry slots to absorb everything above the digit.
            let carry_top = max.bits().saturating_sub(1);
            for j in 1..=carry_top {
                let z = VarId::Carry {
                    stage,
                    col: k as u32,
                    weight_log2: j as u32,
                };
                rhs_vars.push((z.clone(), 1u64 << j));
                carry_in.entry(k + j as usize).or_default().push(z);
            }

            columns.push(ColumnEquation {
                stage,
                column: k as u32,
                lhs,
                rhs_const,
                rhs_vars,
            });
            k += 1;
        }

        if !final_stage {
            prefix = next_prefix;
        }
    }

    EquationSystem {
        template: t.clone(),
        columns,
    }
}

/// Fixpoint rule engine plus divisor-guided completion.
struct Minimizer<'a> {
    _template: &'a FactorTemplate,
    constraints: BTreeSet<BitPoly>,
    fixed: BTreeMap<VarId, u8>,
    log: Vec<Deduction>,
}

impl<'a> Minimizer<'a> {
    fn new(sys: &'a EquationSystem) -> Self {
        let constraints = sys
            .columns
            .iter()
            .map(|c| c.constraint())
            .filter(|p| !p.is_zero())
            .collect();
        Minimizer {
            _template: &sys.template,
            constraints,
            fixed: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    fn fix(&mut self, rule: &str, v: VarId, value: u8) -> Result<bool, ReductionError> {
        match self.fixed.get(&v) {
            Some(old) if *old != value => Err(ReductionError::Contradiction(format!(
                "variable {v} forced to both 0 and 1"
            ))),
            Some(_) => Ok(false),
            None => {
                self.log.push(Deduction {
                    rule: rule.to_string(),
                    var: v.to_string(),
                    value,
                });
                self.fixed.insert(v, value);
                Ok(true)
            }
        }
    }

    /// Forces a monomial value: 1 fixes every variable, 0 of a singleton
    /// fixes the variable, 0 of a product becomes a new constraint.
    ///
    /// Returns true only when a variable was newly fixed; queued
    /// constraints report progress through the insertion into the
    /// constraint set, so re-deriving a known constraint cannot loop.
    fn force_monomial(
        &mut self,
        rule: &str,
        m: &Monomial,
        value: u8,
        new_constraints: &mut Vec<BitPoly>,
    ) -> Result<bool, ReductionError> {
        if m.is_one() {
            if value == 0 {
                return Err(ReductionError::Contradiction(
                    "constant term forced to zero".into(),
                ));
            }
            return Ok(false);
        }
        let mut changed = false;
        if value == 1 {
            for v in m.vars() {
                changed |= self.fix(rule, v.clone(), 1)?;
            }
        } else if m.degree() == 1 {
            changed = self.fix(rule, m.vars()[0].clone(), 0)?;
        } else {
            new_constraints.push(BitPoly::from_term(m.clone(), BigInt::one()));
        }
        Ok(changed)
    }

    fn substitute_fixed(&mut self) -> Result<(), ReductionError> {
        let mut next = BTreeSet::new();
        for c in &self.constraints {
            let mut p = c.clone();
            for v in c.support() {
                if let Some(&b) = self.fixed.get(&v) {
                    p = p.assign(&v, b);
                }
            }
            if p.is_zero() {
                continue;
            }
            if p.support().is_empty() {
                return Err(ReductionError::Contradiction(format!(
                    "column equation residue {p} != 0"
                )));
            }
            next.insert(p);
        }
        self.constraints = next;
        Ok(())
    }

    /// Interval rule: a constraint pinned at its cube minimum or maximum
    /// forces every monomial (zero-sum R2 / saturation R3).
    fn interval_rule(&mut self, c: &BitPoly, new: &mut Vec<BitPoly>) -> Result<bool, ReductionError> {
        let min = c.cube_min();
        let max = c.cube_max();
        if min > BigInt::zero() || max < BigInt::zero() {
            return Err(ReductionError::Contradiction(format!(
                "equation {c} = 0 has range [{min}, {max}]"
            )));
        }
        let mut changed = false;
        if min.is_zero() || max.is_zero() {
            let (rule, pos_val) = if min.is_zero() { ("R2", 0) } else { ("R3", 1) };
            for (m, coeff) in c.terms() {
                if m.is_one() {
                    continue;
                }
                let value = if coeff > &BigInt::zero() { pos_val } else { 1 - pos_val };
                changed |= self.force_monomial(rule, m, value, new)?;
            }
        }
        Ok(changed)
    }

    /// Parity rule: modulo 2, a single odd-coefficient monomial must match
    /// the parity of the constant term.
    fn parity_rule(&mut self, c: &BitPoly, new: &mut Vec<BitPoly>) -> Result<bool, ReductionError> {
        let constant = c.constant_term();
        let odd: Vec<&Monomial> = c
            .terms()
            .filter(|(m, coeff)| !m.is_one() && coeff.is_odd())
            .map(|(m, _)| m)
            .collect();
        let const_odd = constant.is_odd();
        if odd.is_empty() {
            if const_odd {
                return Err(ReductionError::Contradiction(format!(
                    "equation {c} = 0 fails modulo 2"
                )));
            }
            return Ok(false);
        }
        if odd.len() == 1 {
            let m = odd[0].clone();
            return self.force_monomial("R6", &m, const_odd as u8, new);
        }
        Ok(false)
    }

    /// Per-equation feasibility enumeration over small supports; fixes any
    /// variable that takes the same value in every feasible assignment.
    fn local_enum_rule(&mut self, c: &BitPoly) -> Result<bool, ReductionError> {
        let support: Vec<VarId> = c.support().into_iter().collect();
        if support.len() > LOCAL_ENUM_CAP {
            return Ok(false);
        }
        let mut always: Option<u64> = None; // bitmask of values
        let mut varying: u64 = 0;
        let mut feasible = false;
        for mask in 0u64..(1 << support.len()) {
            let assignment: BTreeMap<VarId, u8> = support
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), ((mask >> i) & 1) as u8))
                .collect();
            if c.evaluate(&assignment)?.is_zero() {
                feasible = true;
                match always {
                    None => always = Some(mask),
                    Some(prev) => varying |= prev ^ mask,
                }
            }
        }
        if !feasible {
            return Err(ReductionError::Contradiction(format!(
                "equation {c} = 0 has no binary solution"
            )));
        }
        let base = always.unwrap();
        let mut changed = false;
        for (i, v) in support.iter().enumerate() {
            if varying >> i & 1 == 0 {
                changed |= self.fix("R7", v.clone(), (base >> i & 1) as u8)?;
            }
        }
        Ok(changed)
    }

    fn run_rules(&mut self) -> Result<(), ReductionError> {
        loop {
            self.substitute_fixed()?;
            let snapshot: Vec<BitPoly> = self.constraints.iter().cloned().collect();
            let mut new_constraints = Vec::new();
            let mut changed = false;
            for c in &snapshot {
                changed |= self.interval_rule(c, &mut new_constraints)?;
                changed |= self.parity_rule(c, &mut new_constraints)?;
                changed |= self.local_enum_rule(c)?;
            }
            for p in new_constraints {
                if !p.is_zero() {
                    changed |= self.constraints.insert(p);
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }
}

/// Divisor-guided enumeration of every tuple of odd `bit_len`-bit factors
/// (consistent with already-fixed bits) whose product is the composite.
fn enumerate_factor_tuples(
    t: &FactorTemplate,
    fixed: &BTreeMap<VarId, u8>,
) -> Result<Vec<Vec<BigUint>>, ReductionError> {
    let interior = t.bit_len.saturating_sub(2);
    if interior > DIVISOR_ENUM_CAP {
        return Err(ReductionError::TooManyVariables(interior as usize));
    }

    // Candidate values per factor.
    let mut candidates: Vec<Vec<BigUint>> = Vec::new();
    for f in 0..t.alpha {
        let mut vals = Vec::new();
        'mask: for mask in 0u64..(1u64 << interior) {
            let mut value = BigUint::one() + (BigUint::one() << (t.bit_len - 1));
            for pos in 1..=interior {
                let bit = (mask >> (pos - 1)) & 1;
                if let Some(&b) = fixed.get(&t.bit_var(f, pos)) {
                    if b as u64 != bit {
                        continue 'mask;
                    }
                }
                if bit == 1 {
                    value += BigUint::one() << pos;
                }
            }
            vals.push(value);
        }
        vals.sort();
        candidates.push(vals);
    }

    let mut out = Vec::new();
    let mut tuple: Vec<BigUint> = Vec::new();
    fn recurse(
        candidates: &[Vec<BigUint>],
        level: usize,
        remaining: &BigUint,
        tuple: &mut Vec<BigUint>,
        out: &mut Vec<Vec<BigUint>>,
    ) {
        if level == candidates.len() {
            if remaining.is_one() {
                out.push(tuple.clone());
            }
            return;
        }
        for v in &candidates[level] {
            if remaining.is_multiple_of(v) {
                tuple.push(v.clone());
                recurse(candidates, level + 1, &(remaining / v), tuple, out);
                tuple.pop();
            }
        }
    }
    recurse(&candidates, 0, &t.composite, &mut tuple, &mut out);
    Ok(out)
}

fn tuple_to_assignment(t: &FactorTemplate, tuple: &[BigUint]) -> BTreeMap<VarId, u8> {
    let mut a = BTreeMap::new();
    for (f, value) in tuple.iter().enumerate() {
        for pos in 1..t.bit_len.saturating_sub(1) {
            a.insert(t.bit_var(f as u32, pos), value.bit(pos as u64) as u8);
        }
    }
    a
}

/// Minimizes an equation system to a residual system over factor bits.
pub fn minimize(sys: &EquationSystem) -> Result<ReducedSystem, ReductionError> {
    let t = &sys.template;
    let mut m = Minimizer::new(sys);
    m.run_rules()?;

    // Complete with divisor-guided enumeration: the final-stage columns
    // force the factor product to equal the composite, so the solution set
    // projected to factor bits is exactly the set of factor tuples.
    let tuples = enumerate_factor_tuples(t, &m.fixed)?;
    if tuples.is_empty() {
        return Err(ReductionError::Contradiction(format!(
            "no factorization into {} odd {}-bit factors exists",
            t.alpha, t.bit_len
        )));
    }
    let solutions: Vec<BTreeMap<VarId, u8>> =
        tuples.iter().map(|tp| tuple_to_assignment(t, tp)).collect();

    let residual_is_factor_only = m
        .constraints
        .iter()
        .all(|c| c.support().iter().all(VarId::is_factor_bit));

    let mut free: Vec<VarId> = t
        .free_vars()
        .into_iter()
        .filter(|v| !m.fixed.contains_key(v))
        .collect();

    // Fix every free bit that is constant across all solutions.
    for v in free.clone() {
        let first = solutions[0][&v];
        if solutions.iter().all(|s| s[&v] == first) {
            m.fix("R8", v.clone(), first)?;
        }
    }
    free.retain(|v| !m.fixed.contains_key(v));
    m.substitute_fixed()?;

    let equations = if residual_is_factor_only {
        m.constraints.iter().cloned().collect()
    } else {
        canonical_equations(t, &free, &solutions)?
    };

    Ok(ReducedSystem {
        equations,
        ordering: free,
        fixed: m.fixed,
        deductions: m.log,
    })
}

/// Canonical presentation of the residual solution set: the elementary
/// symmetric constraints when they match, otherwise a single non-negative
/// indicator polynomial vanishing exactly on the solutions.
fn canonical_equations(
    t: &FactorTemplate,
    free: &[VarId],
    solutions: &[BTreeMap<VarId, u8>],
) -> Result<Vec<BitPoly>, ReductionError> {
    let m = free.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let points: BTreeSet<u64> = solutions
        .iter()
        .map(|s| {
            free.iter()
                .enumerate()
                .fold(0u64, |acc, (i, v)| acc | ((s[v] as u64) << i))
        })
        .collect();

    // Symmetric candidate: e_1 .. e_K with K = min(m, max(alpha-1, 2)).
    let k_top = m.min((t.alpha as usize - 1).max(2));
    if m <= BRUTE_FORCE_CAP {
        let mut eqs = Vec::new();
        let mut consistent = true;
        for k in 1..=k_top {
            let ek = BitPoly::elementary_symmetric(free, k)?;
            let vals: BTreeSet<BigInt> = points
                .iter()
                .map(|&pt| ek.evaluate(&point_assignment(free, pt)).unwrap())
                .collect();
            if vals.len() == 1 {
                let c = vals.into_iter().next().unwrap();
                eqs.push(ek.sub(&BitPoly::constant(c)));
            } else {
                consistent = false;
                break;
            }
        }
        if consistent {
            // Accept only if the candidate system has exactly the observed
            // solution set.
            let mut exact = true;
            for pt in 0u64..(1 << m) {
                let sat = eqs
                    .iter()
                    .all(|e| e.evaluate(&point_assignment(free, pt)).unwrap().is_zero());
                if sat != points.contains(&pt) {
                    exact = false;
                    break;
                }
            }
            if exact {
                return Ok(eqs);
            }
        }
    }

    // Indicator fallback: sum over non-solutions of the point indicator.
    if m > 20 {
        return Err(ReductionError::TooManyVariables(m));
    }
    let mut indicator = BitPoly::zero();
    for pt in 0u64..(1 << m) {
        if points.contains(&pt) {
            continue;
        }
        let mut prod = BitPoly::one();
        for (i, v) in free.iter().enumerate() {
            let lit = if pt >> i & 1 == 1 {
                BitPoly::var(v.clone())
            } else {
                BitPoly::one().sub(&BitPoly::var(v.clone()))
            };
            prod = prod.mul(&lit);
        }
        indicator = indicator.add(&prod);
    }
    Ok(vec![indicator])
}

fn point_assignment(vars: &[VarId], pt: u64) -> BTreeMap<VarId, u8> {
    vars.iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), (pt >> i & 1) as u8))
        .collect()
}

/// Elementary symmetric constraint family `e_k = c_k`, `k = 1..alpha-1`.
///
/// Case 1 pins (1, 0, ..., 0); case 2 pins (alpha-1, C(alpha,k)-C(alpha-1,k-1)).
pub fn symmetric_system(alpha: u32, case: u8) -> Vec<BitPoly> {
    let letters: Vec<char> = if alpha == 2 {
        vec!['b', 'c']
    } else {
        (0..alpha).map(|i| char::from(b'p' + (i % 11) as u8)).collect()
    };
    let vars: Vec<VarId> = (0..alpha)
        .map(|f| VarId::Bit {
            factor: f,
            pos: 1,
            letter: letters[f as usize],
        })
        .collect();
    let mut eqs = Vec::new();
    for k in 1..alpha as usize {
        let target: BigInt = match (case, k) {
            (1, 1) => BigInt::one(),
            (1, _) => BigInt::zero(),
            (_, 1) => BigInt::from(alpha - 1),
            (_, k) => binomial(alpha as u64, k as u64) - binomial(alpha as u64 - 1, k as u64 - 1),
        };
        let ek = BitPoly::elementary_symmetric(&vars, k).unwrap();
        eqs.push(ek.sub(&BitPoly::constant(target)));
    }
    eqs
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianMode {
    Paper,
    Sos,
}

/// Hamiltonian polynomial plus the bookkeeping needed to decode solutions.
#[derive(Debug, Clone)]
pub struct HamiltonianPoly {
    pub poly: BitPoly,
    /// Qubit order: qubit 0 is the first (most significant) variable.
    pub qubit_vars: Vec<VarId>,
    /// Variable eliminated through the linear sum equation, with its
    /// back-substitution expression.
    pub eliminated: Option<(VarId, BitPoly)>,
    pub mode_used: HamiltonianMode,
    /// Set when paper mode fell back to the sum-of-squares construction.
    pub fallback_notice: Option<String>,
}

/// Finds an all-unit-coefficient linear equation `Σ v - c = 0` and solves
/// it for its last variable.
fn linear_elimination(equations: &[BitPoly]) -> Option<(usize, VarId, BitPoly)> {
    for (idx, e) in equations.iter().enumerate() {
        if e.degree() != 1 {
            continue;
        }
        let ok = e
            .terms()
            .all(|(m, c)| m.is_one() || c == &BigInt::one());
        if !ok {
            continue;
        }
        let vars: Vec<VarId> = e.support().into_iter().collect();
        let target = vars.last()?.clone();
        // target = -constant - (sum of the others)
        let mut expr = BitPoly::constant(-e.constant_term());
        for v in &vars {
            if *v != target {
                expr = expr.sub(&BitPoly::var(v.clone()));
            }
        }
        return Some((idx, target, expr));
    }
    None
}

/// Combines the reduced equations into a single polynomial whose zero set
/// over binary points is the solution set.
pub fn hamiltonian_polynomial(
    rs: &ReducedSystem,
    mode: HamiltonianMode,
) -> Result<HamiltonianPoly, ReductionError> {
    let elim = linear_elimination(&rs.equations);

    if mode == HamiltonianMode::Paper {
        let alpha = rs.ordering.len() as u32;
        if (alpha == 4 || alpha == 5) && rs.equations == symmetric_case1_over(&rs.ordering) {
            let (_, target, expr) = elim.expect("case-1 system always has the sum equation");
            let qubit_vars: Vec<VarId> = rs
                .ordering
                .iter()
                .filter(|v| **v != target)
                .cloned()
                .collect();
            let e2 = BitPoly::elementary_symmetric(&qubit_vars, 2)?;
            let e3 = BitPoly::elementary_symmetric(&qubit_vars, 3)?;
            let poly = if alpha == 4 {
                e2.scale(&2.into()).add(&e3.scale(&5.into()))
            } else {
                let e4 = BitPoly::elementary_symmetric(&qubit_vars, 4)?;
                e2.scale(&2.into())
                    .add(&e3.scale(&18.into()))
                    .add(&e4.scale(&(-23).into()))
            };
            return Ok(HamiltonianPoly {
                poly,
                qubit_vars,
                eliminated: Some((target, expr)),
                mode_used: HamiltonianMode::Paper,
                fallback_notice: None,
            });
        }
        let mut out = hamiltonian_polynomial(rs, HamiltonianMode::Sos)?;
        out.fallback_notice = Some(
            "paper-mode combination is only pinned for the 4- and 5-factor symmetric systems; \
             using the sum-of-squares construction"
                .to_string(),
        );
        return Ok(out);
    }

    // Sum of squares, with one variable eliminated through the sum equation
    // when available.
    let mut equations: Vec<BitPoly> = rs.equations.clone();
    let mut qubit_vars = rs.ordering.clone();
    let mut eliminated = None;
    if let Some((idx, target, expr)) = elim {
        equations.remove(idx);
        equations = equations
            .iter()
            .map(|e| e.substitute(&target, &expr))
            .collect();
        qubit_vars.retain(|v| *v != target);
        eliminated = Some((target, expr));
    }
    let mut poly = BitPoly::zero();
    for e in &equations {
        poly = poly.add(&e.mul(e));
    }
    Ok(HamiltonianPoly {
        poly,
        qubit_vars,
        eliminated,
        mode_used: HamiltonianMode::Sos,
        fallback_notice: None,
    })
}

fn symmetric_case1_over(vars: &[VarId]) -> Vec<BitPoly> {
    let alpha = vars.len();
    let mut eqs = Vec::new();
    for k in 1..alpha {
        let target = if k == 1 { BigInt::one() } else { BigInt::zero() };
        eqs.push(
            BitPoly::elementary_symmetric(vars, k)
                .unwrap()
                .sub(&BitPoly::constant(target)),
        );
    }
    eqs
}

/// Exhaustive solutions of the reduced system over its free variables,
/// sorted ascending as bit vectors (first variable = most significant).
pub fn brute_force_solutions(rs: &ReducedSystem) -> Result<Vec<Vec<u8>>, ReductionError> {
    let m = rs.ordering.len();
    if m > BRUTE_FORCE_CAP {
        return Err(ReductionError::TooManyVariables(m));
    }
    let mut out = Vec::new();
    for pt in 0u64..(1 << m) {
        // Most significant bit first: variable i reads bit m-1-i.
        let assignment: BTreeMap<VarId, u8> = rs
            .ordering
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), (pt >> (m - 1 - i) & 1) as u8))
            .collect();
        let sat = rs
            .equations
            .iter()
            .all(|e| e.evaluate(&assignment).map(|v| v.is_zero()).unwrap_or(false));
        if sat {
            out.push(
                rs.ordering
                    .iter()
                    .map(|v| assignment[v])
                    .collect::<Vec<u8>>(),
            );
        }
    }
    Ok(out)
}

/// Reconstructs the factor values from one solution of the reduced system.
///
/// `solution` must assign every variable in `rs.ordering`; pinned and fixed
/// bits are filled in from the template and the deduction log.
pub fn decode_factors(
    solution: &BTreeMap<VarId, u8>,
    t: &FactorTemplate,
    rs: &ReducedSystem,
) -> Result<Vec<BigUint>, ReductionError> {
    let mut factors = Vec::new();
    for f in 0..t.alpha {
        let mut value = BigUint::one() + (BigUint::one() << (t.bit_len - 1));
        for pos in 1..t.bit_len.saturating_sub(1) {
            let v = t.bit_var(f, pos);
            let bit = match solution.get(&v).or_else(|| rs.fixed.get(&v)) {
                Some(&b) => b,
                None => return Err(ReductionError::MissingVariable(v.to_string())),
            };
            if bit == 1 {
                value += BigUint::one() << pos;
            }
        }
        factors.push(value);
    }
    let product: BigUint = factors.iter().product();
    if product != t.composite {
        return Err(ReductionError::ProductMismatch {
            product,
            expected: t.composite.clone(),
        });
    }
    Ok(factors)
}
