//! Multilinear polynomials over binary variables with exact integer
//! coefficients.
//!
//! Variables only ever take values in {0,1}, so `x^2 = x` and every
//! monomial is a duplicate-free set of variables. All coefficient
//! arithmetic is arbitrary-precision; nothing in the reduction or
//! Hamiltonian path touches floating point.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable {0} has no assigned value")]
    MissingVariable(String),
    #[error("elementary symmetric index {k} out of range for {n} variables")]
    SymmetricIndexOutOfRange { k: usize, n: usize },
}

/// Identifier of a binary variable.
///
/// The variants order factor bits before intermediate digits and carries,
/// which is also the qubit assignment order used downstream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    /// Bit `pos` of factor number `factor` (0-based factor index,
    /// position 0 = least significant bit). `letter` is only for display.
    Bit { factor: u32, pos: u32, letter: char },
    /// Binary digit `col` of the intermediate product built at fold `stage`.
    Digit { stage: u32, col: u32 },
    /// Carry of weight `2^weight_log2` emitted by column `col` at `stage`.
    Carry { stage: u32, col: u32, weight_log2: u32 },
    /// Free-form variable, used by toy fixtures and tests.
    Named(String),
}

impl VarId {
    pub fn named(s: &str) -> Self {
        VarId::Named(s.to_string())
    }

    pub fn is_factor_bit(&self) -> bool {
        matches!(self, VarId::Bit { .. })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Bit { pos, letter, .. } => write!(f, "{letter}{pos}"),
            VarId::Digit { stage, col } => write!(f, "d{stage}_{col}"),
            VarId::Carry {
                stage,
                col,
                weight_log2,
            } => {
                write!(f, "z{weight_log2}{col}")?;
                for _ in 0..*stage {
                    write!(f, "'")?;
                }
                Ok(())
            }
            VarId::Named(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Product of distinct binary variables; the empty product is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![v])
    }

    /// Builds a monomial from arbitrary factors, sorting and de-duplicating.
    pub fn from_vars<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        let mut vs: Vec<VarId> = vars.into_iter().collect();
        vs.sort();
        vs.dedup();
        Monomial(vs)
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: &VarId) -> bool {
        self.0.binary_search(v).is_ok()
    }

    /// Merge under idempotence: union of the two variable sets.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut vs = Vec::with_capacity(self.0.len() + other.0.len());
        vs.extend_from_slice(&self.0);
        vs.extend_from_slice(&other.0);
        vs.sort();
        vs.dedup();
        Monomial(vs)
    }

    fn without(&self, v: &VarId) -> Monomial {
        Monomial(self.0.iter().filter(|x| *x != v).cloned().collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let names: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", names.join("*"))
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|v| v.to_string()))
    }
}

/// Multilinear polynomial: canonical map from monomial to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct BitPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Serialize for BitPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            coeff: String,
            vars: Vec<String>,
        }
        serializer.collect_seq(self.terms.iter().map(|(m, c)| Term {
            coeff: c.to_string(),
            vars: m.vars().iter().map(|v| v.to_string()).collect(),
        }))
    }
}

impl BitPoly {
    pub fn zero() -> Self {
        BitPoly::default()
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        let c: BigInt = c.into();
        let mut p = BitPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn one() -> Self {
        BitPoly::constant(1)
    }

    pub fn var(v: VarId) -> Self {
        BitPoly::from_term(Monomial::var(v), BigInt::one())
    }

    pub fn from_term(m: Monomial, c: BigInt) -> Self {
        let mut p = BitPoly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficient(&Monomial::one())
    }

    /// All variables occurring in the polynomial, sorted.
    pub fn support(&self) -> BTreeSet<VarId> {
        self.terms
            .keys()
            .flat_map(|m| m.vars().iter().cloned())
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &BitPoly) -> BitPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &BitPoly) -> BitPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BitPoly {
        BitPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> BitPoly {
        if k.is_zero() {
            return BitPoly::zero();
        }
        BitPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Distributive product with eager idempotent reduction.
    pub fn mul(&self, other: &BitPoly) -> BitPoly {
        let mut out = BitPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    /// Replaces every occurrence of `v` by the polynomial `r`.
    pub fn substitute(&self, v: &VarId, r: &BitPoly) -> BitPoly {
        let mut out = BitPoly::zero();
        for (m, c) in &self.terms {
            if m.contains(v) {
                let rest = BitPoly::from_term(m.without(v), c.clone());
                out = out.add(&rest.mul(r));
            } else {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    /// Substitutes `v := bit` for a constant bit value.
    pub fn assign(&self, v: &VarId, bit: u8) -> BitPoly {
        self.substitute(v, &BitPoly::constant(bit as i64))
    }

    /// Exact evaluation over a total {0,1} assignment of the support.
    pub fn evaluate(&self, assignment: &BTreeMap<VarId, u8>) -> Result<BigInt, PolyError> {
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut all_one = true;
            for v in m.vars() {
                match assignment.get(v) {
                    Some(0) => {
                        all_one = false;
                        break;
                    }
                    Some(_) => {}
                    None => return Err(PolyError::MissingVariable(v.to_string())),
                }
            }
            if all_one {
                total += c;
            }
        }
        Ok(total)
    }

    /// Sum of all k-subsets of `vars` as coefficient-1 monomials.
    pub fn elementary_symmetric(vars: &[VarId], k: usize) -> Result<BitPoly, PolyError> {
        if k > vars.len() {
            return Err(PolyError::SymmetricIndexOutOfRange { k, n: vars.len() });
        }
        let mut out = BitPoly::zero();
        for subset in (0..vars.len()).combinations(k) {
            let m = Monomial::from_vars(subset.into_iter().map(|i| vars[i].clone()));
            out.add_term(m, &BigInt::one());
        }
        Ok(out)
    }

    /// Upper bound over the binary cube: constant term plus every positive
    /// non-constant coefficient (each monomial ranges over {0, coeff}).
    pub fn cube_max(&self) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() || c.is_positive() {
                    c.clone()
                } else {
                    BigInt::zero()
                }
            })
            .sum()
    }

    /// Lower bound over the binary cube (constant plus negative coefficients).
    pub fn cube_min(&self) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() || c.is_negative() {
                    c.clone()
                } else {
                    BigInt::zero()
                }
            })
            .sum()
    }
}

impl fmt::Display for BitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}
