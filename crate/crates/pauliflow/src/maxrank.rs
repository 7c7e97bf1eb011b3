//! Randomized rank maximization over GF(2) for matrices whose entries are
//! multi-affine expressions, each variable confined to one row or one
//! column.
//!
//! Under that confinement every minor determinant is multi-affine, so it
//! vanishes over GF(2) exactly when it vanishes over every extension
//! GF(2^k). Sampling a uniform valuation from a large enough extension
//! field and computing an exact rank therefore gives a one-sided test:
//! if no 0/1 valuation reaches the target rank the test never accepts,
//! and if one does it accepts with probability at least `1 - p` once
//! `2^k >= t/p` for `t` variables.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::field::{FieldContext, FieldElement, FieldMatrix};

/// Hard cap on the number of terms an expression may hold. The flow
/// application only ever builds four-term entries; the cap guards
/// generic use against exponential blowup.
const MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum MaxRankError {
    #[error("product would square variable {0:?}; expressions must stay multi-affine")]
    DegreeOverflow(VarId),
    #[error("expression exceeds {MAX_TERMS} terms")]
    TooManyTerms,
    #[error("variable {0:?} out of range for this matrix")]
    UnknownVariable(VarId),
    #[error("variable {var:?} appears at ({row}, {col}) outside its declared {confinement}")]
    ConfinementViolated { var: VarId, row: usize, col: usize, confinement: String },
    #[error("valuation missing variable {0:?}")]
    MissingValuation(VarId),
    #[error("error probability must lie in (0, 1/2], got {0}")]
    BadErrorProbability(f64),
    #[error("required extension degree {0} exceeds the supported 128")]
    FieldTooLarge(u32),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Index of a variable within one [`VarMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Where a variable is allowed to occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confinement {
    Row(usize),
    Col(usize),
}

impl std::fmt::Display for Confinement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Confinement::Row(r) => write!(f, "row {r}"),
            Confinement::Col(c) => write!(f, "column {c}"),
        }
    }
}

/// A multi-affine expression over GF(2) in XOR-of-products normal form.
///
/// Each term is a strictly sorted set of variables (the empty term is the
/// constant 1); a term's presence means coefficient 1. XOR of equal terms
/// cancels, which keeps the form canonical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr {
    terms: BTreeSet<Vec<VarId>>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn one() -> Expr {
        Expr { terms: BTreeSet::from([vec![]]) }
    }

    pub fn var(v: VarId) -> Expr {
        Expr { terms: BTreeSet::from([vec![v]]) }
    }

    pub fn constant(bit: bool) -> Expr {
        if bit {
            Expr::one()
        } else {
            Expr::zero()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> Option<bool> {
        match self.terms.len() {
            0 => Some(false),
            1 if self.terms.contains(&vec![]) => Some(true),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &[VarId]> {
        self.terms.iter().map(|t| t.as_slice())
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.iter().flatten().copied().collect()
    }

    /// XOR of two expressions; identical terms cancel.
    pub fn xor(&self, other: &Expr) -> Result<Expr, MaxRankError> {
        let mut terms = self.terms.clone();
        for t in &other.terms {
            if !terms.remove(t) {
                terms.insert(t.clone());
            }
        }
        if terms.len() > MAX_TERMS {
            return Err(MaxRankError::TooManyTerms);
        }
        Ok(Expr { terms })
    }

    /// Product of two expressions. Fails if any term pair shares a
    /// variable, which would take it outside the multi-affine form.
    pub fn mul(&self, other: &Expr) -> Result<Expr, MaxRankError> {
        let mut out = Expr::zero();
        for a in &self.terms {
            for b in &other.terms {
                let mut merged = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => {
                            merged.push(a[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            merged.push(b[j]);
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            return Err(MaxRankError::DegreeOverflow(a[i]));
                        }
                    }
                }
                merged.extend_from_slice(&a[i..]);
                merged.extend_from_slice(&b[j..]);
                if !out.terms.remove(&merged) {
                    out.terms.insert(merged);
                }
            }
        }
        if out.terms.len() > MAX_TERMS {
            return Err(MaxRankError::TooManyTerms);
        }
        Ok(out)
    }

    /// Substitutes a single variable by a constant bit.
    pub fn substitute(&self, v: VarId, bit: bool) -> Expr {
        let mut out = Expr::zero();
        for t in &self.terms {
            if let Some(pos) = t.iter().position(|&x| x == v) {
                if !bit {
                    continue; // term vanishes
                }
                let mut reduced = t.clone();
                reduced.remove(pos);
                if !out.terms.remove(&reduced) {
                    out.terms.insert(reduced);
                }
            } else if !out.terms.remove(t) {
                out.terms.insert(t.clone());
            }
        }
        out
    }

    /// Evaluates in the valuation's field.
    pub fn eval(&self, sigma: &Valuation) -> Result<FieldElement, MaxRankError> {
        let ctx = &sigma.ctx;
        let mut acc = FieldElement::ZERO;
        for t in &self.terms {
            let mut prod = FieldElement::ONE;
            for &v in t {
                let value = sigma.get(v).ok_or(MaxRankError::MissingValuation(v))?;
                prod = ctx.mul(prod, value);
                if prod.is_zero() {
                    break;
                }
            }
            acc = ctx.add(acc, prod);
        }
        Ok(acc)
    }

    /// Evaluates over GF(2) given 0/1 values for every variable.
    pub fn eval_gf2(&self, bits: &dyn Fn(VarId) -> bool) -> bool {
        let mut acc = false;
        for t in &self.terms {
            acc ^= t.iter().all(|&v| bits(v));
        }
        acc
    }
}

/// A total assignment of field elements to the variables of a matrix.
#[derive(Debug, Clone)]
pub struct Valuation {
    ctx: FieldContext,
    values: BTreeMap<VarId, FieldElement>,
}

impl Valuation {
    pub fn new(ctx: FieldContext) -> Valuation {
        Valuation { ctx, values: BTreeMap::new() }
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn set(&mut self, v: VarId, value: FieldElement) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<FieldElement> {
        self.values.get(&v).copied()
    }

    /// Uniform sample over the whole field for each listed variable:
    /// `k` independent bits per variable, in variable order.
    pub fn sample(ctx: FieldContext, vars: &[VarId], rng: &mut impl Rng) -> Valuation {
        let mut out = Valuation::new(ctx.clone());
        for &v in vars {
            let raw = ((rng.gen::<u64>() as u128) << 64) | rng.gen::<u64>() as u128;
            out.set(v, ctx.element(raw));
        }
        out
    }
}

/// A matrix of multi-affine expressions with per-variable row/column
/// confinement, the shape required for the randomized rank test.
#[derive(Debug, Clone)]
pub struct VarMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
    confinement: Vec<Confinement>,
}

impl VarMatrix {
    pub fn zero(rows: usize, cols: usize) -> VarMatrix {
        VarMatrix { rows, cols, entries: vec![Expr::zero(); rows * cols], confinement: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Registers a fresh variable confined to one row or column.
    pub fn new_var(&mut self, confinement: Confinement) -> VarId {
        let id = VarId(self.confinement.len() as u32);
        self.confinement.push(confinement);
        id
    }

    pub fn var_count(&self) -> usize {
        self.confinement.len()
    }

    pub fn var_confinement(&self, v: VarId) -> Option<Confinement> {
        self.confinement.get(v.0 as usize).copied()
    }

    /// All variables that still occur in some entry.
    pub fn live_variables(&self) -> BTreeSet<VarId> {
        self.entries.iter().flat_map(|e| e.variables()).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.cols + c]
    }

    /// Sets an entry, enforcing the confinement invariant for every
    /// variable the expression mentions.
    pub fn set(&mut self, r: usize, c: usize, e: Expr) -> Result<(), MaxRankError> {
        for v in e.variables() {
            let conf = self
                .var_confinement(v)
                .ok_or(MaxRankError::UnknownVariable(v))?;
            let ok = match conf {
                Confinement::Row(row) => row == r,
                Confinement::Col(col) => col == c,
            };
            if !ok {
                return Err(MaxRankError::ConfinementViolated {
                    var: v,
                    row: r,
                    col: c,
                    confinement: conf.to_string(),
                });
            }
        }
        self.entries[r * self.cols + c] = e;
        Ok(())
    }

    /// Rescans every entry against the declared confinement.
    pub fn validate_confinement(&self) -> Result<(), MaxRankError> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                for v in self.get(r, c).variables() {
                    let conf = self
                        .var_confinement(v)
                        .ok_or(MaxRankError::UnknownVariable(v))?;
                    let ok = match conf {
                        Confinement::Row(row) => row == r,
                        Confinement::Col(col) => col == c,
                    };
                    if !ok {
                        return Err(MaxRankError::ConfinementViolated {
                            var: v,
                            row: r,
                            col: c,
                            confinement: conf.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Substitutes a variable by a constant everywhere.
    pub fn substitute(&mut self, v: VarId, bit: bool) {
        for e in &mut self.entries {
            *e = e.substitute(v, bit);
        }
    }

    /// Entry-wise evaluation under a total valuation.
    pub fn evaluate(&self, sigma: &Valuation) -> Result<FieldMatrix, MaxRankError> {
        let mut out = FieldMatrix::zero(self.rows, self.cols, sigma.ctx().clone());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).eval(sigma)?);
            }
        }
        Ok(out)
    }
}

/// Smallest extension degree k with `2^k * p >= t`, floored at 1.
/// Multiplying an f64 by two is exact, so the loop is dust-free.
pub fn extension_degree(t: usize, p: f64) -> Result<u32, MaxRankError> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(MaxRankError::BadErrorProbability(p));
    }
    if t == 0 {
        return Ok(1);
    }
    let mut k = 1u32;
    let mut scale = 2.0 * p;
    while scale < t as f64 {
        k += 1;
        scale *= 2.0;
        if k > 128 {
            return Err(MaxRankError::FieldTooLarge(k));
        }
    }
    Ok(k)
}

/// One round of the randomized rank test: samples a uniform valuation from
/// GF(2^k) with `k = max(1, ceil(log2(t/p)))` and reports whether the
/// evaluated matrix has rank at least `r`.
///
/// Never accepts when no 0/1 valuation reaches rank `r`; accepts with
/// probability at least `1 - p` when one does. A constant matrix (t = 0)
/// is decided exactly over GF(2).
pub fn rank_at_least(
    m: &VarMatrix,
    r: usize,
    p: f64,
    rng: &mut impl Rng,
) -> Result<bool, MaxRankError> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(MaxRankError::BadErrorProbability(p));
    }
    m.validate_confinement()?;
    if r == 0 {
        return Ok(true);
    }
    if r > m.rows().min(m.cols()) {
        return Ok(false);
    }
    let vars: Vec<VarId> = m.live_variables().into_iter().collect();
    let k = extension_degree(vars.len(), p)?;
    let ctx = FieldContext::new(k)?;
    let sigma = Valuation::sample(ctx, &vars, rng);
    let evaluated = m.evaluate(&sigma)?;
    Ok(evaluated.rank() >= r)
}

/// Like [`rank_at_least`] but also reports the extension degree and
/// variable count used, for diagnostics.
pub fn rank_at_least_with_info(
    m: &VarMatrix,
    r: usize,
    p: f64,
    rng: &mut impl Rng,
) -> Result<(bool, u32, usize), MaxRankError> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(MaxRankError::BadErrorProbability(p));
    }
    m.validate_confinement()?;
    let vars: Vec<VarId> = m.live_variables().into_iter().collect();
    let k = extension_degree(vars.len(), p)?;
    if r == 0 {
        return Ok((true, k, vars.len()));
    }
    if r > m.rows().min(m.cols()) {
        return Ok((false, k, vars.len()));
    }
    let ctx = FieldContext::new(k)?;
    let sigma = Valuation::sample(ctx, &vars, rng);
    let evaluated = m.evaluate(&sigma)?;
    Ok((evaluated.rank() >= r, k, vars.len()))
}
