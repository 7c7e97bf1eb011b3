//! Pauli-flow verification, focussed-flow verification, flow matrices,
//! flow extraction from right inverses, and label simplification.
//!
//! A Pauli flow is a pair `(c, <)` of a correction function from
//! non-outputs to sets of non-inputs and a strict partial order on
//! non-outputs. Verification checks the nine definitional conditions
//! P1-P9 for every non-output; a focussed flow additionally satisfies
//! F1-F3, which constrain what correction sets and their odd
//! neighbourhoods may contain. Conditions on a vertex `v` only apply
//! where `v` carries a label; outputs are never measured and are exempt.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::gf2::Gf2Matrix;
use crate::graph::{Labelling, MeasLabel, OpenGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("labelling is not total on the non-outputs")]
    LabellingNotTotal,
    #[error("labelling uses {found} where only {expected} are allowed")]
    LabelOutsideCodomain { expected: &'static str, found: MeasLabel },
    #[error("correction function undefined on non-output {0:?}")]
    MissingCorrection(String),
    #[error("correction set defined on output {0:?}")]
    CorrectionOnOutput(String),
    #[error("correction set of {0:?} contains input {1:?}")]
    CorrectionUsesInput(String, String),
    #[error("order relation involves output {0:?}")]
    OrderOnOutput(String),
    #[error("order relations contain a cycle")]
    OrderCyclic,
    #[error("witness matrix is {rows}x{cols}, expected {want_rows}x{want_cols}")]
    DimensionMismatch { rows: usize, cols: usize, want_rows: usize, want_cols: usize },
    #[error("flow is not focussed: {0} violations")]
    NotFocussed(usize),
    #[error("internal flow invariant broken during {0}")]
    Internal(&'static str),
}

/// Identifiers for the flow conditions a verification can report against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    F1,
    F2,
    F3,
    /// Witness product entry differs from the identity matrix.
    Product,
    /// The XY-restricted witness digraph has a cycle.
    Acyclicity,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::P1 => "P1",
            Condition::P2 => "P2",
            Condition::P3 => "P3",
            Condition::P4 => "P4",
            Condition::P5 => "P5",
            Condition::P6 => "P6",
            Condition::P7 => "P7",
            Condition::P8 => "P8",
            Condition::P9 => "P9",
            Condition::F1 => "F1",
            Condition::F2 => "F2",
            Condition::F3 => "F3",
            Condition::Product => "product",
            Condition::Acyclicity => "acyclicity",
        };
        f.write_str(s)
    }
}

/// One failed condition, with the vertex pair it failed at. Conditions
/// about a single vertex repeat it in both slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    pub u: usize,
    pub v: usize,
}

/// A correction function plus a strict partial order, stored as the direct
/// (uncomposed) relations; queries go through the transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFlow {
    corrections: BTreeMap<usize, BTreeSet<usize>>,
    order: BTreeSet<(usize, usize)>,
}

impl PauliFlow {
    /// Builds a flow, rejecting reflexive or cyclic order relations.
    pub fn new(
        corrections: BTreeMap<usize, BTreeSet<usize>>,
        order: BTreeSet<(usize, usize)>,
    ) -> Result<PauliFlow, FlowError> {
        if has_cycle(&order) {
            return Err(FlowError::OrderCyclic);
        }
        Ok(PauliFlow { corrections, order })
    }

    pub fn corrections(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.corrections
    }

    pub fn correction(&self, v: usize) -> Option<&BTreeSet<usize>> {
        self.corrections.get(&v)
    }

    /// The direct order relations (u, v) meaning u comes before v.
    pub fn order_relations(&self) -> &BTreeSet<(usize, usize)> {
        &self.order
    }

    /// Transitive closure of the order.
    pub fn order_closure(&self) -> BTreeSet<(usize, usize)> {
        transitive_closure(&self.order)
    }
}

fn has_cycle(edges: &BTreeSet<(usize, usize)>) -> bool {
    if edges.iter().any(|&(u, v)| u == v) {
        return true;
    }
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    for &(u, v) in edges {
        succ.entry(u).or_default().push(v);
        nodes.insert(u);
        nodes.insert(v);
    }
    // colours: 0 unseen, 1 on stack, 2 done
    let mut colour: BTreeMap<usize, u8> = BTreeMap::new();
    fn visit(
        n: usize,
        succ: &BTreeMap<usize, Vec<usize>>,
        colour: &mut BTreeMap<usize, u8>,
    ) -> bool {
        match colour.get(&n) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        colour.insert(n, 1);
        if let Some(next) = succ.get(&n) {
            for &m in next {
                if visit(m, succ, colour) {
                    return true;
                }
            }
        }
        colour.insert(n, 2);
        false
    }
    nodes.iter().any(|&n| visit(n, &succ, &mut colour))
}

fn transitive_closure(edges: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(u, v) in edges {
        succ.entry(u).or_default().insert(v);
    }
    let nodes: Vec<usize> = succ.keys().copied().collect();
    let mut closure = BTreeSet::new();
    for &start in &nodes {
        let mut stack: Vec<usize> = succ[&start].iter().copied().collect();
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            closure.insert((start, n));
            if let Some(next) = succ.get(&n) {
                stack.extend(next.iter().copied());
            }
        }
    }
    closure
}

/// Common validation shared by the verifiers: total labelling, correction
/// function defined exactly on non-outputs with sets inside non-inputs,
/// order confined to non-outputs.
fn validate_flow_shape(
    g: &OpenGraph,
    l: &Labelling,
    f: &PauliFlow,
) -> Result<(), FlowError> {
    if !l.is_total(g) {
        return Err(FlowError::LabellingNotTotal);
    }
    for v in g.non_outputs() {
        if !f.corrections.contains_key(&v) {
            return Err(FlowError::MissingCorrection(g.name(v).to_owned()));
        }
    }
    for (&v, set) in &f.corrections {
        if g.is_output(v) {
            return Err(FlowError::CorrectionOnOutput(g.name(v).to_owned()));
        }
        if let Some(&bad) = set.iter().find(|&&u| g.is_input(u)) {
            return Err(FlowError::CorrectionUsesInput(
                g.name(v).to_owned(),
                g.name(bad).to_owned(),
            ));
        }
    }
    for &(u, v) in &f.order {
        if g.is_output(u) {
            return Err(FlowError::OrderOnOutput(g.name(u).to_owned()));
        }
        if g.is_output(v) {
            return Err(FlowError::OrderOnOutput(g.name(v).to_owned()));
        }
    }
    Ok(())
}

/// Checks the nine Pauli-flow conditions for every non-output. An empty
/// violation list means the flow is valid.
pub fn verify_pauli_flow(
    g: &OpenGraph,
    l: &Labelling,
    f: &PauliFlow,
) -> Result<Vec<Violation>, FlowError> {
    validate_flow_shape(g, l, f)?;
    let closure = f.order_closure();
    let prec = |u: usize, v: usize| closure.contains(&(u, v));
    let mut violations = Vec::new();
    for u in g.non_outputs() {
        let cu = &f.corrections[&u];
        let odd = g.odd_neighbourhood(cu);
        for &v in cu {
            if v != u && !g.is_output(v) && !matches!(l.get(v), Some(MeasLabel::X | MeasLabel::Y)) && !prec(u, v) {
                violations.push(Violation { condition: Condition::P1, u, v });
            }
        }
        for &v in &odd {
            if v != u && !g.is_output(v) && !matches!(l.get(v), Some(MeasLabel::Y | MeasLabel::Z)) && !prec(u, v) {
                violations.push(Violation { condition: Condition::P2, u, v });
            }
        }
        for v in g.non_outputs() {
            if v != u
                && !prec(u, v)
                && l.get(v) == Some(MeasLabel::Y)
                && (cu.contains(&v) != odd.contains(&v))
            {
                violations.push(Violation { condition: Condition::P3, u, v });
            }
        }
        let in_c = cu.contains(&u);
        let in_odd = odd.contains(&u);
        let self_condition = match l.get(u).expect("labelling is total") {
            MeasLabel::XY => (!in_c && in_odd, Condition::P4),
            MeasLabel::XZ => (in_c && in_odd, Condition::P5),
            MeasLabel::YZ => (in_c && !in_odd, Condition::P6),
            MeasLabel::X => (in_odd, Condition::P7),
            MeasLabel::Z => (in_c, Condition::P8),
            MeasLabel::Y => (in_c ^ in_odd, Condition::P9),
        };
        if !self_condition.0 {
            violations.push(Violation { condition: self_condition.1, u, v: u });
        }
    }
    Ok(violations)
}

/// Checks P1-P9 plus the focussing conditions F1-F3.
pub fn verify_focussed(
    g: &OpenGraph,
    l: &Labelling,
    f: &PauliFlow,
) -> Result<Vec<Violation>, FlowError> {
    let mut violations = verify_pauli_flow(g, l, f)?;
    for v in g.non_outputs() {
        let cv = &f.corrections[&v];
        let odd = g.odd_neighbourhood(cv);
        for &w in cv {
            if w != v
                && !g.is_output(w)
                && !matches!(l.get(w), Some(MeasLabel::XY | MeasLabel::X | MeasLabel::Y))
            {
                violations.push(Violation { condition: Condition::F1, u: v, v: w });
            }
        }
        for &w in &odd {
            if w != v
                && !g.is_output(w)
                && !matches!(
                    l.get(w),
                    Some(MeasLabel::XZ | MeasLabel::YZ | MeasLabel::Y | MeasLabel::Z)
                )
            {
                violations.push(Violation { condition: Condition::F2, u: v, v: w });
            }
        }
        for w in g.non_outputs() {
            if w != v && l.get(w) == Some(MeasLabel::Y) && (cv.contains(&w) != odd.contains(&w)) {
                violations.push(Violation { condition: Condition::F3, u: v, v: w });
            }
        }
    }
    Ok(violations)
}

/// Collects every order relation forced by P1, P2 and the contrapositive
/// of P3 for the given correction function, and returns the flow with that
/// minimal order. `None` when the forced relations are cyclic, in which
/// case no order can complete `c` into a flow.
pub fn infer_forced_order(
    g: &OpenGraph,
    l: &Labelling,
    corrections: &BTreeMap<usize, BTreeSet<usize>>,
) -> Result<Option<PauliFlow>, FlowError> {
    if !l.is_total(g) {
        return Err(FlowError::LabellingNotTotal);
    }
    for v in g.non_outputs() {
        if !corrections.contains_key(&v) {
            return Err(FlowError::MissingCorrection(g.name(v).to_owned()));
        }
    }
    let mut forced = BTreeSet::new();
    for u in g.non_outputs() {
        let cu = &corrections[&u];
        let odd = g.odd_neighbourhood(cu);
        for &v in cu {
            if v != u && !g.is_output(v) && !matches!(l.get(v), Some(MeasLabel::X | MeasLabel::Y)) {
                forced.insert((u, v));
            }
        }
        for &v in &odd {
            if v != u && !g.is_output(v) && !matches!(l.get(v), Some(MeasLabel::Y | MeasLabel::Z)) {
                forced.insert((u, v));
            }
        }
        for v in g.non_outputs() {
            if v != u && l.get(v) == Some(MeasLabel::Y) && (cu.contains(&v) != odd.contains(&v)) {
                forced.insert((u, v));
            }
        }
    }
    match PauliFlow::new(corrections.clone(), forced) {
        Ok(f) => Ok(Some(f)),
        Err(FlowError::OrderCyclic) => Ok(None),
        Err(e) => Err(e),
    }
}

fn require_xz(g: &OpenGraph, l: &Labelling) -> Result<(), FlowError> {
    if !l.is_total(g) {
        return Err(FlowError::LabellingNotTotal);
    }
    if let Some((_, bad)) = l.iter().find(|(_, m)| !matches!(m, MeasLabel::X | MeasLabel::Z)) {
        return Err(FlowError::LabelOutsideCodomain { expected: "X and Z", found: bad });
    }
    Ok(())
}

/// The flow matrix of an X/Z-labelled open graph: the reduced adjacency
/// matrix with every Z-labelled vertex disconnected, plus a 1 where a
/// Z vertex's row and column cross. Right-invertibility of this matrix
/// characterizes flow existence for such labellings.
pub fn flow_matrix(g: &OpenGraph, l: &Labelling) -> Result<Gf2Matrix, FlowError> {
    require_xz(g, l)?;
    let zset: BTreeSet<usize> =
        l.iter().filter(|&(_, m)| m == MeasLabel::Z).map(|(v, _)| v).collect();
    let rows = g.non_outputs();
    let cols = g.non_inputs();
    let m = Gf2Matrix::build(rows.len(), cols.len(), |r, c| {
        let (u, w) = (rows[r], cols[c]);
        if zset.contains(&u) || zset.contains(&w) {
            u == w
        } else {
            g.has_edge(u, w)
        }
    });
    Ok(m.with_labels(
        rows.iter().map(|&v| g.name(v).to_owned()).collect(),
        cols.iter().map(|&v| g.name(v).to_owned()).collect(),
    ))
}

/// Reads correction sets off the columns of a right inverse: column `v`
/// is the characteristic vector of `c(v)` over the non-inputs.
fn corrections_from_columns(
    g: &OpenGraph,
    n: &Gf2Matrix,
) -> BTreeMap<usize, BTreeSet<usize>> {
    let rows = g.non_inputs();
    let cols = g.non_outputs();
    let mut corrections = BTreeMap::new();
    for (j, &v) in cols.iter().enumerate() {
        let set: BTreeSet<usize> =
            rows.iter().enumerate().filter(|&(i, _)| n.get(i, j)).map(|(_, &u)| u).collect();
        corrections.insert(v, set);
    }
    corrections
}

/// Extracts a focussed Pauli flow from an X/Z labelling, or `None` when
/// the flow matrix has no right inverse (equivalently, no flow exists).
///
/// The raw column sets of the right inverse satisfy the flow conditions
/// relative to the disconnected graph; a focussing pass then absorbs, for
/// every Z-labelled vertex, the corrections of the X-labelled vertices
/// left in its odd neighbourhood. The result passes [`verify_focussed`]
/// with the empty order.
pub fn extract_flow(g: &OpenGraph, l: &Labelling) -> Result<Option<PauliFlow>, FlowError> {
    let m = flow_matrix(g, l)?;
    let Some(n) = m.right_inverse() else {
        return Ok(None);
    };
    let mut corrections = corrections_from_columns(g, &n);
    let zs: Vec<usize> =
        l.iter().filter(|&(_, m)| m == MeasLabel::Z).map(|(v, _)| v).collect();
    for v in zs {
        let odd = g.odd_neighbourhood(&corrections[&v]);
        let offenders: Vec<usize> = odd
            .iter()
            .copied()
            .filter(|&w| w != v && !g.is_output(w) && l.get(w) == Some(MeasLabel::X))
            .collect();
        if offenders.is_empty() {
            continue;
        }
        let mut fixed = corrections[&v].clone();
        for w in offenders {
            fixed = fixed.symmetric_difference(&corrections[&w]).copied().collect();
        }
        corrections.insert(v, fixed);
    }
    let flow = PauliFlow::new(corrections, BTreeSet::new())?;
    debug_assert!(
        verify_focussed(g, l, &flow).map(|v| v.is_empty()).unwrap_or(false),
        "extracted flow must be focussed"
    );
    Ok(Some(flow))
}

/// Outcome of the X/XY witness check.
#[derive(Debug)]
pub enum WitnessCheck {
    /// Both conditions hold; carries the flow derived from the witness
    /// columns with the forced order.
    Valid(PauliFlow),
    Invalid(Vec<Violation>),
}

/// The XY-restricted witness digraph: edges (u, v) with entry (u, v) set
/// and u labelled XY. Only these edges constrain the measurement order.
pub fn xy_witness_edges(
    g: &OpenGraph,
    l: &Labelling,
    n: &Gf2Matrix,
) -> Vec<(usize, usize)> {
    let rows = g.non_inputs();
    let cols = g.non_outputs();
    let mut edges = Vec::new();
    for (i, &u) in rows.iter().enumerate() {
        if l.get(u) != Some(MeasLabel::XY) {
            continue;
        }
        for (j, &v) in cols.iter().enumerate() {
            if n.get(i, j) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Checks a candidate right inverse `n` as a flow witness for an X/XY
/// labelling: the product with the reduced adjacency matrix must be the
/// identity and the XY-restricted digraph acyclic. On success the
/// correction sets read off the columns, with the forced order, form a
/// focussed Pauli flow.
pub fn verify_dag_witness(
    g: &OpenGraph,
    l: &Labelling,
    n: &Gf2Matrix,
) -> Result<WitnessCheck, FlowError> {
    if !l.is_total(g) {
        return Err(FlowError::LabellingNotTotal);
    }
    if let Some((_, bad)) = l.iter().find(|(_, m)| !matches!(m, MeasLabel::X | MeasLabel::XY)) {
        return Err(FlowError::LabelOutsideCodomain { expected: "X and XY", found: bad });
    }
    let non_inputs = g.non_inputs();
    let non_outputs = g.non_outputs();
    if n.rows() != non_inputs.len() || n.cols() != non_outputs.len() {
        return Err(FlowError::DimensionMismatch {
            rows: n.rows(),
            cols: n.cols(),
            want_rows: non_inputs.len(),
            want_cols: non_outputs.len(),
        });
    }
    let mut violations = Vec::new();
    let product = g.reduced_adjacency_matrix().mul(n);
    for r in 0..product.rows() {
        for c in 0..product.cols() {
            if product.get(r, c) != (r == c) {
                violations.push(Violation {
                    condition: Condition::Product,
                    u: non_outputs[r],
                    v: non_outputs[c],
                });
            }
        }
    }
    let xy_edges: BTreeSet<(usize, usize)> = xy_witness_edges(g, l, n).into_iter().collect();
    if has_cycle(&xy_edges) {
        let &(u, v) = xy_edges.iter().next().expect("cycle needs an edge");
        violations.push(Violation { condition: Condition::Acyclicity, u, v });
    }
    if !violations.is_empty() {
        return Ok(WitnessCheck::Invalid(violations));
    }
    let corrections = corrections_from_columns(g, n);
    let flow = infer_forced_order(g, l, &corrections)?
        .ok_or(FlowError::Internal("witness order extraction"))?;
    let check = verify_focussed(g, l, &flow)?;
    if !check.is_empty() {
        return Err(FlowError::Internal("witness flow verification"));
    }
    Ok(WitnessCheck::Valid(flow))
}

/// Collapses planar labels onto Pauli ones: XY and XZ become X, YZ becomes
/// Z. Any flow of the original labelling remains a flow afterwards, since
/// each planar condition includes the requirements of the Pauli target.
pub fn simplify_planar_labels(l: &Labelling) -> Labelling {
    let mut out = Labelling::empty();
    for (v, m) in l.iter() {
        let simplified = match m {
            MeasLabel::XY | MeasLabel::XZ => MeasLabel::X,
            MeasLabel::YZ => MeasLabel::Z,
            pauli => pauli,
        };
        out.set(v, simplified);
    }
    out
}

/// Removes Y labels one vertex at a time, preserving a focussed flow.
///
/// A Y vertex `u` is relabelled Z when it corrects itself and X when it
/// lies in the odd neighbourhood of its own correction set (exactly one
/// holds, by P9). Any vertex whose correction data still refers to `u`
/// in a now-forbidden position absorbs `c(u)` by symmetric difference.
/// The loop invariant, checked after every step, is that the current
/// `(c, {})` is a focussed flow for the current labelling.
pub fn eliminate_y(
    g: &OpenGraph,
    l: &Labelling,
    f: &PauliFlow,
) -> Result<(Labelling, PauliFlow), FlowError> {
    if !l.is_total(g) {
        return Err(FlowError::LabellingNotTotal);
    }
    if let Some((_, bad)) = l.iter().find(|(_, m)| !m.is_pauli()) {
        return Err(FlowError::LabelOutsideCodomain { expected: "X, Y and Z", found: bad });
    }
    // Pauli-only focussed flows need no order, so work with (c, {}) throughout.
    let mut corrections = f.corrections().clone();
    let as_flow = |c: &BTreeMap<usize, BTreeSet<usize>>| {
        PauliFlow::new(c.clone(), BTreeSet::new()).expect("empty order is acyclic")
    };
    let initial = verify_focussed(g, l, &as_flow(&corrections))?;
    if !initial.is_empty() {
        return Err(FlowError::NotFocussed(initial.len()));
    }
    let mut lab = l.clone();
    while let Some(u) =
        g.non_outputs().into_iter().find(|&v| lab.get(v) == Some(MeasLabel::Y))
    {
        let cu = corrections[&u].clone();
        let in_own = cu.contains(&u);
        // inputs never correct themselves, so an input Y always becomes X
        let new_label = if in_own { MeasLabel::Z } else { MeasLabel::X };
        lab.set(u, new_label);
        for v in g.non_outputs() {
            if v == u {
                continue;
            }
            let cv = &corrections[&v];
            let odd = g.odd_neighbourhood(cv);
            let broken = match new_label {
                MeasLabel::Z => cv.contains(&u),
                MeasLabel::X => odd.contains(&u),
                _ => unreachable!(),
            };
            if broken {
                let fixed: BTreeSet<usize> =
                    cv.symmetric_difference(&cu).copied().collect();
                corrections.insert(v, fixed);
            }
        }
        let check = verify_focussed(g, &lab, &as_flow(&corrections))?;
        if !check.is_empty() {
            return Err(FlowError::Internal("eliminate_y refocussing"));
        }
    }
    Ok((lab, as_flow(&corrections)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn vset(g: &OpenGraph, names: &[&str]) -> BTreeSet<usize> {
        names.iter().map(|n| g.index_of(n).unwrap()).collect()
    }

    /// The worked flow on the Z-relabelled graph: c(A)={C,E}, c(B)={E},
    /// c(C)={G}, c(D)={D}, c(E)={F}, with D before A and B.
    fn ordered_flow(g: &OpenGraph) -> PauliFlow {
        let idx = |n: &str| g.index_of(n).unwrap();
        let mut corrections = BTreeMap::new();
        corrections.insert(idx("A"), vset(g, &["C", "E"]));
        corrections.insert(idx("B"), vset(g, &["E"]));
        corrections.insert(idx("C"), vset(g, &["G"]));
        corrections.insert(idx("D"), vset(g, &["D"]));
        corrections.insert(idx("E"), vset(g, &["F"]));
        let order =
            BTreeSet::from([(idx("D"), idx("A")), (idx("D"), idx("B"))]);
        PauliFlow::new(corrections, order).unwrap()
    }

    /// The focussed variant: c(D) = {C, D}, empty order.
    fn focussed_flow(g: &OpenGraph) -> PauliFlow {
        let idx = |n: &str| g.index_of(n).unwrap();
        let mut corrections = ordered_flow(g).corrections().clone();
        corrections.insert(idx("D"), vset(g, &["C", "D"]));
        PauliFlow::new(corrections, BTreeSet::new()).unwrap()
    }

    #[test]
    fn the_ordered_flow_is_valid() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = ordered_flow(&g);
        assert_eq!(verify_pauli_flow(&g, &l, &f).unwrap(), vec![]);
    }

    #[test]
    fn the_ordered_flow_is_not_focussed_failing_f2_at_d() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = ordered_flow(&g);
        let violations = verify_focussed(&g, &l, &f).unwrap();
        assert!(!violations.is_empty());
        let d = g.index_of("D").unwrap();
        for v in &violations {
            assert_eq!(v.condition, Condition::F2);
            assert_eq!(v.u, d);
        }
        let targets: BTreeSet<usize> = violations.iter().map(|v| v.v).collect();
        assert_eq!(targets, vset(&g, &["A", "B"]));
    }

    #[test]
    fn the_focussed_variant_verifies() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = focussed_flow(&g);
        assert_eq!(verify_focussed(&g, &l, &f).unwrap(), vec![]);
    }

    #[test]
    fn any_correction_attempt_fails_on_the_flowless_graph() {
        // the all-X labelling has no flow, so every candidate correction
        // function must violate something; try the one built from the
        // Z-relabelled graph's inverse columns
        let g = sample_graph();
        let l = all_x_labelling(&g);
        let corrections = focussed_flow(&g).corrections().clone();
        let f = PauliFlow::new(corrections.clone(), BTreeSet::new()).unwrap();
        assert!(!verify_pauli_flow(&g, &l, &f).unwrap().is_empty());
        // no order can rescue it either: the forced order is consistent
        // only if P1-P3 can hold, and P4-P9 still fail at D
        if let Some(ordered) = infer_forced_order(&g, &l, &corrections).unwrap() {
            assert!(!verify_pauli_flow(&g, &l, &ordered).unwrap().is_empty());
        }
    }

    #[test]
    fn vacuous_flow_when_all_vertices_are_outputs() {
        let g = OpenGraph::new(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into())],
            &[],
            &["a".into(), "b".into()],
        )
        .unwrap();
        let f = PauliFlow::new(BTreeMap::new(), BTreeSet::new()).unwrap();
        assert_eq!(verify_focussed(&g, &Labelling::empty(), &f).unwrap(), vec![]);
    }

    #[test]
    fn forced_order_of_the_ordered_flow() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let corrections = ordered_flow(&g).corrections().clone();
        let f = infer_forced_order(&g, &l, &corrections).unwrap().unwrap();
        let idx = |n: &str| g.index_of(n).unwrap();
        assert_eq!(
            f.order_relations(),
            &BTreeSet::from([(idx("D"), idx("A")), (idx("D"), idx("B"))])
        );
        assert_eq!(verify_pauli_flow(&g, &l, &f).unwrap(), vec![]);
    }

    #[test]
    fn focussed_x_only_flow_forces_nothing() {
        // path a - b with a measured X: c(a) = {b}
        let g = OpenGraph::new(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into())],
            &["a".into()],
            &["b".into()],
        )
        .unwrap();
        let mut l = Labelling::empty();
        l.set(g.index_of("a").unwrap(), MeasLabel::X);
        let corrections =
            BTreeMap::from([(g.index_of("a").unwrap(), vset(&g, &["b"]))]);
        let f = infer_forced_order(&g, &l, &corrections).unwrap().unwrap();
        assert!(f.order_relations().is_empty());
    }

    #[test]
    fn flow_matrix_disconnects_the_z_vertex() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let m = flow_matrix(&g, &l).unwrap();
        let expected = Gf2Matrix::from_rows(&[
            &[1, 0, 0, 0, 0, 0],
            &[1, 0, 1, 0, 0, 0],
            &[0, 0, 0, 0, 1, 1],
            &[0, 1, 0, 0, 0, 0],
            &[0, 0, 0, 1, 0, 0],
        ]);
        for r in 0..5 {
            for c in 0..6 {
                assert_eq!(m.get(r, c), expected.get(r, c), "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn variant_flow_matrix_after_the_z_switch() {
        let g = sample_variant_graph();
        let mut l = all_x_labelling(&g);
        l.set(g.index_of("D").unwrap(), MeasLabel::Z);
        let m = flow_matrix(&g, &l).unwrap();
        let expected = Gf2Matrix::from_rows(&[
            &[1, 0, 0, 0, 0, 0],
            &[1, 0, 1, 0, 0, 0],
            &[0, 0, 0, 0, 1, 1],
            &[0, 1, 0, 0, 0, 0],
            &[0, 0, 0, 1, 0, 0],
        ]);
        for r in 0..5 {
            for c in 0..6 {
                assert_eq!(m.get(r, c), expected.get(r, c), "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn all_x_flow_matrix_is_reduced_adjacency() {
        let g = sample_graph();
        let l = all_x_labelling(&g);
        assert_eq!(flow_matrix(&g, &l).unwrap(), g.reduced_adjacency_matrix());
    }

    #[test]
    fn flow_matrix_rejects_planar_labels() {
        let g = sample_graph();
        let mut l = all_x_labelling(&g);
        l.set(g.index_of("C").unwrap(), MeasLabel::XY);
        assert!(matches!(
            flow_matrix(&g, &l),
            Err(FlowError::LabelOutsideCodomain { .. })
        ));
    }

    #[test]
    fn extract_flow_on_the_one_z_sample_is_focussed() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = extract_flow(&g, &l).unwrap().expect("the one-Z sample has flow");
        assert_eq!(verify_focussed(&g, &l, &f).unwrap(), vec![]);
        // the focussing pass lands on the worked focussed correction for D
        let d = g.index_of("D").unwrap();
        assert_eq!(f.correction(d).unwrap(), &vset(&g, &["C", "D"]));
    }

    #[test]
    fn extract_flow_absent_for_the_all_x_sample() {
        let g = sample_graph();
        let l = all_x_labelling(&g);
        assert!(extract_flow(&g, &l).unwrap().is_none());
    }

    #[test]
    fn extract_flow_on_single_edge() {
        let g = OpenGraph::new(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into())],
            &["a".into()],
            &["b".into()],
        )
        .unwrap();
        let mut l = Labelling::empty();
        let a = g.index_of("a").unwrap();
        l.set(a, MeasLabel::X);
        let f = extract_flow(&g, &l).unwrap().unwrap();
        assert_eq!(f.correction(a).unwrap(), &vset(&g, &["b"]));
        assert_eq!(verify_focussed(&g, &l, &f).unwrap(), vec![]);
    }

    #[test]
    fn dag_witness_accepts_the_x_xy_sample() {
        let g = x_xy_graph();
        let l = x_xy_labelling(&g);
        let n = Gf2Matrix::from_rows(&[
            &[0, 0, 0, 1],
            &[0, 0, 1, 0],
            &[1, 0, 1, 0],
            &[0, 1, 1, 0],
        ]);
        let idx = |s: &str| g.index_of(s).unwrap();
        let edges = xy_witness_edges(&g, &l, &n);
        assert_eq!(edges, vec![(idx("T"), idx("U"))]);
        match verify_dag_witness(&g, &l, &n).unwrap() {
            WitnessCheck::Valid(f) => {
                assert_eq!(f.correction(idx("R")).unwrap(), &vset(&g, &["V"]));
                assert_eq!(f.correction(idx("S")).unwrap(), &vset(&g, &["W"]));
                assert_eq!(f.correction(idx("T")).unwrap(), &vset(&g, &["U", "V", "W"]));
                assert_eq!(f.correction(idx("U")).unwrap(), &vset(&g, &["T"]));
                // the order forced by P1 is U before T
                assert_eq!(f.order_relations(), &BTreeSet::from([(idx("U"), idx("T"))]));
                assert_eq!(verify_pauli_flow(&g, &l, &f).unwrap(), vec![]);
            }
            WitnessCheck::Invalid(v) => panic!("expected valid witness, got {v:?}"),
        }
    }

    #[test]
    fn dag_witness_rejects_corrupted_matrix() {
        let g = x_xy_graph();
        let l = x_xy_labelling(&g);
        let mut n = Gf2Matrix::from_rows(&[
            &[0, 0, 0, 1],
            &[0, 0, 1, 0],
            &[1, 0, 1, 0],
            &[0, 1, 1, 0],
        ]);
        n.set(0, 0, true); // spurious entry
        match verify_dag_witness(&g, &l, &n).unwrap() {
            WitnessCheck::Invalid(violations) => {
                assert!(violations.iter().any(|v| v.condition == Condition::Product));
            }
            WitnessCheck::Valid(_) => panic!("corrupted witness accepted"),
        }
    }

    #[test]
    fn dag_witness_dimension_mismatch() {
        let g = x_xy_graph();
        let l = x_xy_labelling(&g);
        let n = Gf2Matrix::zero(3, 4);
        assert!(matches!(
            verify_dag_witness(&g, &l, &n),
            Err(FlowError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn simplify_planar_turns_xy_into_x() {
        let g = sample_graph();
        let mut l = Labelling::empty();
        for v in g.non_outputs() {
            l.set(v, MeasLabel::XY);
        }
        let s = simplify_planar_labels(&l);
        assert!(s.iter().all(|(_, m)| m == MeasLabel::X));
    }

    #[test]
    fn simplify_planar_fixes_pauli_labels() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        assert_eq!(simplify_planar_labels(&l), l);
    }

    #[test]
    fn simplify_planar_preserves_a_witness_flow() {
        // the x/xy example: collapsing XY to X keeps the same (c, <) valid
        let g = x_xy_graph();
        let l = x_xy_labelling(&g);
        let n = Gf2Matrix::from_rows(&[
            &[0, 0, 0, 1],
            &[0, 0, 1, 0],
            &[1, 0, 1, 0],
            &[0, 1, 1, 0],
        ]);
        let WitnessCheck::Valid(f) = verify_dag_witness(&g, &l, &n).unwrap() else {
            panic!("witness must be valid");
        };
        let simplified = simplify_planar_labels(&l);
        assert_eq!(verify_pauli_flow(&g, &simplified, &f).unwrap(), vec![]);
    }

    #[test]
    fn eliminate_y_without_y_labels_is_identity() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = focussed_flow(&g);
        let (l2, f2) = eliminate_y(&g, &l, &f).unwrap();
        assert_eq!(l2, l);
        assert_eq!(f2.corrections(), f.corrections());
    }

    #[test]
    fn eliminate_y_on_a_path() {
        // path a - b - c, a measured X, b measured Y
        let g = OpenGraph::new(
            &["a".into(), "b".into(), "c".into()],
            &[("a".into(), "b".into()), ("b".into(), "c".into())],
            &["a".into()],
            &["c".into()],
        )
        .unwrap();
        let (a, b) = (g.index_of("a").unwrap(), g.index_of("b").unwrap());
        let mut l = Labelling::empty();
        l.set(a, MeasLabel::X);
        l.set(b, MeasLabel::Y);
        // focussed flow: c(a) = {b, c}, c(b) = {c}
        let mut corrections = BTreeMap::new();
        corrections.insert(a, vset(&g, &["b", "c"]));
        corrections.insert(b, vset(&g, &["c"]));
        let f = PauliFlow::new(corrections, BTreeSet::new()).unwrap();
        assert_eq!(verify_focussed(&g, &l, &f).unwrap(), vec![]);
        let (l2, f2) = eliminate_y(&g, &l, &f).unwrap();
        assert!(l2.codomain_within(&[MeasLabel::X, MeasLabel::Z]));
        assert_eq!(verify_focussed(&g, &l2, &f2).unwrap(), vec![]);
        assert!(flow_matrix(&g, &l2).unwrap().is_right_invertible());
    }

    #[test]
    fn eliminate_y_rejects_unfocussed_input() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = ordered_flow(&g); // valid but not focussed
        assert!(matches!(eliminate_y(&g, &l, &f), Err(FlowError::NotFocussed(_))));
    }

    #[test]
    fn cyclic_order_is_rejected() {
        let corrections = BTreeMap::new();
        let order = BTreeSet::from([(0, 1), (1, 2), (2, 0)]);
        assert_eq!(PauliFlow::new(corrections, order).unwrap_err(), FlowError::OrderCyclic);
    }

    #[test]
    fn missing_correction_is_an_error() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = PauliFlow::new(BTreeMap::new(), BTreeSet::new()).unwrap();
        assert!(matches!(
            verify_pauli_flow(&g, &l, &f),
            Err(FlowError::MissingCorrection(_))
        ));
    }

    #[test]
    fn correction_using_input_is_an_error() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let mut f = focussed_flow(&g).corrections().clone();
        let a = g.index_of("A").unwrap();
        f.get_mut(&a).unwrap().insert(g.index_of("B").unwrap());
        let f = PauliFlow::new(f, BTreeSet::new()).unwrap();
        assert!(matches!(
            verify_pauli_flow(&g, &l, &f),
            Err(FlowError::CorrectionUsesInput(..))
        ));
    }
}
