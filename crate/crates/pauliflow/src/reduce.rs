//! Input/output set manipulation preserving flow existence: shrinking the
//! output set to the size of the input set, finding an input set for a
//! given output set, and computing a minimal output set for given inputs.
//!
//! All three lean on the flow matrix: a column outside a maximal
//! invertible minor can be dropped, and dropping an output's column is
//! the same as relabelling it Z. Basis choices are deterministic so the
//! results are reproducible.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::flow::{self, FlowError, PauliFlow};
use crate::graph::{Labelling, MeasLabel, OpenGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("the given labelling has no Pauli flow (flow matrix not right-invertible)")]
    NoFlow,
    #[error("output reduction failed to terminate within the vertex count")]
    NonTermination,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Result of an output reduction: the rewritten open graph, the total
/// X/Z labelling that certifies flow on it, and what changed.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub graph: OpenGraph,
    pub labelling: Labelling,
    /// Vertices whose label switched to Z (former outputs included).
    pub relabelled: BTreeSet<usize>,
    /// Former outputs dropped from the output set.
    pub removed_outputs: BTreeSet<usize>,
    /// The flow extracted from the reduced instance.
    pub flow: PauliFlow,
}

/// Shrinks the output set until it matches the input set in size,
/// preserving flow. Per round, the earliest output whose column can leave
/// a maximal invertible minor is relabelled Z and dropped from the output
/// set; when no output qualifies, the X-labelled internal vertices outside
/// the greedy column basis are relabelled Z instead, which unblocks an
/// output in a later round.
pub fn reduce_outputs(g: &OpenGraph, l: &Labelling) -> Result<ReductionResult, ReduceError> {
    let m = flow::flow_matrix(g, l)?;
    if !m.is_right_invertible() {
        return Err(ReduceError::NoFlow);
    }
    let mut graph = g.clone();
    let mut lab = l.clone();
    let mut relabelled = BTreeSet::new();
    let mut removed_outputs = BTreeSet::new();
    for _round in 0..=g.vertex_count() {
        if graph.outputs().len() <= graph.inputs().len() {
            let flow = flow::extract_flow(&graph, &lab)?
                .ok_or(ReduceError::NoFlow)?;
            return Ok(ReductionResult { graph, labelling: lab, relabelled, removed_outputs, flow });
        }
        let m = flow::flow_matrix(&graph, &lab)?;
        let non_inputs = graph.non_inputs();
        let target = m.rows();
        // an output is removable when dropping its column keeps full row rank
        let removable = graph
            .outputs()
            .iter()
            .copied()
            .filter(|v| !graph.is_input(*v))
            .find(|&o| {
                let col = non_inputs.iter().position(|&v| v == o).expect("outputs are columns");
                m.without_column(col).rank() == target
            });
        if let Some(o) = removable {
            let mut outputs = graph.outputs().clone();
            outputs.remove(&o);
            graph = graph.with_outputs(&outputs);
            lab.set(o, MeasLabel::Z);
            relabelled.insert(o);
            removed_outputs.insert(o);
            continue;
        }
        // no output is removable: every column outside the basis belongs to
        // an X-labelled internal vertex; push them all to Z
        let basis = m.column_basis();
        let basis_vertices: BTreeSet<usize> = basis.iter().map(|&c| non_inputs[c]).collect();
        let outside: Vec<usize> = non_inputs
            .iter()
            .copied()
            .filter(|v| !basis_vertices.contains(v) && !graph.is_output(*v))
            .collect();
        debug_assert!(!outside.is_empty(), "a wide full-rank matrix has spare columns");
        debug_assert!(outside.iter().all(|&v| lab.get(v) == Some(MeasLabel::X)));
        for v in outside {
            lab.set(v, MeasLabel::Z);
            relabelled.insert(v);
        }
    }
    Err(ReduceError::NonTermination)
}

/// Given only an output set and an all-X labelling, finds an input set of
/// the same size admitting flow, or `None` when no input set works.
///
/// With no inputs the reduced adjacency matrix has a column per vertex;
/// if it is not right-invertible no column removal can fix it, so no
/// input set helps. Otherwise the complement of the greedy column basis
/// becomes the input set. The result may overlap the outputs.
pub fn find_inputs(g: &OpenGraph, outputs: &BTreeSet<usize>) -> Option<BTreeSet<usize>> {
    let shaped = g.with_inputs(&BTreeSet::new()).with_outputs(outputs);
    let m = shaped.reduced_adjacency_matrix();
    if m.rank() < m.rows() {
        return None;
    }
    let basis: BTreeSet<usize> = m.column_basis().into_iter().collect();
    let inputs: BTreeSet<usize> =
        (0..g.vertex_count()).filter(|v| !basis.contains(v)).collect();
    debug_assert_eq!(inputs.len(), outputs.len());
    debug_assert!(shaped
        .with_inputs(&inputs)
        .reduced_adjacency_matrix()
        .is_right_invertible());
    Some(inputs)
}

/// Given only an input set and an all-X labelling, the smallest output
/// set admitting flow: the rows outside a greedy row basis of the
/// no-outputs reduced adjacency matrix. The result may overlap the
/// inputs; a zero row (an isolated vertex) is always an output.
pub fn minimal_outputs(g: &OpenGraph, inputs: &BTreeSet<usize>) -> BTreeSet<usize> {
    let shaped = g.with_inputs(inputs).with_outputs(&BTreeSet::new());
    let m = shaped.reduced_adjacency_matrix();
    let basis: BTreeSet<usize> = m.row_basis().into_iter().collect();
    let outputs: BTreeSet<usize> =
        (0..g.vertex_count()).filter(|v| !basis.contains(v)).collect();
    debug_assert!(shaped
        .with_outputs(&outputs)
        .reduced_adjacency_matrix()
        .is_right_invertible());
    outputs
}
