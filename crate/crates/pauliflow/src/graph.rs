//! Open graphs, measurement labellings, odd neighbourhoods and (reduced)
//! adjacency matrices, plus the JSON interchange format.
//!
//! Vertices are identified by non-empty strings and kept in canonical
//! (lexicographic) order; every matrix and serialization uses that order,
//! so output is reproducible and matrices line up with hand-written rows.
//! Internally vertices are addressed by their index in canonical order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::Gf2Matrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("vertex name must be a non-empty string")]
    EmptyVertexName,
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(String),
    #[error("edge references unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("self-loop on vertex {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0:?} - {1:?}")]
    DuplicateEdge(String, String),
    #[error("input {0:?} not among the vertices")]
    UnknownInput(String),
    #[error("output {0:?} not among the vertices")]
    UnknownOutput(String),
    #[error("label on output vertex {0:?}")]
    LabelOnOutput(String),
    #[error("input {vertex:?} labelled {label}; inputs allow only X, XY or Y")]
    InvalidInputLabel { vertex: String, label: MeasLabel },
    #[error("{0:?} is not a valid measurement label (expected X, Y, Z, XY, XZ or YZ)")]
    BadLabel(String),
    #[error("label on unknown vertex {0:?}")]
    LabelOnUnknownVertex(String),
}

/// One of the six single-qubit measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasLabel {
    X,
    Y,
    Z,
    XY,
    XZ,
    YZ,
}

impl MeasLabel {
    pub fn is_pauli(self) -> bool {
        matches!(self, MeasLabel::X | MeasLabel::Y | MeasLabel::Z)
    }

    /// Labels permitted on an input vertex.
    pub fn allowed_on_input(self) -> bool {
        matches!(self, MeasLabel::X | MeasLabel::XY | MeasLabel::Y)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasLabel::X => "X",
            MeasLabel::Y => "Y",
            MeasLabel::Z => "Z",
            MeasLabel::XY => "XY",
            MeasLabel::XZ => "XZ",
            MeasLabel::YZ => "YZ",
        }
    }

    pub fn parse(s: &str) -> Result<MeasLabel, GraphError> {
        Ok(match s {
            "X" => MeasLabel::X,
            "Y" => MeasLabel::Y,
            "Z" => MeasLabel::Z,
            "XY" => MeasLabel::XY,
            "XZ" => MeasLabel::XZ,
            "YZ" => MeasLabel::YZ,
            other => return Err(GraphError::BadLabel(other.to_owned())),
        })
    }
}

impl fmt::Display for MeasLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An undirected graph with designated input and output vertex sets.
///
/// No self-loops, no parallel edges. Vertex indices refer to the canonical
/// lexicographic order of the vertex names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenGraph {
    names: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
    inputs: BTreeSet<usize>,
    outputs: BTreeSet<usize>,
}

impl OpenGraph {
    /// Builds a graph from names, edges (as name pairs) and input/output
    /// name sets, validating all the structural invariants.
    pub fn new(
        vertices: &[String],
        edges: &[(String, String)],
        inputs: &[String],
        outputs: &[String],
    ) -> Result<OpenGraph, GraphError> {
        let mut names = vertices.to_vec();
        if names.iter().any(String::is_empty) {
            return Err(GraphError::EmptyVertexName);
        }
        names.sort();
        if let Some(dup) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(dup[0].clone()));
        }
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut adj = vec![BTreeSet::new(); names.len()];
        for (a, b) in edges {
            let &ia = index.get(a.as_str()).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let &ib = index.get(b.as_str()).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if !adj[ia].insert(ib) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
            adj[ib].insert(ia);
        }
        let resolve = |set: &[String], input: bool| -> Result<BTreeSet<usize>, GraphError> {
            let mut out = BTreeSet::new();
            for n in set {
                match index.get(n.as_str()) {
                    Some(&i) => {
                        out.insert(i);
                    }
                    None if input => return Err(GraphError::UnknownInput(n.clone())),
                    None => return Err(GraphError::UnknownOutput(n.clone())),
                }
            }
            Ok(out)
        };
        let inputs = resolve(inputs, true)?;
        let outputs = resolve(outputs, false)?;
        Ok(OpenGraph { names, adj, inputs, outputs })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbours(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn inputs(&self) -> &BTreeSet<usize> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<usize> {
        &self.outputs
    }

    pub fn is_input(&self, v: usize) -> bool {
        self.inputs.contains(&v)
    }

    pub fn is_output(&self, v: usize) -> bool {
        self.outputs.contains(&v)
    }

    /// Non-outputs, in canonical order.
    pub fn non_outputs(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|v| !self.outputs.contains(v)).collect()
    }

    /// Non-inputs, in canonical order.
    pub fn non_inputs(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|v| !self.inputs.contains(v)).collect()
    }

    /// Internal vertices: neither input nor output.
    pub fn internal(&self) -> Vec<usize> {
        (0..self.names.len())
            .filter(|v| !self.inputs.contains(v) && !self.outputs.contains(v))
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adj.iter().enumerate() {
            for &b in nbrs {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Vertices adjacent to an odd number of elements of `set`.
    ///
    /// Linear over symmetric difference: `odd(a △ b) = odd(a) △ odd(b)`.
    pub fn odd_neighbourhood(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &u in set {
            assert!(u < self.names.len(), "unknown vertex index {u}");
            for &w in &self.adj[u] {
                if !out.remove(&w) {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// The |non-outputs| x |non-inputs| minor of the adjacency matrix,
    /// rows and columns in canonical vertex order, labelled by name.
    pub fn reduced_adjacency_matrix(&self) -> Gf2Matrix {
        let rows = self.non_outputs();
        let cols = self.non_inputs();
        let m = Gf2Matrix::build(rows.len(), cols.len(), |r, c| self.has_edge(rows[r], cols[c]));
        m.with_labels(
            rows.iter().map(|&v| self.names[v].clone()).collect(),
            cols.iter().map(|&v| self.names[v].clone()).collect(),
        )
    }

    /// The subgraph induced by `keep`, with inputs/outputs intersected.
    pub fn induced_subgraph(&self, keep: &BTreeSet<usize>) -> OpenGraph {
        for &v in keep {
            assert!(v < self.names.len(), "unknown vertex index {v}");
        }
        let vertices: Vec<String> =
            keep.iter().map(|&v| self.names[v].clone()).collect();
        let edges: Vec<(String, String)> = self
            .edges()
            .into_iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect();
        let inputs: Vec<String> =
            self.inputs.iter().filter(|v| keep.contains(v)).map(|&v| self.names[v].clone()).collect();
        let outputs: Vec<String> =
            self.outputs.iter().filter(|v| keep.contains(v)).map(|&v| self.names[v].clone()).collect();
        OpenGraph::new(&vertices, &edges, &inputs, &outputs)
            .expect("induced subgraph of a valid graph is valid")
    }

    /// Deletes every vertex in the input/output overlap; inputs become
    /// I \ O and outputs O \ I. Flow existence is unaffected, and any
    /// labelling is untouched because its domain never meets the overlap.
    pub fn trim_io(&self, labelling: &Labelling) -> (OpenGraph, Labelling) {
        let overlap: BTreeSet<usize> =
            self.inputs.intersection(&self.outputs).copied().collect();
        if overlap.is_empty() {
            return (self.clone(), labelling.clone());
        }
        let keep: BTreeSet<usize> =
            (0..self.names.len()).filter(|v| !overlap.contains(v)).collect();
        let trimmed = self.induced_subgraph(&keep);
        let relabelled = labelling
            .iter()
            .map(|(v, l)| (self.names[v].clone(), l))
            .collect::<Vec<_>>();
        let mut out = Labelling::empty();
        for (name, l) in relabelled {
            let idx = trimmed.index_of(&name).expect("labelled vertices are never trimmed");
            out.set(idx, l);
        }
        (trimmed, out)
    }

    /// Replaces the output set (used by the input/output reduction ops).
    pub fn with_outputs(&self, outputs: &BTreeSet<usize>) -> OpenGraph {
        let mut g = self.clone();
        g.outputs = outputs.clone();
        g
    }

    /// Replaces the input set.
    pub fn with_inputs(&self, inputs: &BTreeSet<usize>) -> OpenGraph {
        let mut g = self.clone();
        g.inputs = inputs.clone();
        g
    }

    /// Parses the JSON graph document, validating the structure and any
    /// labelling it carries.
    pub fn parse_json(text: &[u8]) -> Result<(OpenGraph, Labelling), GraphError> {
        let doc: GraphDoc = serde_json::from_slice(text)
            .map_err(|e| GraphError::MalformedJson(e.to_string()))?;
        doc.validate()
    }

    /// Serializes graph plus labelling back to the JSON document form.
    pub fn to_json(&self, labelling: &Labelling) -> String {
        let doc = GraphDoc::from_graph(self, labelling);
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }
}

/// A (possibly partial) assignment of measurement labels to non-outputs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Labelling {
    assign: BTreeMap<usize, MeasLabel>,
}

impl Labelling {
    pub fn empty() -> Labelling {
        Labelling::default()
    }

    /// Validates the labelling against a graph: domain inside non-outputs,
    /// inputs restricted to X / XY / Y.
    pub fn validated(
        graph: &OpenGraph,
        assign: BTreeMap<usize, MeasLabel>,
    ) -> Result<Labelling, GraphError> {
        for (&v, &l) in &assign {
            if graph.is_output(v) {
                return Err(GraphError::LabelOnOutput(graph.name(v).to_owned()));
            }
            if graph.is_input(v) && !l.allowed_on_input() {
                return Err(GraphError::InvalidInputLabel {
                    vertex: graph.name(v).to_owned(),
                    label: l,
                });
            }
        }
        Ok(Labelling { assign })
    }

    pub fn get(&self, v: usize) -> Option<MeasLabel> {
        self.assign.get(&v).copied()
    }

    pub fn set(&mut self, v: usize, l: MeasLabel) {
        self.assign.insert(v, l);
    }

    pub fn unset(&mut self, v: usize) {
        self.assign.remove(&v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, MeasLabel)> + '_ {
        self.assign.iter().map(|(&v, &l)| (v, l))
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    /// True when every non-output of `graph` is labelled.
    pub fn is_total(&self, graph: &OpenGraph) -> bool {
        graph.non_outputs().iter().all(|v| self.assign.contains_key(v))
    }

    /// True when every label is drawn from `allowed`.
    pub fn codomain_within(&self, allowed: &[MeasLabel]) -> bool {
        self.assign.values().all(|l| allowed.contains(l))
    }
}

/// The raw JSON document; see the crate README for the format.
#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(default)]
    inputs: Vec<String>,
    #[serde(default)]
    outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, String>,
}

impl GraphDoc {
    fn validate(self) -> Result<(OpenGraph, Labelling), GraphError> {
        let graph = OpenGraph::new(&self.vertices, &self.edges, &self.inputs, &self.outputs)?;
        let mut assign = BTreeMap::new();
        for (name, label) in &self.labels {
            let v = graph
                .index_of(name)
                .ok_or_else(|| GraphError::LabelOnUnknownVertex(name.clone()))?;
            assign.insert(v, MeasLabel::parse(label)?);
        }
        let labelling = Labelling::validated(&graph, assign)?;
        Ok((graph, labelling))
    }

    fn from_graph(graph: &OpenGraph, labelling: &Labelling) -> GraphDoc {
        GraphDoc {
            vertices: graph.names.clone(),
            edges: graph
                .edges()
                .into_iter()
                .map(|(a, b)| (graph.names[a].clone(), graph.names[b].clone()))
                .collect(),
            inputs: graph.inputs.iter().map(|&v| graph.names[v].clone()).collect(),
            outputs: graph.outputs.iter().map(|&v| graph.names[v].clone()).collect(),
            labels: labelling
                .iter()
                .map(|(v, l)| (graph.names[v].clone(), l.as_str().to_owned()))
                .collect(),
        }
    }
}

/// Test fixtures for the worked examples; shared by unit, integration and
/// acceptance tests.
pub mod fixtures {
    use super::*;

    fn strings(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn string_pairs(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    /// The running example: two inputs A, B; outputs F, G, H.
    pub fn sample_graph() -> OpenGraph {
        OpenGraph::new(
            &strings(&["A", "B", "C", "D", "E", "F", "G", "H"]),
            &string_pairs(&[
                ("A", "C"),
                ("A", "D"),
                ("B", "C"),
                ("B", "D"),
                ("B", "E"),
                ("C", "G"),
                ("C", "H"),
                ("D", "G"),
                ("D", "H"),
                ("E", "F"),
            ]),
            &strings(&["A", "B"]),
            &strings(&["F", "G", "H"]),
        )
        .unwrap()
    }

    /// Same graph, every non-output labelled X.
    pub fn all_x_labelling(g: &OpenGraph) -> Labelling {
        let mut l = Labelling::empty();
        for v in g.non_outputs() {
            l.set(v, MeasLabel::X);
        }
        l
    }

    /// Same graph with D relabelled Z.
    pub fn one_z_labelling(g: &OpenGraph) -> Labelling {
        let mut l = all_x_labelling(g);
        l.set(g.index_of("D").unwrap(), MeasLabel::Z);
        l
    }

    /// The variant used for output reduction: edge D-H removed.
    pub fn sample_variant_graph() -> OpenGraph {
        OpenGraph::new(
            &strings(&["A", "B", "C", "D", "E", "F", "G", "H"]),
            &string_pairs(&[
                ("A", "C"),
                ("A", "D"),
                ("B", "C"),
                ("B", "D"),
                ("B", "E"),
                ("C", "G"),
                ("C", "H"),
                ("D", "G"),
                ("E", "F"),
            ]),
            &strings(&["A", "B"]),
            &strings(&["F", "G", "H"]),
        )
        .unwrap()
    }

    /// The X/XY worked example: inputs R, S; outputs V, W; U is X labelled,
    /// the other non-outputs XY.
    pub fn x_xy_graph() -> OpenGraph {
        OpenGraph::new(
            &strings(&["R", "S", "T", "U", "V", "W"]),
            &string_pairs(&[("R", "U"), ("R", "V"), ("S", "U"), ("S", "W"), ("T", "U")]),
            &strings(&["R", "S"]),
            &strings(&["V", "W"]),
        )
        .unwrap()
    }

    pub fn x_xy_labelling(g: &OpenGraph) -> Labelling {
        let mut l = Labelling::empty();
        for v in g.non_outputs() {
            l.set(v, MeasLabel::XY);
        }
        l.set(g.index_of("U").unwrap(), MeasLabel::X);
        l
    }
}
