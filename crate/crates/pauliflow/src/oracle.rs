//! Exhaustive ground truth at desk scale: brute-force Pauli-flow existence
//! for a fixed labelling, and brute-force labelling search.
//!
//! These procedures certify their answers by exhaustion and never sample,
//! which is what makes them usable as independent oracles for the
//! randomized algorithms. The flow search enumerates, per measured
//! vertex, every correction-set candidate passing the local conditions
//! P4-P9, precomputes the order relations P1-P3 would force, and then
//! runs a subset dynamic program over measurement prefixes: a set of
//! vertices is a feasible prefix when some member can be measured last
//! among them with all its forced successors outside the set. The DP is
//! exact because forced relations depend only on a vertex's own
//! correction set.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::flow::{self, FlowError, PauliFlow};
use crate::gf2::Gf2Matrix;
use crate::graph::{Labelling, MeasLabel, OpenGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is {value}, above the oracle limit {limit}")]
    LimitsExceeded { what: &'static str, value: usize, limit: usize },
    #[error("oracle alphabet must be a non-empty subset of {{X, Y, Z}}")]
    BadAlphabet,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Size limits keeping exhaustion tractable.
#[derive(Debug, Clone)]
pub struct OracleLimits {
    pub max_non_outputs: usize,
    pub max_non_inputs: usize,
    /// Cap on enumerated right inverses (affine-space enumeration).
    pub max_right_inverses: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_non_outputs: 6, max_non_inputs: 7, max_right_inverses: 1 << 16 }
    }
}

fn check_limits(g: &OpenGraph, lim: &OracleLimits) -> Result<(), OracleError> {
    let non_outputs = g.non_outputs().len();
    if non_outputs > lim.max_non_outputs {
        return Err(OracleError::LimitsExceeded {
            what: "non-output count",
            value: non_outputs,
            limit: lim.max_non_outputs,
        });
    }
    let non_inputs = g.non_inputs().len();
    if non_inputs > lim.max_non_inputs {
        return Err(OracleError::LimitsExceeded {
            what: "non-input count",
            value: non_inputs,
            limit: lim.max_non_inputs,
        });
    }
    Ok(())
}

/// Exhaustive Pauli-flow search for a fixed total labelling. Returns a
/// witness flow (which passes verification) or `None`, certified by
/// exhaustion.
pub fn brute_force_flow(
    g: &OpenGraph,
    l: &Labelling,
    lim: &OracleLimits,
) -> Result<Option<PauliFlow>, OracleError> {
    check_limits(g, lim)?;
    if !l.is_total(g) {
        return Err(OracleError::Flow(FlowError::LabellingNotTotal));
    }
    let non_outputs = g.non_outputs();
    let non_inputs = g.non_inputs();
    let nv = g.vertex_count();
    assert!(nv <= 60, "bitmask oracle needs small graphs");

    // neighbour masks over all vertices
    let nbr: Vec<u64> = (0..nv)
        .map(|v| g.neighbours(v).iter().fold(0u64, |m, &w| m | (1 << w)))
        .collect();
    let vert_bit = |v: usize| 1u64 << v;

    // label masks over non-outputs
    let mut not_xy = 0u64; // lambda(v) outside {X, Y}
    let mut not_yz = 0u64; // lambda(v) outside {Y, Z}
    let mut y_mask = 0u64;
    for &v in &non_outputs {
        match l.get(v).expect("total") {
            MeasLabel::X => not_yz |= vert_bit(v),
            MeasLabel::Y => y_mask |= vert_bit(v),
            MeasLabel::Z => not_xy |= vert_bit(v),
            MeasLabel::XY | MeasLabel::XZ | MeasLabel::YZ => {
                not_xy |= vert_bit(v);
                not_yz |= vert_bit(v);
            }
        }
    }

    // subset tables over the non-inputs: member mask and odd-neighbourhood
    // mask of each candidate correction set
    let ni = non_inputs.len();
    let subsets = 1usize << ni;
    let mut set_mask = vec![0u64; subsets];
    let mut odd_mask = vec![0u64; subsets];
    for s in 1..subsets {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        set_mask[s] = set_mask[rest] | vert_bit(non_inputs[low]);
        odd_mask[s] = odd_mask[rest] ^ nbr[non_inputs[low]];
    }

    // per measured vertex: candidates (subset, forced-target mask),
    // deduplicated by target mask
    struct Candidate {
        subset: usize,
        targets: u64,
    }
    let mut candidates: Vec<Vec<Candidate>> = Vec::with_capacity(non_outputs.len());
    for &u in &non_outputs {
        let ub = vert_bit(u);
        let label = l.get(u).expect("total");
        let mut list: Vec<Candidate> = Vec::new();
        let mut seen_targets = std::collections::BTreeSet::new();
        for s in 0..subsets {
            let in_c = set_mask[s] & ub != 0;
            let in_odd = odd_mask[s] & ub != 0;
            let local_ok = match label {
                MeasLabel::XY => !in_c && in_odd,
                MeasLabel::XZ => in_c && in_odd,
                MeasLabel::YZ => in_c && !in_odd,
                MeasLabel::X => in_odd,
                MeasLabel::Z => in_c,
                MeasLabel::Y => in_c ^ in_odd,
            };
            if !local_ok {
                continue;
            }
            let p1 = set_mask[s] & not_xy;
            let p2 = odd_mask[s] & not_yz;
            let p3 = (set_mask[s] ^ odd_mask[s]) & y_mask;
            let targets = (p1 | p2 | p3) & !ub;
            if seen_targets.insert(targets) {
                list.push(Candidate { subset: s, targets });
            }
        }
        if list.is_empty() {
            return Ok(None);
        }
        list.sort_by_key(|c| c.targets.count_ones());
        candidates.push(list);
    }

    // subset DP over measurement prefixes
    let m = non_outputs.len();
    let full = (1usize << m) - 1;
    let mut reachable = vec![false; 1 << m];
    let mut parent: Vec<Option<(usize, usize, usize)>> = vec![None; 1 << m]; // (prev, who, subset)
    reachable[0] = true;
    let prefix_vmask = |t: usize| -> u64 {
        let mut mask = 0u64;
        for (i, &v) in non_outputs.iter().enumerate() {
            if t & (1 << i) != 0 {
                mask |= vert_bit(v);
            }
        }
        mask
    };
    let mut frontier = vec![0usize];
    while let Some(t) = frontier.pop() {
        if t == full {
            break;
        }
        let placed = prefix_vmask(t);
        for (i, &u) in non_outputs.iter().enumerate() {
            if t & (1 << i) != 0 {
                continue;
            }
            let next = t | (1 << i);
            if reachable[next] {
                continue;
            }
            let blocked = placed | vert_bit(u);
            if let Some(c) = candidates[i].iter().find(|c| c.targets & blocked == 0) {
                reachable[next] = true;
                parent[next] = Some((t, i, c.subset));
                frontier.push(next);
            }
        }
    }
    if !reachable[full] {
        return Ok(None);
    }

    // reconstruct the witness and hand it the forced order
    let mut corrections: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
    let mut t = full;
    while t != 0 {
        let (prev, i, subset) = parent[t].expect("reachable prefixes have parents");
        let set = non_inputs
            .iter()
            .enumerate()
            .filter(|&(j, _)| subset & (1 << j) != 0)
            .map(|(_, &v)| v)
            .collect();
        corrections.insert(non_outputs[i], set);
        t = prev;
    }
    let witness = flow::infer_forced_order(g, l, &corrections)?
        .expect("prefix order is a topological order of the forced relations");
    debug_assert!(
        flow::verify_pauli_flow(g, l, &witness).map(|v| v.is_empty()).unwrap_or(false),
        "oracle witness must verify"
    );
    Ok(Some(witness))
}

/// Exhaustive labelling search over a Pauli alphabet. Inputs range over
/// the alphabet's intersection with {X, Y}; other non-outputs over the
/// whole alphabet. Returns the first witness in canonical enumeration
/// order (vertices in canonical order, labels in alphabet order).
///
/// For the two-letter alphabet {X, Z} each labelling is decided by the
/// exact flow-matrix right-invertibility criterion; alphabets containing
/// Y fall back to the definitional flow search.
pub fn brute_force_label_search(
    g: &OpenGraph,
    alphabet: &[MeasLabel],
    lim: &OracleLimits,
) -> Result<Option<(Labelling, PauliFlow)>, OracleError> {
    check_limits(g, lim)?;
    if alphabet.is_empty() || alphabet.iter().any(|m| !m.is_pauli()) {
        return Err(OracleError::BadAlphabet);
    }
    let xz_only = alphabet.iter().all(|m| matches!(m, MeasLabel::X | MeasLabel::Z));
    let non_outputs = g.non_outputs();
    let per_vertex: Vec<Vec<MeasLabel>> = non_outputs
        .iter()
        .map(|&v| {
            if g.is_input(v) {
                alphabet.iter().copied().filter(|m| m.allowed_on_input()).collect()
            } else {
                alphabet.to_vec()
            }
        })
        .collect();
    if per_vertex.iter().any(Vec::is_empty) {
        return Ok(None); // an input cannot be labelled from this alphabet
    }
    let mut choice = vec![0usize; non_outputs.len()];
    loop {
        let mut lab = Labelling::empty();
        for (i, &v) in non_outputs.iter().enumerate() {
            lab.set(v, per_vertex[i][choice[i]]);
        }
        let witness = if xz_only {
            flow::extract_flow(g, &lab)?
        } else {
            brute_force_flow(g, &lab, lim)?
        };
        if let Some(f) = witness {
            return Ok(Some((lab, f)));
        }
        // odometer increment
        let mut i = non_outputs.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < per_vertex[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Exhaustive search for a focussed flow with the empty order, for
/// Pauli-only labellings. The focussing conditions constrain each
/// correction set on its own, so vertices are decided independently and
/// existence reduces to every vertex having a candidate.
pub fn brute_force_focussed_flow(
    g: &OpenGraph,
    l: &Labelling,
    lim: &OracleLimits,
) -> Result<Option<PauliFlow>, OracleError> {
    check_limits(g, lim)?;
    if !l.is_total(g) {
        return Err(OracleError::Flow(FlowError::LabellingNotTotal));
    }
    if let Some((_, bad)) = l.iter().find(|(_, m)| !m.is_pauli()) {
        return Err(OracleError::Flow(FlowError::LabelOutsideCodomain {
            expected: "X, Y and Z",
            found: bad,
        }));
    }
    let non_inputs = g.non_inputs();
    let mut corrections = BTreeMap::new();
    for u in g.non_outputs() {
        let label = l.get(u).expect("total");
        let mut found = None;
        'subsets: for mask in 0usize..1 << non_inputs.len() {
            let set: std::collections::BTreeSet<usize> = non_inputs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            let odd = g.odd_neighbourhood(&set);
            let (in_c, in_odd) = (set.contains(&u), odd.contains(&u));
            let local_ok = match label {
                MeasLabel::X => in_odd,
                MeasLabel::Z => in_c,
                MeasLabel::Y => in_c ^ in_odd,
                _ => unreachable!("labels checked Pauli"),
            };
            if !local_ok {
                continue;
            }
            for &w in &set {
                if w != u
                    && !g.is_output(w)
                    && !matches!(l.get(w), Some(MeasLabel::X | MeasLabel::Y))
                {
                    continue 'subsets; // F1
                }
            }
            for &w in &odd {
                if w != u
                    && !g.is_output(w)
                    && !matches!(l.get(w), Some(MeasLabel::Y | MeasLabel::Z))
                {
                    continue 'subsets; // F2
                }
            }
            for w in g.non_outputs() {
                if w != u
                    && l.get(w) == Some(MeasLabel::Y)
                    && (set.contains(&w) != odd.contains(&w))
                {
                    continue 'subsets; // F3
                }
            }
            found = Some(set);
            break;
        }
        match found {
            Some(set) => {
                corrections.insert(u, set);
            }
            None => return Ok(None),
        }
    }
    let f = PauliFlow::new(corrections, std::collections::BTreeSet::new())
        .expect("empty order is acyclic");
    debug_assert!(
        flow::verify_focussed(g, l, &f).map(|v| v.is_empty()).unwrap_or(false),
        "focussed oracle witness must verify"
    );
    Ok(Some(f))
}

/// Enumerates every right inverse of `m` as the canonical one plus all
/// per-column combinations of null-space vectors. Errors when the count
/// would exceed the cap.
pub fn enumerate_right_inverses(
    m: &Gf2Matrix,
    cap: usize,
) -> Result<Vec<Gf2Matrix>, OracleError> {
    let Some(base) = m.right_inverse() else {
        return Ok(Vec::new());
    };
    let kernel = m.null_space_basis();
    let d = kernel.len();
    let cols = m.rows(); // columns of the inverse
    let combos_bits = d * cols;
    if combos_bits >= usize::BITS as usize || (1usize << combos_bits) > cap {
        return Err(OracleError::LimitsExceeded {
            what: "right inverse count (log2)",
            value: combos_bits,
            limit: cap.ilog2() as usize,
        });
    }
    let mut out = Vec::with_capacity(1 << combos_bits);
    for combo in 0..(1usize << combos_bits) {
        let mut n = base.clone();
        for j in 0..cols {
            for (b, basis_vec) in kernel.iter().enumerate() {
                if combo & (1 << (j * d + b)) != 0 {
                    for (r, &bit) in basis_vec.iter().enumerate() {
                        if bit {
                            n.set(r, j, !n.get(r, j));
                        }
                    }
                }
            }
        }
        out.push(n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn one_z_labelling_has_flow() {
        let g = sample_graph();
        let l = one_z_labelling(&g);
        let f = brute_force_flow(&g, &l, &OracleLimits::default())
            .unwrap()
            .expect("the worked example has flow");
        assert_eq!(flow::verify_pauli_flow(&g, &l, &f).unwrap(), vec![]);
    }

    #[test]
    fn all_x_labelling_has_no_flow() {
        let g = sample_graph();
        let l = all_x_labelling(&g);
        assert!(brute_force_flow(&g, &l, &OracleLimits::default()).unwrap().is_none());
    }

    #[test]
    fn no_measured_vertices_gives_the_empty_flow() {
        let g = OpenGraph::new(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into())],
            &[],
            &["a".into(), "b".into()],
        )
        .unwrap();
        let f = brute_force_flow(&g, &Labelling::empty(), &OracleLimits::default())
            .unwrap()
            .expect("vacuous flow");
        assert!(f.corrections().is_empty());
    }

    #[test]
    fn label_search_xz_finds_a_witness_on_the_sample() {
        let g = sample_graph();
        let (lab, f) = brute_force_label_search(
            &g,
            &[MeasLabel::X, MeasLabel::Z],
            &OracleLimits::default(),
        )
        .unwrap()
        .expect("the sample admits an X/Z labelling with flow");
        assert!(lab.codomain_within(&[MeasLabel::X, MeasLabel::Z]));
        assert!(flow::flow_matrix(&g, &lab).unwrap().is_right_invertible());
        assert_eq!(flow::verify_focussed(&g, &lab, &f).unwrap(), vec![]);
    }

    #[test]
    fn label_search_x_only_fails_on_the_sample() {
        let g = sample_graph();
        assert!(brute_force_label_search(&g, &[MeasLabel::X], &OracleLimits::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn limits_are_enforced() {
        let g = sample_graph();
        let lim = OracleLimits { max_non_outputs: 2, ..OracleLimits::default() };
        assert!(matches!(
            brute_force_flow(&g, &all_x_labelling(&g), &lim),
            Err(OracleError::LimitsExceeded { .. })
        ));
    }

    #[test]
    fn oracle_result_is_independent_of_vertex_numbering() {
        // same graph under two different name orders: answers must agree
        let g1 = sample_graph();
        let names_rev: Vec<String> =
            ["h", "g", "f", "e", "d", "c", "b", "a"].iter().map(|s| s.to_string()).collect();
        // mirror the sample edges under A->h, B->g, C->f, D->e, E->d, F->c, G->b, H->a
        let ren = |n: &str| match n {
            "A" => "h",
            "B" => "g",
            "C" => "f",
            "D" => "e",
            "E" => "d",
            "F" => "c",
            "G" => "b",
            "H" => "a",
            _ => unreachable!(),
        };
        let edges: Vec<(String, String)> = g1
            .edges()
            .into_iter()
            .map(|(a, b)| (ren(g1.name(a)).to_string(), ren(g1.name(b)).to_string()))
            .collect();
        let g2 = OpenGraph::new(
            &names_rev,
            &edges,
            &["h".into(), "g".into()],
            &["c".into(), "b".into(), "a".into()],
        )
        .unwrap();
        let lim = OracleLimits::default();
        for alphabet in [vec![MeasLabel::X], vec![MeasLabel::X, MeasLabel::Z]] {
            let r1 = brute_force_label_search(&g1, &alphabet, &lim).unwrap().is_some();
            let r2 = brute_force_label_search(&g2, &alphabet, &lim).unwrap().is_some();
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn right_inverse_enumeration_square_case_is_unique() {
        let m = Gf2Matrix::identity(3);
        let all = enumerate_right_inverses(&m, 1 << 10).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0], Gf2Matrix::identity(3));
    }

    #[test]
    fn right_inverse_enumeration_counts_kernel_combos() {
        // 1x2 matrix [1 0]: kernel dim 1, one column: two right inverses
        let m = Gf2Matrix::from_rows(&[&[1, 0]]);
        let all = enumerate_right_inverses(&m, 1 << 10).unwrap();
        assert_eq!(all.len(), 2);
        for n in &all {
            assert_eq!(m.mul(n), Gf2Matrix::identity(1));
        }
    }
}
