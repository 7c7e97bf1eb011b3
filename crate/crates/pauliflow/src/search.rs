//! Randomized decision and search for measurement labellings with Pauli
//! flow: the variable flow matrix construction, the one-shot rank test
//! behind the decision procedure, and labelling extraction.
//!
//! The decision procedure asks whether the variable flow matrix can reach
//! full row rank under some 0/1 valuation; a YES answer corresponds
//! exactly to an X/Z labelling with focussed Pauli flow. Answers are
//! one-sided: NO is always exact, YES holds with probability `1 - p`.

use std::collections::BTreeSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::flow::{self, FlowError, PauliFlow};
use crate::graph::{GraphError, Labelling, MeasLabel, OpenGraph};
use crate::maxrank::{self, Confinement, Expr, MaxRankError, VarId, VarMatrix};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("error probability must lie in (0, 1/2], got {0}")]
    BadErrorProbability(f64),
    #[error("partial labelling must use only X and Z, found {0} on {1:?}")]
    InvalidPartialLabel(MeasLabel, String),
    #[error("partial labelling labels an output {0:?}")]
    PartialLabelOnOutput(String),
    #[error(
        "retry budget exhausted at vertex {vertex:?} after {rounds} rounds; \
         this is statistically implausible unless the seed stream is degenerate"
    )]
    RetryBudgetExhausted { vertex: String, rounds: u32 },
    #[error("internal invariant broken during {0}")]
    Internal(&'static str),
    #[error(transparent)]
    MaxRank(#[from] MaxRankError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameters of the randomized search.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    p: f64,
    seed: u64,
    retry_rounds: u32,
}

impl SearchConfig {
    /// Default error probability 2^-40; beyond that the chance of a wrong
    /// answer is dwarfed by hardware faults.
    pub const DEFAULT_P: f64 = 1.0 / (1u64 << 40) as f64;
    pub const DEFAULT_RETRY_ROUNDS: u32 = 64;

    pub fn new(p: f64, seed: u64) -> Result<SearchConfig, SearchError> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(SearchError::BadErrorProbability(p));
        }
        Ok(SearchConfig { p, seed, retry_rounds: Self::DEFAULT_RETRY_ROUNDS })
    }

    pub fn with_seed(seed: u64) -> SearchConfig {
        SearchConfig { p: Self::DEFAULT_P, seed, retry_rounds: Self::DEFAULT_RETRY_ROUNDS }
    }

    pub fn with_retry_rounds(mut self, rounds: u32) -> SearchConfig {
        self.retry_rounds = rounds.max(1);
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent, reproducible randomness per call: one cipher stream
    /// per call index on top of the fixed seed.
    pub fn rng(&self, stream: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Result of a search, with enough diagnostics to audit the field-size
/// choice (`k` is the extension degree of the first randomized call).
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub decision: bool,
    /// Total X/Z labelling on the input graph, present on YES paths of
    /// the labelling search.
    pub labelling: Option<Labelling>,
    /// Focussed flow extracted from the labelling, on the input graph.
    pub flow: Option<PauliFlow>,
    pub trials_used: u32,
    pub k_used: u32,
    pub n_vars: usize,
}

/// The variable flow matrix of an open graph, together with the
/// (x, y) variable pair of every internal vertex.
#[derive(Debug, Clone)]
pub struct VariableFlowMatrix {
    pub matrix: VarMatrix,
    /// internal vertex -> (row variable, column variable)
    pub vertex_vars: Vec<(usize, VarId, VarId)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("inputs and outputs overlap on {0:?}; trim the graph first")]
pub struct InputsOverlapOutputs(pub String);

/// Builds the variable flow matrix: starting from the reduced adjacency
/// matrix, every internal vertex `v` has its row scaled by `x_v` and its
/// column by `y_v`, and the (v, v) entry replaced by `(1+x_v)(1+y_v)`.
/// Row variables are row-confined and column variables column-confined,
/// which is exactly the shape the randomized rank test requires.
pub fn variable_flow_matrix(g: &OpenGraph) -> Result<VariableFlowMatrix, InputsOverlapOutputs> {
    if let Some(&v) = g.inputs().intersection(g.outputs()).next() {
        return Err(InputsOverlapOutputs(g.name(v).to_owned()));
    }
    let rows = g.non_outputs();
    let cols = g.non_inputs();
    let internal: BTreeSet<usize> = g.internal().into_iter().collect();
    let mut m = VarMatrix::zero(rows.len(), cols.len());
    let mut vertex_vars = Vec::new();
    let mut row_var = vec![None; g.vertex_count()];
    let mut col_var = vec![None; g.vertex_count()];
    for v in &internal {
        let r = rows.iter().position(|u| u == v).expect("internal vertices are rows");
        let c = cols.iter().position(|u| u == v).expect("internal vertices are columns");
        let x = m.new_var(Confinement::Row(r));
        let y = m.new_var(Confinement::Col(c));
        row_var[*v] = Some(x);
        col_var[*v] = Some(y);
        vertex_vars.push((*v, x, y));
    }
    for (r, &u) in rows.iter().enumerate() {
        for (c, &w) in cols.iter().enumerate() {
            let entry = if u == w && internal.contains(&u) {
                let x = Expr::var(row_var[u].unwrap());
                let y = Expr::var(col_var[u].unwrap());
                Expr::one()
                    .xor(&x)
                    .and_then(|lhs| Expr::one().xor(&y).and_then(|rhs| lhs.mul(&rhs)))
                    .expect("z entries are four small terms")
            } else if g.has_edge(u, w) {
                let mut e = Expr::one();
                if let Some(x) = row_var[u] {
                    e = e.mul(&Expr::var(x)).expect("distinct variables");
                }
                if let Some(y) = col_var[w] {
                    e = e.mul(&Expr::var(y)).expect("distinct variables");
                }
                e
            } else {
                Expr::zero()
            };
            m.set(r, c, entry).expect("construction respects confinement");
        }
    }
    debug_assert!(m.validate_confinement().is_ok());
    Ok(VariableFlowMatrix { matrix: m, vertex_vars })
}

fn check_partial(g: &OpenGraph, l: &Labelling) -> Result<(), SearchError> {
    for (v, m) in l.iter() {
        if g.is_output(v) {
            return Err(SearchError::PartialLabelOnOutput(g.name(v).to_owned()));
        }
        if !matches!(m, MeasLabel::X | MeasLabel::Z) || (g.is_input(v) && m == MeasLabel::Z) {
            return Err(SearchError::InvalidPartialLabel(m, g.name(v).to_owned()));
        }
    }
    Ok(())
}

/// One randomized test of whether a partial X/Z labelling extends to a
/// total one with Pauli flow. Never accepts a non-extendable labelling;
/// accepts extendable ones with probability at least `1 - p`.
///
/// Returns `(accepted, k_used, live_variable_count)`.
pub fn flow_search_aux(
    g: &OpenGraph,
    partial: &Labelling,
    p: f64,
    rng: &mut impl RngCore,
) -> Result<(bool, u32, usize), SearchError> {
    check_partial(g, partial)?;
    let (gt, lt) = g.trim_io(partial);
    let vfm = variable_flow_matrix(&gt).expect("trimmed graph has disjoint inputs and outputs");
    let mut m = vfm.matrix;
    for &(v, x, y) in &vfm.vertex_vars {
        match lt.get(v) {
            Some(MeasLabel::X) => {
                m.substitute(x, true);
                m.substitute(y, true);
            }
            Some(MeasLabel::Z) => {
                m.substitute(x, false);
                m.substitute(y, false);
            }
            _ => {} // unlabelled: stays a variable
        }
    }
    let target = gt.non_outputs().len();
    let (accepted, k, vars) = maxrank::rank_at_least_with_info(&m, target, p, rng)?;
    Ok((accepted, k, vars))
}

/// The decision procedure: is there any measurement labelling giving the
/// open graph a Pauli flow? Input/output overlaps are trimmed first.
pub fn flow_search(g: &OpenGraph, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    flow_search_stream(g, cfg, 0)
}

/// Like [`flow_search`] but drawing randomness from the given stream
/// index, for independent repeated trials under one seed.
pub fn flow_search_stream(
    g: &OpenGraph,
    cfg: &SearchConfig,
    stream: u64,
) -> Result<SearchOutcome, SearchError> {
    let mut rng = cfg.rng(stream);
    let (accepted, k, vars) = flow_search_aux(g, &Labelling::empty(), cfg.p, &mut rng)?;
    Ok(SearchOutcome {
        decision: accepted,
        labelling: None,
        flow: None,
        trials_used: 1,
        k_used: k,
        n_vars: vars,
    })
}

/// Uniform split of a total error budget over a number of randomized
/// calls; a union bound then keeps the end-to-end error below the total.
pub fn per_call_budget(p_total: f64, n_calls: usize) -> f64 {
    assert!(n_calls >= 1, "budget needs at least one call");
    p_total / n_calls as f64
}

/// Finds a total X/Z labelling with Pauli flow, together with the
/// extracted focussed flow, or decides that none exists.
///
/// Inputs are fixed to X; internal vertices are decided in canonical
/// order, trying X before Z and keeping the first label the randomized
/// extension test accepts. Acceptance is one-sided, so any rejection may
/// be a sampling miss: both the initial decision and each vertex are
/// retried with fresh randomness up to the configured retry budget. A NO
/// decision therefore needs every retry of the initial test to reject,
/// while exhausting the budget at a vertex (where acceptance was already
/// established) signals a degenerate randomness stream and is an error.
pub fn find_labelling(g: &OpenGraph, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let (gt, _) = g.trim_io(&Labelling::empty());
    let internal = gt.internal();
    let n_calls = 2 * internal.len() + 1;
    let p_call = per_call_budget(cfg.p, n_calls);
    let mut stream = 0u64;
    let mut trials = 0u32;
    let mut aux = |lab: &Labelling, trials: &mut u32| -> Result<(bool, u32, usize), SearchError> {
        let mut rng = cfg.rng(stream);
        stream += 1;
        *trials += 1;
        flow_search_aux(&gt, lab, p_call, &mut rng)
    };

    let mut found = false;
    let (mut k_used, mut n_vars) = (0, 0);
    for _ in 0..cfg.retry_rounds {
        let (accepted, k, vars) = aux(&Labelling::empty(), &mut trials)?;
        k_used = k;
        n_vars = vars;
        if accepted {
            found = true;
            break;
        }
    }
    if !found {
        return Ok(SearchOutcome {
            decision: false,
            labelling: None,
            flow: None,
            trials_used: trials,
            k_used,
            n_vars,
        });
    }
    let mut lab = Labelling::empty();
    for &i in gt.inputs() {
        lab.set(i, MeasLabel::X);
    }
    for v in internal {
        let mut confirmed = false;
        'rounds: for round in 0..cfg.retry_rounds {
            for candidate in [MeasLabel::X, MeasLabel::Z] {
                lab.set(v, candidate);
                if aux(&lab, &mut trials)?.0 {
                    confirmed = true;
                    break 'rounds;
                }
            }
            let _ = round;
        }
        if !confirmed {
            return Err(SearchError::RetryBudgetExhausted {
                vertex: gt.name(v).to_owned(),
                rounds: cfg.retry_rounds,
            });
        }
    }
    let flow = flow::extract_flow(&gt, &lab)?
        .ok_or(SearchError::Internal("labelling accepted but flow matrix not invertible"))?;
    let check = flow::verify_focussed(&gt, &lab, &flow)?;
    if !check.is_empty() {
        return Err(SearchError::Internal("extracted flow failed verification"));
    }
    // map labelling and flow back onto the caller's graph by vertex name
    let mut lab_orig = Labelling::empty();
    for (v, m) in lab.iter() {
        let idx = g.index_of(gt.name(v)).expect("trimmed vertices persist");
        lab_orig.set(idx, m);
    }
    let mut corrections = std::collections::BTreeMap::new();
    for (&v, set) in flow.corrections() {
        let idx = g.index_of(gt.name(v)).expect("trimmed vertices persist");
        let mapped: BTreeSet<usize> = set
            .iter()
            .map(|&u| g.index_of(gt.name(u)).expect("trimmed vertices persist"))
            .collect();
        corrections.insert(idx, mapped);
    }
    let flow_orig = PauliFlow::new(corrections, BTreeSet::new())?;
    Ok(SearchOutcome {
        decision: true,
        labelling: Some(lab_orig),
        flow: Some(flow_orig),
        trials_used: trials,
        k_used,
        n_vars,
    })
}
