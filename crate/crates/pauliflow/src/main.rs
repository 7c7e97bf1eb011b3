//! Command-line interface: decide, search, label, verify and reduce open
//! graphs given as JSON files.
//!
//! Exit codes: 0 = YES / success, 1 = NO / absent, 2 = usage or
//! validation error, 3 = retry budget exhausted.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use pauliflow::flow::{self, PauliFlow};
use pauliflow::graph::{Labelling, MeasLabel, OpenGraph};
use pauliflow::oracle::{self, OracleError, OracleLimits};
use pauliflow::reduce::{self, ReduceError};
use pauliflow::search::{self, SearchConfig, SearchError};

#[derive(Parser)]
#[command(
    name = "pauliflow",
    version,
    about = "Pauli-flow existence, search and reduction for MBQC open graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the flow of a fully labelled graph, from a witness file or
    /// by exact extraction for X/Z labellings.
    Check {
        /// Graph JSON file (labels must be total).
        input: PathBuf,
        /// Flow witness JSON: {"corrections": {...}, "order": [[u,v],...]}.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Fall back to the exhaustive search (desk-scale limits).
        #[arg(long)]
        oracle: bool,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Decide whether some measurement labelling admits a Pauli flow.
    /// Labels present in the file constrain the search as a partial
    /// X/Z labelling.
    Search {
        input: PathBuf,
        /// One-sided error probability per trial, in (0, 1/2].
        #[arg(short = 'p', long = "error-prob")]
        error_prob: Option<f64>,
        /// Randomness seed; one is drawn from the OS and echoed if absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of independent trials; YES if any trial accepts.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Use the exhaustive oracle instead of the randomized test.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Find a total X/Z labelling with Pauli flow plus its correction sets.
    Label {
        input: PathBuf,
        #[arg(short = 'p', long = "error-prob")]
        error_prob: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the exhaustive oracle instead of the randomized search.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Shrink the output set to the input count, relabelling to Z as needed.
    /// The file must carry a total X/Z labelling with flow.
    ReduceOutputs {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Minimal output set for the file's inputs under all-X measurements.
    MinOutputs {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// An input set matching the file's outputs under all-X measurements.
    FindInputs {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive flow or labelling search (desk-scale limits enforced).
    Oracle {
        input: PathBuf,
        /// Label alphabet for the search: "xz" or "xyz".
        #[arg(long, default_value = "xz")]
        alphabet: String,
        #[arg(long)]
        json: bool,
    },
}

/// Errors carrying their process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }

    fn no(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> CliError {
        let code = match e {
            SearchError::RetryBudgetExhausted { .. } => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> CliError {
        CliError::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe closes, like other line tools
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}

fn load_graph(path: &Path) -> Result<(OpenGraph, Labelling), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    OpenGraph::parse_json(&bytes)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rngs::OsRng.next_u64())
}

fn config(p: Option<f64>, seed: u64) -> Result<SearchConfig, CliError> {
    let p = p.unwrap_or(SearchConfig::DEFAULT_P);
    Ok(SearchConfig::new(p, seed)?)
}

/// Witness file: correction sets plus direct order relations, by name.
#[derive(Debug, Serialize, Deserialize)]
struct WitnessDoc {
    corrections: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    order: Vec<(String, String)>,
}

impl WitnessDoc {
    fn into_flow(self, g: &OpenGraph) -> Result<PauliFlow, CliError> {
        let resolve = |name: &str| {
            g.index_of(name)
                .ok_or_else(|| CliError::usage(format!("witness names unknown vertex {name:?}")))
        };
        let mut corrections = BTreeMap::new();
        for (v, set) in &self.corrections {
            let vi = resolve(v)?;
            let mut s = BTreeSet::new();
            for u in set {
                s.insert(resolve(u)?);
            }
            corrections.insert(vi, s);
        }
        let mut order = BTreeSet::new();
        for (u, v) in &self.order {
            order.insert((resolve(u)?, resolve(v)?));
        }
        PauliFlow::new(corrections, order)
            .map_err(|e| CliError::usage(format!("witness rejected: {e}")))
    }

    fn from_flow(g: &OpenGraph, f: &PauliFlow) -> WitnessDoc {
        WitnessDoc {
            corrections: f
                .corrections()
                .iter()
                .map(|(&v, set)| {
                    (
                        g.name(v).to_owned(),
                        set.iter().map(|&u| g.name(u).to_owned()).collect(),
                    )
                })
                .collect(),
            order: f
                .order_relations()
                .iter()
                .map(|&(u, v)| (g.name(u).to_owned(), g.name(v).to_owned()))
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct SearchReport {
    command: &'static str,
    seed: u64,
    p: f64,
    trials: u64,
    trials_used: u64,
    n_vars: usize,
    k_used: u32,
    decision: bool,
}

#[derive(Serialize)]
struct LabelReport {
    command: &'static str,
    seed: u64,
    p: f64,
    trials_used: u32,
    n_vars: usize,
    k_used: u32,
    decision: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDoc>,
}

fn graph_value(g: &OpenGraph, l: &Labelling) -> serde_json::Value {
    serde_json::from_str(&g.to_json(l)).expect("graph JSON is valid")
}

fn print_witness(g: &OpenGraph, f: &PauliFlow) {
    println!("corrections:");
    for (&v, set) in f.corrections() {
        let names: Vec<&str> = set.iter().map(|&u| g.name(u)).collect();
        println!("  {} -> {{{}}}", g.name(v), names.join(", "));
    }
    if f.order_relations().is_empty() {
        println!("order: (empty)");
    } else {
        let rels: Vec<String> = f
            .order_relations()
            .iter()
            .map(|&(u, v)| format!("{} < {}", g.name(u), g.name(v)))
            .collect();
        println!("order: {}", rels.join(", "));
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Check { input, witness, oracle, json } => {
            let (g, lab) = load_graph(&input)?;
            if !lab.is_total(&g) {
                return Err(CliError::usage(
                    "check needs a total labelling (every non-output labelled)",
                ));
            }
            let (valid, flow, violations): (bool, Option<PauliFlow>, Vec<String>) =
                if let Some(wpath) = witness {
                    let bytes = std::fs::read(&wpath).map_err(|e| {
                        CliError::usage(format!("cannot read {}: {e}", wpath.display()))
                    })?;
                    let doc: WitnessDoc = serde_json::from_slice(&bytes)
                        .map_err(|e| CliError::usage(format!("witness JSON: {e}")))?;
                    let f = doc.into_flow(&g)?;
                    let vs = flow::verify_pauli_flow(&g, &lab, &f)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    let msgs = vs
                        .iter()
                        .map(|v| format!("{} at ({}, {})", v.condition, g.name(v.u), g.name(v.v)))
                        .collect::<Vec<_>>();
                    (msgs.is_empty(), Some(f), msgs)
                } else if oracle {
                    let f = oracle::brute_force_flow(&g, &lab, &OracleLimits::default())?;
                    (f.is_some(), f, Vec::new())
                } else if lab.codomain_within(&[MeasLabel::X, MeasLabel::Z]) {
                    let f = flow::extract_flow(&g, &lab)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    (f.is_some(), f, Vec::new())
                } else {
                    return Err(CliError::usage(
                        "labels outside {X, Z}: provide --witness or use --oracle",
                    ));
                };
            if json {
                let report = serde_json::json!({
                    "command": "check",
                    "valid": valid,
                    "violations": violations,
                    "witness": flow.as_ref().map(|f| {
                        serde_json::to_value(WitnessDoc::from_flow(&g, f)).unwrap()
                    }),
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else if valid {
                println!("result: flow VALID");
                if let Some(f) = &flow {
                    print_witness(&g, f);
                }
            } else {
                println!("result: NO flow");
                for v in &violations {
                    println!("violated: {v}");
                }
            }
            if valid {
                Ok(())
            } else {
                Err(CliError::no(String::new()))
            }
        }

        Command::Search { input, error_prob, seed, trials, oracle, json } => {
            let (g, lab) = load_graph(&input)?;
            if trials == 0 {
                return Err(CliError::usage("--trials must be at least 1"));
            }
            if oracle {
                let hit = oracle::brute_force_label_search(
                    &g,
                    &[MeasLabel::X, MeasLabel::Z],
                    &OracleLimits::default(),
                )?;
                let decision = hit.is_some();
                if json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "command": "search",
                            "mode": "oracle",
                            "decision": decision,
                        }))
                        .unwrap()
                    );
                } else {
                    println!("mode: exhaustive oracle");
                    println!("result: {}", if decision { "YES" } else { "NO" });
                }
                return if decision { Ok(()) } else { Err(CliError::no(String::new())) };
            }
            let seed = resolve_seed(seed);
            let cfg = config(error_prob, seed)?;
            let mut decision = false;
            let mut used = 0u64;
            let (mut k_used, mut n_vars) = (0u32, 0usize);
            for t in 0..trials {
                let mut rng = cfg.rng(t);
                let (acc, k, vars) = search::flow_search_aux(&g, &lab, cfg.p(), &mut rng)?;
                used = t + 1;
                k_used = k;
                n_vars = vars;
                if acc {
                    decision = true;
                    break;
                }
            }
            let report = SearchReport {
                command: "search",
                seed,
                p: cfg.p(),
                trials,
                trials_used: used,
                n_vars,
                k_used,
                decision,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("seed: {seed}");
                println!("p: {:e}", cfg.p());
                println!("vars: {n_vars}");
                println!("k: {k_used}");
                println!("trials: {used}/{trials}");
                println!("result: {}", if decision { "YES" } else { "NO" });
            }
            if decision {
                Ok(())
            } else {
                Err(CliError::no(String::new()))
            }
        }

        Command::Label { input, error_prob, seed, oracle, json } => {
            let (g, lab) = load_graph(&input)?;
            if !lab.is_empty() {
                return Err(CliError::usage(
                    "label expects an unlabelled graph; existing labels would be discarded",
                ));
            }
            if oracle {
                let hit = oracle::brute_force_label_search(
                    &g,
                    &[MeasLabel::X, MeasLabel::Z],
                    &OracleLimits::default(),
                )?;
                return match hit {
                    Some((found, flow)) => {
                        if json {
                            let report = serde_json::json!({
                                "command": "label",
                                "mode": "oracle",
                                "decision": true,
                                "graph": graph_value(&g, &found),
                                "witness": WitnessDoc::from_flow(&g, &flow),
                            });
                            println!("{}", serde_json::to_string_pretty(&report).unwrap());
                        } else {
                            println!("mode: exhaustive oracle");
                            println!("result: YES");
                            println!("{}", g.to_json(&found));
                            print_witness(&g, &flow);
                        }
                        Ok(())
                    }
                    None => {
                        if json {
                            println!(
                                "{}",
                                serde_json::to_string_pretty(&serde_json::json!({
                                    "command": "label", "mode": "oracle", "decision": false,
                                }))
                                .unwrap()
                            );
                        } else {
                            println!("mode: exhaustive oracle");
                            println!("result: NO");
                        }
                        Err(CliError::no(String::new()))
                    }
                };
            }
            let seed = resolve_seed(seed);
            let cfg = config(error_prob, seed)?;
            let out = search::find_labelling(&g, &cfg)?;
            let report = LabelReport {
                command: "label",
                seed,
                p: cfg.p(),
                trials_used: out.trials_used,
                n_vars: out.n_vars,
                k_used: out.k_used,
                decision: out.decision,
                graph: out.labelling.as_ref().map(|l| graph_value(&g, l)),
                witness: out.flow.as_ref().map(|f| WitnessDoc::from_flow(&g, f)),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("seed: {seed}");
                println!("p: {:e}", cfg.p());
                println!("vars: {}", out.n_vars);
                println!("k: {}", out.k_used);
                println!("trials: {}", out.trials_used);
                println!("result: {}", if out.decision { "YES" } else { "NO" });
                if let (Some(l), Some(f)) = (&out.labelling, &out.flow) {
                    println!("{}", g.to_json(l));
                    print_witness(&g, f);
                }
            }
            if out.decision {
                Ok(())
            } else {
                Err(CliError::no(String::new()))
            }
        }

        Command::ReduceOutputs { input, json } => {
            let (g, lab) = load_graph(&input)?;
            if !lab.is_total(&g) || !lab.codomain_within(&[MeasLabel::X, MeasLabel::Z]) {
                return Err(CliError::usage(
                    "reduce-outputs needs a total X/Z labelling with flow",
                ));
            }
            let r = match reduce::reduce_outputs(&g, &lab) {
                Ok(r) => r,
                Err(ReduceError::NoFlow) => {
                    return Err(CliError::no("the labelling has no Pauli flow".to_owned()))
                }
                Err(e) => return Err(CliError::usage(e.to_string())),
            };
            if json {
                let report = serde_json::json!({
                    "command": "reduce-outputs",
                    "graph": graph_value(&r.graph, &r.labelling),
                    "relabelled": r.relabelled.iter().map(|&v| g.name(v)).collect::<Vec<_>>(),
                    "removed_outputs":
                        r.removed_outputs.iter().map(|&v| g.name(v)).collect::<Vec<_>>(),
                    "witness": WitnessDoc::from_flow(&r.graph, &r.flow),
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                let relabelled: Vec<&str> = r.relabelled.iter().map(|&v| g.name(v)).collect();
                let removed: Vec<&str> = r.removed_outputs.iter().map(|&v| g.name(v)).collect();
                println!("relabelled to Z: {{{}}}", relabelled.join(", "));
                println!("removed outputs: {{{}}}", removed.join(", "));
                println!("{}", r.graph.to_json(&r.labelling));
            }
            Ok(())
        }

        Command::MinOutputs { input, json } => {
            let (g, _) = load_graph(&input)?;
            let outputs = reduce::minimal_outputs(&g, g.inputs());
            let shaped = g.with_outputs(&outputs);
            let mut all_x = Labelling::empty();
            for v in shaped.non_outputs() {
                all_x.set(v, MeasLabel::X);
            }
            emit_graph_result("min-outputs", &shaped, &all_x, json);
            Ok(())
        }

        Command::FindInputs { input, json } => {
            let (g, _) = load_graph(&input)?;
            match reduce::find_inputs(&g, g.outputs()) {
                Some(inputs) => {
                    let shaped = g.with_inputs(&inputs);
                    let mut all_x = Labelling::empty();
                    for v in shaped.non_outputs() {
                        all_x.set(v, MeasLabel::X);
                    }
                    emit_graph_result("find-inputs", &shaped, &all_x, json);
                    Ok(())
                }
                None => Err(CliError::no(
                    "no input set admits flow for these outputs".to_owned(),
                )),
            }
        }

        Command::Oracle { input, alphabet, json } => {
            let (g, lab) = load_graph(&input)?;
            let lim = OracleLimits::default();
            if lab.is_total(&g) && !g.non_outputs().is_empty() {
                let flow = oracle::brute_force_flow(&g, &lab, &lim)?;
                let decision = flow.is_some();
                if json {
                    let report = serde_json::json!({
                        "command": "oracle",
                        "mode": "flow",
                        "decision": decision,
                        "witness": flow.as_ref().map(|f| {
                            serde_json::to_value(WitnessDoc::from_flow(&g, f)).unwrap()
                        }),
                    });
                    println!("{}", serde_json::to_string_pretty(&report).unwrap());
                } else {
                    println!("mode: exhaustive flow search (fixed labelling)");
                    println!("result: {}", if decision { "YES" } else { "NO" });
                    if let Some(f) = &flow {
                        print_witness(&g, f);
                    }
                }
                return if decision { Ok(()) } else { Err(CliError::no(String::new())) };
            }
            let letters: Vec<MeasLabel> = match alphabet.as_str() {
                "xz" => vec![MeasLabel::X, MeasLabel::Z],
                "xyz" => vec![MeasLabel::X, MeasLabel::Y, MeasLabel::Z],
                other => {
                    return Err(CliError::usage(format!(
                        "unknown alphabet {other:?}; expected \"xz\" or \"xyz\""
                    )))
                }
            };
            let hit = oracle::brute_force_label_search(&g, &letters, &lim)?;
            let decision = hit.is_some();
            if json {
                let report = serde_json::json!({
                    "command": "oracle",
                    "mode": "label-search",
                    "alphabet": alphabet,
                    "decision": decision,
                    "graph": hit.as_ref().map(|(l, _)| graph_value(&g, l)),
                    "witness": hit.as_ref().map(|(_, f)| {
                        serde_json::to_value(WitnessDoc::from_flow(&g, f)).unwrap()
                    }),
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("mode: exhaustive label search ({alphabet})");
                println!("result: {}", if decision { "YES" } else { "NO" });
                if let Some((l, f)) = &hit {
                    println!("{}", g.to_json(l));
                    print_witness(&g, f);
                }
            }
            if decision {
                Ok(())
            } else {
                Err(CliError::no(String::new()))
            }
        }
    }
}

fn emit_graph_result(command: &str, g: &OpenGraph, l: &Labelling, json: bool) {
    if json {
        let report = serde_json::json!({
            "command": command,
            "graph": graph_value(g, l),
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("{}", g.to_json(l));
    }
}
