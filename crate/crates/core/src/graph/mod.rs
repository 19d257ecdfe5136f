//! Undirected circuit graphs with per-node features, plus the line-oriented
//! dataset format.

mod dataset;

pub use dataset::{format_dataset, load_dataset, parse_dataset, save_dataset};

use std::collections::{BTreeMap, BTreeSet};

use crate::netlist::{FlatNetlist, Function};

/// Fixed feature layout:
/// `[0]` connected-to-PI, `[1]` connected-to-PO, `[2]` in-degree,
/// `[3]` out-degree, `[4..15]` one-hot function tag.
pub const FEATURE_DIM: usize = 15;
pub const FEAT_PI: usize = 0;
pub const FEAT_PO: usize = 1;
pub const FEAT_IN_DEGREE: usize = 2;
pub const FEAT_OUT_DEGREE: usize = 3;
pub const FEAT_ONE_HOT: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("graph has no nodes")]
    EmptyGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph {
    pub name: String,
    /// Undirected edges, stored once with u < v, sorted.
    pub edges: Vec<(usize, usize)>,
    pub features: Vec<[f64; FEATURE_DIM]>,
    /// Class id per node, indexing into `class_names`.
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    /// Directed degrees retained pre-symmetrization.
    pub in_degree: Vec<usize>,
    pub out_degree: Vec<usize>,
    pub functions: Vec<Function>,
    pub reads_pi: Vec<bool>,
    pub drives_po: Vec<bool>,
}

impl CircuitGraph {
    pub fn node_count(&self) -> usize {
        self.features.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }
}

/// Converts a lint-clean flat netlist into an undirected graph: one node per
/// gate, one edge per driver-reader gate pair. PIs and POs become node
/// attributes rather than nodes. The class list is derived from the labels
/// present in the netlist.
pub fn to_graph(flat: &FlatNetlist) -> CircuitGraph {
    let classes: Vec<String> = flat
        .label_counts()
        .keys()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    to_graph_with_classes(flat, &classes)
}

/// Like [`to_graph`] but with a caller-supplied shared class list. Labels
/// absent from the list are an error in dataset assembly; they panic here.
pub fn to_graph_with_classes(flat: &FlatNetlist, class_names: &[String]) -> CircuitGraph {
    let n = flat.gates.len();
    let mut driver: BTreeMap<usize, usize> = BTreeMap::new();
    for (gi, g) in flat.gates.iter().enumerate() {
        driver.insert(g.output, gi);
    }
    let mut readers: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (gi, g) in flat.gates.iter().enumerate() {
        for &net in &g.inputs {
            readers.entry(net).or_default().insert(gi);
        }
    }

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut in_degree = vec![0usize; n];
    let mut out_degree = vec![0usize; n];
    let mut reads_pi = vec![false; n];
    let mut drives_po = vec![false; n];
    for (gi, g) in flat.gates.iter().enumerate() {
        // Distinct driver gates feeding this gate's input nets.
        let mut feeders: BTreeSet<usize> = BTreeSet::new();
        for &net in &g.inputs {
            if flat.primary_inputs.contains(&net) {
                reads_pi[gi] = true;
            }
            if let Some(&d) = driver.get(&net) {
                if d != gi {
                    feeders.insert(d);
                    edges.insert((d.min(gi), d.max(gi)));
                }
            }
        }
        in_degree[gi] = feeders.len();
        if flat.primary_outputs.contains(&g.output) {
            drives_po[gi] = true;
        }
        let consumers: BTreeSet<usize> = readers
            .get(&g.output)
            .map(|s| s.iter().copied().filter(|&r| r != gi).collect())
            .unwrap_or_default();
        out_degree[gi] = consumers.len();
    }

    let functions: Vec<Function> = flat.gates.iter().map(|g| g.function).collect();
    let labels: Vec<usize> = flat
        .gates
        .iter()
        .map(|g| {
            class_names
                .iter()
                .position(|c| c == &g.label)
                .unwrap_or_else(|| panic!("label `{}` missing from class list", g.label))
        })
        .collect();

    let mut graph = CircuitGraph {
        name: flat.name.clone(),
        edges: edges.into_iter().collect(),
        features: vec![[0.0; FEATURE_DIM]; n],
        labels,
        class_names: class_names.to_vec(),
        in_degree,
        out_degree,
        functions,
        reads_pi,
        drives_po,
    };
    graph.features = extract_features(&graph);
    graph
}

/// Re-derives the feature matrix from the graph's node attributes. The
/// stored matrix is built by the same rule; the two must agree exactly.
pub fn extract_features(g: &CircuitGraph) -> Vec<[f64; FEATURE_DIM]> {
    let mut rows = vec![[0.0; FEATURE_DIM]; g.node_count()];
    for v in 0..g.node_count() {
        let row = &mut rows[v];
        row[FEAT_PI] = if g.reads_pi[v] { 1.0 } else { 0.0 };
        row[FEAT_PO] = if g.drives_po[v] { 1.0 } else { 0.0 };
        row[FEAT_IN_DEGREE] = g.in_degree[v] as f64;
        row[FEAT_OUT_DEGREE] = g.out_degree[v] as f64;
        row[FEAT_ONE_HOT + g.functions[v].one_hot_index()] = 1.0;
    }
    rows
}
