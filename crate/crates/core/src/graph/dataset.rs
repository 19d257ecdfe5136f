//! Line-oriented dataset file format:
//!
//! ```text
//! GRAPH name |V| |E| num_classes
//! CLASSES c0 c1 ...
//! NODE id label f0 ... f14
//! EDGE u v
//! ```

use std::path::Path;

use crate::netlist::Function;

use super::{CircuitGraph, GraphError, FEATURE_DIM, FEAT_IN_DEGREE, FEAT_ONE_HOT, FEAT_OUT_DEGREE, FEAT_PI, FEAT_PO};

/// Integers print exactly; everything else with 6 significant digits.
fn fmt_feature(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6e}")
    }
}

pub fn format_dataset(graphs: &[CircuitGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&format!(
            "GRAPH {} {} {} {}\n",
            g.name,
            g.node_count(),
            g.edges.len(),
            g.class_names.len()
        ));
        out.push_str(&format!("CLASSES {}\n", g.class_names.join(" ")));
        for v in 0..g.node_count() {
            let feats: Vec<String> = g.features[v].iter().map(|&f| fmt_feature(f)).collect();
            out.push_str(&format!("NODE {v} {} {}\n", g.labels[v], feats.join(" ")));
        }
        for &(u, v) in &g.edges {
            out.push_str(&format!("EDGE {u} {v}\n"));
        }
    }
    out
}

pub fn save_dataset(graphs: &[CircuitGraph], path: &Path) -> Result<(), GraphError> {
    std::fs::write(path, format_dataset(graphs))?;
    Ok(())
}

pub fn parse_dataset(text: &str) -> Result<Vec<CircuitGraph>, GraphError> {
    let mut graphs: Vec<CircuitGraph> = Vec::new();
    let mut expect_nodes = 0usize;
    let mut expect_edges = 0usize;
    let err = |line: usize, msg: String| GraphError::Format { line, msg };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        match tag {
            "GRAPH" => {
                if let Some(g) = graphs.last() {
                    validate_counts(g, expect_nodes, expect_edges, lineno)?;
                }
                let name = parts
                    .next()
                    .ok_or_else(|| err(lineno, "missing graph name".into()))?;
                let nums: Vec<usize> = parts
                    .map(|p| p.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(lineno, format!("bad GRAPH header: {e}")))?;
                if nums.len() != 3 {
                    return Err(err(lineno, "GRAPH expects name |V| |E| num_classes".into()));
                }
                expect_nodes = nums[0];
                expect_edges = nums[1];
                graphs.push(CircuitGraph {
                    name: name.to_string(),
                    edges: Vec::new(),
                    features: Vec::new(),
                    labels: Vec::new(),
                    class_names: vec![String::new(); nums[2]],
                    in_degree: Vec::new(),
                    out_degree: Vec::new(),
                    functions: Vec::new(),
                    reads_pi: Vec::new(),
                    drives_po: Vec::new(),
                });
            }
            "CLASSES" => {
                let g = graphs
                    .last_mut()
                    .ok_or_else(|| err(lineno, "CLASSES before GRAPH".into()))?;
                let names: Vec<String> = parts.map(|s| s.to_string()).collect();
                if names.len() != g.class_names.len() {
                    return Err(err(
                        lineno,
                        format!(
                            "expected {} class names, got {}",
                            g.class_names.len(),
                            names.len()
                        ),
                    ));
                }
                g.class_names = names;
            }
            "NODE" => {
                let g = graphs
                    .last_mut()
                    .ok_or_else(|| err(lineno, "NODE before GRAPH".into()))?;
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 2 + FEATURE_DIM {
                    return Err(err(
                        lineno,
                        format!("NODE expects id label and {FEATURE_DIM} features"),
                    ));
                }
                let id: usize = fields[0]
                    .parse()
                    .map_err(|e| err(lineno, format!("bad node id: {e}")))?;
                if id != g.features.len() {
                    return Err(err(lineno, format!("node ids must be dense, got {id}")));
                }
                let label: usize = fields[1]
                    .parse()
                    .map_err(|e| err(lineno, format!("bad label: {e}")))?;
                if label >= g.class_names.len() {
                    return Err(err(lineno, format!("label {label} out of range")));
                }
                let mut row = [0.0; FEATURE_DIM];
                for (i, f) in fields[2..].iter().enumerate() {
                    row[i] = f
                        .parse()
                        .map_err(|e| err(lineno, format!("bad feature: {e}")))?;
                }
                let one_hot = row[FEAT_ONE_HOT..]
                    .iter()
                    .position(|&v| v == 1.0)
                    .ok_or_else(|| err(lineno, "missing one-hot function bit".into()))?;
                g.labels.push(label);
                g.reads_pi.push(row[FEAT_PI] != 0.0);
                g.drives_po.push(row[FEAT_PO] != 0.0);
                g.in_degree.push(row[FEAT_IN_DEGREE] as usize);
                g.out_degree.push(row[FEAT_OUT_DEGREE] as usize);
                g.functions.push(Function::ALL[one_hot]);
                g.features.push(row);
            }
            "EDGE" => {
                let g = graphs
                    .last_mut()
                    .ok_or_else(|| err(lineno, "EDGE before GRAPH".into()))?;
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 2 {
                    return Err(err(lineno, "EDGE expects two endpoints".into()));
                }
                let u: usize = fields[0]
                    .parse()
                    .map_err(|e| err(lineno, format!("bad edge endpoint: {e}")))?;
                let v: usize = fields[1]
                    .parse()
                    .map_err(|e| err(lineno, format!("bad edge endpoint: {e}")))?;
                if u >= g.features.len() || v >= g.features.len() || u == v {
                    return Err(err(lineno, format!("invalid edge {u}-{v}")));
                }
                g.edges.push((u.min(v), u.max(v)));
            }
            other => {
                return Err(err(lineno, format!("unknown record tag `{other}`")));
            }
        }
    }
    if let Some(g) = graphs.last() {
        let last_line = text.lines().count();
        validate_counts(g, expect_nodes, expect_edges, last_line)?;
    }
    Ok(graphs)
}

fn validate_counts(
    g: &CircuitGraph,
    nodes: usize,
    edges: usize,
    lineno: usize,
) -> Result<(), GraphError> {
    if g.node_count() != nodes {
        return Err(GraphError::Format {
            line: lineno,
            msg: format!(
                "graph `{}` declared {nodes} nodes but has {}",
                g.name,
                g.node_count()
            ),
        });
    }
    if g.edges.len() != edges {
        return Err(GraphError::Format {
            line: lineno,
            msg: format!(
                "graph `{}` declared {edges} edges but has {}",
                g.name,
                g.edges.len()
            ),
        });
    }
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Vec<CircuitGraph>, GraphError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text)
}
