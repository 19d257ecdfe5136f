//! Flattened multi-block composition: instantiate labeled blocks under a
//! fresh top, randomly gluing block inputs to earlier block outputs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::netlist::{
    flatten, Connections, FlatNetlist, Instance, LabelMap, ModuleDef, NetExpr, Netlist, PortDir,
};

use super::AugmentError;

#[derive(Debug, Clone)]
pub struct ComposedDesign {
    /// The hierarchical design, suitable for writing out.
    pub netlist: Netlist,
    pub top: String,
    /// Flattened with per-gate class labels.
    pub flat: FlatNetlist,
    pub labels: LabelMap,
}

fn sanitize(bit: &str) -> String {
    bit.replace('.', "_")
}

/// Composes `blocks` (class name, lint-clean netlist whose top is its last
/// module) under a fresh top. Each block input bit connects to a uniformly
/// chosen output of an earlier block with probability `glue_prob`, else to
/// a fresh top-level PI. Unread block outputs become POs. Gate labels come
/// from the block classes.
pub fn compose_flat_design(
    blocks: &[(String, Netlist)],
    glue_prob: f64,
    seed: u64,
    lib: &crate::netlist::CellLibrary,
) -> Result<ComposedDesign, AugmentError> {
    assert!(!blocks.is_empty(), "compose needs at least one block");
    assert!((0.0..=1.0).contains(&glue_prob), "glue_prob in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modules: Vec<ModuleDef> = Vec::new();
    // Module name -> index in `modules`; identical duplicates are merged,
    // conflicting definitions get a per-block suffix.
    let mut by_name: BTreeMap<String, usize> = BTreeMap::new();
    let mut labels = LabelMap::default();
    let mut top = ModuleDef::new("composite");
    let mut available_outputs: Vec<String> = Vec::new();

    for (j, (class, block)) in blocks.iter().enumerate() {
        let inst = format!("blk{j:03}");
        labels.push(&inst, class);
        // Import the block's modules, renaming on conflicting definitions.
        let mut rename: BTreeMap<String, String> = BTreeMap::new();
        for m in &block.modules {
            match by_name.get(&m.name) {
                Some(&idx) if modules[idx] == *m => {}
                Some(_) => {
                    let fresh = format!("{}__b{j}", m.name);
                    rename.insert(m.name.clone(), fresh.clone());
                    let mut copy = m.clone();
                    copy.name = fresh.clone();
                    for i in &mut copy.instances {
                        if let Some(r) = rename.get(&i.target) {
                            i.target = r.clone();
                        }
                    }
                    by_name.insert(fresh, modules.len());
                    modules.push(copy);
                }
                None => {
                    let mut copy = m.clone();
                    for i in &mut copy.instances {
                        if let Some(r) = rename.get(&i.target) {
                            i.target = r.clone();
                        }
                    }
                    by_name.insert(m.name.clone(), modules.len());
                    modules.push(copy);
                }
            }
        }
        let block_top = block.modules.last().expect("non-empty netlist");
        let target = rename
            .get(&block_top.name)
            .cloned()
            .unwrap_or_else(|| block_top.name.clone());

        let mut binds: Vec<(String, NetExpr)> = Vec::new();
        for port in &block_top.ports {
            for bit in crate::netlist::expand_bits(&port.name, port.range) {
                let net = format!("{inst}_{}", sanitize(&bit));
                match port.dir {
                    PortDir::Input => {
                        let glued = !available_outputs.is_empty() && rng.gen_bool(glue_prob);
                        if glued {
                            let src = available_outputs.choose(&mut rng).unwrap().clone();
                            binds.push((bit, NetExpr::Scalar(src)));
                        } else {
                            top.add_port(&net, PortDir::Input, None);
                            binds.push((bit, NetExpr::Scalar(net)));
                        }
                    }
                    PortDir::Output => {
                        // Declared as a wire now; promoted to PO later if
                        // nothing downstream consumes it.
                        top.add_wire(&net, None);
                        available_outputs.push(net.clone());
                        binds.push((bit, NetExpr::Scalar(net)));
                    }
                }
            }
        }
        top.instances.push(Instance {
            name: inst,
            target,
            conns: Connections::Named(binds),
            line: 0,
        });
    }

    // Outputs never used as glue become primary outputs. A glued output is
    // referenced by more than one binding (its own plus each consumer).
    let mut refs: BTreeMap<&str, usize> = BTreeMap::new();
    for i in &top.instances {
        if let Connections::Named(binds) = &i.conns {
            for (_, actual) in binds {
                if let NetExpr::Scalar(net) = actual {
                    *refs.entry(net.as_str()).or_insert(0) += 1;
                }
            }
        }
    }
    let promote: Vec<String> = available_outputs
        .iter()
        .filter(|net| refs.get(net.as_str()).copied().unwrap_or(0) <= 1)
        .cloned()
        .collect();
    for net in &promote {
        top.wires.retain(|w| &w.name != net);
        top.add_port(net, PortDir::Output, None);
    }

    modules.push(top);
    let netlist = Netlist { modules };
    let flat = flatten(&netlist, lib, "composite", &labels)?;
    Ok(ComposedDesign {
        netlist,
        top: "composite".to_string(),
        flat,
        labels,
    })
}
