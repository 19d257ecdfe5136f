//! Hierarchy elaboration into a flat gate list.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::lint::lint_netlist;
use super::types::*;
use super::NetlistError;

pub type NetId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    /// Hierarchical instance name, e.g. `u1.g3`.
    pub name: String,
    pub function: Function,
    /// Ordered input nets.
    pub inputs: Vec<NetId>,
    pub output: NetId,
    /// `[top, inst, sub_inst, ...]` — the instantiation chain, without the
    /// gate's own instance name.
    pub provenance: Vec<String>,
    /// Class label derived from the provenance and a label map.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatNetlist {
    /// Top module name.
    pub name: String,
    pub gates: Vec<Gate>,
    /// Net names; index is the NetId.
    pub nets: Vec<String>,
    pub primary_inputs: BTreeSet<NetId>,
    pub primary_outputs: BTreeSet<NetId>,
}

impl FlatNetlist {
    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.nets.iter().position(|n| n == name)
    }

    /// Gate indices in dependency order; DFF gates count as sources.
    /// Returns the name of a net on a combinational cycle on failure.
    pub fn topological_order(&self) -> Result<Vec<usize>, String> {
        let driver_of: HashMap<NetId, usize> = self
            .gates
            .iter()
            .enumerate()
            .map(|(gi, g)| (g.output, gi))
            .collect();
        let mut indeg = vec![0usize; self.gates.len()];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); self.gates.len()];
        for (gi, gate) in self.gates.iter().enumerate() {
            if gate.function == Function::Dff {
                continue;
            }
            for &net in &gate.inputs {
                if let Some(&di) = driver_of.get(&net) {
                    if self.gates[di].function != Function::Dff {
                        indeg[gi] += 1;
                        readers[di].push(gi);
                    }
                }
            }
        }
        let mut queue: Vec<usize> = (0..self.gates.len()).filter(|&g| indeg[g] == 0).collect();
        queue.sort_unstable();
        let mut order = Vec::with_capacity(self.gates.len());
        let mut head = 0;
        while head < queue.len() {
            let g = queue[head];
            head += 1;
            order.push(g);
            for &r in &readers[g] {
                indeg[r] -= 1;
                if indeg[r] == 0 {
                    queue.push(r);
                }
            }
        }
        if order.len() == self.gates.len() {
            Ok(order)
        } else {
            let stuck = (0..self.gates.len())
                .find(|&g| indeg[g] > 0)
                .expect("cycle gate exists");
            Err(self.nets[self.gates[stuck].output].clone())
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Multiset of class labels.
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.label.clone()).or_insert(0) += 1;
        }
        counts
    }
}

struct Elaborator<'a> {
    nl: &'a Netlist,
    lib: &'a CellLibrary,
    labels: &'a LabelMap,
    nets: Vec<String>,
    ids: HashMap<String, NetId>,
    gates: Vec<Gate>,
}

impl<'a> Elaborator<'a> {
    fn intern(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.nets.len();
        self.nets.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    /// `prefix` is "" for top or "u1.u2." below it; `bindings` maps formal
    /// scalar bit names to parent net ids (empty for top).
    fn instantiate(
        &mut self,
        m: &ModuleDef,
        prefix: &str,
        provenance: &[String],
        bindings: &HashMap<String, NetId>,
    ) {
        let mut local: HashMap<String, NetId> = HashMap::new();
        for p in &m.ports {
            for bit in expand_bits(&p.name, p.range) {
                let id = match bindings.get(&bit) {
                    Some(&id) => id,
                    None => self.intern(&format!("{prefix}{bit}")),
                };
                local.insert(bit, id);
            }
        }
        for w in &m.wires {
            for bit in expand_bits(&w.name, w.range) {
                let id = self.intern(&format!("{prefix}{bit}"));
                local.insert(bit, id);
            }
        }
        for inst in &m.instances {
            if let Some(function) = Function::from_keyword(&inst.target) {
                let Connections::Ordered(nets) = &inst.conns else {
                    unreachable!("lint guarantees positional primitive connections");
                };
                self.emit_gate(function, nets, &local, prefix, provenance, &inst.name);
                continue;
            }
            if let Some(cell) = self.lib.get(&inst.target) {
                let function = cell.function;
                match &inst.conns {
                    Connections::Ordered(nets) => {
                        self.emit_gate(function, nets, &local, prefix, provenance, &inst.name);
                    }
                    Connections::Named(pairs) => {
                        let formals = CellLibrary::port_names(cell.arity);
                        let by_name: HashMap<&str, &NetExpr> = pairs
                            .iter()
                            .map(|(f, a)| (f.as_str(), a))
                            .collect();
                        let nets: Vec<String> = formals
                            .iter()
                            .map(|f| match by_name.get(f.as_str()) {
                                Some(NetExpr::Scalar(net)) => net.clone(),
                                _ => unreachable!("lint guarantees complete scalar bindings"),
                            })
                            .collect();
                        self.emit_gate(function, &nets, &local, prefix, provenance, &inst.name);
                    }
                }
                continue;
            }
            let child = self
                .nl
                .module(&inst.target)
                .expect("lint guarantees resolvable targets");
            let Connections::Named(pairs) = &inst.conns else {
                unreachable!("lint guarantees named module connections");
            };
            let mut child_bindings: HashMap<String, NetId> = HashMap::new();
            for p in &child.ports {
                let bits = expand_bits(&p.name, p.range);
                if let Some((_, actual)) = pairs.iter().find(|(f, _)| f == &p.name) {
                    match actual {
                        NetExpr::Scalar(net) => {
                            child_bindings.insert(bits[0].clone(), local[net.as_str()]);
                        }
                        NetExpr::Bus(name) => {
                            let range = m
                                .port(name)
                                .map(|q| q.range)
                                .or_else(|| m.wire(name).map(|w| w.range))
                                .flatten();
                            let actual_bits = expand_bits(name, range);
                            for (formal_bit, actual_bit) in bits.iter().zip(&actual_bits) {
                                child_bindings
                                    .insert(formal_bit.clone(), local[actual_bit.as_str()]);
                            }
                        }
                    }
                } else {
                    // Per-bit bindings.
                    for bit in &bits {
                        let (_, actual) = pairs
                            .iter()
                            .find(|(f, _)| f == bit)
                            .expect("lint guarantees full port coverage");
                        let NetExpr::Scalar(net) = actual else {
                            unreachable!("bit binding is scalar");
                        };
                        child_bindings.insert(bit.clone(), local[net.as_str()]);
                    }
                }
            }
            let child_prefix = format!("{prefix}{}.", inst.name);
            let mut child_prov = provenance.to_vec();
            child_prov.push(inst.name.clone());
            self.instantiate(child, &child_prefix, &child_prov, &child_bindings);
        }
    }

    fn emit_gate(
        &mut self,
        function: Function,
        nets: &[String],
        local: &HashMap<String, NetId>,
        prefix: &str,
        provenance: &[String],
        inst_name: &str,
    ) {
        let output = local[nets[0].as_str()];
        let inputs: Vec<NetId> = nets[1..].iter().map(|n| local[n.as_str()]).collect();
        let label = self.labels.label_for(provenance.get(1).map(|s| s.as_str()));
        self.gates.push(Gate {
            name: format!("{prefix}{inst_name}"),
            function,
            inputs,
            output,
            provenance: provenance.to_vec(),
            label,
        });
    }
}

/// Elaborates without re-running lint. Callers must ensure the design is
/// lint-clean; `flatten` is the safe entry point.
pub(super) fn elaborate(
    nl: &Netlist,
    lib: &CellLibrary,
    top: &str,
    labels: &LabelMap,
) -> FlatNetlist {
    let top_module = nl.module(top).expect("top exists");
    let mut el = Elaborator {
        nl,
        lib,
        labels,
        nets: Vec::new(),
        ids: HashMap::new(),
        gates: Vec::new(),
    };
    el.instantiate(top_module, "", &[top.to_string()], &HashMap::new());
    let mut primary_inputs = BTreeSet::new();
    let mut primary_outputs = BTreeSet::new();
    for p in &top_module.ports {
        for bit in expand_bits(&p.name, p.range) {
            let id = el.ids[&bit];
            match p.dir {
                PortDir::Input => primary_inputs.insert(id),
                PortDir::Output => primary_outputs.insert(id),
            };
        }
    }
    FlatNetlist {
        name: top.to_string(),
        gates: el.gates,
        nets: el.nets,
        primary_inputs,
        primary_outputs,
    }
}

/// Fully inlines the hierarchy below `top`. Fails if the linter reports any
/// errors.
pub fn flatten(
    nl: &Netlist,
    lib: &CellLibrary,
    top: &str,
    labels: &LabelMap,
) -> Result<FlatNetlist, NetlistError> {
    let report = lint_netlist(nl, lib, top)?;
    if !report.is_clean() {
        return Err(NetlistError::LintErrorsPresent(report));
    }
    Ok(elaborate(nl, lib, top, labels))
}

/// Rebuilds a single-module hierarchical netlist from a flat gate list.
/// Net and instance names are carried over unchanged.
pub fn flat_to_netlist(flat: &FlatNetlist) -> Result<Netlist, NetlistError> {
    let mut m = ModuleDef::new(&flat.name);
    for &pi in &flat.primary_inputs {
        m.add_port(&flat.nets[pi], PortDir::Input, None);
    }
    for &po in &flat.primary_outputs {
        m.add_port(&flat.nets[po], PortDir::Output, None);
    }
    for (id, name) in flat.nets.iter().enumerate() {
        if !flat.primary_inputs.contains(&id) && !flat.primary_outputs.contains(&id) {
            m.add_wire(name, None);
        }
    }
    for gate in &flat.gates {
        let Some(keyword) = gate.function.keyword() else {
            return Err(NetlistError::UnknownFunctionTag(
                gate.function.as_str().to_string(),
            ));
        };
        let mut nets = vec![flat.nets[gate.output].clone()];
        nets.extend(gate.inputs.iter().map(|&i| flat.nets[i].clone()));
        m.instances.push(Instance {
            name: gate.name.clone(),
            target: keyword.to_string(),
            conns: Connections::Ordered(nets),
            line: 0,
        });
    }
    Ok(Netlist { modules: vec![m] })
}
