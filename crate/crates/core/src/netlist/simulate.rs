//! Single-cycle combinational evaluation of a flat netlist.

use std::collections::BTreeMap;

use super::flatten::{FlatNetlist, NetId};
use super::types::Function;
use super::NetlistError;

/// Evaluates the netlist for one input vector. All primary inputs must be
/// assigned; DFF outputs act as additional inputs (defaulting to 0) and the
/// gates driving them are still evaluated, so their D-side values appear in
/// the result when exported.
pub fn simulate(
    flat: &FlatNetlist,
    inputs: &BTreeMap<NetId, bool>,
) -> Result<BTreeMap<NetId, bool>, NetlistError> {
    for &pi in &flat.primary_inputs {
        if !inputs.contains_key(&pi) {
            return Err(NetlistError::UnassignedPi(flat.nets[pi].clone()));
        }
    }
    let order = flat
        .topological_order()
        .map_err(NetlistError::CycleDetected)?;
    let mut values: Vec<Option<bool>> = vec![None; flat.nets.len()];
    for (&net, &bit) in inputs {
        values[net] = Some(bit);
    }
    // DFF outputs default to 0 unless assigned.
    for gate in &flat.gates {
        if gate.function == Function::Dff && values[gate.output].is_none() {
            values[gate.output] = Some(false);
        }
    }
    for gi in order {
        let gate = &flat.gates[gi];
        if gate.function == Function::Dff {
            continue;
        }
        let mut ins = Vec::with_capacity(gate.inputs.len());
        for &net in &gate.inputs {
            let v = values[net].ok_or_else(|| NetlistError::UnassignedPi(flat.nets[net].clone()))?;
            ins.push(v);
        }
        let out = match gate.function {
            Function::And => ins.iter().all(|&b| b),
            Function::Or => ins.iter().any(|&b| b),
            Function::Nand => !ins.iter().all(|&b| b),
            Function::Nor => !ins.iter().any(|&b| b),
            Function::Xor => ins.iter().filter(|&&b| b).count() % 2 == 1,
            Function::Xnor => ins.iter().filter(|&&b| b).count() % 2 == 0,
            Function::Not => !ins[0],
            Function::Buf => ins[0],
            // (a, b, sel): sel ? b : a
            Function::Mux => {
                if ins[2] {
                    ins[1]
                } else {
                    ins[0]
                }
            }
            Function::Dff => unreachable!(),
            Function::Other => {
                return Err(NetlistError::UnsimulatableGate {
                    gate: gate.name.clone(),
                    function: gate.function.as_str().to_string(),
                })
            }
        };
        values[gate.output] = Some(out);
    }
    let mut outputs = BTreeMap::new();
    for &po in &flat.primary_outputs {
        let v = values[po].ok_or_else(|| NetlistError::UnassignedPi(flat.nets[po].clone()))?;
        outputs.insert(po, v);
    }
    Ok(outputs)
}
