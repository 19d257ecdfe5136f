//! Functional corruption and negative controls (decoys).

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use crate::netlist::{
    flat_to_netlist, flatten, CellLibrary, FlatNetlist, Function, Gate, LabelMap, Netlist,
};

use super::AugmentError;

const AND_FAMILY: [Function; 4] = [Function::And, Function::Or, Function::Nand, Function::Nor];
const XOR_FAMILY: [Function; 2] = [Function::Xor, Function::Xnor];
const INV_FAMILY: [Function; 2] = [Function::Not, Function::Buf];

fn family_of(f: Function) -> Option<&'static [Function]> {
    match f {
        Function::And | Function::Or | Function::Nand | Function::Nor => Some(&AND_FAMILY),
        Function::Xor | Function::Xnor => Some(&XOR_FAMILY),
        Function::Not | Function::Buf => Some(&INV_FAMILY),
        _ => None,
    }
}

/// Swaps the function of `ceil(rate * gates)` gates within arity-preserving
/// families (AND/OR/NAND/NOR, XOR/XNOR, NOT/BUF). Topology is untouched, so
/// the result stays lint-clean; it is returned flattened to a single module.
pub fn corrupt(
    nl: &Netlist,
    lib: &CellLibrary,
    top: &str,
    rate: f64,
    seed: u64,
) -> Result<Netlist, AugmentError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(AugmentError::InvalidRate);
    }
    let mut flat = flatten(nl, lib, top, &LabelMap::default())?;
    corrupt_flat(&mut flat, rate, seed);
    Ok(flat_to_netlist(&flat)?)
}

/// In-place corruption of a flat netlist; see [`corrupt`].
pub fn corrupt_flat(flat: &mut FlatNetlist, rate: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flippable: Vec<usize> = flat
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| family_of(g.function).is_some())
        .map(|(i, _)| i)
        .collect();
    let want = (rate * flat.gates.len() as f64).ceil() as usize;
    let k = want.min(flippable.len());
    flippable.shuffle(&mut rng);
    for &gi in flippable.iter().take(k) {
        let fam = family_of(flat.gates[gi].function).unwrap();
        let others: Vec<Function> = fam
            .iter()
            .copied()
            .filter(|&f| f != flat.gates[gi].function)
            .collect();
        flat.gates[gi].function = *others.choose(&mut rng).unwrap();
    }
}

fn arity_pool(arity: usize) -> &'static [Function] {
    const NARY: [Function; 6] = [
        Function::And,
        Function::Or,
        Function::Nand,
        Function::Nor,
        Function::Xor,
        Function::Xnor,
    ];
    const TERNARY: [Function; 7] = [
        Function::Mux,
        Function::And,
        Function::Or,
        Function::Nand,
        Function::Nor,
        Function::Xor,
        Function::Xnor,
    ];
    match arity {
        1 => &INV_FAMILY,
        3 => &TERNARY,
        _ => &NARY,
    }
}

/// Degree-matched negative control: input-slot swaps (preserving every
/// gate's arity and every net's fanout) plus uniform arity-preserving
/// function reassignment. The result need not be acyclic or simulable; it
/// exists to exercise the similarity filter's reject path.
pub fn rewire_decoy(flat: &FlatNetlist, seed: u64) -> FlatNetlist {
    let mut out = flat.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots: usize = out.gates.iter().map(|g| g.inputs.len()).sum();
    let n = out.gates.len();
    if n >= 2 {
        for _ in 0..10 * slots {
            let g1 = rng.gen_range(0..n);
            let g2 = rng.gen_range(0..n);
            if g1 == g2 {
                continue;
            }
            let s1 = rng.gen_range(0..out.gates[g1].inputs.len());
            let s2 = rng.gen_range(0..out.gates[g2].inputs.len());
            let tmp = out.gates[g1].inputs[s1];
            out.gates[g1].inputs[s1] = out.gates[g2].inputs[s2];
            out.gates[g2].inputs[s2] = tmp;
        }
    }
    for g in &mut out.gates {
        g.function = *arity_pool(g.inputs.len()).choose(&mut rng).unwrap();
    }
    out
}

/// Uniform-random acyclic netlist with `gates` gates over `pis` primary
/// inputs: each gate reads earlier nets, unread gate outputs become POs.
pub fn random_netlist(name: &str, gates: usize, pis: usize, seed: u64) -> FlatNetlist {
    assert!(gates >= 1 && pis >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nets: Vec<String> = (0..pis).map(|i| format!("pi{i}")).collect();
    let primary_inputs: BTreeSet<usize> = (0..pis).collect();
    let mut gate_list = Vec::with_capacity(gates);
    for gi in 0..gates {
        let avail = nets.len();
        let arity = match rng.gen_range(0..10) {
            0 => 1,
            1 | 2 => 3,
            _ => 2,
        };
        let arity = arity.min(avail);
        let function = *arity_pool(arity).choose(&mut rng).unwrap();
        let inputs: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..avail)).collect();
        nets.push(format!("w{gi}"));
        gate_list.push(Gate {
            name: format!("g{gi}"),
            function,
            inputs,
            output: avail,
            provenance: vec![name.to_string()],
            label: crate::netlist::UNMAPPED_CLASS.to_string(),
        });
    }
    let read: BTreeSet<usize> = gate_list.iter().flat_map(|g| g.inputs.clone()).collect();
    let mut primary_outputs: BTreeSet<usize> = gate_list
        .iter()
        .map(|g| g.output)
        .filter(|o| !read.contains(o))
        .collect();
    if primary_outputs.is_empty() {
        primary_outputs.insert(gate_list.last().unwrap().output);
    }
    FlatNetlist {
        name: name.to_string(),
        gates: gate_list,
        nets,
        primary_inputs,
        primary_outputs,
    }
}
