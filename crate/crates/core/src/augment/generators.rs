//! Deterministic gate-level generators for the built-in operator classes.
//! Each class offers at least two architectures with different gate counts
//! at the same width; every generated design is lint-clean and functionally
//! correct by construction.

use crate::netlist::{
    Connections, Function, Instance, ModuleDef, NetExpr, Netlist, PortDir,
};

use super::{AugmentError, DesignSpec};

/// Supported (class, architecture) pairs.
pub const ARCHITECTURES: &[(&str, &[&str])] = &[
    ("adder", &["ripple-carry", "carry-lookahead", "carry-select"]),
    ("subtractor", &["ripple-borrow", "complement-add"]),
    ("multiplier", &["array", "shift-add-unrolled"]),
    ("comparator", &["ripple-chain", "tree"]),
];

pub fn supported_architectures(class: &str) -> Option<&'static [&'static str]> {
    ARCHITECTURES
        .iter()
        .find(|(c, _)| *c == class)
        .map(|(_, archs)| *archs)
}

#[derive(Debug, Clone)]
pub struct GeneratedDesign {
    pub netlist: Netlist,
    /// Name of the top module inside `netlist`.
    pub top: String,
    pub class: String,
    pub architecture: String,
    pub width: u32,
}

/// Builder for a single module; gates get sequential names and fresh wires.
struct Mb {
    m: ModuleDef,
    next_gate: usize,
    next_wire: usize,
}

impl Mb {
    fn new(name: &str) -> Mb {
        Mb {
            m: ModuleDef::new(name),
            next_gate: 0,
            next_wire: 0,
        }
    }

    /// Declares a port; returns bit names LSB-first (`name.0`, `name.1`, ...).
    fn port(&mut self, name: &str, dir: PortDir, width: u32) -> Vec<String> {
        let range = if width == 1 {
            None
        } else {
            Some((width - 1, 0))
        };
        self.m.add_port(name, dir, range);
        if width == 1 {
            vec![name.to_string()]
        } else {
            (0..width).map(|i| format!("{name}.{i}")).collect()
        }
    }

    fn fresh(&mut self) -> String {
        let w = format!("t{}", self.next_wire);
        self.next_wire += 1;
        self.m.add_wire(&w, None);
        w
    }

    /// Emits a gate driving an existing net.
    fn gate_to(&mut self, f: Function, out: &str, ins: &[&str]) {
        let mut nets = vec![out.to_string()];
        nets.extend(ins.iter().map(|s| s.to_string()));
        self.m.instances.push(Instance {
            name: format!("g{}", self.next_gate),
            target: f.keyword().expect("primitive keyword").to_string(),
            conns: Connections::Ordered(nets),
            line: 0,
        });
        self.next_gate += 1;
    }

    /// Emits a gate into a fresh wire and returns the wire name.
    fn gate(&mut self, f: Function, ins: &[&str]) -> String {
        let out = self.fresh();
        self.gate_to(f, &out, ins);
        out
    }

    /// Named module instantiation with scalar bindings.
    fn instantiate(&mut self, target: &str, name: &str, binds: &[(String, String)]) {
        self.m.instances.push(Instance {
            name: name.to_string(),
            target: target.to_string(),
            conns: Connections::Named(
                binds
                    .iter()
                    .map(|(f, a)| (f.clone(), NetExpr::Scalar(a.clone())))
                    .collect(),
            ),
            line: 0,
        });
    }
}

fn arch_key(arch: &str) -> String {
    arch.replace('-', "_")
}

/// Resolves the architecture for a spec: the hint if present (validated),
/// otherwise one of the supported set picked by `seed`.
pub fn resolve_architecture(spec: &DesignSpec, seed: u64) -> Result<String, AugmentError> {
    let archs = supported_architectures(&spec.class)
        .ok_or_else(|| AugmentError::UnsupportedClass(spec.class.clone()))?;
    match &spec.architecture {
        Some(hint) => {
            if archs.contains(&hint.as_str()) {
                Ok(hint.clone())
            } else {
                Err(AugmentError::UnsupportedArchitecture(
                    spec.class.clone(),
                    hint.clone(),
                ))
            }
        }
        None => Ok(archs[(seed as usize) % archs.len()].to_string()),
    }
}

/// Generates a lint-clean, functionally correct netlist for the spec.
pub fn synth_generate(spec: &DesignSpec, seed: u64) -> Result<GeneratedDesign, AugmentError> {
    spec.validate()?;
    let arch = resolve_architecture(spec, seed)?;
    let w = spec.width;
    let top = format!("{}_{}_w{}", spec.class, arch_key(&arch), w);
    let netlist = match (spec.class.as_str(), arch.as_str()) {
        ("adder", "ripple-carry") => adder_ripple(&top, w),
        ("adder", "carry-lookahead") => adder_cla(&top, w),
        ("adder", "carry-select") => adder_select(&top, w),
        ("subtractor", "ripple-borrow") => sub_ripple(&top, w),
        ("subtractor", "complement-add") => sub_complement(&top, w),
        ("multiplier", "array") => mul_array(&top, w),
        ("multiplier", "shift-add-unrolled") => mul_shift_add(&top, w),
        ("comparator", "ripple-chain") => cmp_ripple(&top, w),
        ("comparator", "tree") => cmp_tree(&top, w),
        _ => unreachable!("validated above"),
    };
    Ok(GeneratedDesign {
        netlist,
        top,
        class: spec.class.clone(),
        architecture: arch,
        width: w,
    })
}

/// 5-gate full adder used by the hierarchical generators.
fn full_adder_module(name: &str) -> ModuleDef {
    let mut b = Mb::new(name);
    let a = b.port("a", PortDir::Input, 1)[0].clone();
    let bb = b.port("b", PortDir::Input, 1)[0].clone();
    let cin = b.port("cin", PortDir::Input, 1)[0].clone();
    let s = b.port("s", PortDir::Output, 1)[0].clone();
    let cout = b.port("cout", PortDir::Output, 1)[0].clone();
    let x = b.gate(Function::Xor, &[&a, &bb]);
    b.gate_to(Function::Xor, &s, &[&x, &cin]);
    let c1 = b.gate(Function::And, &[&a, &bb]);
    let c2 = b.gate(Function::And, &[&x, &cin]);
    b.gate_to(Function::Or, &cout, &[&c1, &c2]);
    b.m
}

/// Inline 5-gate full adder: returns (sum, carry) wires.
fn fa_inline(b: &mut Mb, a: &str, bb: &str, cin: &str) -> (String, String) {
    let x = b.gate(Function::Xor, &[a, bb]);
    let s = b.gate(Function::Xor, &[&x, cin]);
    let c1 = b.gate(Function::And, &[a, bb]);
    let c2 = b.gate(Function::And, &[&x, cin]);
    let c = b.gate(Function::Or, &[&c1, &c2]);
    (s, c)
}

/// Constant 0 and 1 wires derived from an existing net.
fn consts(b: &mut Mb, any_net: &str) -> (String, String) {
    let zero = b.gate(Function::Xor, &[any_net, any_net]);
    let one = b.gate(Function::Xnor, &[any_net, any_net]);
    (zero, one)
}

fn adder_ripple(top: &str, w: u32) -> Netlist {
    let fa = full_adder_module("full_adder");
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w);
    let bi = b.port("b", PortDir::Input, w);
    let cin = b.port("cin", PortDir::Input, 1)[0].clone();
    let s = b.port("s", PortDir::Output, w);
    let cout = b.port("cout", PortDir::Output, 1)[0].clone();
    let mut carry = cin;
    for i in 0..w as usize {
        let next = if i + 1 == w as usize {
            cout.clone()
        } else {
            b.fresh()
        };
        b.instantiate(
            "full_adder",
            &format!("fa{i}"),
            &[
                ("a".into(), a[i].clone()),
                ("b".into(), bi[i].clone()),
                ("cin".into(), carry.clone()),
                ("s".into(), s[i].clone()),
                ("cout".into(), next.clone()),
            ],
        );
        carry = next;
    }
    Netlist {
        modules: vec![fa, b.m],
    }
}

fn adder_cla(top: &str, w: u32) -> Netlist {
    // Group-4 carry lookahead, flat: p_i = a^b, g_i = a&b, carries expanded
    // as sums of products within each group, carry rippling between groups.
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w);
    let bi = b.port("b", PortDir::Input, w);
    let cin = b.port("cin", PortDir::Input, 1)[0].clone();
    let s = b.port("s", PortDir::Output, w);
    let cout = b.port("cout", PortDir::Output, 1)[0].clone();
    let p: Vec<String> = (0..w as usize)
        .map(|i| b.gate(Function::Xor, &[&a[i], &bi[i]]))
        .collect();
    let g: Vec<String> = (0..w as usize)
        .map(|i| b.gate(Function::And, &[&a[i], &bi[i]]))
        .collect();
    let mut carries = vec![cin.clone()]; // carries[i] feeds bit i
    let mut group_start = 0usize;
    while group_start < w as usize {
        let group_end = (group_start + 4).min(w as usize);
        let c0 = carries[group_start].clone();
        for i in group_start..group_end {
            // c_{i+1} = g_i + p_i g_{i-1} + ... + p_i..p_{start} c0
            let mut terms: Vec<String> = vec![g[i].clone()];
            for j in (group_start..i).rev() {
                let mut ins: Vec<&str> = p[j + 1..=i].iter().map(|s| s.as_str()).collect();
                ins.push(&g[j]);
                terms.push(b.gate(Function::And, &ins));
            }
            {
                let mut ins: Vec<&str> = p[group_start..=i].iter().map(|s| s.as_str()).collect();
                ins.push(&c0);
                terms.push(b.gate(Function::And, &ins));
            }
            let refs: Vec<&str> = terms.iter().map(|s| s.as_str()).collect();
            let c_next = if i + 1 == w as usize {
                b.gate_to(Function::Or, &cout, &refs);
                cout.clone()
            } else {
                b.gate(Function::Or, &refs)
            };
            carries.push(c_next);
        }
        group_start = group_end;
    }
    for i in 0..w as usize {
        b.gate_to(Function::Xor, &s[i], &[&p[i], &carries[i]]);
    }
    Netlist { modules: vec![b.m] }
}

fn adder_select(top: &str, w: u32) -> Netlist {
    // Carry-select in 2-bit blocks: each block computes both carry
    // assumptions and muxes on the incoming carry.
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w);
    let bi = b.port("b", PortDir::Input, w);
    let cin = b.port("cin", PortDir::Input, 1)[0].clone();
    let s = b.port("s", PortDir::Output, w);
    let cout = b.port("cout", PortDir::Output, 1)[0].clone();
    let (zero, one) = consts(&mut b, &a[0]);
    let mut carry = cin;
    let mut start = 0usize;
    while start < w as usize {
        let end = (start + 2).min(w as usize);
        // Two speculative ripple chains.
        let mut c0 = zero.clone();
        let mut c1 = one.clone();
        let mut sums0 = Vec::new();
        let mut sums1 = Vec::new();
        for i in start..end {
            let (s0, n0) = fa_inline(&mut b, &a[i], &bi[i], &c0);
            let (s1, n1) = fa_inline(&mut b, &a[i], &bi[i], &c1);
            sums0.push(s0);
            sums1.push(s1);
            c0 = n0;
            c1 = n1;
        }
        for (off, i) in (start..end).enumerate() {
            b.gate_to(Function::Mux, &s[i], &[&sums0[off], &sums1[off], &carry]);
        }
        let next = if end == w as usize {
            b.gate_to(Function::Mux, &cout, &[&c0, &c1, &carry]);
            cout.clone()
        } else {
            b.gate(Function::Mux, &[&c0, &c1, &carry])
        };
        carry = next;
        start = end;
    }
    Netlist { modules: vec![b.m] }
}

/// 7-gate full subtractor used by the hierarchical generator.
fn full_sub_module(name: &str) -> ModuleDef {
    let mut b = Mb::new(name);
    let a = b.port("a", PortDir::Input, 1)[0].clone();
    let bb = b.port("b", PortDir::Input, 1)[0].clone();
    let bin = b.port("bin", PortDir::Input, 1)[0].clone();
    let d = b.port("d", PortDir::Output, 1)[0].clone();
    let bout = b.port("bout", PortDir::Output, 1)[0].clone();
    let x = b.gate(Function::Xor, &[&a, &bb]);
    b.gate_to(Function::Xor, &d, &[&x, &bin]);
    let na = b.gate(Function::Not, &[&a]);
    let t1 = b.gate(Function::And, &[&na, &bb]);
    let nx = b.gate(Function::Xnor, &[&a, &bb]);
    let t2 = b.gate(Function::And, &[&nx, &bin]);
    b.gate_to(Function::Or, &bout, &[&t1, &t2]);
    b.m
}

fn sub_ripple(top: &str, w: u32) -> Netlist {
    let fs = full_sub_module("full_sub");
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w);
    let bi = b.port("b", PortDir::Input, w);
    let bin = b.port("bin", PortDir::Input, 1)[0].clone();
    let d = b.port("d", PortDir::Output, w);
    let bout = b.port("bout", PortDir::Output, 1)[0].clone();
    let mut borrow = bin;
    for i in 0..w as usize {
        let next = if i + 1 == w as usize {
            bout.clone()
        } else {
            b.fresh()
        };
        b.instantiate(
            "full_sub",
            &format!("fs{i}"),
            &[
                ("a".into(), a[i].clone()),
                ("b".into(), bi[i].clone()),
                ("bin".into(), borrow.clone()),
                ("d".into(), d[i].clone()),
                ("bout".into(), next.clone()),
            ],
        );
        borrow = next;
    }
    Netlist {
        modules: vec![fs, b.m],
    }
}

fn sub_complement(top: &str, w: u32) -> Netlist {
    // a - b - bin = a + ~b + ~bin (mod 2^w), borrow-out = ~carry-out.
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w);
    let bi = b.port("b", PortDir::Input, w);
    let bin = b.port("bin", PortDir::Input, 1)[0].clone();
    let d = b.port("d", PortDir::Output, w);
    let bout = b.port("bout", PortDir::Output, 1)[0].clone();
    let mut carry = b.gate(Function::Not, &[&bin]);
    for i in 0..w as usize {
        let nb = b.gate(Function::Not, &[&bi[i]]);
        let x = b.gate(Function::Xor, &[&a[i], &nb]);
        b.gate_to(Function::Xor, &d[i], &[&x, &carry]);
        let c1 = b.gate(Function::And, &[&a[i], &nb]);
        let c2 = b.gate(Function::And, &[&x, &carry]);
        carry = b.gate(Function::Or, &[&c1, &c2]);
    }
    b.gate_to(Function::Not, &bout, &[&carry]);
    Netlist { modules: vec![b.m] }
}

/// Partial-product matrix: `pp[i][j] = a_j & b_i`.
fn partial_products(b: &mut Mb, a: &[String], bi: &[String]) -> Vec<Vec<String>> {
    bi.iter()
        .map(|brow| {
            a.iter()
                .map(|abit| b.gate(Function::And, &[abit, brow]))
                .collect()
        })
        .collect()
}

fn mul_array(top: &str, w: u32) -> Netlist {
    // Row-by-row accumulation with a sliding w-bit window: after row i the
    // low product bit p_i is final and the window shifts right by one.
    let w = w as usize;
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w as u32);
    let bi = b.port("b", PortDir::Input, w as u32);
    let p = b.port("p", PortDir::Output, 2 * w as u32);
    let (zero, _) = consts(&mut b, &a[0]);
    let pp = partial_products(&mut b, &a, &bi);
    // Window after row 0: bits 1..w of pp[0] plus a zero top bit.
    b.gate_to(Function::Buf, &p[0], &[&pp[0][0]]);
    let mut acc: Vec<String> = pp[0][1..].to_vec();
    acc.push(zero.clone());
    for (i, row) in pp.iter().enumerate().skip(1) {
        let mut carry = zero.clone();
        let mut sums = Vec::with_capacity(w);
        for j in 0..w {
            let (s, c) = fa_inline(&mut b, &acc[j], &row[j], &carry);
            sums.push(s);
            carry = c;
        }
        b.gate_to(Function::Buf, &p[i], &[&sums[0]]);
        acc = sums[1..].to_vec();
        acc.push(carry);
    }
    for j in 0..w {
        b.gate_to(Function::Buf, &p[w + j], &[&acc[j]]);
    }
    Netlist { modules: vec![b.m] }
}

fn mul_shift_add(top: &str, w: u32) -> Netlist {
    // Unrolled shift-add over a full 2w-bit accumulator.
    let w = w as usize;
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w as u32);
    let bi = b.port("b", PortDir::Input, w as u32);
    let p = b.port("p", PortDir::Output, 2 * w as u32);
    let (zero, _) = consts(&mut b, &a[0]);
    let pp = partial_products(&mut b, &a, &bi);
    let mut acc: Vec<String> = (0..2 * w)
        .map(|j| {
            if j < w {
                pp[0][j].clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    for (i, row) in pp.iter().enumerate().skip(1) {
        let mut carry = zero.clone();
        let mut next = Vec::with_capacity(2 * w);
        for (j, accbit) in acc.iter().enumerate() {
            let operand = if j >= i && j < i + w {
                row[j - i].clone()
            } else {
                zero.clone()
            };
            let (s, c) = fa_inline(&mut b, accbit, &operand, &carry);
            next.push(s);
            carry = c;
        }
        acc = next;
    }
    for j in 0..2 * w {
        b.gate_to(Function::Buf, &p[j], &[&acc[j]]);
    }
    Netlist { modules: vec![b.m] }
}

fn cmp_ripple(top: &str, w: u32) -> Netlist {
    // MSB-to-LSB chain over per-bit (greater, less, equal) signals.
    let w = w as usize;
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w as u32);
    let bi = b.port("b", PortDir::Input, w as u32);
    let gt = b.port("gt", PortDir::Output, 1)[0].clone();
    let eq = b.port("eq", PortDir::Output, 1)[0].clone();
    let mut gbits = Vec::new();
    let mut ebits = Vec::new();
    for i in 0..w {
        let na = b.gate(Function::Not, &[&a[i]]);
        let nb = b.gate(Function::Not, &[&bi[i]]);
        let g = b.gate(Function::And, &[&a[i], &nb]);
        let l = b.gate(Function::And, &[&na, &bi[i]]);
        let e = b.gate(Function::Nor, &[&g, &l]);
        gbits.push(g);
        ebits.push(e);
    }
    let mut gacc = gbits[w - 1].clone();
    let mut eacc = ebits[w - 1].clone();
    for i in (0..w - 1).rev() {
        let t = b.gate(Function::And, &[&eacc, &gbits[i]]);
        gacc = b.gate(Function::Or, &[&gacc, &t]);
        eacc = b.gate(Function::And, &[&eacc, &ebits[i]]);
    }
    b.gate_to(Function::Buf, &gt, &[&gacc]);
    b.gate_to(Function::Buf, &eq, &[&eacc]);
    Netlist { modules: vec![b.m] }
}

fn cmp_tree(top: &str, w: u32) -> Netlist {
    // Balanced binary combine of per-bit (greater, equal) pairs.
    let w = w as usize;
    let mut b = Mb::new(top);
    let a = b.port("a", PortDir::Input, w as u32);
    let bi = b.port("b", PortDir::Input, w as u32);
    let gt = b.port("gt", PortDir::Output, 1)[0].clone();
    let eq = b.port("eq", PortDir::Output, 1)[0].clone();
    // Segments ordered LSB-first; combining (hi, lo) keeps that order.
    let mut segs: Vec<(String, String)> = (0..w)
        .map(|i| {
            let nb = b.gate(Function::Not, &[&bi[i]]);
            let g = b.gate(Function::And, &[&a[i], &nb]);
            let e = b.gate(Function::Xnor, &[&a[i], &bi[i]]);
            (g, e)
        })
        .collect();
    while segs.len() > 1 {
        let mut next = Vec::with_capacity(segs.len().div_ceil(2));
        for pair in segs.chunks(2) {
            if pair.len() == 1 {
                next.push(pair[0].clone());
                continue;
            }
            let (glo, elo) = &pair[0];
            let (ghi, ehi) = &pair[1];
            let t = b.gate(Function::And, &[ehi, glo]);
            let g = b.gate(Function::Or, &[ghi, &t]);
            let e = b.gate(Function::And, &[ehi, elo]);
            next.push((g, e));
        }
        segs = next;
    }
    let (g, e) = &segs[0];
    b.gate_to(Function::Buf, &gt, &[g]);
    b.gate_to(Function::Buf, &eq, &[e]);
    Netlist { modules: vec![b.m] }
}
