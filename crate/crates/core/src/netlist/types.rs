//! Core IR for hierarchical gate-level netlists.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NetlistError;

/// Fixed function vocabulary for library cells and primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Function {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Mux,
    Dff,
    Other,
}

impl Function {
    pub const COUNT: usize = 11;

    /// All tags in one-hot encoding order.
    pub const ALL: [Function; Self::COUNT] = [
        Function::And,
        Function::Or,
        Function::Nand,
        Function::Nor,
        Function::Xor,
        Function::Xnor,
        Function::Not,
        Function::Buf,
        Function::Mux,
        Function::Dff,
        Function::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Function::And => "AND",
            Function::Or => "OR",
            Function::Nand => "NAND",
            Function::Nor => "NOR",
            Function::Xor => "XOR",
            Function::Xnor => "XNOR",
            Function::Not => "NOT",
            Function::Buf => "BUF",
            Function::Mux => "MUX",
            Function::Dff => "DFF",
            Function::Other => "OTHER",
        }
    }

    pub fn from_tag(s: &str) -> Option<Function> {
        Self::ALL.iter().copied().find(|f| f.as_str() == s)
    }

    /// Index into the one-hot block of the feature layout.
    pub fn one_hot_index(&self) -> usize {
        Self::ALL.iter().position(|f| f == self).unwrap()
    }

    /// Primitive instantiation keyword (`and g (y, a, b);`), if any.
    pub fn keyword(&self) -> Option<&'static str> {
        match self {
            Function::Other => None,
            _ => Some(match self {
                Function::And => "and",
                Function::Or => "or",
                Function::Nand => "nand",
                Function::Nor => "nor",
                Function::Xor => "xor",
                Function::Xnor => "xnor",
                Function::Not => "not",
                Function::Buf => "buf",
                Function::Mux => "mux",
                Function::Dff => "dff",
                Function::Other => unreachable!(),
            }),
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Function> {
        Self::ALL.iter().copied().find(|f| f.keyword() == Some(kw))
    }

    /// Arity constraint for the tag: exact arity, or minimum 2 for the
    /// n-ary gates (None).
    pub fn fixed_arity(&self) -> Option<usize> {
        match self {
            Function::Not | Function::Buf | Function::Dff => Some(1),
            Function::Mux => Some(3),
            _ => None,
        }
    }

    pub fn arity_ok(&self, arity: usize) -> bool {
        match self.fixed_arity() {
            Some(n) => arity == n,
            None => arity >= 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellDef {
    pub function: Function,
    pub arity: usize,
}

/// Named cell library: `NAME FUNCTION ARITY` records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CellLibrary {
    entries: BTreeMap<String, CellDef>,
}

impl CellLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&CellDef> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: &str, def: CellDef) -> Result<(), NetlistError> {
        if !def.function.arity_ok(def.arity) {
            return Err(NetlistError::BadArity {
                cell: name.to_string(),
                function: def.function.as_str().to_string(),
                arity: def.arity,
            });
        }
        if self.entries.contains_key(name) {
            return Err(NetlistError::DuplicateCell(name.to_string()));
        }
        self.entries.insert(name.to_string(), def);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CellDef)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the line-based `name function arity` format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<CellLibrary, NetlistError> {
        let mut lib = CellLibrary::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let mut parts = line.split_whitespace();
            let Some(name) = parts.next() else { continue };
            let (Some(tag), Some(arity)) = (parts.next(), parts.next()) else {
                return Err(NetlistError::LibraryFormat {
                    line: lineno + 1,
                    msg: "expected `NAME FUNCTION ARITY`".to_string(),
                });
            };
            if parts.next().is_some() {
                return Err(NetlistError::LibraryFormat {
                    line: lineno + 1,
                    msg: "trailing tokens after arity".to_string(),
                });
            }
            let function = Function::from_tag(tag)
                .ok_or_else(|| NetlistError::UnknownFunctionTag(tag.to_string()))?;
            let arity: usize = arity.parse().map_err(|_| NetlistError::LibraryFormat {
                line: lineno + 1,
                msg: format!("bad arity `{arity}`"),
            })?;
            lib.insert(name, CellDef { function, arity })?;
        }
        Ok(lib)
    }

    /// Conventional port names for a cell: output `y`, inputs `a`, `b`, ...
    pub fn port_names(arity: usize) -> Vec<String> {
        let mut names = vec!["y".to_string()];
        for i in 0..arity {
            names.push(((b'a' + i as u8) as char).to_string());
        }
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PortDir {
    Input,
    Output,
}

/// Expands a declaration into scalar bit names: `a[3:0]` -> `a.3 .. a.0`.
pub fn expand_bits(name: &str, range: Option<(u32, u32)>) -> Vec<String> {
    match range {
        None => vec![name.to_string()],
        Some((msb, lsb)) => {
            let mut out = Vec::new();
            if msb >= lsb {
                for i in (lsb..=msb).rev() {
                    out.push(format!("{name}.{i}"));
                }
            } else {
                for i in msb..=lsb {
                    out.push(format!("{name}.{i}"));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone)]
pub struct PortDecl {
    pub name: String,
    pub dir: PortDir,
    pub range: Option<(u32, u32)>,
    pub line: u32,
}

impl PartialEq for PortDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.dir == other.dir && self.range == other.range
    }
}

#[derive(Debug, Clone)]
pub struct WireDecl {
    pub name: String,
    pub range: Option<(u32, u32)>,
    pub line: u32,
}

impl PartialEq for WireDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.range == other.range
    }
}

/// Actual in a named port binding: either a scalar net or a whole bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetExpr {
    Scalar(String),
    Bus(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Connections {
    /// Positional, scalar nets only (primitive instantiations).
    Ordered(Vec<String>),
    /// `.formal(actual)` pairs; formal is a canonical scalar bit name or a bus name.
    Named(Vec<(String, NetExpr)>),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    /// Primitive keyword, library cell name, or module name.
    pub target: String,
    pub conns: Connections,
    pub line: u32,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.target == other.target && self.conns == other.conns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleDef {
    pub name: String,
    /// Port names as listed in the module header.
    pub header: Vec<String>,
    /// Header order.
    pub ports: Vec<PortDecl>,
    pub wires: Vec<WireDecl>,
    pub instances: Vec<Instance>,
}

impl ModuleDef {
    pub fn new(name: &str) -> Self {
        ModuleDef {
            name: name.to_string(),
            header: Vec::new(),
            ports: Vec::new(),
            wires: Vec::new(),
            instances: Vec::new(),
        }
    }

    pub fn add_port(&mut self, name: &str, dir: PortDir, range: Option<(u32, u32)>) {
        self.header.push(name.to_string());
        self.ports.push(PortDecl {
            name: name.to_string(),
            dir,
            range,
            line: 0,
        });
    }

    pub fn add_wire(&mut self, name: &str, range: Option<(u32, u32)>) {
        self.wires.push(WireDecl {
            name: name.to_string(),
            range,
            line: 0,
        });
    }

    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn wire(&self, name: &str) -> Option<&WireDecl> {
        self.wires.iter().find(|w| w.name == name)
    }

    /// All declared scalar bit names (ports then wires, declaration order).
    pub fn declared_bits(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.ports {
            out.extend(expand_bits(&p.name, p.range));
        }
        for w in &self.wires {
            out.extend(expand_bits(&w.name, w.range));
        }
        out
    }

    /// Scalar bits of one port, msb first.
    pub fn port_bits(&self, name: &str) -> Option<Vec<String>> {
        self.port(name).map(|p| expand_bits(&p.name, p.range))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub modules: Vec<ModuleDef>,
}

impl Netlist {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }
}

/// Maps instance-name prefixes to class labels; first match wins.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    pub entries: Vec<(String, String)>,
}

pub const UNMAPPED_CLASS: &str = "OTHER";

impl LabelMap {
    pub fn parse(text: &str) -> Result<LabelMap, NetlistError> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let mut parts = line.split_whitespace();
            let Some(prefix) = parts.next() else { continue };
            let Some(class) = parts.next() else {
                return Err(NetlistError::LibraryFormat {
                    line: lineno + 1,
                    msg: "expected `PREFIX CLASS`".to_string(),
                });
            };
            entries.push((prefix.to_string(), class.to_string()));
        }
        Ok(LabelMap { entries })
    }

    pub fn push(&mut self, prefix: &str, class: &str) {
        self.entries.push((prefix.to_string(), class.to_string()));
    }

    /// Label for a gate given the first provenance element below top.
    pub fn label_for(&self, below_top: Option<&str>) -> String {
        if let Some(inst) = below_top {
            for (prefix, class) in &self.entries {
                if inst.starts_with(prefix.as_str()) {
                    return class.clone();
                }
            }
        }
        UNMAPPED_CLASS.to_string()
    }

    /// Distinct classes in entry order, with the fallback class appended.
    pub fn class_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (_, class) in &self.entries {
            if !out.contains(class) {
                out.push(class.clone());
            }
        }
        if !out.iter().any(|c| c == UNMAPPED_CLASS) {
            out.push(UNMAPPED_CLASS.to_string());
        }
        out
    }
}
