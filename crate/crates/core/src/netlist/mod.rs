//! Gate-level structural netlists: parsing, linting, flattening,
//! simulation, and serialization.

mod flatten;
mod lint;
mod parse;
mod simulate;
mod types;
mod write;

pub use flatten::{flat_to_netlist, flatten, FlatNetlist, Gate, NetId};
pub use lint::{lint_netlist, Diagnostic, LintCode, LintReport, Severity};
pub use parse::parse_netlist;
pub use simulate::simulate;
pub use types::{
    expand_bits, CellDef, CellLibrary, Connections, Function, Instance, LabelMap, ModuleDef,
    NetExpr, Netlist, PortDecl, PortDir, WireDecl, UNMAPPED_CLASS,
};
pub use write::write_netlist;

#[derive(Debug, thiserror::Error)]
pub enum NetlistError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("duplicate cell `{0}` in library")]
    DuplicateCell(String),
    #[error("unknown function tag `{0}`")]
    UnknownFunctionTag(String),
    #[error("bad arity {arity} for cell `{cell}` with function {function}")]
    BadArity {
        cell: String,
        function: String,
        arity: usize,
    },
    #[error("library format error at line {line}: {msg}")]
    LibraryFormat { line: usize, msg: String },
    #[error("unknown top module `{0}`")]
    UnknownTop(String),
    #[error("netlist has lint errors:\n{0}")]
    LintErrorsPresent(LintReport),
    #[error("combinational cycle detected involving net `{0}`")]
    CycleDetected(String),
    #[error("primary input `{0}` not assigned")]
    UnassignedPi(String),
    #[error("gate `{gate}` with function {function} cannot be simulated")]
    UnsimulatableGate { gate: String, function: String },
}

#[cfg(test)]
mod tests;
