//! Semantic checks standing in for a synthesis tool's error log.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::flatten::elaborate;
use super::types::*;
use super::NetlistError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LintCode {
    UnresolvedRef,
    UndeclaredNet,
    UndrivenNet,
    MultiDriver,
    FloatingPort,
    CombLoop,
    ArityMismatch,
}

impl LintCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LintCode::UnresolvedRef => "UNRESOLVED_REF",
            LintCode::UndeclaredNet => "UNDECLARED_NET",
            LintCode::UndrivenNet => "UNDRIVEN_NET",
            LintCode::MultiDriver => "MULTI_DRIVER",
            LintCode::FloatingPort => "FLOATING_PORT",
            LintCode::CombLoop => "COMB_LOOP",
            LintCode::ArityMismatch => "ARITY_MISMATCH",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: LintCode,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}[{}] {}: {}",
            self.code.as_str(),
            self.location,
            self.message
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LintReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl LintReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn is_clean(&self) -> bool {
        self.error_count() == 0
    }

    pub fn has_code(&self, code: LintCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn rendered(&self) -> Vec<String> {
        self.diagnostics.iter().map(|d| d.to_string()).collect()
    }

    fn sort(&mut self) {
        self.diagnostics
            .sort_by(|a, b| (&a.location, a.code).cmp(&(&b.location, b.code)));
    }
}

impl fmt::Display for LintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

struct Linter<'a> {
    nl: &'a Netlist,
    lib: &'a CellLibrary,
    diags: Vec<Diagnostic>,
}

fn loc(module: &str, line: u32) -> String {
    format!("{module}:{line:04}")
}

impl<'a> Linter<'a> {
    fn push(&mut self, severity: Severity, code: LintCode, location: String, message: String) {
        self.diags.push(Diagnostic {
            severity,
            code,
            location,
            message,
        });
    }

    /// DFS over the instantiation hierarchy; returns reachable module names,
    /// reporting a cycle if the hierarchy is not a DAG.
    fn reachable(&mut self, top: &str) -> Vec<String> {
        let mut done: BTreeSet<String> = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack: Vec<String> = Vec::new();
        self.visit(top, &mut done, &mut order, &mut stack);
        order
    }

    fn visit(
        &mut self,
        name: &str,
        done: &mut BTreeSet<String>,
        order: &mut Vec<String>,
        stack: &mut Vec<String>,
    ) {
        if stack.iter().any(|s| s == name) {
            // A module that (transitively) instantiates itself cannot be
            // flattened; reported under COMB_LOOP as a structural cycle.
            self.push(
                Severity::Error,
                LintCode::CombLoop,
                loc(name, 0),
                format!("module instantiation cycle through `{name}`"),
            );
            return;
        }
        if done.contains(name) {
            return;
        }
        let Some(m) = self.nl.module(name) else {
            return;
        };
        stack.push(name.to_string());
        for inst in &m.instances {
            if self.nl.module(&inst.target).is_some() {
                self.visit(&inst.target, done, order, stack);
            }
        }
        stack.pop();
        done.insert(name.to_string());
        order.push(name.to_string());
    }

    fn check_module(&mut self, m: &ModuleDef) {
        let declared: BTreeSet<String> = m.declared_bits().into_iter().collect();
        let bus_names: BTreeSet<String> = m
            .ports
            .iter()
            .filter(|p| p.range.is_some())
            .map(|p| p.name.clone())
            .chain(
                m.wires
                    .iter()
                    .filter(|w| w.range.is_some())
                    .map(|w| w.name.clone()),
            )
            .collect();

        for inst in &m.instances {
            self.check_instance(m, inst, &declared, &bus_names);
        }
    }

    fn check_scalar_ref(&mut self, m: &ModuleDef, line: u32, net: &str, declared: &BTreeSet<String>) {
        if !declared.contains(net) {
            self.push(
                Severity::Error,
                LintCode::UndeclaredNet,
                loc(&m.name, line),
                format!("net `{net}` is not declared in module `{}`", m.name),
            );
        }
    }

    fn check_instance(
        &mut self,
        m: &ModuleDef,
        inst: &Instance,
        declared: &BTreeSet<String>,
        bus_names: &BTreeSet<String>,
    ) {
        let location = loc(&m.name, inst.line);
        if let Some(func) = Function::from_keyword(&inst.target) {
            match &inst.conns {
                Connections::Ordered(nets) => {
                    if nets.is_empty() || !func.arity_ok(nets.len() - 1) {
                        self.push(
                            Severity::Error,
                            LintCode::ArityMismatch,
                            location.clone(),
                            format!(
                                "`{}` instance `{}` has {} connections",
                                inst.target,
                                inst.name,
                                nets.len()
                            ),
                        );
                    }
                    for net in nets {
                        self.check_scalar_ref(m, inst.line, net, declared);
                    }
                }
                Connections::Named(_) => {
                    self.push(
                        Severity::Error,
                        LintCode::ArityMismatch,
                        location,
                        format!(
                            "primitive instance `{}` requires positional connections",
                            inst.name
                        ),
                    );
                }
            }
            return;
        }
        if let Some(cell) = self.lib.get(&inst.target) {
            match &inst.conns {
                Connections::Ordered(nets) => {
                    if nets.len() != cell.arity + 1 {
                        self.push(
                            Severity::Error,
                            LintCode::ArityMismatch,
                            location.clone(),
                            format!(
                                "cell `{}` expects {} connections, got {}",
                                inst.target,
                                cell.arity + 1,
                                nets.len()
                            ),
                        );
                    }
                    for net in nets {
                        self.check_scalar_ref(m, inst.line, net, declared);
                    }
                }
                Connections::Named(pairs) => {
                    let formals = CellLibrary::port_names(cell.arity);
                    self.check_named_bindings(
                        m,
                        inst,
                        pairs,
                        &formals.iter().map(|f| (f.clone(), 1usize)).collect::<Vec<_>>(),
                        declared,
                        bus_names,
                    );
                }
            }
            return;
        }
        if let Some(child) = self.nl.module(&inst.target) {
            match &inst.conns {
                Connections::Ordered(_) => {
                    self.push(
                        Severity::Error,
                        LintCode::ArityMismatch,
                        location,
                        format!(
                            "module instance `{}` requires named connections",
                            inst.name
                        ),
                    );
                }
                Connections::Named(pairs) => {
                    let formals: Vec<(String, usize)> = child
                        .ports
                        .iter()
                        .map(|p| (p.name.clone(), expand_bits(&p.name, p.range).len()))
                        .collect();
                    self.check_named_bindings(m, inst, pairs, &formals, declared, bus_names);
                }
            }
            return;
        }
        self.push(
            Severity::Error,
            LintCode::UnresolvedRef,
            location,
            format!(
                "instance `{}` targets undefined cell or module `{}`",
                inst.name, inst.target
            ),
        );
    }

    /// Checks `.formal(actual)` pairs against a formal port list given as
    /// (port-name, bit-width) records. Formals may be whole buses or
    /// canonical scalar bit names.
    fn check_named_bindings(
        &mut self,
        m: &ModuleDef,
        inst: &Instance,
        pairs: &[(String, NetExpr)],
        formals: &[(String, usize)],
        declared: &BTreeSet<String>,
        bus_names: &BTreeSet<String>,
    ) {
        let location = loc(&m.name, inst.line);
        // Bits a formal name covers, or None if unknown.
        let mut bound: BTreeMap<String, usize> = BTreeMap::new();
        for (formal, actual) in pairs {
            let width = if let Some((_, w)) = formals.iter().find(|(f, _)| f == formal) {
                *w
            } else if formals
                .iter()
                .any(|(f, w)| *w > 1 && formal.starts_with(&format!("{f}.")))
            {
                1
            } else {
                self.push(
                    Severity::Error,
                    LintCode::ArityMismatch,
                    location.clone(),
                    format!(
                        "instance `{}` binds unknown port `{}` of `{}`",
                        inst.name, formal, inst.target
                    ),
                );
                continue;
            };
            let actual_width = match actual {
                NetExpr::Scalar(net) => {
                    self.check_scalar_ref(m, inst.line, net, declared);
                    1
                }
                NetExpr::Bus(name) => {
                    debug_assert!(bus_names.contains(name));
                    let range = m
                        .port(name)
                        .map(|p| p.range)
                        .or_else(|| m.wire(name).map(|w| w.range))
                        .flatten();
                    expand_bits(name, range).len()
                }
            };
            if actual_width != width {
                self.push(
                    Severity::Error,
                    LintCode::ArityMismatch,
                    location.clone(),
                    format!(
                        "instance `{}` port `{}` is {width} bit(s) wide but actual is {actual_width}",
                        inst.name, formal
                    ),
                );
            }
            *bound.entry(formal.clone()).or_insert(0) += 1;
        }
        for (formal, count) in &bound {
            if *count > 1 {
                self.push(
                    Severity::Error,
                    LintCode::ArityMismatch,
                    location.clone(),
                    format!("instance `{}` binds port `{}` {count} times", inst.name, formal),
                );
            }
        }
        // Every formal bit must be covered exactly once.
        for (formal, width) in formals {
            let whole = bound.contains_key(formal);
            if *width == 1 {
                if !whole {
                    self.push(
                        Severity::Error,
                        LintCode::FloatingPort,
                        location.clone(),
                        format!("instance `{}` leaves port `{}` unconnected", inst.name, formal),
                    );
                }
            } else {
                let bits_bound = bound
                    .keys()
                    .filter(|k| k.starts_with(&format!("{formal}.")))
                    .count();
                if whole && bits_bound > 0 {
                    self.push(
                        Severity::Error,
                        LintCode::ArityMismatch,
                        location.clone(),
                        format!(
                            "instance `{}` binds port `{}` both whole and per-bit",
                            inst.name, formal
                        ),
                    );
                } else if !whole && bits_bound != *width {
                    self.push(
                        Severity::Error,
                        LintCode::FloatingPort,
                        location.clone(),
                        format!(
                            "instance `{}` covers {bits_bound} of {width} bits of port `{}`",
                            inst.name, formal
                        ),
                    );
                }
            }
        }
    }

    fn check_headers(&mut self, m: &ModuleDef) {
        for h in &m.header {
            if m.port(h).is_none() {
                self.push(
                    Severity::Error,
                    LintCode::FloatingPort,
                    loc(&m.name, 0),
                    format!("header port `{h}` has no direction declaration"),
                );
            }
        }
        for p in &m.ports {
            if !m.header.contains(&p.name) {
                self.push(
                    Severity::Warning,
                    LintCode::FloatingPort,
                    loc(&m.name, p.line),
                    format!("port `{}` is declared but missing from the header", p.name),
                );
            }
        }
    }
}

/// Runs all semantic checks on `nl` with `top` as the root of elaboration.
/// Diagnostics come back deterministically ordered by location, then code.
pub fn lint_netlist(
    nl: &Netlist,
    lib: &CellLibrary,
    top: &str,
) -> Result<LintReport, NetlistError> {
    if nl.module(top).is_none() {
        return Err(NetlistError::UnknownTop(top.to_string()));
    }
    let mut linter = Linter {
        nl,
        lib,
        diags: Vec::new(),
    };
    let reachable = linter.reachable(top);
    for name in &reachable {
        let m = nl.module(name).expect("reachable module exists");
        linter.check_headers(m);
        linter.check_module(m);
    }
    let mut report = LintReport {
        diagnostics: linter.diags,
    };
    if report.is_clean() {
        let flat = elaborate(nl, lib, top, &LabelMap::default());
        flat_checks(&flat, &mut report);
    }
    report.sort();
    Ok(report)
}

fn flat_checks(flat: &super::flatten::FlatNetlist, report: &mut LintReport) {
    let n_nets = flat.nets.len();
    let mut drivers: Vec<usize> = vec![0; n_nets];
    let mut read: Vec<bool> = vec![false; n_nets];
    for &pi in &flat.primary_inputs {
        drivers[pi] += 1;
    }
    for gate in &flat.gates {
        drivers[gate.output] += 1;
        for &i in &gate.inputs {
            read[i] = true;
        }
    }
    for (net_id, name) in flat.nets.iter().enumerate() {
        let is_po = flat.primary_outputs.contains(&net_id);
        if drivers[net_id] == 0 && (read[net_id] || is_po) {
            report.diagnostics.push(Diagnostic {
                severity: Severity::Error,
                code: LintCode::UndrivenNet,
                location: format!("{}/{}", flat.name, name),
                message: format!("net `{name}` is read or exported but has no driver"),
            });
        }
        if drivers[net_id] > 1 {
            report.diagnostics.push(Diagnostic {
                severity: Severity::Error,
                code: LintCode::MultiDriver,
                location: format!("{}/{}", flat.name, name),
                message: format!("net `{name}` has {} drivers", drivers[net_id]),
            });
        }
    }
    // Combinational cycle check; DFF gates break cycles.
    if let Err(net) = flat.topological_order() {
        report.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            code: LintCode::CombLoop,
            location: format!("{}/{}", flat.name, net),
            message: format!("combinational loop through net `{net}`"),
        });
    }
}
