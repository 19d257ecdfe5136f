use std::collections::BTreeMap;

use super::*;

fn lib() -> CellLibrary {
    CellLibrary::parse("AND2 AND 2\nXOR2 XOR 2\nNOT1 NOT 1\n").unwrap()
}

#[test]
fn library_single_record() {
    let lib = CellLibrary::parse("AND2 AND 2").unwrap();
    assert_eq!(lib.len(), 1);
    let def = lib.get("AND2").unwrap();
    assert_eq!(def.function, Function::And);
    assert_eq!(def.arity, 2);
}

#[test]
fn library_bad_arity() {
    let err = CellLibrary::parse("NOT1 NOT 2").unwrap_err();
    assert!(matches!(err, NetlistError::BadArity { .. }));
}

#[test]
fn library_duplicate_cell() {
    let err = CellLibrary::parse("XOR2 XOR 2\nXOR2 XOR 2").unwrap_err();
    assert!(matches!(err, NetlistError::DuplicateCell(_)));
}

#[test]
fn library_comments_and_blanks() {
    let lib = CellLibrary::parse("# header\n\nAND2 AND 2 # trailing\n").unwrap();
    assert_eq!(lib.len(), 1);
}

#[test]
fn library_unknown_tag() {
    let err = CellLibrary::parse("FOO BAR 2").unwrap_err();
    assert!(matches!(err, NetlistError::UnknownFunctionTag(_)));
}

#[test]
fn parse_minimal_module() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; buf g1 (y, a); endmodule",
        &lib(),
    )
    .unwrap();
    assert_eq!(nl.modules.len(), 1);
    let m = &nl.modules[0];
    assert_eq!(m.instances.len(), 1);
    assert_eq!(m.instances[0].target, "buf");
    assert_eq!(
        m.instances[0].conns,
        Connections::Ordered(vec!["y".to_string(), "a".to_string()])
    );
}

#[test]
fn parse_bus_bit_select() {
    let nl = parse_netlist(
        "module t(a,y); input [1:0] a; output y; and g1 (y, a[0], a[1]); endmodule",
        &lib(),
    )
    .unwrap();
    let m = &nl.modules[0];
    assert_eq!(
        m.instances[0].conns,
        Connections::Ordered(vec!["y".to_string(), "a.0".to_string(), "a.1".to_string()])
    );
}

#[test]
fn parse_missing_endmodule() {
    let err = parse_netlist("module t(a,y); input a; output y;", &lib()).unwrap_err();
    assert!(matches!(err, NetlistError::Syntax { .. }));
}

#[test]
fn parse_comments() {
    let nl = parse_netlist(
        "// top\nmodule t(a,y); // ports\n input a; output y;\n buf g1 (y, a);\nendmodule\n",
        &lib(),
    )
    .unwrap();
    assert_eq!(nl.modules[0].instances.len(), 1);
}

#[test]
fn lint_unresolved_ref() {
    let nl = parse_netlist(
        "module t(a,b,y); input a, b; output y; FA g1 (.a(a), .b(b), .y(y)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    let errs: Vec<_> = report.errors().collect();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].code, LintCode::UnresolvedRef);
}

#[test]
fn lint_multi_driver() {
    let nl = parse_netlist(
        "module t(a,b,y); input a, b; output y;\n\
         not g1 (y, a);\n\
         not g2 (y, b);\n\
         endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::MultiDriver));
    assert!(!report.is_clean());
}

#[test]
fn lint_comb_loop() {
    let nl = parse_netlist(
        "module t(x,y); input x; output y;\n\
         wire a, b;\n\
         not g1 (a, b);\n\
         not g2 (b, a);\n\
         and g3 (y, x, a);\n\
         endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::CombLoop));
}

#[test]
fn lint_dff_breaks_loop() {
    let nl = parse_netlist(
        "module t(x,y); input x; output y;\n\
         wire a, b;\n\
         and g1 (a, x, b);\n\
         dff g2 (b, a);\n\
         buf g3 (y, a);\n\
         endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.is_clean(), "{report}");
}

#[test]
fn lint_undeclared_net() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; buf g1 (y, nosuch); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::UndeclaredNet));
}

#[test]
fn lint_undriven_net() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; wire w; and g1 (y, a, w); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::UndrivenNet));
}

#[test]
fn lint_arity_mismatch() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; and g1 (y, a); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::ArityMismatch));
}

#[test]
fn lint_floating_port() {
    let nl = parse_netlist(
        "module fa(a,b,y); input a, b; output y; and g1 (y, a, b); endmodule\n\
         module t(p,q,r); input p, q; output r; fa u1 (.a(p), .y(r)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.has_code(LintCode::FloatingPort));
}

#[test]
fn lint_unknown_top() {
    let nl = parse_netlist("module t(a,y); input a; output y; buf g (y, a); endmodule", &lib())
        .unwrap();
    let err = lint_netlist(&nl, &lib(), "nosuch").unwrap_err();
    assert!(matches!(err, NetlistError::UnknownTop(_)));
}

#[test]
fn lint_hierarchy_cycle() {
    let nl = parse_netlist(
        "module a(x,y); input x; output y; b u (.x(x), .y(y)); endmodule\n\
         module b(x,y); input x; output y; a u (.x(x), .y(y)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "a").unwrap();
    assert!(report.has_code(LintCode::CombLoop));
}

const TWO_COPIES: &str = "\
module inv3(i,o); input i; output o; wire w1, w2;\n\
  not g1 (w1, i);\n\
  not g2 (w2, w1);\n\
  not g3 (o, w2);\n\
endmodule\n\
module top(a,b,x,y); input a, b; output x, y;\n\
  inv3 u1 (.i(a), .o(x));\n\
  inv3 u2 (.i(b), .o(y));\n\
endmodule\n";

#[test]
fn flatten_two_copies() {
    let nl = parse_netlist(TWO_COPIES, &lib()).unwrap();
    let flat = flatten(&nl, &lib(), "top", &LabelMap::default()).unwrap();
    assert_eq!(flat.gate_count(), 6);
    let provs: Vec<&[String]> = flat.gates.iter().map(|g| g.provenance.as_slice()).collect();
    assert!(provs
        .iter()
        .any(|p| p == &["top".to_string(), "u1".to_string()].as_slice()));
    assert!(provs
        .iter()
        .any(|p| p == &["top".to_string(), "u2".to_string()].as_slice()));
    // Internal nets are renamed path.localname.
    assert!(flat.nets.iter().any(|n| n == "u1.w1"));
    assert!(flat.nets.iter().any(|n| n == "u2.w2"));
}

#[test]
fn flatten_primitive_top_provenance() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; buf g1 (y, a); endmodule",
        &lib(),
    )
    .unwrap();
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    assert_eq!(flat.gate_count(), 1);
    assert_eq!(flat.gates[0].provenance, vec!["t".to_string()]);
    assert_eq!(flat.gates[0].label, UNMAPPED_CLASS);
}

#[test]
fn flatten_rejects_lint_errors() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; FA g1 (.a(a), .y(y)); endmodule",
        &lib(),
    )
    .unwrap();
    let err = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap_err();
    assert!(matches!(err, NetlistError::LintErrorsPresent(_)));
}

#[test]
fn flatten_label_map() {
    let nl = parse_netlist(TWO_COPIES, &lib()).unwrap();
    let labels = LabelMap::parse("u1 left\nu2 right\n").unwrap();
    let flat = flatten(&nl, &lib(), "top", &labels).unwrap();
    let counts = flat.label_counts();
    assert_eq!(counts.get("left"), Some(&3));
    assert_eq!(counts.get("right"), Some(&3));
}

#[test]
fn simulate_buf_chain() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; wire w; buf g1 (w, a); buf g2 (y, w); endmodule",
        &lib(),
    )
    .unwrap();
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    let a = flat.net_id("a").unwrap();
    let y = flat.net_id("y").unwrap();
    let out = simulate(&flat, &BTreeMap::from([(a, true)])).unwrap();
    assert_eq!(out[&y], true);
}

#[test]
fn simulate_xor_equal_inputs() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; xor g1 (y, a, a); endmodule",
        &lib(),
    )
    .unwrap();
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    let a = flat.net_id("a").unwrap();
    let y = flat.net_id("y").unwrap();
    for bit in [false, true] {
        let out = simulate(&flat, &BTreeMap::from([(a, bit)])).unwrap();
        assert_eq!(out[&y], false);
    }
}

#[test]
fn simulate_unassigned_pi() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y; buf g1 (y, a); endmodule",
        &lib(),
    )
    .unwrap();
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    let err = simulate(&flat, &BTreeMap::new()).unwrap_err();
    assert!(matches!(err, NetlistError::UnassignedPi(_)));
}

#[test]
fn simulate_mux() {
    let nl = parse_netlist(
        "module t(a,b,s,y); input a, b, s; output y; mux g1 (y, a, b, s); endmodule",
        &lib(),
    )
    .unwrap();
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    let (a, b, s, y) = (
        flat.net_id("a").unwrap(),
        flat.net_id("b").unwrap(),
        flat.net_id("s").unwrap(),
        flat.net_id("y").unwrap(),
    );
    let run = |av, bv, sv| {
        simulate(&flat, &BTreeMap::from([(a, av), (b, bv), (s, sv)])).unwrap()[&y]
    };
    assert_eq!(run(true, false, false), true);
    assert_eq!(run(true, false, true), false);
}

#[test]
fn roundtrip_minimal() {
    let src = "module t(a,y); input a; output y; buf g1 (y, a); endmodule";
    let nl = parse_netlist(src, &lib()).unwrap();
    let nl2 = parse_netlist(&write_netlist(&nl), &lib()).unwrap();
    assert_eq!(nl, nl2);
}

#[test]
fn roundtrip_hierarchy() {
    let nl = parse_netlist(TWO_COPIES, &lib()).unwrap();
    let nl2 = parse_netlist(&write_netlist(&nl), &lib()).unwrap();
    assert_eq!(nl, nl2);
    // Second write is byte-identical.
    assert_eq!(write_netlist(&nl), write_netlist(&nl2));
}

#[test]
fn named_cell_instantiation() {
    let nl = parse_netlist(
        "module t(a,b,y); input a, b; output y; AND2 g1 (.y(y), .a(a), .b(b)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.is_clean(), "{report}");
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    assert_eq!(flat.gates[0].function, Function::And);
    assert_eq!(flat.gates[0].inputs.len(), 2);
}

#[test]
fn bus_port_binding() {
    let nl = parse_netlist(
        "module pair(i,o); input [1:0] i; output o; and g (o, i[1], i[0]); endmodule\n\
         module t(x,y); input [1:0] x; output y; pair u (.i(x), .o(y)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.is_clean(), "{report}");
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    assert_eq!(flat.gate_count(), 1);
    let x1 = flat.net_id("x.1").unwrap();
    let x0 = flat.net_id("x.0").unwrap();
    assert_eq!(flat.gates[0].inputs, vec![x1, x0]);
}

#[test]
fn per_bit_port_binding() {
    let nl = parse_netlist(
        "module pair(i,o); input [1:0] i; output o; and g (o, i[1], i[0]); endmodule\n\
         module t(p,q,y); input p, q; output y; pair u (.i[1](p), .i[0](q), .o(y)); endmodule",
        &lib(),
    )
    .unwrap();
    let report = lint_netlist(&nl, &lib(), "t").unwrap();
    assert!(report.is_clean(), "{report}");
    let flat = flatten(&nl, &lib(), "t", &LabelMap::default()).unwrap();
    let p = flat.net_id("p").unwrap();
    let q = flat.net_id("q").unwrap();
    assert_eq!(flat.gates[0].inputs, vec![p, q]);
}

#[test]
fn flat_to_netlist_roundtrip() {
    let nl = parse_netlist(TWO_COPIES, &lib()).unwrap();
    let flat = flatten(&nl, &lib(), "top", &LabelMap::default()).unwrap();
    let rebuilt = flat_to_netlist(&flat).unwrap();
    let report = lint_netlist(&rebuilt, &lib(), "top").unwrap();
    assert!(report.is_clean(), "{report}");
    let reflat = flatten(&rebuilt, &lib(), "top", &LabelMap::default()).unwrap();
    assert_eq!(reflat.gate_count(), flat.gate_count());
    // Same function per gate name.
    for (g1, g2) in flat.gates.iter().zip(&reflat.gates) {
        assert_eq!(g1.name, g2.name);
        assert_eq!(g1.function, g2.function);
    }
}

#[test]
fn lint_report_ordering_deterministic() {
    let nl = parse_netlist(
        "module t(a,y); input a; output y;\n\
         FA g1 (.a(a), .y(y));\n\
         and g2 (y, a);\n\
         endmodule",
        &lib(),
    )
    .unwrap();
    let r1 = lint_netlist(&nl, &lib(), "t").unwrap();
    let r2 = lint_netlist(&nl, &lib(), "t").unwrap();
    assert_eq!(r1, r2);
    let locs: Vec<&String> = r1.diagnostics.iter().map(|d| &d.location).collect();
    let mut sorted = locs.clone();
    sorted.sort();
    assert_eq!(locs, sorted);
}
