use std::collections::BTreeMap;

use super::*;
use crate::graph::to_graph;
use crate::netlist::{
    flatten, lint_netlist, parse_netlist, simulate, CellLibrary, FlatNetlist, LabelMap,
    LintReport, Netlist,
};

fn lib() -> CellLibrary {
    CellLibrary::new()
}

fn flat_of(design: &GeneratedDesign) -> FlatNetlist {
    flatten(&design.netlist, &lib(), &design.top, &LabelMap::default()).unwrap()
}

fn set_bus(
    assigns: &mut BTreeMap<usize, bool>,
    flat: &FlatNetlist,
    name: &str,
    width: u32,
    value: u64,
) {
    for i in 0..width {
        let bit = if width == 1 {
            name.to_string()
        } else {
            format!("{name}.{i}")
        };
        let id = flat.net_id(&bit).unwrap_or_else(|| panic!("net {bit}"));
        assigns.insert(id, (value >> i) & 1 == 1);
    }
}

fn get_bus(outs: &BTreeMap<usize, bool>, flat: &FlatNetlist, name: &str, width: u32) -> u64 {
    let mut v = 0u64;
    for i in 0..width {
        let bit = if width == 1 {
            name.to_string()
        } else {
            format!("{name}.{i}")
        };
        let id = flat.net_id(&bit).unwrap_or_else(|| panic!("net {bit}"));
        if outs[&id] {
            v |= 1 << i;
        }
    }
    v
}

/// Exhaustively checks one generated design against its integer oracle.
fn check_arithmetic(class: &str, arch: &str, w: u32) {
    let design = synth_generate(&DesignSpec::new(class, w, Some(arch)), 0).unwrap();
    let flat = flat_of(&design);
    let mask = (1u64 << w) - 1;
    for a in 0..1u64 << w {
        for b in 0..1u64 << w {
            let carries = match class {
                "adder" | "subtractor" => 2,
                _ => 1,
            };
            for c in 0..carries {
                let mut assigns = BTreeMap::new();
                set_bus(&mut assigns, &flat, "a", w, a);
                set_bus(&mut assigns, &flat, "b", w, b);
                match class {
                    "adder" => set_bus(&mut assigns, &flat, "cin", 1, c),
                    "subtractor" => set_bus(&mut assigns, &flat, "bin", 1, c),
                    _ => {}
                }
                let outs = simulate(&flat, &assigns).unwrap();
                match class {
                    "adder" => {
                        let s = get_bus(&outs, &flat, "s", w);
                        let cout = get_bus(&outs, &flat, "cout", 1);
                        assert_eq!(
                            s + (cout << w),
                            a + b + c,
                            "{arch} w{w}: {a}+{b}+{c}"
                        );
                    }
                    "subtractor" => {
                        let d = get_bus(&outs, &flat, "d", w);
                        let bout = get_bus(&outs, &flat, "bout", 1);
                        let expect = a.wrapping_sub(b).wrapping_sub(c) & mask;
                        assert_eq!(d, expect, "{arch} w{w}: {a}-{b}-{c}");
                        assert_eq!(bout == 1, a < b + c, "{arch} w{w} borrow: {a}-{b}-{c}");
                    }
                    "multiplier" => {
                        let p = get_bus(&outs, &flat, "p", 2 * w);
                        assert_eq!(p, a * b, "{arch} w{w}: {a}*{b}");
                    }
                    "comparator" => {
                        let gt = get_bus(&outs, &flat, "gt", 1);
                        let eq = get_bus(&outs, &flat, "eq", 1);
                        assert_eq!(gt == 1, a > b, "{arch} w{w} gt: {a} vs {b}");
                        assert_eq!(eq == 1, a == b, "{arch} w{w} eq: {a} vs {b}");
                    }
                    other => panic!("unknown class {other}"),
                }
            }
        }
    }
}

#[test]
fn adders_exhaustive_small_widths() {
    for arch in ["ripple-carry", "carry-lookahead", "carry-select"] {
        check_arithmetic("adder", arch, 2);
        check_arithmetic("adder", arch, 3);
    }
}

#[test]
fn subtractors_exhaustive_small_widths() {
    for arch in ["ripple-borrow", "complement-add"] {
        check_arithmetic("subtractor", arch, 2);
        check_arithmetic("subtractor", arch, 3);
    }
}

#[test]
fn multipliers_exhaustive_small_widths() {
    for arch in ["array", "shift-add-unrolled"] {
        check_arithmetic("multiplier", arch, 2);
        check_arithmetic("multiplier", arch, 3);
    }
}

#[test]
fn comparators_exhaustive_small_widths() {
    for arch in ["ripple-chain", "tree"] {
        check_arithmetic("comparator", arch, 2);
        check_arithmetic("comparator", arch, 3);
    }
}

#[test]
fn ripple_adder_w4_is_20_gates() {
    let d = synth_generate(&DesignSpec::new("adder", 4, Some("ripple-carry")), 0).unwrap();
    assert_eq!(flat_of(&d).gate_count(), 20);
}

#[test]
fn architectures_have_distinct_gate_counts() {
    for (class, archs) in ARCHITECTURES {
        let mut counts = Vec::new();
        for arch in *archs {
            let d = synth_generate(&DesignSpec::new(class, 4, Some(arch)), 0).unwrap();
            counts.push(flat_of(&d).gate_count());
        }
        let mut dedup = counts.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), counts.len(), "{class}: {counts:?}");
    }
}

#[test]
fn generated_designs_are_lint_clean() {
    for (class, archs) in ARCHITECTURES {
        for arch in *archs {
            let d = synth_generate(&DesignSpec::new(class, 5, Some(arch)), 0).unwrap();
            let report = lint_netlist(&d.netlist, &lib(), &d.top).unwrap();
            assert!(report.is_clean(), "{class}/{arch}: {report}");
        }
    }
}

#[test]
fn generator_rejects_bad_specs() {
    assert!(matches!(
        synth_generate(&DesignSpec::new("divider", 4, None), 0),
        Err(AugmentError::UnsupportedClass(_))
    ));
    assert!(matches!(
        synth_generate(&DesignSpec::new("adder", 4, Some("wallace")), 0),
        Err(AugmentError::UnsupportedArchitecture(..))
    ));
    assert!(matches!(
        synth_generate(&DesignSpec::new("adder", 1, None), 0),
        Err(AugmentError::InvalidSpec(_))
    ));
}

#[test]
fn architecture_hint_resolution() {
    let spec = DesignSpec::new("comparator", 4, None);
    let a0 = resolve_architecture(&spec, 0).unwrap();
    let a1 = resolve_architecture(&spec, 1).unwrap();
    assert_ne!(a0, a1);
    assert!(supported_architectures("comparator").unwrap().contains(&a0.as_str()));
}

fn golden_adder() -> (Netlist, String) {
    let d = synth_generate(&DesignSpec::new("adder", 4, Some("ripple-carry")), 0).unwrap();
    (d.netlist, d.top)
}

#[test]
fn corrupt_preserves_topology() {
    let (nl, top) = golden_adder();
    let flat = flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap();
    let bad = corrupt(&nl, &lib(), &top, 0.1, 3).unwrap();
    let bad_top = &bad.modules.last().unwrap().name;
    let bad_flat = flatten(&bad, &lib(), bad_top, &LabelMap::default()).unwrap();
    let g = to_graph(&flat);
    let h = to_graph(&bad_flat);
    assert_eq!(g.edges, h.edges);
    assert_eq!(g.in_degree, h.in_degree);
    assert_eq!(g.out_degree, h.out_degree);
    assert_eq!(g.reads_pi, h.reads_pi);
    assert_eq!(g.drives_po, h.drives_po);
    assert_ne!(g.functions, h.functions);
}

#[test]
fn tiny_rate_flips_exactly_one_gate() {
    let (nl, top) = golden_adder();
    let flat = flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap();
    let bad = corrupt(&nl, &lib(), &top, 0.01, 5).unwrap();
    let bad_flat = flatten(
        &bad,
        &lib(),
        &bad.modules.last().unwrap().name,
        &LabelMap::default(),
    )
    .unwrap();
    let diffs = to_graph(&flat)
        .functions
        .iter()
        .zip(to_graph(&bad_flat).functions.iter())
        .filter(|(a, b)| a != b)
        .count();
    assert_eq!(diffs, 1);
}

#[test]
fn corrupt_breaks_functionality() {
    let (nl, top) = golden_adder();
    let bad = corrupt(&nl, &lib(), &top, 0.1, 3).unwrap();
    let flat = flatten(
        &bad,
        &lib(),
        &bad.modules.last().unwrap().name,
        &LabelMap::default(),
    )
    .unwrap();
    let mut wrong = 0;
    for a in 0..16u64 {
        for b in 0..16u64 {
            let mut assigns = BTreeMap::new();
            set_bus(&mut assigns, &flat, "a", 4, a);
            set_bus(&mut assigns, &flat, "b", 4, b);
            set_bus(&mut assigns, &flat, "cin", 1, 0);
            let outs = simulate(&flat, &assigns).unwrap();
            let s = get_bus(&outs, &flat, "s", 4) + (get_bus(&outs, &flat, "cout", 1) << 4);
            if s != a + b {
                wrong += 1;
            }
        }
    }
    assert!(wrong >= 1, "corruption left the adder functionally intact");
}

#[test]
fn corrupt_rejects_bad_rate() {
    let (nl, top) = golden_adder();
    assert!(matches!(
        corrupt(&nl, &lib(), &top, 0.0, 1),
        Err(AugmentError::InvalidRate)
    ));
    assert!(matches!(
        corrupt(&nl, &lib(), &top, 1.5, 1),
        Err(AugmentError::InvalidRate)
    ));
}

#[test]
fn rewire_decoy_preserves_interface_and_arity() {
    let (nl, top) = golden_adder();
    let flat = flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap();
    let decoy = rewire_decoy(&flat, 9);
    assert_eq!(decoy.gate_count(), flat.gate_count());
    assert_eq!(decoy.primary_inputs, flat.primary_inputs);
    assert_eq!(decoy.primary_outputs, flat.primary_outputs);
    for (a, b) in flat.gates.iter().zip(decoy.gates.iter()) {
        assert_eq!(a.inputs.len(), b.inputs.len());
        assert_eq!(a.output, b.output);
    }
    assert_ne!(decoy, flat);
}

#[test]
fn random_netlist_is_deterministic() {
    let a = random_netlist("d", 30, 4, 11);
    let b = random_netlist("d", 30, 4, 11);
    assert_eq!(a, b);
    assert_eq!(a.gate_count(), 30);
    assert!(!a.primary_outputs.is_empty());
    assert!(to_graph(&a).node_count() == 30);
}

#[test]
fn similarity_of_identical_graphs_is_one() {
    let (nl, top) = golden_adder();
    let g = to_graph(&flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap());
    let cfg = SimilarityConfig::default();
    let sim = similarity(&g, &g, &cfg).unwrap();
    assert!((sim - 1.0).abs() < 1e-12);
}

#[test]
fn corrupted_kept_and_decoy_rejected_at_default_tau() {
    let cfg = SimilarityConfig::default();
    let (nl, top) = golden_adder();
    let flat = flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap();
    let golden = to_graph(&flat);
    for seed in 0..5 {
        let bad = corrupt(&nl, &lib(), &top, 0.1, seed).unwrap();
        let bad_g = to_graph(
            &flatten(
                &bad,
                &lib(),
                &bad.modules.last().unwrap().name,
                &LabelMap::default(),
            )
            .unwrap(),
        );
        let s = similarity(&golden, &bad_g, &cfg).unwrap();
        assert!(s >= 0.90, "corrupt seed {seed}: sim {s}");
        let decoy = to_graph(&rewire_decoy(&flat, seed));
        let d = similarity(&golden, &decoy, &cfg).unwrap();
        assert!(d < 0.90, "decoy seed {seed}: sim {d}");
        assert!(s > d);
    }
}

#[test]
fn cell_count_filter_examples() {
    let mk = |gates: usize, seed: u64| random_netlist("c", gates, 4, seed);
    let pool = vec![
        ("x".to_string(), mk(100, 1)),
        ("x".to_string(), mk(100, 2)),
        ("x".to_string(), mk(10, 3)),
    ];
    let (kept, outcomes) = cell_count_filter(&pool, 0.5);
    assert_eq!(kept, vec![0, 1]);
    assert_eq!(outcomes[2].verdict, Verdict::Discarded);

    let equal = vec![
        ("x".to_string(), mk(40, 1)),
        ("x".to_string(), mk(40, 2)),
    ];
    let (kept, _) = cell_count_filter(&equal, 0.5);
    assert_eq!(kept, vec![0, 1]);

    let single = vec![("x".to_string(), mk(7, 1))];
    let (kept, _) = cell_count_filter(&single, 0.5);
    assert_eq!(kept, vec![0]);
}

#[test]
fn similarity_filter_keeps_golden_and_preserves_order() {
    let cfg = SimilarityConfig::default();
    let (nl, top) = golden_adder();
    let golden = to_graph(&flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap());
    let flat = flatten(&nl, &lib(), &top, &LabelMap::default()).unwrap();
    let decoy = to_graph(&rewire_decoy(&flat, 1));
    let cands = vec![golden.clone(), decoy, golden.clone()];
    let (kept, outcomes) = similarity_filter(&golden, &cands, 0.90, &cfg).unwrap();
    assert_eq!(kept, vec![0, 2]);
    assert!((outcomes[0].score.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(outcomes[1].verdict, Verdict::Discarded);
}

fn vote_candidate(id: usize, emb: Vec<f64>, gates: usize) -> VoteCandidate {
    VoteCandidate {
        id,
        source: String::new(),
        embedding: emb,
        gate_count: gates,
    }
}

#[test]
fn vote_ties_break_on_ascending_id() {
    let batch: Vec<VoteCandidate> = (0..10)
        .map(|i| vote_candidate(i, vec![1.0, 2.0], 50))
        .collect();
    let client = StubClient::new(0);
    let (winners, outcomes) = architecture_vote(&batch, &client, 3).unwrap();
    assert_eq!(winners, vec![0, 1, 2]);
    assert_eq!(outcomes[9].verdict, Verdict::Discarded);
}

#[test]
fn vote_prefers_the_distinct_large_design() {
    let mut batch: Vec<VoteCandidate> = (0..9)
        .map(|i| vote_candidate(i, vec![1.0, 0.0], 20))
        .collect();
    batch.push(vote_candidate(9, vec![0.0, 1.0], 60));
    let client = StubClient::new(0);
    let (winners, _) = architecture_vote(&batch, &client, 3).unwrap();
    assert_eq!(winners[0], 9);
}

#[test]
fn vote_with_k_equal_batch_keeps_everything() {
    let batch: Vec<VoteCandidate> = (0..4)
        .map(|i| vote_candidate(i, vec![1.0, i as f64], 10 + i))
        .collect();
    let client = StubClient::new(0);
    let (winners, outcomes) = architecture_vote(&batch, &client, 4).unwrap();
    assert_eq!(winners.len(), 4);
    assert!(outcomes.iter().all(|o| o.verdict == Verdict::Kept));
}

struct CountingStub {
    inner: StubClient,
    calls: std::cell::Cell<usize>,
}

impl GeneratorClient for CountingStub {
    fn generate(&self, s: &DesignSpec, n: usize, t: f64) -> Result<Vec<String>, AugmentError> {
        self.inner.generate(s, n, t)
    }
    fn evaluate(&self, b: &[VoteCandidate]) -> Result<Vec<f64>, AugmentError> {
        self.inner.evaluate(b)
    }
    fn debug(&self, s: &str, r: &LintReport) -> Result<String, AugmentError> {
        self.calls.set(self.calls.get() + 1);
        self.inner.debug(s, r)
    }
}

#[test]
fn repair_clean_source_makes_no_debug_calls() {
    let client = CountingStub {
        inner: StubClient::new(0),
        calls: std::cell::Cell::new(0),
    };
    let src = "module t(a,y); input a; output y; not g1 (y, a); endmodule";
    let (nl, iters) = repair_loop(src, &lib(), &client, 5).unwrap();
    assert_eq!(iters, 0);
    assert_eq!(client.calls.get(), 0);
    assert_eq!(nl.modules.len(), 1);
}

#[test]
fn repair_fixes_one_defect_per_iteration() {
    // Two undeclared wires; the stub declares one per debug call.
    let src = "module t(a,y); input a; output y;\n\
               not g1 (w1, a);\n\
               not g2 (w2, w1);\n\
               not g3 (y, w2);\n\
               endmodule";
    let client = StubClient::new(0);
    let (_, iters) = repair_loop(src, &lib(), &client, 5).unwrap();
    assert_eq!(iters, 2);
}

#[test]
fn repair_exhausts_on_unfixable_source() {
    // UNDRIVEN_NET is beyond the stub's one-trick debug step.
    let src = "module t(a,y); input a; output y; wire w; and g1 (y, a, w); endmodule";
    let client = StubClient::new(0);
    match repair_loop(src, &lib(), &client, 5) {
        Err(AugmentError::RepairExhausted { iterations, report }) => {
            assert_eq!(iterations, 5);
            assert!(!report.is_clean());
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn compose_single_block_matches_block_interface() {
    let d = synth_generate(&DesignSpec::new("comparator", 3, Some("tree")), 0).unwrap();
    let flat_block = flat_of(&d);
    let composed = compose_flat_design(
        &[("comparator".to_string(), d.netlist.clone())],
        0.3,
        1,
        &lib(),
    )
    .unwrap();
    assert_eq!(
        composed.flat.primary_inputs.len(),
        flat_block.primary_inputs.len()
    );
    assert_eq!(
        composed.flat.primary_outputs.len(),
        flat_block.primary_outputs.len()
    );
    let counts = composed.flat.label_counts();
    assert_eq!(counts.len(), 1);
    assert_eq!(counts["comparator"], flat_block.gate_count());
}

#[test]
fn compose_without_glue_keeps_blocks_disjoint() {
    let a = synth_generate(&DesignSpec::new("adder", 2, Some("ripple-carry")), 0).unwrap();
    let c = synth_generate(&DesignSpec::new("comparator", 2, Some("tree")), 0).unwrap();
    let composed = compose_flat_design(
        &[
            ("adder".to_string(), a.netlist),
            ("comparator".to_string(), c.netlist),
        ],
        0.0,
        7,
        &lib(),
    )
    .unwrap();
    let g = to_graph(&composed.flat);
    // No edge crosses the class boundary.
    for &(u, v) in &g.edges {
        assert_eq!(g.labels[u], g.labels[v]);
    }
}

#[test]
fn compose_label_multiset_matches_block_gate_counts() {
    let blocks: Vec<(String, Netlist)> = vec![
        (
            "adder".to_string(),
            synth_generate(&DesignSpec::new("adder", 4, Some("ripple-carry")), 0)
                .unwrap()
                .netlist,
        ),
        (
            "adder".to_string(),
            synth_generate(&DesignSpec::new("adder", 4, Some("carry-lookahead")), 0)
                .unwrap()
                .netlist,
        ),
        (
            "multiplier".to_string(),
            synth_generate(&DesignSpec::new("multiplier", 2, Some("array")), 0)
                .unwrap()
                .netlist,
        ),
        (
            "comparator".to_string(),
            synth_generate(&DesignSpec::new("comparator", 4, Some("ripple-chain")), 0)
                .unwrap()
                .netlist,
        ),
    ];
    let mut expect: BTreeMap<String, usize> = BTreeMap::new();
    for (class, nl) in &blocks {
        let flat = flatten(
            nl,
            &lib(),
            &nl.modules.last().unwrap().name,
            &LabelMap::default(),
        )
        .unwrap();
        *expect.entry(class.clone()).or_insert(0) += flat.gate_count();
    }
    let composed = compose_flat_design(&blocks, 0.3, 42, &lib()).unwrap();
    assert_eq!(composed.flat.label_counts(), expect);
}

#[test]
fn compose_output_is_parseable_and_lint_clean() {
    let a = synth_generate(&DesignSpec::new("adder", 3, Some("carry-select")), 0).unwrap();
    let s = synth_generate(&DesignSpec::new("subtractor", 3, Some("complement-add")), 0).unwrap();
    let composed = compose_flat_design(
        &[
            ("adder".to_string(), a.netlist),
            ("subtractor".to_string(), s.netlist),
        ],
        0.5,
        3,
        &lib(),
    )
    .unwrap();
    let text = crate::netlist::write_netlist(&composed.netlist);
    let back = parse_netlist(&text, &lib()).unwrap();
    let report = lint_netlist(&back, &lib(), &composed.top).unwrap();
    assert!(report.is_clean(), "{report}");
}

fn small_config() -> CurationConfig {
    CurationConfig::parse(
        "spec.0.class=adder\nspec.0.width=4\n\
         spec.1.class=comparator\nspec.1.width=4\n\
         count=6\ntau=0.90\nrho=0.5\nvote_share=0.5\nseed=3\nclient=stub\n",
    )
    .unwrap()
}

#[test]
fn config_parse_and_validate() {
    let cfg = small_config();
    assert_eq!(cfg.specs.len(), 2);
    assert_eq!(cfg.count, 6);
    assert_eq!(cfg.tau, 0.90);
    assert!(CurationConfig::parse("count=5\n").is_err()); // no specs
    assert!(CurationConfig::parse("spec.0.class=adder\nspec.0.width=4\nbogus=1\n").is_err());
    assert!(CurationConfig::parse("spec.0.class=adder\nspec.0.width=4\ntau=2.0\n").is_err());
}

#[test]
fn curate_zero_vote_share_has_no_vote_stages() {
    let mut cfg = small_config();
    cfg.vote_share = 0.0;
    let client = StubClient::new(cfg.seed);
    let out = curate(&cfg, &client, &lib()).unwrap();
    assert!(out
        .records
        .iter()
        .all(|r| r.stages.iter().all(|s| s.stage != Stage::Vote)));
    assert!(!out.graphs.is_empty());
}

#[test]
fn curate_is_deterministic() {
    let cfg = small_config();
    let client = StubClient::new(cfg.seed);
    let a = curate(&cfg, &client, &lib()).unwrap();
    let b = curate(&cfg, &client, &lib()).unwrap();
    assert_eq!(a.graphs, b.graphs);
    assert_eq!(a.records, b.records);
}

#[test]
fn curate_discards_decoys_at_similarity_stage() {
    let mut cfg = small_config();
    cfg.decoys = 3;
    cfg.vote_share = 0.0;
    let client = StubClient::new(cfg.seed);
    let out = curate(&cfg, &client, &lib()).unwrap();
    let decoy_records: Vec<&CurationRecord> = out
        .records
        .iter()
        .filter(|r| r.stages.iter().all(|s| s.stage != Stage::LintRepair))
        .collect();
    assert_eq!(decoy_records.len(), 6); // 3 per spec, 2 specs
    for r in decoy_records {
        let last = r.stages.last().unwrap();
        assert_eq!(last.stage, Stage::Similarity);
        assert_eq!(last.verdict, Verdict::Discarded);
    }
}

#[test]
fn core_premise_corrupt_beats_decoy_per_class() {
    let cfg = SimilarityConfig::default();
    for (class, archs) in ARCHITECTURES {
        let d = synth_generate(&DesignSpec::new(class, 4, Some(archs[0])), 0).unwrap();
        let flat = flat_of(&d);
        let golden = to_graph(&flat);
        let mut sim_corrupt = 0.0;
        let mut sim_decoy = 0.0;
        let seeds = 5;
        for seed in 0..seeds {
            let bad = corrupt(&d.netlist, &lib(), &d.top, 0.1, seed).unwrap();
            let bad_g = to_graph(
                &flatten(
                    &bad,
                    &lib(),
                    &bad.modules.last().unwrap().name,
                    &LabelMap::default(),
                )
                .unwrap(),
            );
            sim_corrupt += similarity(&golden, &bad_g, &cfg).unwrap();
            sim_decoy += similarity(&golden, &to_graph(&rewire_decoy(&flat, seed)), &cfg).unwrap();
        }
        assert!(
            sim_corrupt / seeds as f64 > sim_decoy / seeds as f64,
            "{class}: corrupt {sim_corrupt} vs decoy {sim_decoy}"
        );
    }
}
