//! Acceptance suite. Each test checks one release criterion end to end and
//! prints a single `criterion N ...: PASS`/`FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netlearn::augment::{
    compose_flat_design, corrupt, curate, random_netlist, rewire_decoy, similarity,
    similarity_filter, synth_generate, CurationConfig, DesignSpec, SimilarityConfig, StubClient,
};
use netlearn::graph::{
    format_dataset, parse_dataset, to_graph, to_graph_with_classes, CircuitGraph,
};
use netlearn::model::{
    cosine_similarity, grad_check, readout, ModelDims, ModelParams, Task, TrainConfig,
};
use netlearn::netlist::{
    flat_to_netlist, flatten, parse_netlist, simulate, write_netlist, CellLibrary, FlatNetlist,
    LabelMap, Netlist,
};
use netlearn::sampler::{SamplerConfig, Subgraph};
use netlearn::tasks::{boundary_report_many, eval_node, evaluate_predictions, train_node};

fn verdict(criterion: u32, name: &str, ok: bool) {
    println!(
        "criterion {criterion} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} ({name}) failed");
}

fn lib() -> CellLibrary {
    CellLibrary::new()
}

fn flat_of(class: &str, arch: &str, w: u32, seed: u64) -> FlatNetlist {
    let d = synth_generate(&DesignSpec::new(class, w, Some(arch)), seed).unwrap();
    flatten(&d.netlist, &lib(), &d.top, &LabelMap::default()).unwrap()
}

// --- criterion 1: gradient check ------------------------------------------

#[test]
fn criterion_1_gradient_check() {
    let started = Instant::now();
    let mut ok = true;
    let mut instances = 0usize;
    for (i, (class, arch)) in [
        ("adder", "ripple-carry"),
        ("subtractor", "ripple-borrow"),
        ("multiplier", "array"),
        ("comparator", "tree"),
        ("adder", "carry-lookahead"),
        ("comparator", "ripple-chain"),
    ]
    .iter()
    .enumerate()
    {
        let g = to_graph(&flat_of(class, arch, 2, i as u64));
        let layers = 1 + i % 2;
        let hidden = if i % 4 < 2 { 4 } else { 8 };
        let dims = ModelDims::new(15, hidden, layers, g.class_names.len());
        let params = ModelParams::init(dims, 40 + i as u64);
        let labels: Vec<usize> = g.labels.clone();
        let node = grad_check(&params, &g, None, Task::Node { targets: &labels }, 1e-4).unwrap();
        let graph = grad_check(&params, &g, None, Task::Graph { target: 0 }, 1e-4).unwrap();
        ok &= node.max_rel_err < 1e-4 && graph.max_rel_err < 1e-4;
        instances += 2;
    }
    ok &= instances >= 5 && started.elapsed() < Duration::from_secs(10);
    verdict(1, "gradient check", ok);
}

// --- criterion 2: oracle equivalence --------------------------------------

#[test]
fn criterion_2_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = true;

    // Readout: mean + max pooling against explicit loops.
    for _ in 0..100 {
        let n = rng.gen_range(1..12);
        let d = rng.gen_range(1..8);
        let x = ndarray::Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let got = readout(&x.view()).unwrap();
        for j in 0..d {
            let mut sum = 0.0;
            let mut max = f64::NEG_INFINITY;
            for i in 0..n {
                sum += x[(i, j)];
                max = max.max(x[(i, j)]);
            }
            ok &= (got[j] - (sum / n as f64 + max)).abs() < 1e-9;
        }
    }

    // Cosine similarity against an explicit dot/norm computation.
    for _ in 0..100 {
        let d = rng.gen_range(1..10);
        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
        for j in 0..d {
            dot += a[j] * b[j];
            na += a[j] * a[j];
            nb += b[j] * b[j];
        }
        let expect = if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na.sqrt() * nb.sqrt())
        };
        ok &= (cosine_similarity(&a, &b).unwrap() - expect).abs() < 1e-9;
    }

    // Precision/recall/F1 (micro + macro) against per-class counting.
    let names: Vec<String> = (0..5).map(|k| format!("c{k}")).collect();
    for _ in 0..100 {
        let n = rng.gen_range(1..60);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let report = evaluate_predictions(&labels, &preds, &names);
        let mut correct = 0usize;
        let mut macro_sum = 0.0;
        let mut macro_n = 0usize;
        for k in 0..5 {
            let tp = labels
                .iter()
                .zip(&preds)
                .filter(|(&t, &p)| t == k && p == k)
                .count();
            let support = labels.iter().filter(|&&t| t == k).count();
            let predicted = preds.iter().filter(|&&p| p == k).count();
            correct += tp;
            let precision = if predicted > 0 {
                tp as f64 / predicted as f64
            } else {
                0.0
            };
            let recall = if support > 0 {
                tp as f64 / support as f64
            } else {
                0.0
            };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ok &= (report.per_class[k].precision - precision).abs() < 1e-9;
            ok &= (report.per_class[k].recall - recall).abs() < 1e-9;
            if support > 0 || predicted > 0 {
                macro_sum += f1;
                macro_n += 1;
            }
        }
        ok &= (report.f1_micro - correct as f64 / n as f64).abs() < 1e-9;
        ok &= (report.f1_macro - macro_sum / macro_n as f64).abs() < 1e-9;
    }

    // Induced subgraphs against a quadratic membership scan.
    for i in 0..100 {
        let flat = random_netlist("rnd", rng.gen_range(4..30), rng.gen_range(1..5), i);
        let g = to_graph(&flat);
        let n = g.node_count();
        let mut nodes: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if nodes.is_empty() {
            nodes.push(rng.gen_range(0..n));
        }
        let sub = Subgraph::induced(&g, nodes.clone());
        let mut expect = Vec::new();
        for &(u, v) in &g.edges {
            if nodes.contains(&u) && nodes.contains(&v) {
                expect.push((u, v));
            }
        }
        expect.sort_unstable();
        let mut got = sub.edges.clone();
        got.sort_unstable();
        ok &= got == expect && sub.nodes == nodes;
    }

    verdict(2, "oracle equivalence", ok);
}

// --- criterion 3: premise check (corrupted vs rewired decoys) -------------

#[test]
fn criterion_3_premise_corrupt_vs_decoy() {
    let started = Instant::now();
    let cfg = SimilarityConfig::default();
    let pairs = [
        ("adder", "ripple-carry"),
        ("adder", "carry-lookahead"),
        ("subtractor", "ripple-borrow"),
        ("subtractor", "complement-add"),
        ("multiplier", "array"),
        ("multiplier", "shift-add-unrolled"),
        ("comparator", "ripple-chain"),
        ("comparator", "tree"),
    ];
    let mut corrupt_sims = Vec::new();
    let mut decoy_sims = Vec::new();
    let mut kept_corrupt = 0usize;
    let mut rejected_decoys = 0usize;
    let mut total = 0usize;
    for (class, arch) in pairs {
        let design = synth_generate(&DesignSpec::new(class, 4, Some(arch)), 0).unwrap();
        let flat = flatten(&design.netlist, &lib(), &design.top, &LabelMap::default()).unwrap();
        let golden = to_graph(&flat);
        for seed in 0..20u64 {
            let corrupted = corrupt(&design.netlist, &lib(), &design.top, 0.10, seed).unwrap();
            let cg = to_graph(
                &flatten(&corrupted, &lib(), &design.top, &LabelMap::default()).unwrap(),
            );
            let dg = to_graph(&rewire_decoy(&flat, seed));
            corrupt_sims.push(similarity(&golden, &cg, &cfg).unwrap());
            decoy_sims.push(similarity(&golden, &dg, &cfg).unwrap());
            let (kept, _) = similarity_filter(&golden, &[cg, dg], 0.90, &cfg).unwrap();
            kept_corrupt += kept.contains(&0) as usize;
            rejected_decoys += !kept.contains(&1) as usize;
            total += 1;
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "criterion 3 detail: mean corrupt {:.4} mean decoy {:.4} kept {kept_corrupt}/{total} rejected {rejected_decoys}/{total}",
        mean(&corrupt_sims),
        mean(&decoy_sims)
    );
    let mut ok = mean(&corrupt_sims) > mean(&decoy_sims);
    ok &= kept_corrupt as f64 >= 0.90 * total as f64;
    ok &= rejected_decoys as f64 >= 0.90 * total as f64;
    ok &= started.elapsed() < Duration::from_secs(60);
    verdict(3, "corrupted beats decoy + filter rates", ok);
}

// --- criterion 4: desk-scale boundary classification ----------------------

const CLASSES: [&str; 4] = ["adder", "subtractor", "multiplier", "comparator"];

/// Training architectures and, last, the architecture held out per class.
const TRAIN_ARCHS: [(&str, &[&str]); 4] = [
    ("adder", &["ripple-carry", "carry-lookahead"]),
    ("subtractor", &["ripple-borrow"]),
    ("multiplier", &["array"]),
    ("comparator", &["ripple-chain"]),
];
const UNSEEN_ARCHS: [(&str, &str); 4] = [
    ("adder", "carry-select"),
    ("subtractor", "complement-add"),
    ("multiplier", "shift-add-unrolled"),
    ("comparator", "tree"),
];

fn class_list() -> Vec<String> {
    let mut names: Vec<String> = CLASSES.iter().map(|c| c.to_string()).collect();
    names.push(netlearn::netlist::UNMAPPED_CLASS.to_string());
    names.sort();
    names
}

fn block_pool(archs: &[(&str, &[&str])], widths: &[u32]) -> Vec<(String, Netlist)> {
    let mut pool = Vec::new();
    for (class, archs) in archs {
        for arch in archs.iter() {
            for &w in widths {
                let d = synth_generate(&DesignSpec::new(class, w, Some(arch)), 0).unwrap();
                pool.push((class.to_string(), d.netlist));
            }
        }
    }
    pool
}

fn compose_set(
    pool: &[(String, Netlist)],
    count: usize,
    seed0: u64,
    classes: &[String],
    forced: Option<&[(String, Netlist)]>,
) -> Vec<CircuitGraph> {
    let mut graphs = Vec::new();
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed0 + i as u64);
        let mut blocks: Vec<(String, Netlist)> = Vec::new();
        if let Some(extra) = forced {
            blocks.push(extra[i % extra.len()].clone());
        }
        while blocks.len() < 3 {
            blocks.push(pool[rng.gen_range(0..pool.len())].clone());
        }
        let cd = compose_flat_design(&blocks, 0.25, seed0 + i as u64, &lib()).unwrap();
        graphs.push(to_graph_with_classes(&cd.flat, classes));
    }
    graphs
}

#[test]
fn criterion_4_desk_scale_node_classification() {
    let started = Instant::now();

    // Curate the stub corpus the composition blocks come from.
    let mut cur = CurationConfig {
        count: 2,
        seed: 0,
        ..CurationConfig::default()
    };
    for (class, archs) in TRAIN_ARCHS {
        for arch in archs {
            for w in [4u32, 6, 8] {
                cur.specs.push(DesignSpec::new(class, w, Some(arch)));
            }
        }
    }
    let curated = curate(&cur, &StubClient::new(cur.seed), &lib()).unwrap();
    assert!(
        curated.records.iter().filter(|r| r.kept()).count() >= cur.specs.len(),
        "stub corpus largely survives curation"
    );

    let classes = class_list();
    let train_pool = block_pool(&TRAIN_ARCHS, &[4, 5, 6, 7, 8]);
    let unseen: Vec<(String, Netlist)> = UNSEEN_ARCHS
        .iter()
        .flat_map(|(class, arch)| {
            [4u32, 6, 8].map(|w| {
                let d = synth_generate(&DesignSpec::new(class, w, Some(arch)), 0).unwrap();
                (class.to_string(), d.netlist)
            })
        })
        .collect();

    let train_graphs = compose_set(&train_pool, 30, 100, &classes, None);
    // Each held-out composition carries one unseen-architecture block; the
    // cycling covers every class's unseen architecture.
    let held_out = compose_set(&train_pool, 10, 900, &classes, Some(&unseen));

    let tc = TrainConfig {
        learning_rate: 0.02,
        epochs: 120,
        seed: 0,
        layers: 2,
        hidden: 128,
        ..TrainConfig::default()
    };
    let sc = SamplerConfig::default();
    let (params, _history) = train_node(&train_graphs, &tc, &sc).unwrap();
    let report = eval_node(&params, &held_out).unwrap();
    let ok = report.f1_micro >= 0.85
        && report.f1_macro >= 0.80
        && started.elapsed() < Duration::from_secs(600);
    println!(
        "criterion 4 detail: f1-micro {:.4} f1-macro {:.4} elapsed {:?}",
        report.f1_micro,
        report.f1_macro,
        started.elapsed()
    );
    verdict(4, "held-out composition F1", ok);
}

// --- criterion 5: filtering helps the boundary task -----------------------

#[test]
fn criterion_5_similarity_filtering_ablation() {
    let target = "multiplier";
    let classes = class_list();
    let sim_cfg = SimilarityConfig::default();
    let train_pool = block_pool(&TRAIN_ARCHS, &[4, 5, 6]);
    let golden_flat = flat_of(target, "array", 5, 0);
    let golden = to_graph(&golden_flat);

    let mut filtered_f1 = Vec::new();
    let mut unfiltered_f1 = Vec::new();
    for seed in 0..3u64 {
        // Candidate pool for the target class: real designs plus decoys of
        // comparable size, all claiming to be the target (the raw analog).
        let mut candidates: Vec<(String, Netlist)> = Vec::new();
        for w in [4u32, 5, 6] {
            let d = synth_generate(&DesignSpec::new(target, w, Some("array")), 0).unwrap();
            candidates.push((target.to_string(), d.netlist));
        }
        for i in 0..3u64 {
            let gates = golden_flat.gates.len();
            let decoy = random_netlist("decoy", gates, 8, 7000 + 10 * seed + i);
            candidates.push((target.to_string(), flat_to_netlist(&decoy).unwrap()));
        }

        // The filtered variant drops candidates dissimilar to the golden
        // reference before any composition is built.
        let cand_graphs: Vec<CircuitGraph> = candidates
            .iter()
            .map(|(_, nl)| {
                let top = nl.modules.last().unwrap().name.clone();
                to_graph(&flatten(nl, &lib(), &top, &LabelMap::default()).unwrap())
            })
            .collect();
        let (kept, _) = similarity_filter(&golden, &cand_graphs, 0.90, &sim_cfg).unwrap();
        let kept_candidates: Vec<(String, Netlist)> =
            kept.iter().map(|&i| candidates[i].clone()).collect();

        let eval_graphs = compose_set(&train_pool, 6, 5000 + 100 * seed, &classes, None);
        let tc = TrainConfig {
            learning_rate: 0.02,
            epochs: 40,
            seed,
            layers: 2,
            hidden: 32,
            ..TrainConfig::default()
        };
        let sc = SamplerConfig::default();
        for (pool_for_target, out) in [
            (&candidates, &mut unfiltered_f1),
            (&kept_candidates, &mut filtered_f1),
        ] {
            let train_graphs = compose_set(
                &train_pool,
                12,
                1000 + 100 * seed,
                &classes,
                Some(pool_for_target),
            );
            let (params, _) = train_node(&train_graphs, &tc, &sc).unwrap();
            let (_, _, f1) = boundary_report_many(&params, &eval_graphs, target).unwrap();
            out.push(f1);
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let filtered = median(&mut filtered_f1);
    let unfiltered = median(&mut unfiltered_f1);
    println!("criterion 5 detail: filtered {filtered:.4} unfiltered {unfiltered:.4}");
    verdict(5, "filtered >= unfiltered boundary F1", filtered >= unfiltered);
}

// --- criterion 6: CLI determinism -----------------------------------------

#[test]
fn criterion_6_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "spec.0.class=adder\nspec.0.width=4\nspec.1.class=comparator\nspec.1.width=5\n\
               count=3\nseed=9\nclient=stub\n";
    std::fs::write(dir.path().join("cur.cfg"), cfg).unwrap();
    std::fs::write(dir.path().join("train.cfg"), "epochs=4\nhidden=16\nseed=9\n").unwrap();
    let run = |out: &str| {
        let stages: [Vec<String>; 2] = [
            ["curate", "--config", "cur.cfg", "--out", out]
                .map(String::from)
                .to_vec(),
            vec![
                "train".into(),
                "--dataset".into(),
                format!("{out}/dataset.txt"),
                "--out".into(),
                format!("{out}/model.ckpt"),
                "--config".into(),
                "train.cfg".into(),
            ],
        ];
        for args in stages {
            let st = std::process::Command::new(env!("CARGO_BIN_EXE_netlearn"))
                .current_dir(dir.path())
                .args(&args)
                .status()
                .unwrap();
            assert!(st.success(), "{args:?}");
        }
    };
    run("r1");
    run("r2");
    let read = |p: String| std::fs::read(dir.path().join(p)).unwrap();
    let mut ok = true;
    for name in ["dataset.txt", "ledger.jsonl", "model.ckpt"] {
        ok &= read(format!("r1/{name}")) == read(format!("r2/{name}"));
    }
    // Manifests may differ only in wall time and the output directory name.
    let strip = |p: String| {
        String::from_utf8(read(p))
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wall_time_ms"))
            .collect::<String>()
            .replace("r1/", "")
            .replace("r2/", "")
    };
    ok &= strip("r1/manifest.json".into()) == strip("r2/manifest.json".into());
    verdict(6, "byte-identical reruns", ok);
}

// --- criterion 7: round-trips ---------------------------------------------

#[test]
fn criterion_7_round_trips() {
    let mut ok = true;
    // Netlist text: write -> parse -> write is byte-identical for the whole
    // generated corpus.
    for (class, archs) in netlearn::augment::ARCHITECTURES {
        for arch in archs.iter() {
            for w in 2..=4u32 {
                let d = synth_generate(&DesignSpec::new(class, w, Some(arch)), 0).unwrap();
                let text1 = write_netlist(&d.netlist);
                let reparsed = parse_netlist(&text1, &lib()).unwrap();
                ok &= write_netlist(&reparsed) == text1;
            }
        }
    }
    // Dataset files: format -> parse -> format is byte-identical.
    let mut cur = CurationConfig {
        count: 3,
        seed: 3,
        ..CurationConfig::default()
    };
    for class in CLASSES {
        cur.specs.push(DesignSpec::new(class, 4, None));
    }
    let out = curate(&cur, &StubClient::new(cur.seed), &lib()).unwrap();
    let text1 = format_dataset(&out.graphs);
    let graphs = parse_dataset(&text1).unwrap();
    ok &= format_dataset(&graphs) == text1;
    verdict(7, "write/read/write byte-identical", ok);
}

// --- criterion 8: generator correctness -----------------------------------

fn set_bus(assigns: &mut BTreeMap<usize, bool>, flat: &FlatNetlist, name: &str, w: u32, v: u64) {
    for i in 0..w {
        let bit = if w == 1 {
            name.to_string()
        } else {
            format!("{name}.{i}")
        };
        let id = flat.net_id(&bit).unwrap_or_else(|| panic!("net {bit}"));
        assigns.insert(id, (v >> i) & 1 == 1);
    }
}

fn get_bus(outs: &BTreeMap<usize, bool>, flat: &FlatNetlist, name: &str, w: u32) -> u64 {
    let mut v = 0u64;
    for i in 0..w {
        let bit = if w == 1 {
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

#[test]
fn criterion_8_generators_match_integer_oracles() {
    let mut ok = true;
    for (class, archs) in netlearn::augment::ARCHITECTURES {
        for arch in archs.iter() {
            for w in 2..=4u32 {
                let flat = flat_of(class, arch, w, 0);
                let mask = (1u64 << w) - 1;
                for a in 0..1u64 << w {
                    for b in 0..1u64 << w {
                        let carries = if matches!(*class, "adder" | "subtractor") {
                            2
                        } else {
                            1
                        };
                        for c in 0..carries {
                            let mut assigns = BTreeMap::new();
                            set_bus(&mut assigns, &flat, "a", w, a);
                            set_bus(&mut assigns, &flat, "b", w, b);
                            match *class {
                                "adder" => set_bus(&mut assigns, &flat, "cin", 1, c),
                                "subtractor" => set_bus(&mut assigns, &flat, "bin", 1, c),
                                _ => {}
                            }
                            let outs = simulate(&flat, &assigns).unwrap();
                            ok &= match *class {
                                "adder" => {
                                    let s = get_bus(&outs, &flat, "s", w);
                                    let cout = get_bus(&outs, &flat, "cout", 1);
                                    s + (cout << w) == a + b + c
                                }
                                "subtractor" => {
                                    let d = get_bus(&outs, &flat, "d", w);
                                    let bout = get_bus(&outs, &flat, "bout", 1);
                                    d == a.wrapping_sub(b).wrapping_sub(c) & mask
                                        && (bout == 1) == (a < b + c)
                                }
                                "multiplier" => get_bus(&outs, &flat, "p", 2 * w) == a * b,
                                "comparator" => {
                                    (get_bus(&outs, &flat, "gt", 1) == 1) == (a > b)
                                        && (get_bus(&outs, &flat, "eq", 1) == 1) == (a == b)
                                }
                                other => panic!("unknown class {other}"),
                            };
                        }
                    }
                }
            }
        }
    }
    verdict(8, "exhaustive integer oracles at width <= 4", ok);
}
