//! One function per pipeline stage, plus the `pipeline` meta-command that
//! chains them inside a single output directory.

use std::path::{Path, PathBuf};

use netlearn::augment::{curate, default_top, repair_loop, CurationConfig, CurationOutput};
use netlearn::graph::{load_dataset, save_dataset, to_graph_with_classes, CircuitGraph};
use netlearn::model::{load_checkpoint, save_checkpoint, ModelParams, TrainConfig};
use netlearn::netlist::{
    flatten, lint_netlist, parse_netlist, write_netlist, UNMAPPED_CLASS,
};
use netlearn::sampler::SamplerConfig;
use netlearn::tasks::{
    boundary_report_many, eval_graph, eval_node, train_graph, train_node, EvalReport,
};

use crate::error::{make_dir, read_file, write_file, CliError};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::support::{load_labelmap, load_library, make_client, par_map, parse_train_config};

/// Which classifier a checkpoint trains and evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TaskKind {
    /// Per-gate boundary identification.
    Node,
    /// Whole-design functional classification.
    Graph,
}

pub fn cmd_lint(paths: &[PathBuf], lib_path: Option<&Path>) -> Result<(), CliError> {
    let lib = load_library(lib_path)?;
    let mut error_count = 0usize;
    for path in paths {
        let text = read_file(path)?;
        let linted = parse_netlist(&text, &lib)
            .and_then(|nl| lint_netlist(&nl, &lib, default_top(&nl)));
        match linted {
            Err(e) => {
                println!("{}: {e}", path.display());
                error_count += 1;
            }
            Ok(report) => {
                if report.is_clean() {
                    println!("{}: clean", path.display());
                } else {
                    for line in report.rendered() {
                        println!("{}: {line}", path.display());
                    }
                    error_count += report.error_count();
                }
            }
        }
    }
    if error_count > 0 {
        Err(CliError::user(format!("{error_count} lint error(s)")))
    } else {
        Ok(())
    }
}

fn load_curation_config(
    path: &Path,
    seed: Option<u64>,
    tau: Option<f64>,
    rho: Option<f64>,
    client: Option<&str>,
) -> Result<(CurationConfig, String), CliError> {
    let text = read_file(path)?;
    let mut cfg = CurationConfig::parse(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = tau {
        cfg.tau = t;
    }
    if let Some(r) = rho {
        cfg.rho = r;
    }
    if let Some(c) = client {
        cfg.client = c.to_string();
    }
    cfg.validate()?;
    Ok((cfg, text))
}

pub fn cmd_gen(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    client_flag: Option<&str>,
    lib_path: Option<&Path>,
) -> Result<(), CliError> {
    let (cfg, snapshot) = load_curation_config(config, seed, None, None, client_flag)?;
    let lib = load_library(lib_path)?;
    let client = make_client(&cfg.client, cfg.seed)?;
    make_dir(out)?;
    let mut manifest = ManifestBuilder::new("gen", cfg.seed);
    manifest.config(&snapshot).input(config);
    let mut id = 0usize;
    let mut kept = 0usize;
    for spec in &cfg.specs {
        let sources = client.generate(spec, cfg.count, cfg.temperature)?;
        for source in sources {
            let name = format!("design_{id:03}.v");
            id += 1;
            match repair_loop(&source, &lib, client.as_ref(), 5) {
                Ok((nl, _iters)) => {
                    let path = out.join(&name);
                    write_file(&path, &write_netlist(&nl))?;
                    manifest.output(&path);
                    kept += 1;
                }
                Err(e) => eprintln!("{name}: discarded ({e})"),
            }
        }
    }
    println!("gen: wrote {kept} of {id} candidates to {}", out.display());
    manifest.write(&out.join("manifest.json"))
}

fn write_curation_output(
    result: &CurationOutput,
    out: &Path,
    manifest: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let dataset_path = out.join("dataset.txt");
    save_dataset(&result.graphs, &dataset_path)?;
    manifest.output(&dataset_path);
    let mut ledger = String::new();
    for record in &result.records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::internal(format!("ledger serialization: {e}")))?;
        ledger.push_str(&line);
        ledger.push('\n');
    }
    let ledger_path = out.join("ledger.jsonl");
    write_file(&ledger_path, &ledger)?;
    manifest.output(&ledger_path);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_curate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    tau: Option<f64>,
    rho: Option<f64>,
    client_flag: Option<&str>,
    lib_path: Option<&Path>,
) -> Result<(), CliError> {
    let (cfg, snapshot) = load_curation_config(config, seed, tau, rho, client_flag)?;
    let lib = load_library(lib_path)?;
    let client = make_client(&cfg.client, cfg.seed)?;
    make_dir(out)?;
    let mut manifest = ManifestBuilder::new("curate", cfg.seed);
    manifest.config(&snapshot).input(config);
    let result = curate(&cfg, client.as_ref(), &lib)?;
    write_curation_output(&result, out, &mut manifest)?;
    let kept = result.records.iter().filter(|r| r.kept()).count();
    println!(
        "curate: kept {kept} of {} candidates; dataset in {}",
        result.records.len(),
        out.display()
    );
    manifest.write(&out.join("manifest.json"))
}

pub fn cmd_featurize(
    netlists: &[PathBuf],
    labelmap_path: Option<&Path>,
    lib_path: Option<&Path>,
    out: &Path,
    jobs: usize,
) -> Result<(), CliError> {
    if netlists.is_empty() {
        return Err(CliError::user("featurize needs at least one netlist"));
    }
    let lib = load_library(lib_path)?;
    let labels = load_labelmap(labelmap_path)?;
    let flats = par_map(netlists.to_vec(), jobs, |path| {
        let text = read_file(&path)?;
        let nl = parse_netlist(&text, &lib).map_err(CliError::from)?;
        let top = default_top(&nl).to_string();
        flatten(&nl, &lib, &top, &labels).map_err(CliError::from)
    });
    let mut class_names: Vec<String> = vec![UNMAPPED_CLASS.to_string()];
    let mut ok = Vec::with_capacity(flats.len());
    for flat in flats {
        let flat = flat?;
        for gate in &flat.gates {
            class_names.push(gate.label.clone());
        }
        ok.push(flat);
    }
    class_names.sort();
    class_names.dedup();
    let graphs: Vec<CircuitGraph> = ok
        .iter()
        .map(|flat| to_graph_with_classes(flat, &class_names))
        .collect();
    save_dataset(&graphs, out)?;
    println!("featurize: wrote {} graphs to {}", graphs.len(), out.display());
    let mut manifest = ManifestBuilder::new("featurize", 0);
    for path in netlists {
        manifest.input(path);
    }
    if let Some(p) = labelmap_path {
        manifest.input(p);
    }
    manifest.output(out);
    manifest.write(&sibling_manifest(out))
}

fn train_on(
    graphs: &[CircuitGraph],
    task: TaskKind,
    tc: &TrainConfig,
    sc: &SamplerConfig,
) -> Result<(ModelParams, Vec<f64>), CliError> {
    Ok(match task {
        TaskKind::Node => train_node(graphs, tc, sc)?,
        TaskKind::Graph => train_graph(graphs, tc)?,
    })
}

pub fn cmd_train(
    dataset: &Path,
    out: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    no_norm: bool,
    task: TaskKind,
) -> Result<(), CliError> {
    let snapshot = match config {
        Some(p) => Some(read_file(p)?),
        None => None,
    };
    let (mut tc, mut sc) = parse_train_config(snapshot.as_deref().unwrap_or(""))?;
    if let Some(s) = seed {
        tc.seed = s;
        sc.seed = s;
    }
    if no_norm {
        tc.loss_norm = false;
    }
    let graphs = load_dataset(dataset)?;
    let (params, history) = train_on(&graphs, task, &tc, &sc)?;
    let classes = graphs
        .first()
        .map(|g| g.class_names.clone())
        .unwrap_or_default();
    save_checkpoint(&params, &classes, out)?;
    let final_loss = history.last().copied().unwrap_or(f64::NAN);
    println!(
        "train: {} epochs, final loss {final_loss:.6}, checkpoint {}",
        history.len(),
        out.display()
    );
    let mut manifest = ManifestBuilder::new("train", tc.seed);
    if let Some(text) = &snapshot {
        manifest.config(text);
    }
    manifest.input(dataset);
    if let Some(p) = config {
        manifest.input(p);
    }
    manifest.output(out);
    manifest.write(&sibling_manifest(out))
}

fn write_report(
    report: &EvalReport,
    boundary: Option<(&str, (f64, f64, f64))>,
    out: &Path,
    manifest: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::internal(format!("report serialization: {e}")))?;
    let json_path = out.join("report.json");
    write_file(&json_path, &format!("{json}\n"))?;
    manifest.output(&json_path);
    let mut table = report.render_table();
    if let Some((class, (p, r, f))) = boundary {
        table.push_str(&format!(
            "boundary `{class}`: precision {p:.4}  recall {r:.4}  f1 {f:.4}\n"
        ));
    }
    let text_path = out.join("report.txt");
    write_file(&text_path, &table)?;
    manifest.output(&text_path);
    print!("{table}");
    Ok(())
}

pub fn cmd_eval(
    checkpoint: &Path,
    dataset: &Path,
    out: &Path,
    target_class: Option<&str>,
    task: TaskKind,
) -> Result<(), CliError> {
    let (params, _classes) = load_checkpoint(checkpoint)?;
    let graphs = load_dataset(dataset)?;
    let report = match task {
        TaskKind::Node => eval_node(&params, &graphs)?,
        TaskKind::Graph => eval_graph(&params, &graphs)?,
    };
    let boundary = match target_class {
        Some(class) => Some((class, boundary_report_many(&params, &graphs, class)?)),
        None => None,
    };
    make_dir(out)?;
    let mut manifest = ManifestBuilder::new("eval", 0);
    manifest.input(checkpoint).input(dataset);
    write_report(&report, boundary, out, &mut manifest)?;
    manifest.write(&out.join("manifest.json"))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_pipeline(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    train_config: Option<&Path>,
    client_flag: Option<&str>,
    lib_path: Option<&Path>,
    target_class: Option<&str>,
    task: TaskKind,
) -> Result<(), CliError> {
    let (cfg, snapshot) = load_curation_config(config, seed, None, None, client_flag)?;
    let lib = load_library(lib_path)?;
    let client = make_client(&cfg.client, cfg.seed)?;
    make_dir(out)?;
    let mut manifest = ManifestBuilder::new("pipeline", cfg.seed);
    manifest.config(&snapshot).input(config);

    let curated = curate(&cfg, client.as_ref(), &lib)?;
    write_curation_output(&curated, out, &mut manifest)?;
    let kept = curated.records.iter().filter(|r| r.kept()).count();
    println!(
        "pipeline: curated {kept} of {} candidates",
        curated.records.len()
    );

    let train_snapshot = match train_config {
        Some(p) => Some(read_file(p)?),
        None => None,
    };
    let (mut tc, mut sc) = parse_train_config(train_snapshot.as_deref().unwrap_or(""))?;
    if let Some(s) = seed {
        tc.seed = s;
        sc.seed = s;
    }
    let (params, history) = train_on(&curated.graphs, task, &tc, &sc)?;
    let ckpt_path = out.join("model.ckpt");
    save_checkpoint(&params, &curated.class_names, &ckpt_path)?;
    manifest.output(&ckpt_path);
    println!(
        "pipeline: trained {} epochs, final loss {:.6}",
        history.len(),
        history.last().copied().unwrap_or(f64::NAN)
    );

    let report = match task {
        TaskKind::Node => eval_node(&params, &curated.graphs)?,
        TaskKind::Graph => eval_graph(&params, &curated.graphs)?,
    };
    let boundary = match target_class {
        Some(class) => Some((
            class,
            boundary_report_many(&params, &curated.graphs, class)?,
        )),
        None => None,
    };
    write_report(&report, boundary, out, &mut manifest)?;
    manifest.write(&out.join("manifest.json"))
}
