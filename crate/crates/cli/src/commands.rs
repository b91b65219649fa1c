//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use avert_core::analysis::{
    correlation_table, tracks_csv, CorrelationTableRow, Report, TrackRecord,
    REPORT_SCHEMA_VERSION,
};
use avert_core::model::{load_scene, scene_to_jsonl, ClassLabel, ReachParams, Scene};
use avert_core::pipeline::{aggregate_by_class, collect_records, evaluate_scene};
use avert_core::synth::{generate, ScenarioTemplate};

use crate::args::{Cli, Command, CorrelateArgs, EvaluateArgs, SynthArgs};
use crate::manifest::{digest_bytes, InputDigest, RunManifest};

/// Command failure with the exit-code class it maps to: 2 for input
/// problems, 3 for internal invariant violations.
pub enum CmdError {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Input(_) => 2,
            CmdError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Input(e) => write!(f, "{e:#}"),
            CmdError::Internal(e) => write!(f, "internal error: {e:#}"),
        }
    }
}

fn input_err<E: Into<anyhow::Error>>(e: E) -> CmdError {
    CmdError::Input(e.into())
}

pub fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn load_params(config: Option<&Path>) -> Result<ReachParams, CmdError> {
    let mut params = ReachParams::default();
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(input_err)?;
        params
            .apply_config(&text)
            .with_context(|| format!("config {}", path.display()))
            .map_err(input_err)?;
    }
    Ok(params)
}

fn parse_classes(spec: &str) -> Result<Vec<ClassLabel>, CmdError> {
    let mut classes = Vec::new();
    for raw in spec.split(',') {
        let name = raw.trim();
        if name.is_empty() {
            continue;
        }
        let class = ClassLabel::parse_strict(name)
            .ok_or_else(|| input_err(anyhow!("unknown class `{name}` in --classes")))?;
        if !classes.contains(&class) {
            classes.push(class);
        }
    }
    if classes.is_empty() {
        return Err(input_err(anyhow!("--classes selected no classes")));
    }
    Ok(classes)
}

/// Expands files and directories into a sorted list of scene files.
fn expand_scene_paths(paths: &[PathBuf], failures: &mut Vec<String>) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            match fs::read_dir(path) {
                Ok(entries) => {
                    let mut found: Vec<PathBuf> = entries
                        .filter_map(|e| e.ok().map(|e| e.path()))
                        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
                        .collect();
                    found.sort();
                    files.extend(found);
                }
                Err(e) => failures.push(format!("{}: {e}", path.display())),
            }
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            failures.push(format!("{}: not a file or directory", path.display()));
        }
    }
    files
}

fn write_output(path: &Path, contents: &str) -> Result<(), CmdError> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input_err)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CmdError> {
    let params = load_params(args.config.as_deref())?;
    let classes = parse_classes(&args.classes)?;
    if args.jobs == 0 {
        return Err(input_err(anyhow!("--jobs must be at least 1")));
    }

    let mut failures: Vec<String> = Vec::new();
    let files = expand_scene_paths(&args.scenes, &mut failures);
    if files.is_empty() && failures.is_empty() {
        failures.push("no scenes found under the given paths".to_string());
    }

    // Load and validate everything first, reporting every failure.
    let mut scenes: Vec<(PathBuf, Scene)> = Vec::new();
    let mut inputs: Vec<InputDigest> = Vec::new();
    for path in &files {
        match fs::read(path) {
            Ok(bytes) => {
                inputs.push(InputDigest {
                    path: path.display().to_string(),
                    sha256: digest_bytes(&bytes),
                });
                match load_scene(path) {
                    Ok(scene) => scenes.push((path.clone(), scene)),
                    Err(e) => failures.push(format!("{}: {e}", path.display())),
                }
            }
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        return Err(input_err(anyhow!("{} input error(s)", failures.len())));
    }
    inputs.sort_by(|a, b| a.path.cmp(&b.path));

    let gate = args.gate.into();
    let mdr_mode = args.mdr_mode.into();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building worker pool")
        .map_err(CmdError::Internal)?;
    let evals: Vec<_> = pool.install(|| {
        scenes
            .par_iter()
            .map(|(_, scene)| {
                evaluate_scene(scene, &classes, args.match_threshold, gate, mdr_mode, &params)
            })
            .collect()
    });

    let records = collect_records(&evals);
    let aggregates = aggregate_by_class(&evals, &classes, &args.dataset_id, &args.pipeline_id);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        gate_kind: gate.to_string(),
        mdr_mode: mdr_mode.to_string(),
        match_threshold: args.match_threshold,
        classes: classes.iter().map(|c| c.to_string()).collect(),
        dataset_id: args.dataset_id.clone(),
        pipeline_id: args.pipeline_id.clone(),
        params: params.clone(),
        inputs,
    };
    let manifest_value = serde_json::to_value(&manifest)
        .context("serializing manifest")
        .map_err(CmdError::Internal)?;

    let report = Report::new(manifest_value, aggregates, records);
    write_output(&args.out, &report.to_json())?;
    write_output(&args.csv, &tracks_csv(&report.tracks))?;
    println!(
        "evaluated {} scene(s), {} track(s) -> {}, {}",
        scenes.len(),
        report.tracks.len(),
        args.out.display(),
        args.csv.display()
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GateCorrelations {
    gate: String,
    correlations: Vec<CorrelationTableRow>,
    n_tracks: usize,
}

#[derive(Serialize, Deserialize)]
struct CorrelationFile {
    schema_version: u32,
    gates: Vec<GateCorrelations>,
}

fn cmd_correlate(args: CorrelateArgs) -> Result<(), CmdError> {
    let mut by_gate: BTreeMap<String, Vec<TrackRecord>> = BTreeMap::new();
    for path in &args.reports {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(input_err)?;
        let report: Report = serde_json::from_str(&text)
            .with_context(|| format!("parsing report {}", path.display()))
            .map_err(input_err)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(input_err(anyhow!(
                "{}: schema version {} does not match {}",
                path.display(),
                report.schema_version,
                REPORT_SCHEMA_VERSION
            )));
        }
        let manifest: RunManifest = serde_json::from_value(report.manifest.clone())
            .with_context(|| format!("{}: manifest", path.display()))
            .map_err(input_err)?;
        by_gate
            .entry(manifest.gate_kind)
            .or_default()
            .extend(report.tracks);
    }

    let gates: Vec<GateCorrelations> = by_gate
        .into_iter()
        .map(|(gate, tracks)| GateCorrelations {
            gate,
            correlations: correlation_table(&tracks),
            n_tracks: tracks.len(),
        })
        .collect();
    let out = CorrelationFile {
        schema_version: REPORT_SCHEMA_VERSION,
        gates,
    };
    let mut text = serde_json::to_string_pretty(&out)
        .context("serializing correlations")
        .map_err(CmdError::Internal)?;
    text.push('\n');
    write_output(&args.out, &text)?;
    println!("correlations -> {}", args.out.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CmdError> {
    let params = load_params(args.config.as_deref())?;
    let mut template = ScenarioTemplate::defaults(args.template.into());
    if let Some(v) = args.frames {
        template.n_frames = v;
    }
    if let Some(v) = args.gap {
        template.gap = v;
    }
    if let Some(v) = args.ego_speed {
        template.ego_speed = v;
    }
    if let Some(v) = args.obj_speed {
        template.obj_speed = v;
    }
    if let Some(v) = args.obj_accel {
        template.obj_accel = v;
    }
    if let Some(v) = args.lateral_offset {
        template.lateral_offset = v;
    }
    if let Some(v) = args.lateral_rate {
        template.lateral_rate = v;
    }
    if let Some(v) = args.t_cycle {
        template.t_cycle = v;
    }
    if let Some(v) = args.scene_id {
        template.scene_id = v;
    }

    let (scene, sidecar) = generate(&template, &params).map_err(input_err)?;
    write_output(&args.out, &scene_to_jsonl(&scene))?;
    write_output(&args.sidecar, &sidecar.to_json())?;
    println!(
        "synthesized {} ({} frames) -> {}, {}",
        scene.scene_id,
        scene.frames.len(),
        args.out.display(),
        args.sidecar.display()
    );
    Ok(())
}
