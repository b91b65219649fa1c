//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use avert_core::effort::MdrMode;
use avert_core::gate::GateKind;
use avert_core::synth::TemplateKind;

#[derive(Parser)]
#[command(
    name = "avert",
    version,
    about = "Scores 3D-perception errors by the collision-avoidance effort they would impose"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate scene files: match, gate, score, classify, and report.
    Evaluate(EvaluateArgs),
    /// Recompute correlation tables from evaluation reports.
    Correlate(CorrelateArgs),
    /// Generate a synthetic scene plus an expected-metrics sidecar.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    Rsb,
    Sat,
}

impl From<GateArg> for GateKind {
    fn from(g: GateArg) -> GateKind {
        match g {
            GateArg::Rsb => GateKind::Rsb,
            GateArg::Sat => GateKind::Sat,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MdrModeArg {
    Consistent,
    AsPrinted,
}

impl From<MdrModeArg> for MdrMode {
    fn from(m: MdrModeArg) -> MdrMode {
        match m {
            MdrModeArg::Consistent => MdrMode::Consistent,
            MdrModeArg::AsPrinted => MdrMode::AsPrinted,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemplateArg {
    LeadMiss,
    PhantomStatic,
    CutInConverge,
    AdjacentPass,
}

impl From<TemplateArg> for TemplateKind {
    fn from(t: TemplateArg) -> TemplateKind {
        match t {
            TemplateArg::LeadMiss => TemplateKind::LeadMiss,
            TemplateArg::PhantomStatic => TemplateKind::PhantomStatic,
            TemplateArg::CutInConverge => TemplateKind::CutInConverge,
            TemplateArg::AdjacentPass => TemplateKind::AdjacentPass,
        }
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Scene files or directories containing `.jsonl` scene files.
    #[arg(long = "scenes", num_args = 1.., required = true)]
    pub scenes: Vec<PathBuf>,

    /// Collision gate.
    #[arg(long, value_enum, default_value_t = GateArg::Rsb)]
    pub gate: GateArg,

    /// Resolution of the missed-object braking equation.
    #[arg(long = "mdr-mode", value_enum, default_value_t = MdrModeArg::Consistent)]
    pub mdr_mode: MdrModeArg,

    /// Comma-separated class filter (car, truck, other).
    #[arg(long, default_value = "car,truck")]
    pub classes: String,

    /// Parameter overrides as flat `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Report output path.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,

    /// Per-track CSV output path.
    #[arg(long, default_value = "tracks.csv")]
    pub csv: PathBuf,

    /// Number of scenes evaluated concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Centre-distance matching threshold in metres.
    #[arg(long = "match-threshold", default_value_t = 2.0)]
    pub match_threshold: f64,

    /// Dataset label for the aggregate rows.
    #[arg(long = "dataset-id", default_value = "dataset")]
    pub dataset_id: String,

    /// Pipeline label for the aggregate rows.
    #[arg(long = "pipeline-id", default_value = "pipeline")]
    pub pipeline_id: String,
}

#[derive(Args)]
pub struct CorrelateArgs {
    /// Report files produced by `evaluate`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,

    /// Correlation table output path.
    #[arg(long, default_value = "correlations.json")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Scenario template.
    #[arg(long, value_enum)]
    pub template: TemplateArg,

    /// Number of frames.
    #[arg(long)]
    pub frames: Option<usize>,

    /// Initial bumper-to-bumper gap in metres.
    #[arg(long, allow_negative_numbers = true)]
    pub gap: Option<f64>,

    #[arg(long = "ego-speed", allow_negative_numbers = true)]
    pub ego_speed: Option<f64>,

    #[arg(long = "obj-speed", allow_negative_numbers = true)]
    pub obj_speed: Option<f64>,

    #[arg(long = "obj-accel", allow_negative_numbers = true)]
    pub obj_accel: Option<f64>,

    #[arg(long = "lateral-offset", allow_negative_numbers = true)]
    pub lateral_offset: Option<f64>,

    #[arg(long = "lateral-rate", allow_negative_numbers = true)]
    pub lateral_rate: Option<f64>,

    #[arg(long = "t-cycle", allow_negative_numbers = true)]
    pub t_cycle: Option<f64>,

    #[arg(long = "scene-id")]
    pub scene_id: Option<String>,

    /// Parameter overrides as flat `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Scene output path.
    #[arg(long, default_value = "scene.jsonl")]
    pub out: PathBuf,

    /// Expected-metrics sidecar output path.
    #[arg(long, default_value = "expected.json")]
    pub sidecar: PathBuf,
}
