//! End-to-end orchestration: match, build tracks, gate, score, classify.
//! Shared by the CLI and the round-trip tests.

use crate::analysis::{aggregate, AggregateRow, TrackRecord};
use crate::classic::{classify, track_classic, SeverityMetric};
use crate::effort::{score_track, MdrMode};
use crate::gate::GateKind;
use crate::matching::{build_error_tracks, match_frame, ErrorKind, FrameMatchResult};
use crate::model::{ClassLabel, ReachParams, Scene};

/// Matching tallies for one class of one scene.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchCounts {
    pub fn merge(&mut self, other: MatchCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassResult {
    pub class_label: ClassLabel,
    pub counts: MatchCounts,
    pub records: Vec<TrackRecord>,
}

#[derive(Debug, Clone)]
pub struct SceneEvaluation {
    pub scene_id: String,
    pub class_results: Vec<ClassResult>,
}

/// Evaluates one scene for the given classes.
pub fn evaluate_scene(
    scene: &Scene,
    classes: &[ClassLabel],
    match_threshold: f64,
    gate_kind: GateKind,
    mdr_mode: MdrMode,
    params: &ReachParams,
) -> SceneEvaluation {
    let class_results = classes
        .iter()
        .map(|&class_label| {
            let per_frame: Vec<FrameMatchResult> = scene
                .frames
                .iter()
                .enumerate()
                .map(|(i, frame)| match_frame(frame, i, class_label, match_threshold))
                .collect();
            let mut counts = MatchCounts::default();
            for r in &per_frame {
                counts.merge(MatchCounts {
                    tp: r.matches.len(),
                    fp: r.fp_ids.len(),
                    fn_: r.fn_ids.len(),
                });
            }

            let tracks = build_error_tracks(scene, &per_frame);
            let records = tracks
                .iter()
                .map(|track| {
                    let effort = score_track(track, scene, gate_kind, mdr_mode, params);
                    let occ: Vec<_> = track
                        .occurrences
                        .iter()
                        .zip(&effort.frames)
                        .map(|((_, k), fe)| (*k, fe.gated))
                        .collect();
                    let classic = track_classic(&occ, scene.t_cycle, params);

                    let gated = effort.frames.iter().filter(|f| f.gated);
                    let max_brake = gated.clone().map(|f| f.a_brake).fold(0.0f64, f64::max);
                    let min_tcoll = gated
                        .clone()
                        .filter_map(|f| f.t_coll)
                        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));

                    TrackRecord {
                        scene_id: scene.scene_id.clone(),
                        kind: track.kind,
                        identity: track.identity.clone(),
                        class_label,
                        n_gated: effort.n_gated,
                        duration: effort.duration,
                        fsr: effort.fsr,
                        mdr: effort.mdr,
                        lea_peak: effort.lea_peak,
                        max_brake,
                        min_tcoll,
                        min_ttc: classic.min_ttc,
                        tet: classic.tet,
                        max_drac: classic.max_drac,
                        min_thw: classic.min_thw,
                        min_dy: classic.min_abs_dy,
                        mdr_zone: (track.kind == ErrorKind::FalseNegative)
                            .then(|| classify(SeverityMetric::Mdr, effort.mdr)),
                        fsr_zone: (track.kind == ErrorKind::FalsePositive)
                            .then(|| classify(SeverityMetric::Fsr, effort.fsr)),
                        lea_zone: classify(SeverityMetric::Lea, Some(effort.lea_peak)),
                    }
                })
                .collect();

            ClassResult {
                class_label,
                counts,
                records,
            }
        })
        .collect();

    SceneEvaluation {
        scene_id: scene.scene_id.clone(),
        class_results,
    }
}

/// Flattens per-scene results into a canonically ordered track table.
pub fn collect_records(evals: &[SceneEvaluation]) -> Vec<TrackRecord> {
    let mut records: Vec<TrackRecord> = evals
        .iter()
        .flat_map(|e| e.class_results.iter().flat_map(|c| c.records.iter().cloned()))
        .collect();
    records.sort_by(|a, b| {
        (&a.scene_id, a.class_label, a.kind, &a.identity).cmp(&(
            &b.scene_id,
            b.class_label,
            b.kind,
            &b.identity,
        ))
    });
    records
}

/// Aggregates all scenes into one row per class.
pub fn aggregate_by_class(
    evals: &[SceneEvaluation],
    classes: &[ClassLabel],
    dataset_id: &str,
    pipeline_id: &str,
) -> Vec<AggregateRow> {
    classes
        .iter()
        .map(|&class_label| {
            let mut counts = MatchCounts::default();
            let mut records = Vec::new();
            for eval in evals {
                for cr in &eval.class_results {
                    if cr.class_label == class_label {
                        counts.merge(cr.counts);
                        records.extend(cr.records.iter().cloned());
                    }
                }
            }
            aggregate(
                &records,
                dataset_id,
                pipeline_id,
                class_label,
                counts.precision(),
                counts.recall(),
            )
        })
        .collect()
}
