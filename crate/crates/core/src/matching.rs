//! Per-frame optimal assignment between ground truth and detections,
//! FP/FN labelling, and aggregation of per-frame errors into
//! identity-keyed error tracks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{project_to_ego, ClassLabel, Frame, RelativeKinematics, Scene};

/// Kind of perception error carried by a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    #[serde(rename = "FN")]
    FalseNegative,
    #[serde(rename = "FP")]
    FalsePositive,
}

impl std::fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorKind::FalseNegative => write!(f, "FN"),
            ErrorKind::FalsePositive => write!(f, "FP"),
        }
    }
}

/// One matched ground-truth/detection pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchPair {
    pub gt_id: String,
    pub det_id: String,
    pub distance: f64,
}

/// Assignment result for one frame and one class.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatchResult {
    pub frame_index: usize,
    pub matches: Vec<MatchPair>,
    pub fn_ids: Vec<String>,
    pub fp_ids: Vec<String>,
}

/// One FN or FP identity with its per-frame occurrences.
#[derive(Debug, Clone)]
pub struct ErrorTrack {
    pub kind: ErrorKind,
    pub identity: String,
    pub class_label: ClassLabel,
    pub scene_id: String,
    /// `(frame_index, kinematics)` pairs, frame indices strictly increasing.
    pub occurrences: Vec<(usize, RelativeKinematics)>,
}

/// Cost assigned to gated-out pairs. Large enough to dominate any sum of
/// admissible centre distances, so the solver first maximizes the number of
/// admissible matches and then minimizes their total distance.
const FORBIDDEN: f64 = 1.0e9;

/// Minimum-cost assignment on a square cost matrix (Jonker-Volgenant style
/// potentials, O(n^3)). Returns the column assigned to each row.
fn hungarian_min_assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // row matched to column j (1-based, 0 = free)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Matches ground truth against detections of one class in one frame.
///
/// Pairs farther apart than `threshold` are excluded from the assignment
/// problem entirely, so no emitted match can exceed the threshold. Among
/// maximum-cardinality admissible assignments the total centre distance is
/// minimal. Inputs are canonicalized by id, which makes the result
/// independent of input ordering; cost ties between equal-distance
/// assignments are settled toward lexicographically smaller
/// `(gt_id, det_id)` pairs.
pub fn match_frame(
    frame: &Frame,
    frame_index: usize,
    class: ClassLabel,
    threshold: f64,
) -> FrameMatchResult {
    let mut gts: Vec<&crate::model::AgentState> = frame
        .gt_objects
        .iter()
        .filter(|o| o.class_label == class)
        .collect();
    let mut dets: Vec<&crate::model::AgentState> = frame
        .detections
        .iter()
        .filter(|o| o.class_label == class)
        .collect();
    gts.sort_by(|a, b| a.id.cmp(&b.id));
    dets.sort_by(|a, b| a.id.cmp(&b.id));

    let n_gt = gts.len();
    let n_det = dets.len();
    let n = n_gt.max(n_det);

    let dist = |gi: usize, dj: usize| -> f64 { (gts[gi].position - dets[dj].position).norm() };

    let mut assignment: Vec<Option<usize>> = vec![None; n_gt];
    if n > 0 && n_gt > 0 && n_det > 0 {
        let mut cost = vec![vec![0.0f64; n]; n];
        for (i, row) in cost.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = if i < n_gt && j < n_det {
                    let d = dist(i, j);
                    if d <= threshold {
                        d
                    } else {
                        FORBIDDEN
                    }
                } else {
                    0.0 // dummy row/column: stays unmatched
                };
            }
        }
        let row_to_col = hungarian_min_assign(&cost);
        for (i, assigned) in assignment.iter_mut().enumerate() {
            let j = row_to_col[i];
            if j < n_det && dist(i, j) <= threshold {
                *assigned = Some(j);
            }
        }

        // Cost-preserving lexicographic polish: when swapping the detections
        // of two matched pairs keeps both pairs admissible and the total
        // distance identical, prefer the swap that orders det ids with the
        // gt ids.
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n_gt {
                let Some(da) = assignment[a] else { continue };
                for b in (a + 1)..n_gt {
                    let Some(db) = assignment[b] else { continue };
                    if dets[db].id < dets[da].id
                        && dist(a, db) <= threshold
                        && dist(b, da) <= threshold
                        && dist(a, db) + dist(b, da) == dist(a, da) + dist(b, db)
                    {
                        assignment[a] = Some(db);
                        assignment[b] = Some(da);
                        changed = true;
                    }
                }
            }
        }
    }

    let mut matches = Vec::new();
    let mut matched_det = vec![false; n_det];
    let mut fn_ids = Vec::new();
    for (i, gt) in gts.iter().enumerate() {
        match assignment[i] {
            Some(j) => {
                matched_det[j] = true;
                matches.push(MatchPair {
                    gt_id: gt.id.clone(),
                    det_id: dets[j].id.clone(),
                    distance: dist(i, j),
                });
            }
            None => fn_ids.push(gt.id.clone()),
        }
    }
    let fp_ids = dets
        .iter()
        .enumerate()
        .filter(|(j, _)| !matched_det[*j])
        .map(|(_, d)| d.id.clone())
        .collect();

    matches.sort_by(|a, b| (&a.gt_id, &a.det_id).cmp(&(&b.gt_id, &b.det_id)));
    FrameMatchResult {
        frame_index,
        matches,
        fn_ids,
        fp_ids,
    }
}

/// Groups per-frame errors into identity-keyed tracks.
///
/// FN occurrences are grouped by ground-truth id (an identity missed again
/// after a gap stays one track); FP occurrences are grouped by detection id,
/// so a phantom re-detected under a new id becomes a new track. Tracks come
/// out sorted by `(kind, identity)` and each occurrence carries the
/// ego-frame projection for its frame.
pub fn build_error_tracks(scene: &Scene, per_frame: &[FrameMatchResult]) -> Vec<ErrorTrack> {
    let mut map: BTreeMap<(ErrorKind, String), (ClassLabel, Vec<(usize, RelativeKinematics)>)> =
        BTreeMap::new();

    for result in per_frame {
        let frame = &scene.frames[result.frame_index];
        for id in &result.fn_ids {
            let obj = frame
                .gt_by_id(id)
                .expect("fn id refers to a gt object in its frame");
            let k = project_to_ego(&frame.ego, obj);
            map.entry((ErrorKind::FalseNegative, id.clone()))
                .or_insert_with(|| (obj.class_label, Vec::new()))
                .1
                .push((result.frame_index, k));
        }
        for id in &result.fp_ids {
            let obj = frame
                .det_by_id(id)
                .expect("fp id refers to a detection in its frame");
            let k = project_to_ego(&frame.ego, obj);
            map.entry((ErrorKind::FalsePositive, id.clone()))
                .or_insert_with(|| (obj.class_label, Vec::new()))
                .1
                .push((result.frame_index, k));
        }
    }

    map.into_iter()
        .map(|((kind, identity), (class_label, mut occurrences))| {
            occurrences.sort_by_key(|(idx, _)| *idx);
            ErrorTrack {
                kind,
                identity,
                class_label,
                scene_id: scene.scene_id.clone(),
                occurrences,
            }
        })
        .collect()
}

/// Detection precision and recall over a set of frame results.
/// Empty denominators count as perfect (0/0 := 1).
pub fn precision_recall(per_frame: &[FrameMatchResult]) -> (f64, f64) {
    let tp: usize = per_frame.iter().map(|r| r.matches.len()).sum();
    let fp: usize = per_frame.iter().map(|r| r.fp_ids.len()).sum();
    let fneg: usize = per_frame.iter().map(|r| r.fn_ids.len()).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    (ratio(tp, tp + fp), ratio(tp, tp + fneg))
}
