//! Track- and dataset-level aggregation, severity histograms, Spearman
//! rank correlation against the classical metrics, and report/CSV
//! serialization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classic::{SeverityMetric, SeverityZone};
use crate::matching::ErrorKind;
use crate::model::ClassLabel;

/// Threshold on peak braking demand that marks a track as critical.
pub const CRITICAL_BRAKE_THRESHOLD: f64 = 4.0;
/// Gate collision-time threshold that marks a track as time-critical.
pub const TIME_CRITICAL_TCOLL: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    Insufficient(usize),
    #[error("degenerate input: {0} is constant")]
    Degenerate(&'static str),
}

/// Flat per-track record carried into reports, CSV, and correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub scene_id: String,
    pub kind: ErrorKind,
    pub identity: String,
    pub class_label: ClassLabel,
    pub n_gated: usize,
    pub duration: f64,
    pub fsr: Option<f64>,
    pub mdr: Option<f64>,
    pub lea_peak: f64,
    /// Peak per-frame braking demand over gated frames.
    pub max_brake: f64,
    /// Earliest gate collision time over gated frames.
    pub min_tcoll: Option<f64>,
    pub min_ttc: Option<f64>,
    pub tet: f64,
    pub max_drac: f64,
    pub min_thw: Option<f64>,
    pub min_dy: Option<f64>,
    pub mdr_zone: Option<SeverityZone>,
    pub fsr_zone: Option<SeverityZone>,
    pub lea_zone: SeverityZone,
}

/// One row of the track-level aggregation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset_id: String,
    pub pipeline_id: String,
    pub class_label: ClassLabel,
    pub fn_tracks: usize,
    pub fp_tracks: usize,
    pub critical_fn: usize,
    pub critical_fp: usize,
    pub tc: usize,
    pub mean_mdr: f64,
    pub mean_fsr: f64,
    pub mean_lea: f64,
    pub cum_mdr: f64,
    pub cum_fsr: f64,
    pub cum_lea: f64,
    pub worst_mdr: f64,
    pub worst_fsr: f64,
    pub worst_lea: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Aggregates one (dataset, pipeline, class) cell of track records.
pub fn aggregate(
    records: &[TrackRecord],
    dataset_id: &str,
    pipeline_id: &str,
    class_label: ClassLabel,
    precision: f64,
    recall: f64,
) -> AggregateRow {
    let fns: Vec<&TrackRecord> = records
        .iter()
        .filter(|r| r.kind == ErrorKind::FalseNegative)
        .collect();
    let fps: Vec<&TrackRecord> = records
        .iter()
        .filter(|r| r.kind == ErrorKind::FalsePositive)
        .collect();

    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let max = |xs: &[f64]| xs.iter().copied().fold(0.0f64, f64::max);

    let mdrs: Vec<f64> = fns.iter().filter_map(|r| r.mdr).collect();
    let fsrs: Vec<f64> = fps.iter().filter_map(|r| r.fsr).collect();
    let leas: Vec<f64> = records.iter().map(|r| r.lea_peak).collect();

    AggregateRow {
        dataset_id: dataset_id.to_string(),
        pipeline_id: pipeline_id.to_string(),
        class_label,
        fn_tracks: fns.len(),
        fp_tracks: fps.len(),
        critical_fn: fns
            .iter()
            .filter(|r| r.mdr.unwrap_or(0.0) >= CRITICAL_BRAKE_THRESHOLD)
            .count(),
        critical_fp: fps
            .iter()
            .filter(|r| r.max_brake >= CRITICAL_BRAKE_THRESHOLD)
            .count(),
        tc: records
            .iter()
            .filter(|r| matches!(r.min_tcoll, Some(t) if t < TIME_CRITICAL_TCOLL))
            .count(),
        mean_mdr: mean(&mdrs),
        mean_fsr: mean(&fsrs),
        mean_lea: mean(&leas),
        cum_mdr: mdrs.iter().sum(),
        cum_fsr: fsrs.iter().sum(),
        cum_lea: leas.iter().sum(),
        worst_mdr: max(&mdrs),
        worst_fsr: max(&fsrs),
        worst_lea: max(&leas),
        precision,
        recall,
    }
}

/// Which track population a histogram row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramPopulation {
    #[serde(rename = "FN")]
    FalseNegatives,
    #[serde(rename = "FP")]
    FalsePositives,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub population: HistogramPopulation,
    pub metric: SeverityMetric,
    pub zone: SeverityZone,
    pub count: usize,
}

/// Buckets FN tracks by MDR zone, FP tracks by FSR zone, and all tracks by
/// LEA zone. Zone counts sum to the population size per (population,
/// metric); empty zones are emitted with zero counts.
pub fn severity_histogram(records: &[TrackRecord]) -> Vec<HistogramRow> {
    const ZONES: [SeverityZone; 4] = [
        SeverityZone::Safe,
        SeverityZone::Moderate,
        SeverityZone::Critical,
        SeverityZone::Imminent,
    ];
    let mut rows = Vec::with_capacity(12);
    let specs: [(HistogramPopulation, SeverityMetric); 3] = [
        (HistogramPopulation::FalseNegatives, SeverityMetric::Mdr),
        (HistogramPopulation::FalsePositives, SeverityMetric::Fsr),
        (HistogramPopulation::All, SeverityMetric::Lea),
    ];
    for (population, metric) in specs {
        for zone in ZONES {
            let count = records
                .iter()
                .filter(|r| match population {
                    HistogramPopulation::FalseNegatives => {
                        r.kind == ErrorKind::FalseNegative && r.mdr_zone == Some(zone)
                    }
                    HistogramPopulation::FalsePositives => {
                        r.kind == ErrorKind::FalsePositive && r.fsr_zone == Some(zone)
                    }
                    HistogramPopulation::All => r.lea_zone == zone,
                })
                .count();
            rows.push(HistogramRow {
                population,
                metric,
                zone,
                count,
            });
        }
    }
    rows
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Tied run [i, j] shares the mean of its 1-based rank positions.
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        num += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    num / (vx * vy).sqrt()
}

/// Spearman rank correlation with average ranks for ties, computed as the
/// Pearson correlation of the rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(AnalysisError::Insufficient(x.len()));
    }
    if x.iter().all(|v| *v == x[0]) {
        return Err(AnalysisError::Degenerate("x"));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(AnalysisError::Degenerate("y"));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

/// Classical-metric columns of the correlation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassicColumn {
    Ttc,
    Drac,
    Thw,
    Tet,
    Dy,
}

impl ClassicColumn {
    pub const ALL: [ClassicColumn; 5] = [
        ClassicColumn::Ttc,
        ClassicColumn::Drac,
        ClassicColumn::Thw,
        ClassicColumn::Tet,
        ClassicColumn::Dy,
    ];

    fn of(self, r: &TrackRecord) -> Option<f64> {
        match self {
            ClassicColumn::Ttc => r.min_ttc,
            ClassicColumn::Drac => Some(r.max_drac),
            ClassicColumn::Thw => r.min_thw,
            ClassicColumn::Tet => Some(r.tet),
            ClassicColumn::Dy => r.min_dy,
        }
    }
}

/// Effort-metric rows of the correlation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EffortRow {
    Mdr,
    Fsr,
    Lea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub column: ClassicColumn,
    /// Spearman rho, absent when the population was unusable.
    pub rho: Option<f64>,
    /// Machine-readable reason when absent: "insufficient" or "degenerate".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Number of tracks with both metrics defined.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTableRow {
    pub kind: ErrorKind,
    pub effort: EffortRow,
    pub entries: Vec<CorrelationEntry>,
}

/// Track-level Spearman correlations between the effort metrics and the
/// classical metrics: FN tracks contribute MDR and LEA rows, FP tracks FSR
/// and LEA rows. Only gated tracks (at least one gated frame) enter the
/// populations; a zero is a meaningful correlation value, so unusable cells
/// carry a reason instead.
pub fn correlation_table(records: &[TrackRecord]) -> Vec<CorrelationTableRow> {
    let rows: [(ErrorKind, EffortRow); 4] = [
        (ErrorKind::FalseNegative, EffortRow::Mdr),
        (ErrorKind::FalseNegative, EffortRow::Lea),
        (ErrorKind::FalsePositive, EffortRow::Fsr),
        (ErrorKind::FalsePositive, EffortRow::Lea),
    ];
    rows.into_iter()
        .map(|(kind, effort)| {
            let population: Vec<&TrackRecord> = records
                .iter()
                .filter(|r| r.kind == kind && r.n_gated > 0)
                .collect();
            let entries = ClassicColumn::ALL
                .into_iter()
                .map(|column| {
                    let pairs: Vec<(f64, f64)> = population
                        .iter()
                        .filter_map(|r| {
                            let e = match effort {
                                EffortRow::Mdr => r.mdr,
                                EffortRow::Fsr => r.fsr,
                                EffortRow::Lea => Some(r.lea_peak),
                            }?;
                            Some((e, column.of(r)?))
                        })
                        .collect();
                    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                    match spearman(&xs, &ys) {
                        Ok(rho) => CorrelationEntry {
                            column,
                            rho: Some(rho),
                            reason: None,
                            n: pairs.len(),
                        },
                        Err(e) => CorrelationEntry {
                            column,
                            rho: None,
                            reason: Some(match e {
                                AnalysisError::Degenerate(_) => "degenerate".to_string(),
                                _ => "insufficient".to_string(),
                            }),
                            n: pairs.len(),
                        },
                    }
                })
                .collect();
            CorrelationTableRow {
                kind,
                effort,
                entries,
            }
        })
        .collect()
}

/// The structured evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Run manifest, produced by the CLI layer.
    pub manifest: serde_json::Value,
    /// How correlation populations were chosen.
    pub correlation_population: String,
    pub aggregates: Vec<AggregateRow>,
    pub histogram: Vec<HistogramRow>,
    pub correlations: Vec<CorrelationTableRow>,
    pub tracks: Vec<TrackRecord>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const CORRELATION_POPULATION: &str = "all-gated-tracks";

impl Report {
    pub fn new(
        manifest: serde_json::Value,
        aggregates: Vec<AggregateRow>,
        tracks: Vec<TrackRecord>,
    ) -> Report {
        let histogram = severity_histogram(&tracks);
        let correlations = correlation_table(&tracks);
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            manifest,
            correlation_population: CORRELATION_POPULATION.to_string(),
            aggregates,
            histogram,
            correlations,
            tracks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Formats a float with six significant digits, shortest form.
pub fn fmt_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(5 - exp);
    let rounded = (v * scale).round() / scale;
    format!("{rounded}")
}

fn opt_sig6(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row per error track, ready for plotting.
pub fn tracks_csv(records: &[TrackRecord]) -> String {
    let mut out = String::from(
        "scene,kind,identity,class,n_gated,duration,fsr,mdr,lea_peak,\
         min_ttc,tet,max_drac,min_thw,min_dy,mdr_zone,fsr_zone,lea_zone\n",
    );
    for r in records {
        let cols = [
            csv_field(&r.scene_id),
            r.kind.to_string(),
            csv_field(&r.identity),
            r.class_label.to_string(),
            r.n_gated.to_string(),
            fmt_sig6(r.duration),
            opt_sig6(r.fsr),
            opt_sig6(r.mdr),
            fmt_sig6(r.lea_peak),
            opt_sig6(r.min_ttc),
            fmt_sig6(r.tet),
            fmt_sig6(r.max_drac),
            opt_sig6(r.min_thw),
            opt_sig6(r.min_dy),
            r.mdr_zone.map(|z| z.to_string()).unwrap_or_default(),
            r.fsr_zone.map(|z| z.to_string()).unwrap_or_default(),
            r.lea_zone.to_string(),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(kind: ErrorKind, identity: &str) -> TrackRecord {
        TrackRecord {
            scene_id: "s".into(),
            kind,
            identity: identity.into(),
            class_label: ClassLabel::Car,
            n_gated: 1,
            duration: 0.5,
            fsr: (kind == ErrorKind::FalsePositive).then_some(0.0),
            mdr: (kind == ErrorKind::FalseNegative).then_some(0.0),
            lea_peak: 0.0,
            max_brake: 0.0,
            min_tcoll: Some(3.0),
            min_ttc: Some(5.0),
            tet: 0.0,
            max_drac: 0.0,
            min_thw: Some(2.0),
            min_dy: Some(0.0),
            mdr_zone: (kind == ErrorKind::FalseNegative)
                .then_some(crate::classic::SeverityZone::Safe),
            fsr_zone: (kind == ErrorKind::FalsePositive)
                .then_some(crate::classic::SeverityZone::Safe),
            lea_zone: crate::classic::SeverityZone::Safe,
        }
    }

    fn fn_record(identity: &str, mdr: f64) -> TrackRecord {
        let mut r = record(ErrorKind::FalseNegative, identity);
        r.mdr = Some(mdr);
        r.max_brake = mdr;
        r.mdr_zone = Some(crate::classic::classify(SeverityMetric::Mdr, Some(mdr)));
        r
    }

    #[test]
    fn aggregate_two_fn_tracks() {
        let rows = vec![fn_record("a", 3.0), fn_record("b", 5.0)];
        let agg = aggregate(&rows, "d", "p", ClassLabel::Car, 1.0, 1.0);
        assert_eq!(agg.fn_tracks, 2);
        assert_eq!(agg.critical_fn, 1);
        assert_eq!(agg.mean_mdr, 4.0);
        assert_eq!(agg.cum_mdr, 8.0);
        assert_eq!(agg.worst_mdr, 5.0);
    }

    #[test]
    fn aggregate_singleton_fp() {
        let mut r = record(ErrorKind::FalsePositive, "p");
        r.fsr = Some(2.0);
        let agg = aggregate(&[r], "d", "p", ClassLabel::Car, 1.0, 1.0);
        assert_eq!(agg.fp_tracks, 1);
        assert_eq!(agg.mean_fsr, 2.0);
        assert_eq!(agg.cum_fsr, 2.0);
        assert_eq!(agg.worst_fsr, 2.0);
    }

    #[test]
    fn aggregate_empty_is_zero_row() {
        let agg = aggregate(&[], "d", "p", ClassLabel::Car, 1.0, 1.0);
        assert_eq!(agg.fn_tracks + agg.fp_tracks + agg.critical_fn + agg.tc, 0);
        assert_eq!(agg.cum_mdr + agg.cum_fsr + agg.cum_lea, 0.0);
        assert_eq!(agg.worst_mdr + agg.worst_fsr + agg.worst_lea, 0.0);
    }

    #[test]
    fn histogram_buckets_and_conserves() {
        let rows = vec![fn_record("a", 1.0), fn_record("b", 3.0), fn_record("c", 7.0)];
        let hist = severity_histogram(&rows);
        let count = |zone: SeverityZone| {
            hist.iter()
                .find(|h| {
                    h.population == HistogramPopulation::FalseNegatives
                        && h.metric == SeverityMetric::Mdr
                        && h.zone == zone
                })
                .unwrap()
                .count
        };
        assert_eq!(count(SeverityZone::Safe), 1);
        assert_eq!(count(SeverityZone::Moderate), 1);
        assert_eq!(count(SeverityZone::Critical), 0);
        assert_eq!(count(SeverityZone::Imminent), 1);
        let total: usize = hist
            .iter()
            .filter(|h| h.population == HistogramPopulation::FalseNegatives)
            .map(|h| h.count)
            .sum();
        assert_eq!(total, rows.len());

        assert!(severity_histogram(&[]).iter().all(|h| h.count == 0));
    }

    #[test]
    fn spearman_identity_and_example() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        let rho = spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert!((rho - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn spearman_tied_sample_matches_frozen_oracle() {
        // Average-rank oracle for x = [1,2,2,3], y = [1,2,3,4]:
        // ranks x = [1, 2.5, 2.5, 4] -> rho = 3/sqrt(10).
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((rho - 3.0 / 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert_eq!(
            spearman(&[1.0], &[1.0, 2.0]).unwrap_err(),
            AnalysisError::LengthMismatch(1, 2)
        );
        assert_eq!(spearman(&[1.0], &[1.0]).unwrap_err(), AnalysisError::Insufficient(1));
        assert_eq!(
            spearman(&[2.0, 2.0], &[1.0, 3.0]).unwrap_err(),
            AnalysisError::Degenerate("x")
        );
    }

    #[test]
    fn correlation_table_monotone_fixture() {
        // FSR and DRAC both rise as the phantom gets closer.
        let mut rows = Vec::new();
        for (i, gap) in [10.0f64, 15.0, 20.0, 25.0, 30.0].iter().enumerate() {
            let mut r = record(ErrorKind::FalsePositive, &format!("p{i}"));
            r.fsr = Some(100.0 / gap);
            r.max_drac = 50.0 / gap;
            rows.push(r);
        }
        let table = correlation_table(&rows);
        let fsr_row = table
            .iter()
            .find(|r| r.kind == ErrorKind::FalsePositive && r.effort == EffortRow::Fsr)
            .unwrap();
        let drac = fsr_row
            .entries
            .iter()
            .find(|e| e.column == ClassicColumn::Drac)
            .unwrap();
        assert_eq!(drac.rho, Some(1.0));
    }

    #[test]
    fn correlation_table_degenerate_and_insufficient() {
        let mut a = record(ErrorKind::FalsePositive, "a");
        a.fsr = Some(1.0);
        let mut b = record(ErrorKind::FalsePositive, "b");
        b.fsr = Some(2.0);
        // TET constant in both tracks -> degenerate.
        let table = correlation_table(&[a.clone(), b]);
        let fsr_row = table
            .iter()
            .find(|r| r.kind == ErrorKind::FalsePositive && r.effort == EffortRow::Fsr)
            .unwrap();
        let tet = fsr_row.entries.iter().find(|e| e.column == ClassicColumn::Tet).unwrap();
        assert_eq!(tet.reason.as_deref(), Some("degenerate"));

        let table = correlation_table(&[a]);
        let fsr_row = table
            .iter()
            .find(|r| r.kind == ErrorKind::FalsePositive && r.effort == EffortRow::Fsr)
            .unwrap();
        assert!(fsr_row
            .entries
            .iter()
            .all(|e| e.reason.as_deref() == Some("insufficient")));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(2.2727272727), "2.27273");
        assert_eq!(fmt_sig6(123456.789), "123457");
        assert_eq!(fmt_sig6(-0.000123456789), "-0.000123457");
    }

    proptest! {
        #[test]
        fn spearman_properties(
            xs in proptest::collection::vec(-100.0..100.0f64, 3..40),
        ) {
            prop_assume!(!xs.iter().all(|v| *v == xs[0]));
            let ys: Vec<f64> = xs.iter().map(|v| -v).collect();
            // Self-correlation and reverse-monotone.
            prop_assert!((spearman(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((spearman(&xs, &ys).unwrap() + 1.0).abs() < 1e-12);
            // Symmetry.
            let zs: Vec<f64> = xs.iter().map(|v| v * 0.5 + 3.0).collect();
            prop_assert!(
                (spearman(&xs, &zs).unwrap() - spearman(&zs, &xs).unwrap()).abs() < 1e-12
            );
            // Invariance under a strictly increasing transform.
            let ws: Vec<f64> = xs.iter().map(|v| v.exp().min(1e300)).collect();
            if !ws.iter().all(|v| *v == ws[0]) {
                prop_assert!(
                    (spearman(&xs, &zs).unwrap() - spearman(&ws, &zs).unwrap()).abs() < 1e-12
                );
            }
        }

        #[test]
        fn aggregate_totals_consistent(
            mdrs in proptest::collection::vec(0.0..10.0f64, 0..20),
        ) {
            let rows: Vec<TrackRecord> = mdrs
                .iter()
                .enumerate()
                .map(|(i, m)| fn_record(&format!("t{i}"), *m))
                .collect();
            let agg = aggregate(&rows, "d", "p", ClassLabel::Car, 1.0, 1.0);
            let sum: f64 = mdrs.iter().sum();
            let max = mdrs.iter().copied().fold(0.0f64, f64::max);
            prop_assert!((agg.cum_mdr - sum).abs() <= 1e-9);
            prop_assert_eq!(agg.worst_mdr, max);
            prop_assert!(agg.worst_mdr >= agg.mean_mdr);
            if !rows.is_empty() {
                prop_assert!(agg.cum_mdr >= agg.worst_mdr);
            }
        }
    }
}
