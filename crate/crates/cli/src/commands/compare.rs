use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::Vector3;
use pac_core::oracle::{compare_models, oracle_truth, sample_centerline, CurveSample, GroundTruth, ModelComparison};
use rayon::prelude::*;
use serde::Serialize;

use super::{slug, with_workers};
use crate::error::{CliError, CliResult};
use crate::files::{CompareFile, Robot, TruthSpec};
use crate::format::{fmt, fmt_opt, write_text, CsvOut};
use crate::svg::{side_view, Plot, Series, Style};

pub const MARKER_COLUMNS: [&str; 5] = ["segment", "s", "x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub scenario: String,
    pub pac_tip_error: f64,
    pub pcc_tip_error: f64,
    pub ratio: f64,
    pub pac_orientation: Option<f64>,
    pub pcc_orientation: Option<f64>,
    pub pac_frobenius: Option<f64>,
    pub pcc_frobenius: Option<f64>,
    pub pac_marker_mean: f64,
    pub pcc_marker_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSummary {
    pub rows: Vec<CompareRow>,
    pub failures: Vec<(String, String)>,
    pub mean_ratio: f64,
}

/// Reads a marker file with header `segment,s,x,y,z` (1-based segments, metres).
pub fn read_markers(path: &Path, segments: usize) -> CliResult<Vec<CurveSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().collect::<Vec<_>>() != MARKER_COLUMNS {
        return Err(CliError::invalid(format!(
            "{}: expected columns {}, found {}",
            path.display(),
            MARKER_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| CliError::invalid(format!("{}:{line}: {e}", path.display())))?;
        let num = |i: usize| -> CliResult<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| CliError::invalid(format!("{}:{line}: column {}: {e}", path.display(), MARKER_COLUMNS[i])))
        };
        let segment = record[0]
            .parse::<usize>()
            .map_err(|e| CliError::invalid(format!("{}:{line}: column segment: {e}", path.display())))?;
        if segment == 0 || segment > segments {
            return Err(CliError::invalid(format!(
                "{}:{line}: segment {segment} outside 1..={segments}",
                path.display()
            )));
        }
        let s = num(1)?;
        if !(0.0..=1.0).contains(&s) {
            return Err(CliError::invalid(format!(
                "{}:{line}: s = {s} outside [0, 1]",
                path.display()
            )));
        }
        out.push(CurveSample::new(
            segment - 1,
            s,
            Vector3::new(num(2)?, num(3)?, num(4)?),
        ));
    }
    if out.is_empty() {
        return Err(CliError::invalid(format!("{}: no markers", path.display())));
    }
    Ok(out)
}

/// Writes samples in the marker format read by [`read_markers`].
pub fn write_markers(path: &Path, samples: &[CurveSample]) -> CliResult<()> {
    let mut csv = CsvOut::create(path, &MARKER_COLUMNS)?;
    for c in samples {
        csv.row([
            (c.segment + 1).to_string(),
            fmt(c.s),
            fmt(c.position.x),
            fmt(c.position.y),
            fmt(c.position.z),
        ])?;
    }
    Ok(())
}

struct Outcome {
    name: String,
    result: CliResult<(ModelComparison, Vec<CurveSample>, bool)>,
}

/// Runs every scenario of the set under both models against the configured
/// ground truth. Writes `comparison.csv` and one overlay SVG per scenario.
/// Scenarios that fail are listed in the CSV and reported as a solver failure
/// after all others have been written.
pub fn run_compare(
    robot: &Robot,
    set: &CompareFile,
    set_dir: &Path,
    markers_override: Option<&Path>,
    out: &Path,
    workers: Option<usize>,
) -> CliResult<CompareSummary> {
    if set.scenarios.is_empty() {
        return Err(CliError::invalid("comparison set has no scenarios"));
    }
    let scenarios = set
        .scenarios
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut sc = s.resolve(robot, None)?;
            if s.name.is_none() {
                sc.name = format!("scenario_{}", k + 1);
            }
            Ok(sc)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let markers_path: Option<PathBuf> = match (markers_override, &set.ground_truth) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, TruthSpec::Markers(p)) => Some(set_dir.join(p)),
        (None, TruthSpec::Oracle { .. }) => None,
    };
    let markers = markers_path
        .as_deref()
        .map(|p| read_markers(p, robot.params.len()))
        .transpose()?;
    let elements = match set.ground_truth {
        TruthSpec::Oracle { elements_per_segment } => elements_per_segment,
        TruthSpec::Markers(_) => 0,
    };
    info!("comparing {} scenario(s)", scenarios.len());

    let outcomes: Vec<Outcome> = with_workers(workers, || {
        scenarios
            .par_iter()
            .map(|sc| {
                let result = (|| {
                    let (truth, curve, is_rod) = match &markers {
                        Some(m) => (GroundTruth::Markers(m.clone()), m.clone(), false),
                        None => {
                            let rod = oracle_truth(&sc.problem, elements)?;
                            let samples = rod.samples();
                            (GroundTruth::Rod(rod), samples, true)
                        }
                    };
                    let cmp = compare_models(&sc.problem, &truth, &sc.options)?;
                    Ok((cmp, curve, is_rod))
                })();
                Outcome {
                    name: sc.name.clone(),
                    result,
                }
            })
            .collect()
    })?;

    let mut csv = CsvOut::create(
        &out.join("comparison.csv"),
        &[
            "scenario",
            "pac_tip_error",
            "pcc_tip_error",
            "ratio",
            "pac_orientation_deg",
            "pcc_orientation_deg",
            "pac_frobenius",
            "pcc_frobenius",
            "pac_marker_mean",
            "pcc_marker_mean",
            "status",
        ],
    )?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (k, (o, sc)) in outcomes.into_iter().zip(&scenarios).enumerate() {
        match o.result {
            Ok((cmp, curve, is_rod)) => {
                let row = CompareRow {
                    scenario: o.name.clone(),
                    pac_tip_error: cmp.pac.tip_position,
                    pcc_tip_error: cmp.pcc.tip_position,
                    ratio: cmp.tip_ratio(),
                    pac_orientation: cmp.pac.tip_orientation_geodesic.map(f64::to_degrees),
                    pcc_orientation: cmp.pcc.tip_orientation_geodesic.map(f64::to_degrees),
                    pac_frobenius: cmp.pac.tip_orientation_frobenius,
                    pcc_frobenius: cmp.pcc.tip_orientation_frobenius,
                    pac_marker_mean: cmp.pac.mean_marker_error(),
                    pcc_marker_mean: cmp.pcc.mean_marker_error(),
                };
                csv.row([
                    row.scenario.clone(),
                    fmt(row.pac_tip_error),
                    fmt(row.pcc_tip_error),
                    fmt(row.ratio),
                    fmt_opt(row.pac_orientation),
                    fmt_opt(row.pcc_orientation),
                    fmt_opt(row.pac_frobenius),
                    fmt_opt(row.pcc_frobenius),
                    fmt(row.pac_marker_mean),
                    fmt(row.pcc_marker_mean),
                    "ok".into(),
                ])?;
                let stem = format!("{:02}_{}", k + 1, slug(&o.name));
                if is_rod {
                    write_markers(&out.join(format!("reference_{stem}.csv")), &curve)?;
                }
                let points: Vec<[f64; 3]> = curve.iter().map(|c| c.position.into()).collect();
                let svg = overlay(&o.name, &points, is_rod, &cmp, sc)?;
                write_text(&out.join(format!("compare_{stem}.svg")), &svg)?;
                rows.push(row);
            }
            Err(e) => {
                warn!("scenario '{}' failed: {e}", o.name);
                let mut fields = vec![o.name.clone()];
                fields.extend(std::iter::repeat_n(String::new(), 9));
                fields.push(format!("error: {e}"));
                csv.row(fields)?;
                failures.push((o.name, e.to_string()));
            }
        }
    }
    let mean_ratio = if rows.is_empty() {
        f64::NAN
    } else {
        rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64
    };
    let summary = CompareSummary {
        rows,
        failures,
        mean_ratio,
    };
    if !summary.failures.is_empty() {
        return Err(CliError::Failed(format!(
            "{} of {} scenario(s) failed: {}",
            summary.failures.len(),
            scenarios.len(),
            summary
                .failures
                .iter()
                .map(|(n, e)| format!("{n}: {e}"))
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    Ok(summary)
}

fn overlay(
    name: &str,
    truth: &[[f64; 3]],
    is_rod: bool,
    cmp: &ModelComparison,
    sc: &crate::files::Scenario,
) -> CliResult<String> {
    let params = &sc.problem.params;
    let pac: Vec<[f64; 3]> = sample_centerline(&cmp.pac_state, params, 41)?
        .iter()
        .map(|s| s.position.into())
        .collect();
    let pcc: Vec<[f64; 3]> = sample_centerline(&cmp.pcc_state, params, 41)?
        .iter()
        .map(|s| s.position.into())
        .collect();
    let all: Vec<[f64; 3]> = truth.iter().chain(&pac).chain(&pcc).copied().collect();
    let (axis, label) = side_view(&all);
    let project = |pts: &[[f64; 3]]| pts.iter().map(|p| (p[axis], p[2])).collect::<Vec<_>>();
    let mut plot = Plot::new(name, label, "z (m)");
    let truth_style = if is_rod { Style::Line } else { Style::Points };
    plot.push(Series::new("reference", truth_style, project(truth)));
    plot.push(Series::new("PAC", Style::Dashed, project(&pac)));
    plot.push(Series::new("PCC", Style::Dashed, project(&pcc)));
    Ok(plot.render())
}
