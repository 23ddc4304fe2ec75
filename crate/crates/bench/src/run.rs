//! Scenario runner: prediction, simulation, measurement and file output.

use std::path::{Path, PathBuf};

use chatter_core::{
    check_stability, compare, measure_oscillation, predict_closed_form, predict_numeric, simulate,
    ComparisonRow64, HbError, HbSolution64, LimitCyclePrediction64, ManifoldSpec64, MetricsError,
    ModelError, NyquistCurve64, OscillationReport64, PlantParams64, Signal, SimConfig64, SimError,
    StabilityReport, TimeSeries64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{load_scenarios, ConfigError, Scenario};
use crate::nyquist::{
    default_amplitude_range, default_omega_range, df_locus_csv, emit_nyquist, nyquist_csv,
};
use crate::nyquist::{DEFAULT_POINTS, DF_LOCUS_POINTS};
use crate::output::{table_csv, timeseries_csv, write_atomic};

pub const TABLE_FILE: &str = "table1.csv";

type Outcome = Result<(ComparisonRow64, Vec<PathBuf>), ScenarioError>;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hb(#[from] HbError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("encoding summary: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output directory {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub label: String,
    pub plant: PlantParams64,
    pub manifold: ManifoldSpec64,
    pub sim: SimConfig64,
    /// Dynamic manifolds only.
    pub stability: Option<StabilityReport>,
    /// Where a closed form exists.
    pub closed_form: Option<LimitCyclePrediction64>,
    pub numeric: HbSolution64,
    pub sigma_report: OscillationReport64,
    pub x_report: OscillationReport64,
    /// Against the closed form where available, otherwise the numeric prediction.
    pub comparison: ComparisonRow64,
    pub warnings: Vec<String>,
}

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub summary: ScenarioSummary,
    pub series: TimeSeries64,
    pub nyquist: NyquistCurve64,
}

#[derive(Debug)]
pub struct ScenarioFailure {
    pub label: String,
    pub error: ScenarioError,
}

#[derive(Debug)]
pub struct RunReport {
    /// Sorted by label.
    pub rows: Vec<ComparisonRow64>,
    pub failures: Vec<ScenarioFailure>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes predictions, simulates and measures one scenario.
pub fn evaluate(s: &Scenario) -> Result<ScenarioResult, ScenarioError> {
    let stability = match s.manifold {
        ManifoldSpec64::Static => None,
        ManifoldSpec64::Dynamic(_) => Some(check_stability(&s.plant, &s.manifold)?),
    };
    let closed_form = predict_closed_form(&s.plant, &s.manifold);
    let numeric = predict_numeric(&s.plant, &s.manifold)?;
    let sim = s.sim_config();
    let series = simulate(&s.plant, &s.manifold, &sim)?;
    let discard = chatter_core::metrics::DEFAULT_DISCARD;
    let sigma_report = measure_oscillation(&series, Signal::Sigma, discard)?;
    let x_report = measure_oscillation(&series, Signal::X, discard)?;
    let reference = closed_form.unwrap_or(numeric.prediction);
    let comparison = compare(&reference, &sigma_report, &x_report, &s.label);
    let (lo, hi) = default_omega_range(&s.plant);
    let nyquist = emit_nyquist(s, lo, hi, DEFAULT_POINTS)?;
    let mut warnings = series.warnings.clone();
    if numeric.has_multiple_crossings() {
        warnings.push(format!(
            "{} phase crossings with positive real part; the lowest frequency is used",
            numeric.crossings.len()
        ));
    }
    Ok(ScenarioResult {
        summary: ScenarioSummary {
            label: s.label.clone(),
            plant: s.plant,
            manifold: s.manifold,
            sim,
            stability,
            closed_form,
            numeric,
            sigma_report,
            x_report,
            comparison,
            warnings,
        },
        series,
        nyquist,
    })
}

fn write_scenario(
    r: &ScenarioResult,
    plant: &PlantParams64,
    dir: &Path,
) -> Result<Vec<PathBuf>, ScenarioError> {
    let label = &r.summary.label;
    let (amp_lo, amp_hi) = default_amplitude_range(plant);
    let mut json = serde_json::to_string_pretty(&r.summary)?;
    json.push('\n');
    Ok(vec![
        write_atomic(
            dir,
            &format!("{label}_timeseries.csv"),
            timeseries_csv(&r.series).as_bytes(),
        )?,
        write_atomic(
            dir,
            &format!("{label}_nyquist.csv"),
            nyquist_csv(&r.nyquist).as_bytes(),
        )?,
        write_atomic(
            dir,
            &format!("{label}_df_locus.csv"),
            df_locus_csv(&r.nyquist, amp_lo, amp_hi, DF_LOCUS_POINTS).as_bytes(),
        )?,
        write_atomic(dir, &format!("{label}_summary.json"), json.as_bytes())?,
    ])
}

/// Runs validated scenarios in parallel and writes per-scenario files plus the aggregate table.
pub fn run_loaded(scenarios: &[Scenario], out_dir: &Path) -> Result<RunReport, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let outcomes: Vec<(String, Outcome)> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| {
                scope.spawn(move || {
                    let r = evaluate(s)?;
                    let files = write_scenario(&r, &s.plant, out_dir)?;
                    Ok((r.summary.comparison, files))
                })
            })
            .collect();
        scenarios
            .iter()
            .zip(handles)
            .map(|(s, h)| (s.label.clone(), h.join().expect("scenario worker panicked")))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut files = Vec::new();
    for (label, outcome) in outcomes {
        match outcome {
            Ok((row, f)) => {
                rows.push(row);
                files.extend(f);
            }
            Err(error) => failures.push(ScenarioFailure { label, error }),
        }
    }
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    let table =
        write_atomic(out_dir, TABLE_FILE, table_csv(&rows).as_bytes()).map_err(|source| {
            RunError::Io {
                path: out_dir.join(TABLE_FILE).display().to_string(),
                source,
            }
        })?;
    files.push(table);
    Ok(RunReport {
        rows,
        failures,
        files,
    })
}

/// Loads a scenario file and runs it.
pub fn run_scenarios(config_path: &Path, out_dir: &Path) -> Result<RunReport, RunError> {
    let scenarios = load_scenarios(config_path)?;
    run_loaded(&scenarios, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimOverrides;

    fn scenario(label: &str, t_end: f64) -> Scenario {
        Scenario {
            label: label.into(),
            plant: PlantParams64 { k: 1.0, tau: 0.01 },
            manifold: ManifoldSpec64::Static,
            sim: SimOverrides {
                t_end: Some(t_end),
                ..SimOverrides::default()
            },
        }
    }

    #[test]
    fn failing_scenario_does_not_stop_others() {
        let dir = tempfile::tempdir().unwrap();
        // Too few recorded samples to measure.
        let mut scenarios = [scenario("short", 1.0), scenario("ok", 2.0)];
        scenarios[0].sim.record_stride = Some(1000);
        let report = run_loaded(&scenarios, dir.path()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].label, "ok");
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].label, "short");
        assert!(!report.is_complete());
        assert!(dir.path().join("ok_summary.json").exists());
        assert!(!dir.path().join("short_summary.json").exists());
    }

    #[test]
    fn summary_prefers_closed_form_reference() {
        let r = evaluate(&scenario("s", 2.0)).unwrap();
        let cf = r.summary.closed_form.unwrap();
        assert_eq!(r.summary.comparison.sigma_hb, cf.sigma_hat);
        assert!(r.summary.stability.is_none());
        assert!((r.summary.numeric.prediction.omega_p - 100.0).abs() < 1e-7);
    }
}
