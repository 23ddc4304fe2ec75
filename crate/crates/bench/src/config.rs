//! Scenario files: TOML with one `[[scenario]]` table per scenario.
//!
//! ```toml
//! [[scenario]]
//! label = "dsm_tau0.01"
//! k = 1.0
//! tau = 0.01
//! manifold = "dynamic"   # or "static"; f, g, h, l only for dynamic
//! f = -40.0
//! g = 39.6
//! h = -1.0
//! l = 1.0
//!
//! [scenario.sim]          # optional overrides of the simulation defaults
//! dt = 5e-5
//! t_end = 5.0
//! x0 = 1e-6
//! record_stride = 1
//! ```

use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;

use chatter_core::{check_stability, DsmParams64, ManifoldSpec64, PlantParams64, SimConfig64};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}, field `{field}`: requires {constraint}")]
    Invalid {
        line: usize,
        field: &'static str,
        constraint: String,
    },
}

impl ConfigError {
    /// The violated constraint for validation errors.
    pub fn constraint(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { constraint, .. } => Some(constraint),
            _ => None,
        }
    }
}

/// Optional overrides of [`SimConfig64::for_plant`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
}

impl SimOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, plant: &PlantParams64) -> SimConfig64 {
        let mut cfg = SimConfig64::for_plant(plant);
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(t_end) = self.t_end {
            cfg.t_end = t_end;
        }
        if let Some(x0) = self.x0 {
            cfg.x0 = x0;
        }
        if let Some(stride) = self.record_stride {
            cfg.record_stride = stride;
        }
        cfg
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub plant: PlantParams64,
    pub manifold: ManifoldSpec64,
    pub sim: SimOverrides,
}

impl Scenario {
    pub fn sim_config(&self) -> SimConfig64 {
        self.sim.apply(&self.plant)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    scenario: Vec<Spanned<RawScenario>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    label: Spanned<String>,
    k: Spanned<f64>,
    tau: Spanned<f64>,
    manifold: Spanned<String>,
    f: Option<Spanned<f64>>,
    g: Option<Spanned<f64>>,
    h: Option<Spanned<f64>>,
    l: Option<Spanned<f64>>,
    sim: Option<Spanned<SimOverrides>>,
}

/// Serialized form; field order matches the documented layout.
#[derive(Debug, Serialize)]
struct OutFile<'a> {
    scenario: Vec<OutScenario<'a>>,
}

#[derive(Debug, Serialize)]
struct OutScenario<'a> {
    label: &'a str,
    k: f64,
    tau: f64,
    manifold: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
    #[serde(skip_serializing_if = "SimOverrides::is_empty")]
    sim: SimOverrides,
}

fn line_of(src: &str, span: Range<usize>) -> usize {
    let end = span.start.min(src.len());
    src.as_bytes()[..end]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

struct Validator<'a> {
    src: &'a str,
}

impl Validator<'_> {
    fn err(
        &self,
        span: Range<usize>,
        field: &'static str,
        constraint: impl Into<String>,
    ) -> ConfigError {
        ConfigError::Invalid {
            line: line_of(self.src, span),
            field,
            constraint: constraint.into(),
        }
    }

    fn finite(&self, v: &Spanned<f64>, field: &'static str) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.err(v.span(), field, format!("{field} finite")))
        }
    }

    fn required(
        &self,
        v: &Option<Spanned<f64>>,
        at: Range<usize>,
        field: &'static str,
    ) -> Result<f64, ConfigError> {
        match v {
            Some(v) => self.finite(v, field),
            None => Err(self.err(at, field, format!("{field} present for a dynamic manifold"))),
        }
    }

    fn scenario(&self, raw: &Spanned<RawScenario>) -> Result<Scenario, ConfigError> {
        let r = raw.get_ref();
        let label = r.label.get_ref();
        let label_ok = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if !label_ok {
            return Err(self.err(
                r.label.span(),
                "label",
                "a non-empty label of [A-Za-z0-9._-]",
            ));
        }
        let k = self.finite(&r.k, "k")?;
        if !(k > 0.0) {
            return Err(self.err(r.k.span(), "k", "K > 0"));
        }
        let tau = self.finite(&r.tau, "tau")?;
        if !(tau > 0.0) {
            return Err(self.err(r.tau.span(), "tau", "τ > 0"));
        }
        let plant = PlantParams64 { k, tau };

        let manifold = match r.manifold.get_ref().as_str() {
            "static" => {
                let extra = [("f", &r.f), ("g", &r.g), ("h", &r.h), ("l", &r.l)];
                if let Some((name, Some(v))) = extra.into_iter().find(|(_, v)| v.is_some()) {
                    return Err(self.err(
                        v.span(),
                        name,
                        "manifold = \"dynamic\" when f, g, h, l are given",
                    ));
                }
                ManifoldSpec64::Static
            }
            "dynamic" => {
                let at = r.manifold.span();
                let f = self.required(&r.f, at.clone(), "f")?;
                let g = self.required(&r.g, at.clone(), "g")?;
                let h = self.required(&r.h, at.clone(), "h")?;
                let l = self.required(&r.l, at.clone(), "l")?;
                let l_span = r.l.as_ref().map(|v| v.span()).unwrap_or(at.clone());
                if l == 0.0 {
                    return Err(self.err(l_span, "l", "l ≠ 0"));
                }
                let h_span = r.h.as_ref().map(|v| v.span()).unwrap_or(at.clone());
                if h == 0.0 {
                    return Err(self.err(h_span, "h", "h ≠ 0"));
                }
                let spec = ManifoldSpec64::Dynamic(DsmParams64 { f, g, h, l });
                let report = check_stability(&plant, &spec).map_err(|e| {
                    self.err(at.clone(), "manifold", format!("a well-posed model ({e})"))
                })?;
                if !report.f_negative {
                    let span = r.f.as_ref().map(|v| v.span()).unwrap_or(at.clone());
                    return Err(self.err(span, "f", "f < 0"));
                }
                if !report.reduced_order_stable {
                    return Err(self.err(
                        at,
                        "manifold",
                        "f - g h / l < 0 (stable reduced-order dynamics)",
                    ));
                }
                if !report.loop_denominator_hurwitz {
                    return Err(self.err(at, "manifold", "a Hurwitz closed-loop denominator"));
                }
                spec
            }
            _ => {
                return Err(self.err(
                    r.manifold.span(),
                    "manifold",
                    "manifold = \"static\" or \"dynamic\"",
                ));
            }
        };

        let sim = match &r.sim {
            Some(s) => {
                let overrides = *s.get_ref();
                overrides.apply(&plant).validate(tau).map_err(|e| {
                    self.err(s.span(), "sim", format!("valid simulation settings ({e})"))
                })?;
                overrides
            }
            None => SimOverrides::default(),
        };

        Ok(Scenario {
            label: label.clone(),
            plant,
            manifold,
            sim,
        })
    }
}

/// Parses and validates a scenario file's contents.
pub fn parse_scenarios(src: &str) -> Result<Vec<Scenario>, ConfigError> {
    let raw: RawFile = toml::from_str(src).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(src, s)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    let v = Validator { src };
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(raw.scenario.len());
    for r in &raw.scenario {
        let s = v.scenario(r)?;
        let line = line_of(src, r.get_ref().label.span());
        if let Some(first) = seen.insert(s.label.clone(), line) {
            return Err(ConfigError::Invalid {
                line,
                field: "label",
                constraint: format!("a unique label (`{}` first used on line {first})", s.label),
            });
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenarios(&src)
}

/// Serializes scenarios back to the file format.
pub fn scenarios_to_toml(scenarios: &[Scenario]) -> String {
    let out = OutFile {
        scenario: scenarios
            .iter()
            .map(|s| {
                let (manifold, d) = match s.manifold {
                    ManifoldSpec64::Static => ("static", None),
                    ManifoldSpec64::Dynamic(d) => ("dynamic", Some(d)),
                };
                OutScenario {
                    label: &s.label,
                    k: s.plant.k,
                    tau: s.plant.tau,
                    manifold,
                    f: d.map(|d| d.f),
                    g: d.map(|d| d.g),
                    h: d.map(|d| d.h),
                    l: d.map(|d| d.l),
                    sim: s.sim,
                }
            })
            .collect(),
    };
    toml::to_string(&out).expect("scenario values are always representable")
}

/// The four reference scenarios shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../scenarios/table1.toml");
