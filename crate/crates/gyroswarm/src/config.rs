//! Scenario configuration documents: a sectioned TOML format with strict
//! key checking, validated into a [`Scenario`] plus output options.
//!
//! Units are meters, radians, and seconds throughout. Defaults: `dt =
//! 1e-3`, `sample_every = 10`, `t_final = 100`, random initialization,
//! CSV and JSON outputs enabled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FramedState;
use crate::harness::{InitSpec, Monitors, Scenario};
use crate::laws::{LawKind, LawParams};
use crate::lie::Vec3;

/// Everything a `simulate` invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub output: OutputOptions,
}

/// Which files to write after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub csv: bool,
    pub json: bool,
    pub svg: Option<Plane>,
    pub prefix: String,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            csv: true,
            json: true,
            svg: None,
            prefix: "run".into(),
        }
    }
}

/// Projection plane for plots: a named coordinate plane or a custom view
/// normal.
#[derive(Debug, Clone, PartialEq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
    Normal(Vec3),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    scenario: ScenarioSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    law: Option<LawSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integration: Option<IntegrationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<OutputSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    n: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_init")]
    init: String,
    #[serde(default = "default_true")]
    monitor_lyapunov: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vehicle: Vec<VehicleSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleSection {
    position: [f64; 3],
    heading: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    normal: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawSection {
    kind: String,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_r0")]
    r0: f64,
    #[serde(default = "default_mu")]
    mu: f64,
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrationSection {
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_final")]
    t_final: f64,
    #[serde(default = "default_sample_every")]
    sample_every: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default = "default_true")]
    csv: bool,
    #[serde(default = "default_true")]
    json: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<SvgSpec>,
    #[serde(default = "default_prefix")]
    prefix: String,
}

/// Either a named plane ("xy" | "xz" | "yz") or a custom normal vector.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum SvgSpec {
    Named(String),
    Normal([f64; 3]),
}

fn default_init() -> String {
    "random".into()
}
fn default_true() -> bool {
    true
}
fn default_alpha() -> f64 {
    1.0
}
fn default_r0() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    0.5
}
fn default_eta() -> f64 {
    0.4
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    100.0
}
fn default_sample_every() -> usize {
    10
}
fn default_prefix() -> String {
    "run".into()
}

/// Parses and validates a configuration document. Syntax errors carry the
/// line and column; constraint violations name the violated assumption.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    build(doc)
}

fn build(doc: ConfigDoc) -> Result<RunConfig> {
    let law = match doc.law {
        None => LawParams::none(),
        Some(l) => {
            let kind = match l.kind.as_str() {
                "rectilinear" => LawKind::Rectilinear,
                "circling" => LawKind::Circling,
                "none" => LawKind::None,
                other => {
                    return Err(Error::Config(format!(
                        "unknown law kind {other:?}; expected rectilinear, circling, or none"
                    )))
                }
            };
            // See LawParams for which formation each branch selects.
            let sign = l.sign.unwrap_or(-1.0);
            LawParams::new(kind, l.alpha, l.r0, l.mu, l.eta, sign)
                .map_err(|e| Error::Config(e.to_string()))?
        }
    };

    let integration = doc.integration.unwrap_or(IntegrationSection {
        dt: default_dt(),
        t_final: default_t_final(),
        sample_every: default_sample_every(),
    });

    let init = match doc.scenario.init.as_str() {
        "random" => {
            if !doc.scenario.vehicle.is_empty() {
                return Err(Error::Config(
                    "explicit vehicle entries require init = \"explicit\"".into(),
                ));
            }
            InitSpec::Random
        }
        "explicit" => {
            let states: Vec<FramedState> = doc
                .scenario
                .vehicle
                .iter()
                .map(|v| {
                    let position = Vec3::from(v.position);
                    let heading = Vec3::from(v.heading);
                    match v.normal {
                        Some(n) => {
                            FramedState::from_heading_with_normal(position, heading, Vec3::from(n))
                        }
                        None => FramedState::from_heading(position, heading),
                    }
                })
                .collect::<Result<_>>()
                .map_err(|e| Error::Config(e.to_string()))?;
            InitSpec::Explicit(states)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown init mode {other:?}; expected random or explicit"
            )))
        }
    };

    let scenario = Scenario {
        n: doc.scenario.n,
        law,
        dt: integration.dt,
        t_final: integration.t_final,
        seed: doc.scenario.seed,
        sample_every: integration.sample_every,
        init,
        monitors: Monitors {
            lyapunov: doc.scenario.monitor_lyapunov,
        },
    };
    scenario
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;

    let output = match doc.output {
        None => OutputOptions::default(),
        Some(o) => OutputOptions {
            csv: o.csv,
            json: o.json,
            svg: match o.svg {
                None => None,
                Some(SvgSpec::Named(name)) => Some(match name.as_str() {
                    "xy" => Plane::Xy,
                    "xz" => Plane::Xz,
                    "yz" => Plane::Yz,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown svg plane {other:?}; expected xy, xz, yz, or a normal vector"
                        )))
                    }
                }),
                Some(SvgSpec::Normal(n)) => {
                    let v = Vec3::from(n);
                    if v.norm() < 1e-9 {
                        return Err(Error::Config("svg normal must be nonzero".into()));
                    }
                    Some(Plane::Normal(v))
                }
            },
            prefix: o.prefix,
        },
    };

    Ok(RunConfig { scenario, output })
}

/// Emits the canonical document for a configuration: every section present,
/// every default written out. `parse_config(emit_canonical(c))` gives back
/// `c`.
pub fn emit_canonical(config: &RunConfig) -> Result<String> {
    let sc = &config.scenario;
    let (init, vehicle) = match &sc.init {
        InitSpec::Random => ("random".to_string(), Vec::new()),
        InitSpec::Explicit(states) => (
            "explicit".to_string(),
            states
                .iter()
                .map(|s| VehicleSection {
                    position: s.position.into(),
                    heading: s.tangent.into(),
                    normal: Some(s.normal1.into()),
                })
                .collect(),
        ),
    };
    let doc = ConfigDoc {
        scenario: ScenarioSection {
            n: sc.n,
            seed: sc.seed,
            init,
            monitor_lyapunov: sc.monitors.lyapunov,
            vehicle,
        },
        law: Some(LawSection {
            kind: match sc.law.kind {
                LawKind::Rectilinear => "rectilinear".into(),
                LawKind::Circling => "circling".into(),
                LawKind::None => "none".into(),
            },
            alpha: sc.law.alpha,
            r0: sc.law.r0,
            mu: sc.law.mu,
            eta: sc.law.eta,
            sign: Some(sc.law.sign),
        }),
        integration: Some(IntegrationSection {
            dt: sc.dt,
            t_final: sc.t_final,
            sample_every: sc.sample_every,
        }),
        output: Some(OutputSection {
            csv: config.output.csv,
            json: config.output.json,
            svg: config.output.svg.as_ref().map(|p| match p {
                Plane::Xy => SvgSpec::Named("xy".into()),
                Plane::Xz => SvgSpec::Named("xz".into()),
                Plane::Yz => SvgSpec::Named("yz".into()),
                Plane::Normal(n) => SvgSpec::Normal((*n).into()),
            }),
            prefix: config.output.prefix.clone(),
        }),
    };
    toml::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))
}
