//! Scenario files: schema, defaults and load-time validation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::checks::{lookup, CheckInfo, Requirement};
use crate::riemann::{DerivativeMode, DomainBox, MetricField, MetricKind, ScalarField};
use crate::twistor::{MetricPair, TwistorMetricParams};
use crate::{Error, Result};

pub const SCHEMA: &str = "twistorlab.scenario/1";

/// Builtin metric constructors addressable from a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat {
        #[serde(default)]
        n: Option<usize>,
    },
    Diag {
        entries: Vec<f64>,
    },
    RoundSphere {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "unit")]
        radius: f64,
    },
    SpherePolar {
        #[serde(default = "unit")]
        radius: f64,
    },
    Product {
        factors: Vec<MetricSpec>,
    },
    /// `e^{2f}·base`; for `metric_gtilde` the base defaults to `metric_g`.
    Conformal {
        #[serde(default)]
        base: Option<Box<MetricSpec>>,
        f: ScalarField,
    },
}

fn unit() -> f64 {
    1.0
}

impl MetricSpec {
    /// Builds the metric in dimension `n`; `fallback` is the base of a bare `conformal`.
    pub fn build(&self, n: usize, fallback: Option<&MetricKind>) -> Result<MetricKind> {
        let kind = match self {
            MetricSpec::Flat { n: m } => MetricKind::Flat(m.unwrap_or(n)),
            MetricSpec::Diag { entries } => MetricKind::Diagonal(entries.clone()),
            MetricSpec::RoundSphere { n: m, radius } => MetricKind::RoundSphere {
                n: m.unwrap_or(n),
                radius: *radius,
            },
            MetricSpec::SpherePolar { radius } => MetricKind::SpherePolar { radius: *radius },
            MetricSpec::Product { factors } => {
                let fs = factors
                    .iter()
                    .map(|f| match f {
                        MetricSpec::Flat { n: None } | MetricSpec::RoundSphere { n: None, .. } => Err(
                            Error::Config("product factors must state their own dimension `n`".into()),
                        ),
                        _ => f.build(0, None),
                    })
                    .collect::<Result<Vec<_>>>()?;
                MetricKind::Product(fs)
            }
            MetricSpec::Conformal { base, f } => {
                let base = match (base, fallback) {
                    (Some(b), _) => b.build(n, None)?,
                    (None, Some(k)) => k.clone(),
                    (None, None) => {
                        return Err(Error::Config("`conformal` needs an explicit `base` here".into()))
                    }
                };
                MetricKind::conformal(base, f.clone())
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Residual must stay below the bound, or (for converse witnesses) above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Small,
    Large,
    /// Recorded only; always passes.
    Report,
}

/// Which metric of the pair a single-metric check looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    G,
    Gtilde,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpecFull {
    pub id: String,
    #[serde(default)]
    pub expect: Option<Expect>,
    #[serde(default)]
    pub bound: Option<f64>,
    /// Reference value for checks comparing against a number.
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub metric: Option<Side>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    Id(String),
    Full(CheckSpecFull),
}

impl CheckSpec {
    fn full(&self) -> CheckSpecFull {
        match self {
            CheckSpec::Id(id) => CheckSpecFull {
                id: id.clone(),
                expect: None,
                bound: None,
                target: None,
                metric: None,
            },
            CheckSpec::Full(f) => f.clone(),
        }
    }
}

/// A scenario file as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub n: usize,
    pub metric_g: MetricSpec,
    pub metric_gtilde: MetricSpec,
    #[serde(default)]
    pub domain: Option<DomainBox>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub derivatives: Option<DerivativeMode>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<CheckSpec>,
}

/// One requested check after validation, with its expectation resolved.
#[derive(Clone, Debug)]
pub struct PlannedCheck {
    pub info: &'static CheckInfo,
    pub expect: Expect,
    pub bound: f64,
    pub target: Option<f64>,
    pub side: Side,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: Option<String>,
    pub n: usize,
    pub pair: MetricPair,
    pub params: TwistorMetricParams,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<PlannedCheck>,
}

pub const DEFAULT_SAMPLES: usize = 256;

impl ScenarioConfig {
    /// Parses without validating.
    pub fn parse_file(text: &str) -> Result<ScenarioFile> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid scenario: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(Self::parse_file(text)?)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.schema != SCHEMA {
            return Err(Error::Config(format!(
                "field `schema`: expected \"{SCHEMA}\", found \"{}\"",
                file.schema
            )));
        }
        let n = file.n;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!("field `n`: must be even and at least 2, got {n}")));
        }
        let g_kind = file.metric_g.build(n, None).map_err(|e| field("metric_g", e))?;
        let gt_kind = file
            .metric_gtilde
            .build(n, Some(&g_kind))
            .map_err(|e| field("metric_gtilde", e))?;
        for (name, k) in [("metric_g", &g_kind), ("metric_gtilde", &gt_kind)] {
            if k.dim() != n {
                return Err(Error::Config(format!(
                    "field `{name}`: metric has dimension {}, scenario has n = {n}",
                    k.dim()
                )));
            }
        }
        let domain = file.domain.clone().unwrap_or_else(|| DomainBox::cube(n, 1.0));
        if domain.dim() != n {
            return Err(Error::Config(format!("field `domain`: dimension {} does not match n = {n}", domain.dim())));
        }
        let mode = file.derivatives.unwrap_or_default();
        let g = MetricField::new(g_kind, domain.clone(), mode).map_err(|e| field("metric_g", e))?;
        let gt = MetricField::new(gt_kind, domain, mode).map_err(|e| field("metric_gtilde", e))?;
        let pair = MetricPair::new(g, gt)?;
        let params = TwistorMetricParams::new(file.s.unwrap_or(1.0), file.t.unwrap_or(1.0))?;
        let samples = file.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::Config("field `samples`: must be positive".into()));
        }
        for id in file.tolerances.keys() {
            lookup(id).ok_or_else(|| Error::UnknownCheck(id.clone()))?;
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut checks = Vec::new();
        for spec in &file.checks {
            let spec = spec.full();
            let info = lookup(&spec.id).ok_or_else(|| Error::UnknownCheck(spec.id.clone()))?;
            if !seen.insert(spec.id.clone()) {
                return Err(Error::Config(format!("check `{}` is listed twice", spec.id)));
            }
            for req in info.requires {
                check_requirement(info.id, *req, &pair, n, &spec)?;
            }
            let (expect, default_bound) = (info.default_expect)(&pair);
            let expect = spec.expect.unwrap_or(expect);
            // `tolerances` overrides zero thresholds; lower bounds come from the check entry only
            let bound = spec.bound.unwrap_or(match expect {
                Expect::Large => info.large_bound,
                _ => file.tolerances.get(&spec.id).copied().unwrap_or(default_bound),
            });
            if !(bound >= 0.0) || !bound.is_finite() {
                return Err(Error::Config(format!("check `{}`: bound must be a non-negative number", spec.id)));
            }
            checks.push(PlannedCheck {
                info,
                expect,
                bound,
                target: spec.target,
                side: spec.metric.unwrap_or_default(),
            });
        }
        Ok(Self {
            name: file.name,
            description: file.description,
            n,
            pair,
            params,
            samples,
            seed: file.seed.unwrap_or(0),
            checks,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

fn field(name: &str, e: Error) -> Error {
    Error::Config(format!("field `{name}`: {e}"))
}

fn check_requirement(id: &str, req: Requirement, pair: &MetricPair, n: usize, spec: &CheckSpecFull) -> Result<()> {
    match req {
        Requirement::Conformal if !pair.is_conformal() => Err(Error::Config(format!(
            "check `{id}` requires a conformal pair (metric_gtilde = conformal over metric_g)"
        ))),
        Requirement::Dim4 if n != 4 => Err(Error::Config(format!("check `{id}` requires n = 4, got {n}"))),
        Requirement::AtLeast3 if n < 3 => Err(Error::Config(format!("check `{id}` requires n >= 3"))),
        Requirement::Target if spec.target.is_none() => {
            Err(Error::Config(format!("check `{id}` needs a `target` value")))
        }
        _ => Ok(()),
    }
}

/// `TWISTORLAB_TOLERANCE_SCALE`, defaulting to 1.
pub fn tolerance_scale() -> Result<f64> {
    match std::env::var("TWISTORLAB_TOLERANCE_SCALE") {
        Ok(v) => {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("TWISTORLAB_TOLERANCE_SCALE is not a number: {v:?}")))?;
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Config(format!("TWISTORLAB_TOLERANCE_SCALE must be positive, got {x}")));
            }
            Ok(x)
        }
        Err(_) => Ok(1.0),
    }
}
