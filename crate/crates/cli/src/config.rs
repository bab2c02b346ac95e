//! Configuration files: raw TOML schema with source spans, and resolution
//! into absolute parameters.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::Range;

use crossdamp::model::{bose_occupation, effective_model, ModelParams, PhysicalParams};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{CliError, Location, Result};
use crate::output::Format;

/// Configuration text with its display name, for line-anchored messages.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
        }
    }

    pub fn location(&self, offset: usize) -> Location {
        let offset = offset.min(self.text.len());
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        Location { line, column }
    }

    pub fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        CliError::Validation {
            file: self.name.clone(),
            location: span.map(|s| self.location(s.start)),
            message: message.into(),
        }
    }

    pub fn parse(&self) -> Result<RawConfig> {
        toml::from_str(&self.text).map_err(|e| self.error(e.span(), e.message().trim_end().to_string()))
    }
}

/// A number or a list of numbers.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

type Num = Option<Spanned<f64>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Spanned<String>,
    pub seed: Option<Spanned<i64>>,
    pub output: Option<RawOutput>,
    pub model: Option<Spanned<RawModel>>,
    pub initial: Option<Spanned<RawInitial>>,
    pub time: Option<Spanned<RawTime>>,
    pub fim: Option<Spanned<RawFim>>,
    pub crb: Option<Spanned<RawCrb>>,
    pub mle: Option<Spanned<RawMle>>,
    pub entangle: Option<Spanned<RawEntangle>>,
    pub scan: Option<Spanned<RawScan>>,
}

impl RawConfig {
    /// Names and spans of the scenario-specific sections present.
    pub fn sections(&self) -> Vec<(&'static str, Range<usize>)> {
        let mut out = Vec::new();
        let mut push = |name, span: Option<Range<usize>>| {
            if let Some(s) = span {
                out.push((name, s));
            }
        };
        push("model", self.model.as_ref().map(Spanned::span));
        push("initial", self.initial.as_ref().map(Spanned::span));
        push("time", self.time.as_ref().map(Spanned::span));
        push("fim", self.fim.as_ref().map(Spanned::span));
        push("crb", self.crb.as_ref().map(Spanned::span));
        push("mle", self.mle.as_ref().map(Spanned::span));
        push("entangle", self.entangle.as_ref().map(Spanned::span));
        push("scan", self.scan.as_ref().map(Spanned::span));
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<String>,
    pub format: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub omega0: Num,
    pub coupling: Num,
    pub coupling_pi_khz: Num,
    pub gamma: Num,
    pub gamma_over_coupling: Num,
    pub gamma12: Option<Spanned<OneOrMany>>,
    pub gamma12_over_gamma: Option<Spanned<OneOrMany>>,
    pub nbar: Num,
    pub temperature_ratio: Num,
    pub trap: Option<Spanned<RawTrap>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTrap {
    pub mass: f64,
    pub charge: f64,
    pub separation: f64,
    pub trap_frequency: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    pub n1: Spanned<f64>,
    pub n2: Spanned<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTime {
    pub start: Spanned<f64>,
    pub stop: Spanned<f64>,
    pub points: Spanned<i64>,
    pub unit: Option<Spanned<String>>,
    pub spacing: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFim {
    pub view: Option<Spanned<String>>,
    pub pairs: Option<Spanned<Vec<[i64; 2]>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCrb {
    pub repetitions: Spanned<i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMle {
    pub target: Spanned<String>,
    pub time: Spanned<f64>,
    pub unit: Option<Spanned<String>>,
    pub repetitions: Spanned<i64>,
    pub trials: Spanned<i64>,
    pub bracket: Spanned<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntangle {
    pub r: Spanned<f64>,
    pub ion1_nbar: Num,
    pub ion2_nbar: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    pub axes: Vec<Spanned<RawAxis>>,
    pub gamma_t: Num,
    pub r: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAxis {
    pub axis: Spanned<String>,
    pub values: Option<Vec<f64>>,
    pub start: Num,
    pub stop: Num,
    pub points: Option<Spanned<i64>>,
}

/// Units accepted for times in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    Seconds,
    InverseOmega,
    InverseGamma,
}

impl TimeUnit {
    fn parse(src: &Source, s: &Spanned<String>) -> Result<Self> {
        match s.get_ref().as_str() {
            "seconds" => Ok(TimeUnit::Seconds),
            "inverse-omega" => Ok(TimeUnit::InverseOmega),
            "inverse-gamma" => Ok(TimeUnit::InverseGamma),
            other => Err(src.error(
                Some(s.span()),
                format!("unknown time unit {other:?} (expected seconds, inverse-omega or inverse-gamma)"),
            )),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TimeUnit::Seconds => "seconds",
            TimeUnit::InverseOmega => "inverse-omega",
            TimeUnit::InverseGamma => "inverse-gamma",
        }
    }
}

/// One cross-damping value of a multi-curve run.
#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub gamma12: f64,
    pub gamma12_over_gamma: f64,
}

/// Fully resolved model parameters in SI units (rad/s, 1/s).
#[derive(Debug, Clone, Serialize)]
pub struct ModelSpec {
    pub omega0: f64,
    pub coupling: f64,
    pub gamma: f64,
    pub curves: Vec<Curve>,
    pub nbar: f64,
    pub temperature_ratio: Option<f64>,
}

impl ModelSpec {
    pub fn params(&self, curve: &Curve) -> ModelParams {
        ModelParams::new(self.omega0, self.coupling, self.gamma, curve.gamma12, self.nbar)
            .expect("validated during resolution")
    }

    /// Seconds per unit of `unit`.
    pub fn seconds_per(&self, unit: TimeUnit) -> Option<f64> {
        match unit {
            TimeUnit::Seconds => Some(1.0),
            TimeUnit::InverseOmega => (self.coupling != 0.0).then(|| 1.0 / self.coupling.abs()),
            TimeUnit::InverseGamma => (self.gamma > 0.0).then(|| 1.0 / self.gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Time grid as configured and in seconds.
#[derive(Debug, Clone, Serialize)]
pub struct TimeGrid {
    pub unit: TimeUnit,
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(skip)]
    pub values: Vec<f64>,
    #[serde(skip)]
    pub seconds: Vec<f64>,
}

/// Grid used when a configuration has no `[time]` section.
#[derive(Debug, Clone, Copy)]
pub struct TimeDefault {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub unit: TimeUnit,
    pub spacing: Spacing,
}

/// Parsed configuration plus command-line overrides, with a log of every
/// default that had to be filled in.
pub struct Context<'a> {
    pub source: &'a Source,
    pub raw: &'a RawConfig,
    pub seed: u64,
    pub format: Format,
    defaults: RefCell<Vec<String>>,
}

fn exclusive<'s, T>(
    src: &Source,
    a: (&str, &'s Option<Spanned<T>>),
    b: (&str, &'s Option<Spanned<T>>),
) -> Result<()> {
    if let (Some(x), Some(y)) = (a.1, b.1) {
        let later = if x.span().start > y.span().start { x.span() } else { y.span() };
        return Err(src.error(Some(later), format!("{} and {} are mutually exclusive", a.0, b.0)));
    }
    Ok(())
}

impl<'a> Context<'a> {
    pub fn new(source: &'a Source, raw: &'a RawConfig, seed: u64, format: Format) -> Self {
        Self {
            source,
            raw,
            seed,
            format,
            defaults: RefCell::new(Vec::new()),
        }
    }

    pub fn record_default(&self, what: impl Into<String>) {
        self.defaults.borrow_mut().push(what.into());
    }

    pub fn defaults(&self) -> Vec<String> {
        self.defaults.borrow().clone()
    }

    pub fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        self.source.error(span, message)
    }

    fn section<T>(&self, name: &str, value: &'a Option<Spanned<T>>) -> Result<&'a Spanned<T>> {
        value
            .as_ref()
            .ok_or_else(|| self.error(None, format!("scenario {} needs a [{name}] section", self.raw.scenario.get_ref())))
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let section = self.section("model", &self.raw.model)?;
        let m = section.get_ref();
        let src = self.source;
        exclusive(src, ("coupling", &m.coupling), ("coupling_pi_khz", &m.coupling_pi_khz))?;
        exclusive(src, ("gamma", &m.gamma), ("gamma_over_coupling", &m.gamma_over_coupling))?;
        exclusive(src, ("gamma12", &m.gamma12), ("gamma12_over_gamma", &m.gamma12_over_gamma))?;
        exclusive(src, ("nbar", &m.nbar), ("temperature_ratio", &m.temperature_ratio))?;

        let trap = match &m.trap {
            Some(t) => {
                if let Some(c) = m.coupling.as_ref().or(m.coupling_pi_khz.as_ref()) {
                    return Err(self.error(Some(c.span()), "coupling is derived from [model.trap]; remove it"));
                }
                if let Some(w) = &m.omega0 {
                    return Err(self.error(Some(w.span()), "omega0 is derived from [model.trap]; remove it"));
                }
                let raw = t.get_ref();
                let physical = PhysicalParams {
                    mass: raw.mass,
                    charge: raw.charge,
                    separation: raw.separation,
                    trap_frequency: raw.trap_frequency,
                    temperature_ratio: None,
                };
                Some(effective_model(&physical).map_err(|e| self.error(Some(t.span()), e.to_string()))?)
            }
            None => None,
        };

        let coupling = match (&m.coupling, &m.coupling_pi_khz, trap) {
            (Some(c), _, _) => *c.get_ref(),
            (_, Some(k), _) => k.get_ref() * PI * 1e3,
            (_, _, Some(eff)) => eff.coupling,
            _ => return Err(self.error(Some(section.span()), "coupling (or coupling_pi_khz, or [model.trap]) is required")),
        };
        let omega0 = match (&m.omega0, trap) {
            (Some(w), _) => *w.get_ref(),
            (None, Some(eff)) => eff.omega0,
            (None, None) => {
                self.record_default("model.omega0 = 0 rad/s (does not enter populations, Fisher information or Y)");
                0.0
            }
        };
        let gamma = match (&m.gamma, &m.gamma_over_coupling) {
            (Some(g), _) => *g.get_ref(),
            (None, Some(ratio)) => {
                if coupling == 0.0 {
                    return Err(self.error(Some(ratio.span()), "gamma_over_coupling needs a non-zero coupling"));
                }
                ratio.get_ref() * coupling.abs()
            }
            (None, None) => return Err(self.error(Some(section.span()), "gamma (or gamma_over_coupling) is required")),
        };
        let (cross, span) = match (&m.gamma12, &m.gamma12_over_gamma) {
            (Some(g), _) => (g.get_ref().values().into_iter().map(|g12| (g12, g12 / gamma)).collect::<Vec<_>>(), g.span()),
            (None, Some(r)) => (r.get_ref().values().into_iter().map(|ratio| (ratio * gamma, ratio)).collect(), r.span()),
            (None, None) => {
                return Err(self.error(Some(section.span()), "gamma12 (or gamma12_over_gamma) is required"))
            }
        };
        if cross.is_empty() {
            return Err(self.error(Some(span), "at least one cross-damping value is required"));
        }
        let (nbar, temperature_ratio) = match (&m.nbar, &m.temperature_ratio) {
            (Some(n), _) => (*n.get_ref(), None),
            (None, Some(x)) => {
                let nbar = bose_occupation(*x.get_ref()).map_err(|e| self.error(Some(x.span()), e.to_string()))?;
                (nbar, Some(*x.get_ref()))
            }
            (None, None) => return Err(self.error(Some(section.span()), "nbar (or temperature_ratio) is required")),
        };
        let curves: Vec<Curve> = cross
            .into_iter()
            .map(|(gamma12, ratio)| Curve {
                gamma12,
                gamma12_over_gamma: ratio,
            })
            .collect();
        for c in &curves {
            ModelParams::new(omega0, coupling, gamma, c.gamma12, nbar)
                .map_err(|e| self.error(Some(span.clone()), e.to_string()))?;
        }
        Ok(ModelSpec {
            omega0,
            coupling,
            gamma,
            curves,
            nbar,
            temperature_ratio,
        })
    }

    pub fn initial(&self) -> Result<(f64, f64)> {
        let section = self.section("initial", &self.raw.initial)?;
        let init = section.get_ref();
        for v in [&init.n1, &init.n2] {
            if !(v.get_ref().is_finite() && *v.get_ref() >= 0.0) {
                return Err(self.error(Some(v.span()), "initial occupations must be finite and >= 0"));
            }
        }
        Ok((*init.n1.get_ref(), *init.n2.get_ref()))
    }

    pub fn time_unit(&self, s: &Spanned<String>) -> Result<TimeUnit> {
        TimeUnit::parse(self.source, s)
    }

    /// Converts a time given in `unit` to seconds.
    pub fn to_seconds(&self, model: &ModelSpec, value: f64, unit: TimeUnit, span: Range<usize>) -> Result<f64> {
        let factor = model.seconds_per(unit).ok_or_else(|| {
            self.error(
                Some(span.clone()),
                format!("time unit {} is undefined for this model", unit.label()),
            )
        })?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(self.error(Some(span), "times must be finite and >= 0"));
        }
        Ok(value * factor)
    }

    pub fn time_grid(&self, model: &ModelSpec, default: TimeDefault) -> Result<TimeGrid> {
        let (start, stop, points, unit, spacing, span) = match &self.raw.time {
            Some(t) => {
                let raw = t.get_ref();
                let unit = match &raw.unit {
                    Some(u) => self.time_unit(u)?,
                    None => {
                        self.record_default(format!("time.unit = {}", default.unit.label()));
                        default.unit
                    }
                };
                let spacing = match raw.spacing.as_ref().map(|s| (s.get_ref().as_str(), s.span())) {
                    None => Spacing::Linear,
                    Some(("linear", _)) => Spacing::Linear,
                    Some(("log", _)) => Spacing::Log,
                    Some((other, span)) => {
                        return Err(self.error(Some(span), format!("unknown spacing {other:?} (linear or log)")))
                    }
                };
                if *raw.points.get_ref() < 1 {
                    return Err(self.error(Some(raw.points.span()), "empty time grid: points must be >= 1"));
                }
                let points = *raw.points.get_ref() as usize;
                if points > 1 && raw.stop.get_ref() <= raw.start.get_ref() {
                    return Err(self.error(Some(raw.stop.span()), "time grid must be strictly increasing (stop > start)"));
                }
                (*raw.start.get_ref(), *raw.stop.get_ref(), points, unit, spacing, t.span())
            }
            None => {
                self.record_default(format!(
                    "time = {{ start = {}, stop = {}, points = {}, unit = {}, spacing = {:?} }}",
                    default.start,
                    default.stop,
                    default.points,
                    default.unit.label(),
                    default.spacing
                ));
                (default.start, default.stop, default.points, default.unit, default.spacing, 0..0)
            }
        };
        if !(start.is_finite() && stop.is_finite() && start >= 0.0) {
            return Err(self.error(Some(span), "time grid bounds must be finite and start >= 0"));
        }
        if spacing == Spacing::Log && start <= 0.0 {
            return Err(self.error(Some(span), "log spacing needs start > 0"));
        }
        let values: Vec<f64> = (0..points)
            .map(|i| {
                if points == 1 {
                    return start;
                }
                let f = i as f64 / (points - 1) as f64;
                match spacing {
                    Spacing::Linear => start + f * (stop - start),
                    Spacing::Log => start * (stop / start).powf(f),
                }
            })
            .collect();
        let factor = model.seconds_per(unit).ok_or_else(|| {
            self.error(Some(span), format!("time unit {} is undefined for this model", unit.label()))
        })?;
        let seconds = values.iter().map(|v| v * factor).collect();
        Ok(TimeGrid {
            unit,
            spacing,
            start,
            stop,
            points,
            values,
            seconds,
        })
    }

    pub fn fim(&self) -> Option<&'a Spanned<RawFim>> {
        self.raw.fim.as_ref()
    }

    pub fn crb(&self) -> Result<&'a Spanned<RawCrb>> {
        self.section("crb", &self.raw.crb)
    }

    pub fn mle(&self) -> Result<&'a Spanned<RawMle>> {
        self.section("mle", &self.raw.mle)
    }

    pub fn entangle(&self) -> Result<&'a Spanned<RawEntangle>> {
        self.section("entangle", &self.raw.entangle)
    }

    pub fn scan(&self) -> Result<&'a Spanned<RawScan>> {
        self.section("scan", &self.raw.scan)
    }

    /// A positive integer setting.
    pub fn count(&self, v: &Spanned<i64>, what: &str) -> Result<usize> {
        if *v.get_ref() < 1 {
            return Err(self.error(Some(v.span()), format!("{what} must be >= 1")));
        }
        Ok(*v.get_ref() as usize)
    }
}
