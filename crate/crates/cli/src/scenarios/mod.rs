//! Scenario registry.
//!
//! A [`Scenario`] turns a parsed configuration into a [`Job`]. Planning does
//! all validation, so a job that reaches `execute` only fails on numerical
//! grounds and no artifact is created for an invalid configuration.

use crossdamp::inference::ParamVector;
use serde::Serialize;

use crate::config::{Context, Curve, ModelSpec, TimeGrid};
use crate::error::{CliError, Result};
use crate::output::{format_number, Cell, Outputs};

mod crb;
mod dfs_null;
mod entangle_evolve;
mod entangle_scan;
mod fim;
mod mle;
mod population;

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Annotated default configuration.
    fn fixture(&self) -> &'static str;
    /// Sections this scenario reads, besides `[output]`.
    fn sections(&self) -> &'static [&'static str];
    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>>;
}

pub trait Job: Send + Sync {
    /// Absolute parameters for the manifest.
    fn resolved(&self) -> serde_json::Value;
    fn execute(&self, out: &mut Outputs) -> Result<()>;
}

pub fn registry() -> Vec<Box<dyn Scenario>> {
    vec![
        Box::new(population::Population),
        Box::new(fim::Fim),
        Box::new(crb::Crb),
        Box::new(mle::Mle),
        Box::new(entangle_evolve::EntangleEvolve),
        Box::new(entangle_scan::EntangleScan),
        Box::new(dfs_null::DfsNull),
    ]
}

pub fn find(name: &str) -> Option<Box<dyn Scenario>> {
    registry().into_iter().find(|s| s.name() == name)
}

fn numerical(scenario: &'static str) -> impl Fn(crossdamp::Error) -> CliError {
    move |source| CliError::Numerical { scenario, source }
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("resolved parameters serialise")
}

pub(crate) fn curve_label(curve: &Curve) -> String {
    format!("gamma12/gamma={}", format_number(curve.gamma12_over_gamma))
}

/// Leading columns of every time-series table.
const SERIES_COLUMNS: [&str; 4] = ["curve", "gamma12_over_gamma", "t", "t_seconds"];

fn series_columns(values: &[&str]) -> Vec<String> {
    SERIES_COLUMNS.iter().chain(values).map(|s| s.to_string()).collect()
}

fn series_row(curve: &Curve, grid: &TimeGrid, i: usize, values: impl IntoIterator<Item = Cell>) -> Vec<Cell> {
    let mut row = vec![
        Cell::Text(curve_label(curve)),
        Cell::Num(curve.gamma12_over_gamma),
        Cell::Num(grid.values[i]),
        Cell::Num(grid.seconds[i]),
    ];
    row.extend(values);
    row
}

fn column_refs(columns: &[String]) -> Vec<&str> {
    columns.iter().map(String::as_str).collect()
}

/// Model, thermal start and time grid: the common shape of the
/// time-series scenarios.
#[derive(Debug, Clone, Serialize)]
struct Series {
    model: ModelSpec,
    initial: (f64, f64),
    time: TimeGrid,
}

impl Series {
    fn theta(&self, curve: &Curve) -> crossdamp::Result<ParamVector> {
        ParamVector::from_model(self.initial, &self.model.params(curve))
    }
}

/// Parameter names accepted in configuration files, in parameter-vector order.
pub(crate) const PARAM_KEYS: [&str; 6] = ["n1", "n2", "coupling", "gamma", "gamma12", "nbar"];
