use crossdamp::inference::fim_thermal;
use rayon::prelude::*;
use serde::Serialize;

use super::{column_refs, numerical, series_columns, series_row, to_json, Job, Scenario, Series};
use crate::config::{Context, Spacing, TimeDefault, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct Fim;

const NAME: &str = "fim";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub(super) enum View {
    Raw,
    Dimensionless,
}

/// Reads `[fim]`: the view and the 1-based entries to report.
pub(super) fn fim_options(ctx: &Context) -> Result<(View, Vec<(usize, usize)>)> {
    let raw = ctx.fim().map(|s| s.get_ref());
    let view = match raw.and_then(|f| f.view.as_ref()) {
        None => {
            ctx.record_default("fim.view = raw");
            View::Raw
        }
        Some(v) => match v.get_ref().as_str() {
            "raw" => View::Raw,
            "dimensionless" => View::Dimensionless,
            other => return Err(ctx.error(Some(v.span()), format!("unknown view {other:?} (raw or dimensionless)"))),
        },
    };
    let pairs = match raw.and_then(|f| f.pairs.as_ref()) {
        None => {
            ctx.record_default("fim.pairs = every entry F_ab with a <= b");
            (1..=6).flat_map(|a| (a..=6).map(move |b| (a, b))).collect()
        }
        Some(p) => {
            if p.get_ref().is_empty() {
                return Err(ctx.error(Some(p.span()), "pairs must not be empty"));
            }
            let mut out = Vec::new();
            for &[a, b] in p.get_ref() {
                if !(1..=6).contains(&a) || !(1..=6).contains(&b) {
                    return Err(ctx.error(Some(p.span()), format!("entry [{a}, {b}] out of range 1..=6")));
                }
                out.push((a.min(b) as usize, a.max(b) as usize));
            }
            out
        }
    };
    Ok((view, pairs))
}

impl Scenario for Fim {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "Fisher information entries for the ion-1 phonon statistics over time"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/fim.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "time", "fim"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let initial = ctx.initial()?;
        let time = ctx.time_grid(
            &model,
            TimeDefault {
                start: 0.0,
                stop: 50.0,
                points: 501,
                unit: TimeUnit::InverseGamma,
                spacing: Spacing::Linear,
            },
        )?;
        let (view, pairs) = fim_options(ctx)?;
        Ok(Box::new(FimJob {
            series: Series { model, initial, time },
            view,
            pairs,
        }))
    }
}

#[derive(Serialize)]
struct FimJob {
    #[serde(flatten)]
    series: Series,
    view: View,
    pairs: Vec<(usize, usize)>,
}

impl Job for FimJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(self)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let names: Vec<String> = self.pairs.iter().map(|(a, b)| format!("F{a}{b}")).collect();
        let columns = series_columns(&column_refs(&names));
        let mut table = out.table("fim", &column_refs(&columns))?;
        let s = &self.series;
        for curve in &s.model.curves {
            let theta = s.theta(curve).map_err(numerical(NAME))?;
            let scales = theta.natural_scales();
            let rows: Vec<Vec<f64>> = s
                .time
                .seconds
                .par_iter()
                .map(|&t| {
                    let mut f = fim_thermal(&theta, t)?;
                    if self.view == View::Dimensionless {
                        f = f.dimensionless(&scales);
                    }
                    Ok(self.pairs.iter().map(|&(a, b)| f.get(a - 1, b - 1)).collect())
                })
                .collect::<crossdamp::Result<_>>()
                .map_err(numerical(NAME))?;
            for (i, values) in rows.into_iter().enumerate() {
                table.row(&series_row(curve, &s.time, i, values.into_iter().map(Cell::Num)))?;
            }
        }
        out.finish(table)
    }
}
