use crossdamp::inference::{dfs_null_scaling, fim_thermal, DfsNullReport, GAMMA, GAMMA12};
use serde::Serialize;

use super::{numerical, to_json, Job, Scenario, Series};
use crate::config::{Context, Spacing, TimeDefault, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct DfsNull;

const NAME: &str = "dfs-null";

impl Scenario for DfsNull {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "late-time growth of the rate information at gamma12 = gamma (null-detector fit)"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/dfs-null.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "time"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let span = ctx.raw.model.as_ref().map(|m| m.span());
        if model.curves.len() != 1 || model.curves[0].gamma12 != model.gamma {
            return Err(ctx.error(span, "dfs-null needs exactly one cross-damping value equal to gamma"));
        }
        let initial = ctx.initial()?;
        if (0.5 * (initial.0 + initial.1) - model.nbar).abs() <= 1e-12 * model.nbar {
            return Err(ctx.error(
                ctx.raw.initial.as_ref().map(|i| i.span()),
                "mean initial occupation equals nbar: no late-time rate information",
            ));
        }
        let time = ctx.time_grid(
            &model,
            TimeDefault {
                start: 10.0,
                stop: 100.0,
                points: 46,
                unit: TimeUnit::InverseGamma,
                spacing: Spacing::Log,
            },
        )?;
        if time.points < 2 || time.seconds[0] * model.gamma < 10.0 * (1.0 - 1e-12) {
            return Err(ctx.error(
                ctx.raw.time.as_ref().map(|t| t.span()),
                "the fit grid needs at least two times, starting at or after t = 10/gamma",
            ));
        }
        Ok(Box::new(DfsJob(Series { model, initial, time })))
    }
}

#[derive(Serialize)]
struct DfsJob(Series);

#[derive(Serialize)]
struct Report<'a> {
    #[serde(flatten)]
    fit: &'a DfsNullReport,
    t_first: f64,
}

impl Job for DfsJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(&self.0)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let s = &self.0;
        let theta = s.theta(&s.model.curves[0]).map_err(numerical(NAME))?;
        let report = dfs_null_scaling(&theta, &s.time.seconds).map_err(numerical(NAME))?;
        let columns = ["t", "t_seconds", "F44", "F45", "F55", "F_gamma_plus", "F_gamma_minus"];
        let mut table = out.table("dfs_null", &columns)?;
        for (i, &t) in s.time.seconds.iter().enumerate() {
            let f = fim_thermal(&theta, t).map_err(numerical(NAME))?;
            let view = f.collective_view();
            let values = [
                s.time.values[i],
                t,
                f.get(GAMMA, GAMMA),
                f.get(GAMMA, GAMMA12),
                f.get(GAMMA12, GAMMA12),
                view[0][0],
                view[1][1],
            ];
            table.row(&values.map(Cell::Num))?;
        }
        out.finish(table)?;
        out.json(
            "dfs_null_report.json",
            &Report {
                fit: &report,
                t_first: s.time.seconds[0],
            },
        )
    }
}
