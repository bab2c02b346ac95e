use crossdamp::inference::{crb, fim_thermal};
use rayon::prelude::*;
use serde::Serialize;

use super::{column_refs, numerical, series_columns, series_row, to_json, Job, Scenario, Series, PARAM_KEYS};
use crate::config::{Context, Spacing, TimeDefault, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct Crb;

const NAME: &str = "crb";

impl Scenario for Crb {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "Cramer-Rao bounds for M repetitions, with the rank of the Fisher matrix"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/crb.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "time", "crb"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let initial = ctx.initial()?;
        let time = ctx.time_grid(
            &model,
            TimeDefault {
                start: 1.0,
                stop: 50.0,
                points: 50,
                unit: TimeUnit::InverseGamma,
                spacing: Spacing::Linear,
            },
        )?;
        let section = ctx.crb()?;
        let repetitions = ctx.count(&section.get_ref().repetitions, "crb.repetitions")? as u64;
        Ok(Box::new(CrbJob {
            series: Series { model, initial, time },
            repetitions,
        }))
    }
}

#[derive(Serialize)]
struct CrbJob {
    #[serde(flatten)]
    series: Series,
    repetitions: u64,
}

impl Job for CrbJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(self)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let names: Vec<String> = PARAM_KEYS.iter().map(|k| format!("crb_{k}")).collect();
        let mut values = column_refs(&names);
        values.extend(["rank", "singular"]);
        let columns = series_columns(&values);
        let mut table = out.table("crb", &column_refs(&columns))?;
        let s = &self.series;
        for curve in &s.model.curves {
            let theta = s.theta(curve).map_err(numerical(NAME))?;
            let reports = s
                .time
                .seconds
                .par_iter()
                .map(|&t| crb(&fim_thermal(&theta, t)?, self.repetitions))
                .collect::<crossdamp::Result<Vec<_>>>()
                .map_err(numerical(NAME))?;
            for (i, r) in reports.into_iter().enumerate() {
                let cells = r
                    .per_parameter
                    .iter()
                    .map(|&b| Cell::from(b))
                    .chain([Cell::from(r.rank), Cell::from(r.singular)]);
                table.row(&series_row(curve, &s.time, i, cells))?;
            }
        }
        out.finish(table)
    }
}
