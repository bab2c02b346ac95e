use crossdamp::dynamics::{population, Ion};
use rayon::prelude::*;

use super::{column_refs, numerical, series_columns, series_row, to_json, Job, Scenario, Series};
use crate::config::{Context, Spacing, TimeDefault, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct Population;

const NAME: &str = "population";

impl Scenario for Population {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "mean phonon numbers of both ions for thermal starts, one curve per gamma12/gamma"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/population.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "time"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let initial = ctx.initial()?;
        let time = ctx.time_grid(
            &model,
            TimeDefault {
                start: 0.0,
                stop: 200.0,
                points: 401,
                unit: TimeUnit::InverseGamma,
                spacing: Spacing::Linear,
            },
        )?;
        Ok(Box::new(PopulationJob(Series { model, initial, time })))
    }
}

struct PopulationJob(Series);

impl Job for PopulationJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(&self.0)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let job = &self.0;
        let columns = series_columns(&["n1", "n2"]);
        let mut table = out.table("population", &column_refs(&columns))?;
        for curve in &job.model.curves {
            let params = job.model.params(curve);
            let values: Vec<(f64, f64)> = job
                .time
                .seconds
                .par_iter()
                .map(|&t| {
                    Ok((
                        population(Ion::One, job.initial, &params, t)?,
                        population(Ion::Two, job.initial, &params, t)?,
                    ))
                })
                .collect::<crossdamp::Result<_>>()
                .map_err(numerical(NAME))?;
            for (i, (n1, n2)) in values.into_iter().enumerate() {
                table.row(&series_row(curve, &job.time, i, [Cell::Num(n1), Cell::Num(n2)]))?;
            }
        }
        out.finish(table)
    }
}
