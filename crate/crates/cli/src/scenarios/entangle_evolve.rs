use crossdamp::entanglement::{entangled_time, evolve_y, EntanglementStart, SqueezedThermalSpec};
use serde::Serialize;

use super::{column_refs, curve_label, numerical, series_columns, series_row, to_json, Job, Scenario};
use crate::config::{Context, ModelSpec, Spacing, TimeDefault, TimeGrid, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct EntangleEvolve;

const NAME: &str = "entangle-evolve";

/// Reads `[entangle]`; unset occupations follow the reservoir.
pub(super) fn start(ctx: &Context, model: &ModelSpec) -> Result<EntanglementStart> {
    let section = ctx.entangle()?;
    let raw = section.get_ref();
    let occupation = |value: &Option<toml::Spanned<f64>>, key: &str| match value {
        Some(v) => *v.get_ref(),
        None => {
            ctx.record_default(format!("entangle.{key} = model nbar ({})", model.nbar));
            model.nbar
        }
    };
    let ion1_nbar = occupation(&raw.ion1_nbar, "ion1_nbar");
    let ion2_nbar = occupation(&raw.ion2_nbar, "ion2_nbar");
    let ion2 = SqueezedThermalSpec::new(ion2_nbar, *raw.r.get_ref())
        .map_err(|e| ctx.error(Some(section.span()), e.to_string()))?;
    let start = EntanglementStart { ion1_nbar, ion2 };
    start.state().map_err(|e| ctx.error(Some(section.span()), e.to_string()))?;
    Ok(start)
}

impl Scenario for EntangleEvolve {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "separability function Y(t) from a thermal ion and a squeezed thermal ion"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/entangle-evolve.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "entangle", "time"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let start = start(ctx, &model)?;
        let time = ctx.time_grid(
            &model,
            TimeDefault {
                start: 0.0,
                stop: 10.0,
                points: 1001,
                unit: TimeUnit::InverseGamma,
                spacing: Spacing::Linear,
            },
        )?;
        Ok(Box::new(EvolveJob { model, start, time }))
    }
}

#[derive(Serialize)]
struct EvolveJob {
    model: ModelSpec,
    start: EntanglementStart,
    time: TimeGrid,
}

#[derive(Serialize)]
struct CurveSummary {
    curve: String,
    gamma12_over_gamma: f64,
    entangled_seconds: f64,
    min_y: f64,
    min_y_t_seconds: f64,
}

impl Job for EvolveJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(self)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let columns = series_columns(&["y", "y_transposed", "i1", "i2", "i3", "i4", "entangled"]);
        let mut table = out.table("entanglement", &column_refs(&columns))?;
        let mut summary = Vec::new();
        for curve in &self.model.curves {
            let samples = evolve_y(&self.start, &self.model.params(curve), &self.time.seconds).map_err(numerical(NAME))?;
            for (i, s) in samples.iter().enumerate() {
                let y = &s.invariant;
                let cells = [y.y, y.y_transposed, y.i1, y.i2, y.i3, y.i4]
                    .into_iter()
                    .map(Cell::Num)
                    .chain([Cell::from(y.entangled())]);
                table.row(&series_row(curve, &self.time, i, cells))?;
            }
            let lowest = samples
                .iter()
                .min_by(|a, b| a.invariant.y.total_cmp(&b.invariant.y))
                .expect("non-empty grid");
            summary.push(CurveSummary {
                curve: curve_label(curve),
                gamma12_over_gamma: curve.gamma12_over_gamma,
                entangled_seconds: entangled_time(&samples),
                min_y: lowest.invariant.y,
                min_y_t_seconds: lowest.t,
            });
        }
        out.finish(table)?;
        out.json("entanglement_summary.json", &summary)
    }
}
