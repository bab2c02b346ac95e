use crossdamp::inference::{mle_harness, MleConfig, ParamVector};
use serde::Serialize;

use super::{numerical, to_json, Job, Scenario, PARAM_KEYS};
use crate::config::{Context, Curve, ModelSpec, TimeUnit};
use crate::error::Result;
use crate::output::{Cell, Outputs};

pub struct Mle;

const NAME: &str = "mle";

impl Scenario for Mle {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "Monte-Carlo maximum-likelihood estimates of one parameter against its Cramer-Rao bound"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/mle.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "mle"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let initial = ctx.initial()?;
        let section = ctx.mle()?;
        let raw = section.get_ref();
        if model.curves.len() != 1 {
            return Err(ctx.error(Some(section.span()), "mle needs exactly one gamma12 value"));
        }
        let target = PARAM_KEYS
            .iter()
            .position(|k| k == raw.target.get_ref())
            .ok_or_else(|| {
                ctx.error(
                    Some(raw.target.span()),
                    format!("unknown target {:?} (one of {})", raw.target.get_ref(), PARAM_KEYS.join(", ")),
                )
            })?;
        let unit = match &raw.unit {
            Some(u) => ctx.time_unit(u)?,
            None => {
                ctx.record_default("mle.unit = inverse-gamma");
                TimeUnit::InverseGamma
            }
        };
        let t = ctx.to_seconds(&model, *raw.time.get_ref(), unit, raw.time.span())?;
        let repetitions = ctx.count(&raw.repetitions, "mle.repetitions")?;
        let trials = ctx.count(&raw.trials, "mle.trials")?;
        let [lo, hi] = *raw.bracket.get_ref();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ctx.error(Some(raw.bracket.span()), "bracket must be [lo, hi] with lo < hi"));
        }
        let curve = model.curves[0].clone();
        let truth = ParamVector::from_model(initial, &model.params(&curve))
            .map_err(|e| ctx.error(Some(section.span()), e.to_string()))?;
        Ok(Box::new(MleJob {
            model,
            curve,
            initial,
            target: PARAM_KEYS[target],
            t,
            repetitions,
            trials,
            bracket: (lo, hi),
            seed: ctx.seed,
            config: MleConfig {
                truth,
                t,
                repetitions,
                trials,
                target,
                bracket: (lo, hi),
                seed: ctx.seed,
            },
        }))
    }
}

#[derive(Serialize)]
struct MleJob {
    model: ModelSpec,
    curve: Curve,
    initial: (f64, f64),
    target: &'static str,
    t: f64,
    repetitions: usize,
    trials: usize,
    bracket: (f64, f64),
    seed: u64,
    #[serde(skip)]
    config: MleConfig,
}

#[derive(Serialize)]
struct Summary<'a> {
    target: &'a str,
    truth: f64,
    t_seconds: f64,
    repetitions: usize,
    trials: usize,
    seed: u64,
    mean: f64,
    bias: f64,
    variance: Option<f64>,
    bias_standard_error: Option<f64>,
    crb: f64,
    variance_ratio: Option<f64>,
}

impl Job for MleJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(self)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let report = mle_harness(&self.config).map_err(numerical(NAME))?;
        let mut table = out.table("mle_estimates", &["trial", "estimate"])?;
        for (i, &e) in report.estimates.iter().enumerate() {
            table.row(&[Cell::from(i), Cell::Num(e)])?;
        }
        out.finish(table)?;
        out.json(
            "mle_report.json",
            &Summary {
                target: self.target,
                truth: report.truth,
                t_seconds: self.t,
                repetitions: self.repetitions,
                trials: self.trials,
                seed: self.seed,
                mean: report.mean,
                bias: report.bias,
                variance: report.variance,
                bias_standard_error: report.bias_standard_error,
                crb: report.crb,
                variance_ratio: report.variance_ratio,
            },
        )
    }
}
