use crossdamp::entanglement::{scan, AxisGrid, ScanAxis, ScanFixed};
use serde::Serialize;

use super::{numerical, to_json, Job, Scenario};
use crate::config::Context;
use crate::error::{CliError, Result};
use crate::output::{Cell, Outputs};

pub struct EntangleScan;

const NAME: &str = "entangle-scan";
const AXES: [ScanAxis; 4] = [
    ScanAxis::Time,
    ScanAxis::CrossRatio,
    ScanAxis::InverseTemperature,
    ScanAxis::Squeezing,
];

impl Scenario for EntangleScan {
    fn name(&self) -> &'static str {
        NAME
    }

    fn summary(&self) -> &'static str {
        "sign of Y on a grid over two or three of time, gamma12/gamma, temperature and squeezing"
    }

    fn fixture(&self) -> &'static str {
        include_str!("../../configs/entangle-scan.toml")
    }

    fn sections(&self) -> &'static [&'static str] {
        &["model", "initial", "scan"]
    }

    fn plan(&self, ctx: &Context) -> Result<Box<dyn Job>> {
        let model = ctx.model()?;
        let section = ctx.scan()?;
        let raw = section.get_ref();
        if !(2..=3).contains(&raw.axes.len()) {
            return Err(ctx.error(Some(section.span()), "scan two or three axes"));
        }
        let mut axes: Vec<AxisGrid> = Vec::new();
        for spanned in &raw.axes {
            let a = spanned.get_ref();
            let axis = AXES.iter().copied().find(|x| x.label() == a.axis.get_ref()).ok_or_else(|| {
                let known: Vec<_> = AXES.iter().map(|x| x.label()).collect();
                ctx.error(
                    Some(a.axis.span()),
                    format!("unknown axis {:?} (one of {})", a.axis.get_ref(), known.join(", ")),
                )
            })?;
            if axes.iter().any(|g| g.axis == axis) {
                return Err(ctx.error(Some(a.axis.span()), format!("axis {} repeated", axis.label())));
            }
            let values = match (&a.values, &a.start, &a.stop, &a.points) {
                (Some(v), None, None, None) => v.clone(),
                (None, Some(start), Some(stop), Some(points)) => {
                    let n = ctx.count(points, "points")?;
                    let (x0, x1) = (*start.get_ref(), *stop.get_ref());
                    if n > 1 && x1 <= x0 {
                        return Err(ctx.error(Some(stop.span()), "stop must exceed start"));
                    }
                    (0..n)
                        .map(|i| if n == 1 { x0 } else { x0 + (x1 - x0) * i as f64 / (n - 1) as f64 })
                        .collect()
                }
                _ => {
                    return Err(ctx.error(
                        Some(spanned.span()),
                        "give either values = [...] or start, stop and points",
                    ))
                }
            };
            if values.is_empty() || !values.windows(2).all(|w| w[1] > w[0]) {
                return Err(ctx.error(Some(spanned.span()), "axis values must be non-empty and increasing"));
            }
            let bad = match axis {
                ScanAxis::Time => values.iter().any(|&v| v < 0.0),
                ScanAxis::CrossRatio => values.iter().any(|&v| !(0.0..=1.0).contains(&v)),
                ScanAxis::InverseTemperature => values.iter().any(|&v| v <= 0.0),
                ScanAxis::Squeezing => values.iter().any(|v| !v.is_finite()),
            };
            if bad {
                return Err(ctx.error(Some(spanned.span()), format!("values out of range for axis {}", axis.label())));
            }
            axes.push(AxisGrid { axis, values });
        }
        let scanned = |axis| axes.iter().any(|g| g.axis == axis);

        if model.curves.len() != 1 && !scanned(ScanAxis::CrossRatio) {
            return Err(ctx.error(Some(section.span()), "give one gamma12 value or scan gamma12_over_gamma"));
        }
        let inverse_temperature = match model.temperature_ratio {
            Some(x) => x,
            None if model.nbar > 0.0 => (1.0 / model.nbar).ln_1p(),
            None if scanned(ScanAxis::InverseTemperature) => 1.0,
            None => return Err(ctx.error(Some(section.span()), "a zero-temperature reservoir cannot be scanned")),
        };
        let r = match (&raw.r, scanned(ScanAxis::Squeezing)) {
            (Some(r), _) => *r.get_ref(),
            (None, true) => 0.0,
            (None, false) => {
                ctx.record_default("scan.r = 2.0");
                2.0
            }
        };
        let gamma_t = match (&raw.gamma_t, scanned(ScanAxis::Time)) {
            (Some(g), _) => *g.get_ref(),
            (None, true) => 0.0,
            (None, false) => {
                ctx.record_default("scan.gamma_t = 1.0");
                1.0
            }
        };
        if !(gamma_t >= 0.0) {
            return Err(ctx.error(Some(section.span()), "gamma_t must be >= 0"));
        }
        let initial_nbar = if ctx.raw.initial.is_some() {
            Some(ctx.initial()?)
        } else {
            ctx.record_default("initial occupations of both ions follow the reservoir at each grid point");
            None
        };
        let fixed = ScanFixed {
            coupling: model.coupling,
            gamma: model.gamma,
            gamma_t,
            cross_ratio: model.curves[0].gamma12_over_gamma,
            inverse_temperature,
            r,
            initial_nbar,
        };
        Ok(Box::new(ScanJob { axes, fixed }))
    }
}

#[derive(Serialize)]
struct ScanJob {
    axes: Vec<AxisGrid>,
    fixed: ScanFixed,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    axes: &'a [AxisGrid],
    fixed: &'a ScanFixed,
    points: usize,
    entangled_points: usize,
    min_y: f64,
}

impl Job for ScanJob {
    fn resolved(&self) -> serde_json::Value {
        to_json(self)
    }

    fn execute(&self, out: &mut Outputs) -> Result<()> {
        let mut columns: Vec<&str> = self.axes.iter().map(|g| g.axis.label()).collect();
        columns.extend(["y", "entangled"]);
        let mut table = out.table("scan", &columns)?;
        let dims = self.axes.len();
        let (mut entangled, mut min_y) = (0usize, f64::INFINITY);
        let mut write_error: Option<CliError> = None;
        let points = scan(&self.axes, &self.fixed, |row| {
            for p in row {
                entangled += usize::from(p.entangled);
                min_y = min_y.min(p.y);
                let mut cells: Vec<Cell> = p.coords[..dims].iter().map(|&c| Cell::Num(c)).collect();
                cells.extend([Cell::Num(p.y), Cell::from(p.entangled)]);
                if let Err(e) = table.row(&cells) {
                    write_error = Some(e);
                    return Err(crossdamp::Error::Degenerate("output write failed".into()));
                }
            }
            Ok(())
        });
        if let Some(e) = write_error {
            return Err(e);
        }
        let points = points.map_err(numerical(NAME))?;
        out.finish(table)?;
        out.json(
            "scan.json",
            &Sidecar {
                axes: &self.axes,
                fixed: &self.fixed,
                points,
                entangled_points: entangled,
                min_y,
            },
        )
    }
}
