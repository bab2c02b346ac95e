//! Scenario runner for the `crossdamp` library.
//!
//! `run` reads a TOML configuration, resolves it to absolute parameters,
//! executes the named scenario and writes data files followed by a
//! `manifest.json` with checksums.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use config::{Context, Source};
use error::{CliError, Result};
use manifest::{ConfigRecord, RunManifest};
use output::{Format, Outputs};

pub const DEFAULT_SEED: u64 = 1;

/// Command-line overrides; each takes precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let bytes = fs::read(config_path).map_err(|e| CliError::io(config_path, e))?;
    let name = config_path.display().to_string();
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Validation {
        file: name.clone(),
        location: None,
        message: "configuration is not valid UTF-8".into(),
    })?;
    let source = Source::new(name, text);
    let raw = source.parse()?;

    let scenario = scenarios::find(raw.scenario.get_ref()).ok_or_else(|| {
        let known: Vec<_> = scenarios::registry().iter().map(|s| s.name()).collect();
        source.error(
            Some(raw.scenario.span()),
            format!("unknown scenario {:?} (one of {})", raw.scenario.get_ref(), known.join(", ")),
        )
    })?;
    for (section, span) in raw.sections() {
        if !scenario.sections().contains(&section) {
            return Err(source.error(
                Some(span),
                format!("section [{section}] is not used by scenario {}", scenario.name()),
            ));
        }
    }

    let mut defaults = Vec::new();
    let seed = match (opts.seed, &raw.seed) {
        (Some(s), _) => s,
        (None, Some(s)) => u64::try_from(*s.get_ref())
            .map_err(|_| source.error(Some(s.span()), "seed must be a non-negative integer"))?,
        (None, None) => {
            defaults.push(format!("seed = {DEFAULT_SEED}"));
            DEFAULT_SEED
        }
    };
    let file_format = raw.output.as_ref().and_then(|o| o.format.as_ref());
    let format = match (opts.format, file_format) {
        (Some(f), _) => f,
        (None, Some(f)) => match f.get_ref().as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(source.error(Some(f.span()), format!("unknown format {other:?} (csv or json)"))),
        },
        (None, None) => {
            defaults.push("output.format = csv".into());
            Format::Csv
        }
    };
    let workers = match opts.workers {
        Some(0) => {
            return Err(CliError::Validation {
                file: "--workers".into(),
                location: None,
                message: "at least one worker is required".into(),
            })
        }
        Some(w) => w,
        None => {
            let w = std::thread::available_parallelism().map_or(1, |n| n.get());
            defaults.push(format!("workers = {w} (available parallelism)"));
            w
        }
    };
    let out_dir = match (&opts.out_dir, raw.output.as_ref().and_then(|o| o.dir.as_ref())) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => config_path.parent().unwrap_or(Path::new(".")).join(d),
        (None, None) => {
            let d = PathBuf::from("out").join(scenario.name());
            defaults.push(format!("output.dir = {}", d.display()));
            d
        }
    };

    let ctx = Context::new(&source, &raw, seed, format);
    let job = scenario.plan(&ctx)?;
    defaults.extend(ctx.defaults());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Verification(format!("cannot start worker pool: {e}")))?;
    let mut outputs = Outputs::create(&out_dir, format)?;
    pool.install(|| job.execute(&mut outputs)).map_err(|e| library_validation(e, &source.name))?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: scenario.name().into(),
        config: ConfigRecord {
            path: source.name.clone(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        },
        seed,
        workers,
        format: format.extension().into(),
        resolved: job.resolved(),
        defaults_applied: defaults,
        outputs: outputs.records().to_vec(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&out_dir)?;
    Ok(RunOutcome { out_dir, manifest })
}

/// Parameter-domain errors raised by the library are configuration errors.
fn library_validation(e: CliError, file: &str) -> CliError {
    match e {
        CliError::Numerical {
            scenario,
            source: source @ (crossdamp::Error::InvalidParameter { .. } | crossdamp::Error::NegativeTime(_)),
        } => CliError::Validation {
            file: file.to_string(),
            location: None,
            message: format!("scenario {scenario}: {source}"),
        },
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub sections: &'static [&'static str],
    pub fixture: &'static str,
}

/// Every registered scenario, in a fixed order.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    scenarios::registry()
        .iter()
        .map(|s| ScenarioInfo {
            name: s.name(),
            summary: s.summary(),
            sections: s.sections(),
            fixture: s.fixture(),
        })
        .collect()
}
