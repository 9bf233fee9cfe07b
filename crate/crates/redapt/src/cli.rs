//! The `redapt` command line: `check`, `run` and `verify`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::engine::EngineConfig;
use crate::hrcs::{
    export::{read_trace_csv, read_vehicles_json},
    run_adaptive, spec_trace, write_artifacts, ScenarioConfig,
};
use crate::spec::{check_wellformed, evaluate, parse_document, EntityKind, Env, SpecDocument, Verdict};

pub const EXIT_OK: u8 = 0;
/// Diagnostics, violations, or configuration errors, depending on the
/// command.
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_IO_OR_FORMAT: u8 = 2;
pub const EXIT_PLAN_FAILED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "redapt", version, about = "Check AGM specifications, run and verify the crossing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a specification and report well-formedness diagnostics.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run a scenario under the adaptation engine and write artifacts.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        engine_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate every goal and softgoal invariant over a recorded trace.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Scenario the trace came from; supplies the driving-time threshold.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO_OR_FORMAT } else { EXIT_OK };
        }
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    match cli.command {
        Command::Check { spec } => cmd_check(&spec, &mut err),
        Command::Run {
            spec,
            scenario,
            engine_config,
            out: output_dir,
            seed,
        } => {
            let manifest = RunManifest {
                spec_path: spec,
                scenario_path: scenario,
                engine_config_path: engine_config,
                output_dir,
                seed,
            };
            cmd_run(&manifest, &mut err)
        }
        Command::Verify {
            spec,
            trace,
            scenario,
        } => cmd_verify(&spec, &trace, scenario.as_deref(), &mut out, &mut err),
    }
}

/// `check`: exit 0 when the file parses and has no diagnostics, 1 when it
/// has any, 2 when it cannot be read.
pub fn cmd_check(spec_path: &Path, err: &mut dyn Write) -> u8 {
    let text = match fs::read_to_string(spec_path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", spec_path.display());
            return EXIT_IO_OR_FORMAT;
        }
    };
    let file = spec_path.display();
    let doc = match parse_document(&text) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "{file}:{e}");
            return EXIT_FAILURE;
        }
    };
    let diags = check_wellformed(&doc);
    for d in &diags {
        let _ = writeln!(err, "{file}:{d}");
    }
    if diags.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub spec_path: PathBuf,
    pub scenario_path: PathBuf,
    pub engine_config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
}

/// Everything a run needs, loaded and validated.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub doc: SpecDocument,
    pub scenario: ScenarioConfig,
    pub engine: EngineConfig,
}

impl RunManifest {
    pub fn load(&self) -> Result<LoadedManifest, String> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
        let spec_text = read(&self.spec_path)?;
        let doc = parse_document(&spec_text)
            .map_err(|e| format!("{}:{e}", self.spec_path.display()))?;
        if let Some(d) = check_wellformed(&doc).first() {
            return Err(format!("{}:{d}", self.spec_path.display()));
        }
        let mut scenario = ScenarioConfig::from_json(&read(&self.scenario_path)?)
            .map_err(|e| format!("{}: {e}", self.scenario_path.display()))?;
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        let engine = match &self.engine_config_path {
            None => EngineConfig::default(),
            Some(p) => {
                let cfg: EngineConfig = serde_json::from_str(&read(p)?)
                    .map_err(|e| format!("{}: {e}", p.display()))?;
                cfg.validate().map_err(|e| format!("{}: {e}", p.display()))?;
                cfg
            }
        };
        Ok(LoadedManifest {
            doc,
            scenario,
            engine,
        })
    }
}

/// `run`: exit 0 when the run completes, 1 on configuration or
/// specification errors, 3 when some cycle could not find a plan.
pub fn cmd_run(manifest: &RunManifest, err: &mut dyn Write) -> u8 {
    let loaded = match manifest.load() {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_FAILURE;
        }
    };
    let run = match run_adaptive(&loaded.doc, &loaded.scenario, &loaded.engine) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = write_artifacts(&manifest.output_dir, &run) {
        let _ = writeln!(err, "{}: {e}", manifest.output_dir.display());
        return EXIT_IO_OR_FORMAT;
    }
    info!(
        "{}: {} cycles, {} adaptations",
        loaded.scenario.name,
        run.summary.cycles,
        run.summary.adaptations()
    );
    if run.summary.plan_failures > 0 {
        EXIT_PLAN_FAILED
    } else {
        EXIT_OK
    }
}

/// One evaluated invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantVerdict {
    pub entity: String,
    pub formula: String,
    pub verdict: Verdict,
}

/// Evaluates the invariant of every goal, adaptive goal and softgoal in
/// `doc` at the start of the trace in `trace_path`, which must have its
/// `vehicles.json` next to it.
pub fn verify_trace(
    doc: &SpecDocument,
    trace_path: &Path,
    p_threshold: f64,
) -> Result<Vec<InvariantVerdict>, String> {
    let open = |p: &Path| File::open(p).map_err(|e| format!("{}: {e}", p.display()));
    let mut trace = read_trace_csv(open(trace_path)?)
        .map_err(|e| format!("{}: {e}", trace_path.display()))?;
    if trace.rows.is_empty() {
        return Err(format!("{}: trace has no rows", trace_path.display()));
    }
    let vehicles_path = trace_path.with_file_name("vehicles.json");
    trace.vehicles = read_vehicles_json(open(&vehicles_path)?)
        .map_err(|e| format!("{}: {e}", vehicles_path.display()))?;
    let states = spec_trace(&trace, p_threshold);
    let env = Env::from_document(doc);
    let kinds = [EntityKind::Goal, EntityKind::AdaptiveGoal, EntityKind::Softgoal];
    let mut out = Vec::new();
    for e in &doc.entities {
        let Some(inv) = e.invariant.as_ref().filter(|_| kinds.contains(&e.kind)) else {
            continue;
        };
        let verdict = evaluate(inv, &states, 0, &env).map_err(|err| format!("`{}`: {err}", e.name))?;
        out.push(InvariantVerdict {
            entity: e.name.clone(),
            formula: crate::spec::pretty_formula(inv),
            verdict,
        });
    }
    Ok(out)
}

/// `verify`: exit 0 when no invariant is violated, 1 when one is, 2 on
/// unreadable or malformed input.
pub fn cmd_verify(
    spec_path: &Path,
    trace_path: &Path,
    scenario_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let loaded = fs::read_to_string(spec_path)
        .map_err(|e| format!("{}: {e}", spec_path.display()))
        .and_then(|t| parse_document(&t).map_err(|e| format!("{}:{e}", spec_path.display())))
        .and_then(|doc| {
            let threshold = match scenario_path {
                None => ScenarioConfig::default().p_time_threshold,
                Some(p) => fs::read_to_string(p)
                    .map_err(|e| e.to_string())
                    .and_then(|t| ScenarioConfig::from_json(&t).map_err(|e| e.to_string()))
                    .map_err(|e| format!("{}: {e}", p.display()))?
                    .p_time_threshold,
            };
            verify_trace(&doc, trace_path, threshold)
        });
    let verdicts = match loaded {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return EXIT_IO_OR_FORMAT;
        }
    };
    for v in &verdicts {
        let _ = writeln!(out, "{}: {}: {}", v.entity, v.formula, v.verdict);
    }
    if verdicts.iter().any(|v| v.verdict == Verdict::Viol) {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}
