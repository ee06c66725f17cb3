use clap::{Args, Parser, Subcommand};
use crossdiff_cli::commands::{self, RunOutcome};
use crossdiff_cli::config::{parse_config, OutputFormat, RunConfig};
use crossdiff_cli::error::{CliError, CliResult};
use crossdiff_cli::presets::{self, Plan};
use crossdiff_cli::profile::ProfileSpec;
use crossdiff_cli::scan::ScanSpec;
use crossdiff_core::diagnostics::DEFAULT_SUPPORT_THRESHOLD;
use crossdiff_core::Grid;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crossdiff", version, about = "Two-species nonlocal cross-interaction solver")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the finite-volume scheme from a config file or preset.
    Simulate(SimulateArgs),
    /// Solve for a closed-form profile.
    Construct(ConstructArgs),
    /// Compare a finished run with a profile or with another run.
    Compare(CompareArgs),
    /// Parameter scans over the analytic families.
    Scan(ScanArgs),
    /// List or expand the built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Args)]
struct Source {
    /// Config file in `key = value` form.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Single run of a multi-run preset.
    #[arg(long, requires = "preset")]
    variant: Option<String>,
    /// Extra `key=value` line applied after the config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory; multi-run presets write one subdirectory per run.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Also write a gnuplot script.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct ConstructArgs {
    /// Profile family, or omit with --preset.
    #[arg(required_unless_present = "preset")]
    family: Option<String>,
    /// Parameters as `key=value`.
    params: Vec<String>,
    #[arg(long, conflicts_with = "family")]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Half-width of the sampling grid.
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long, default_value_t = 800)]
    cells: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directory (or its snapshots.csv).
    #[arg(long)]
    sim: PathBuf,
    /// profile.json written by `construct`.
    #[arg(long, group = "against_what")]
    profile: Option<PathBuf>,
    /// Use the reference profile of a simulation preset.
    #[arg(long, group = "against_what")]
    preset: Option<String>,
    #[arg(long, requires = "preset")]
    variant: Option<String>,
    /// Second run directory.
    #[arg(long, group = "against_what")]
    against: Option<PathBuf>,
    /// Support threshold as a fraction of the species maximum.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_THRESHOLD)]
    threshold: f64,
    /// Write comparison.json here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// bifurcation, envelopes or critical; omit with --preset.
    #[arg(required_unless_present = "preset")]
    kind: Option<String>,
    #[arg(long, conflicts_with = "kind")]
    preset: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    m1: f64,
    #[arg(long, default_value_t = 0.6)]
    m2: f64,
    #[arg(long, default_value_t = 0.5)]
    eps_min: f64,
    #[arg(long, default_value_t = 3.0)]
    eps_max: f64,
    /// Mass range for `critical`.
    #[arg(long, default_value_t = 0.25)]
    m_min: f64,
    #[arg(long, default_value_t = 4.0)]
    m_max: f64,
    #[arg(long, default_value_t = 51)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format when no --out is given.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Construct(a) => construct(a),
        Command::Compare(a) => compare(a),
        Command::Scan(a) => scan(a),
        Command::Preset { action } => {
            match action {
                PresetAction::List => print!("{}", commands::preset_listing()),
                PresetAction::Show { name } => print!("{}", commands::preset_text(&name)?),
            }
            Ok(())
        }
    }
}

/// Applies `--set` lines: a key already in `base` is replaced on its own line, others are appended.
fn with_overrides(base: String, set: &[String]) -> CliResult<String> {
    let key_of = |line: &str| -> Option<String> {
        let body = line.split('#').next().unwrap_or("");
        body.split_once('=').map(|(k, _)| k.trim().to_string())
    };
    let mut lines: Vec<String> = base.lines().map(String::from).collect();
    for s in set {
        let key = key_of(s).ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
        match lines.iter().position(|l| key_of(l).as_deref() == Some(key.as_str())) {
            Some(i) => lines[i] = s.clone(),
            None => lines.push(s.clone()),
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(text)
}

fn load_configs(src: &Source) -> CliResult<Vec<RunConfig>> {
    let bases: Vec<String> = match (&src.config, &src.preset) {
        (Some(path), _) => vec![std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?],
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            let Plan::Simulate(runs) = (p.plan)() else {
                return Err(CliError::Usage(format!(
                    "preset `{name}` is a {} preset; use `crossdiff {}`",
                    (p.plan)().kind(),
                    (p.plan)().kind()
                )));
            };
            match &src.variant {
                Some(v) => vec![format!("preset = {name}\nvariant = {v}\n")],
                None => runs
                    .iter()
                    .map(|r| format!("preset = {name}\nvariant = {}\n", r.label))
                    .collect(),
            }
        }
        (None, None) => return Err(CliError::Usage("simulate needs --config or --preset".into())),
    };
    bases
        .into_iter()
        .map(|b| Ok(parse_config(&with_overrides(b, &src.set)?)?))
        .collect()
}

fn brief(o: &RunOutcome) -> serde_json::Value {
    serde_json::json!({
        "label": o.label,
        "termination": o.termination,
        "steps": o.steps,
        "final_time": o.final_time,
        "last_rate": o.last_rate,
        "measured_speed": o.measured_speed,
        "comparison": o.comparison,
        "supports": o.supports,
        "shared_cells": o.shared_cells,
        "interior_overlap_cells": o.interior_overlap_cells,
        "final": o.series.last(),
        "files": o.files,
    })
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let configs = load_configs(&a.source)?;
    let outcomes = commands::simulate_all(&configs, a.out.as_deref(), a.format, a.gnuplot)?;
    let doc: Vec<_> = outcomes.iter().map(brief).collect();
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable outcome"));
    if let Some(o) = outcomes.iter().find(|o| o.rejected()) {
        return Err(CliError::Rejected(format!("{}: {:?}", o.label, o.termination)));
    }
    Ok(())
}

fn parse_pairs(params: &[String]) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{p}`")))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("parameter `{}` given twice", k.trim())));
        }
    }
    Ok(map)
}

fn construct(a: ConstructArgs) -> CliResult<()> {
    let list: Vec<(String, ProfileSpec)> = match (&a.family, &a.preset) {
        (Some(family), _) => {
            let pairs = parse_pairs(&a.params)?;
            let spec = ProfileSpec::from_pairs(family, &pairs).map_err(|issues| {
                CliError::Usage(
                    issues
                        .into_iter()
                        .map(|(k, m)| format!("{k}: {m}"))
                        .collect::<Vec<_>>()
                        .join("\n"),
                )
            })?;
            vec![(family.clone(), spec)]
        }
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            match (p.plan)() {
                Plan::Construct(list) => list,
                Plan::Simulate(runs) => runs
                    .into_iter()
                    .filter_map(|r| {
                        let eps = r.model.epsilon;
                        r.reference.map(|s| (r.label, s.with_default_epsilon(eps)))
                    })
                    .collect(),
                Plan::Scan(_) => return Err(CliError::Usage(format!("preset `{name}` is a scan; use `crossdiff scan`"))),
            }
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let mut docs = Vec::new();
    for (label, spec) in &list {
        let l = a.half_width.unwrap_or_else(|| commands::default_half_width(spec));
        let grid = Grid::new(l, a.cells)?;
        let dir = a
            .out
            .as_ref()
            .map(|d| if list.len() > 1 { d.join(label) } else { d.clone() });
        let file = commands::construct(spec, dir.as_deref(), &grid)?;
        docs.push(serde_json::json!({ "label": label, "spec": file.spec, "document": file.document }));
    }
    let doc = if docs.len() == 1 { docs.pop().unwrap() } else { serde_json::Value::Array(docs) };
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable profile"));
    Ok(())
}

fn preset_reference(name: &str, variant: Option<&str>) -> CliResult<ProfileSpec> {
    let mut text = format!("preset = {name}\n");
    if let Some(v) = variant {
        text.push_str(&format!("variant = {v}\n"));
    }
    let cfg = parse_config(&text)?;
    cfg.reference
        .map(|s| s.with_default_epsilon(cfg.model.epsilon))
        .ok_or_else(|| CliError::Usage(format!("preset `{name}` has no reference profile for this run")))
}

fn compare(a: CompareArgs) -> CliResult<()> {
    let run = commands::load_run(&a.sim)?;
    let result = if let Some(other) = &a.against {
        commands::compare_runs(&run, &commands::load_run(other)?, a.threshold)?
    } else {
        let spec = match (&a.profile, &a.preset) {
            (Some(p), _) => commands::load_profile(p)?.spec,
            (None, Some(name)) => preset_reference(name, a.variant.as_deref())?,
            (None, None) => return Err(CliError::Usage("compare needs --profile, --preset or --against".into())),
        };
        let built = spec.build()?;
        commands::compare_to_profile(&run, built.profile.as_ref(), a.threshold)?
    };
    let text = serde_json::to_string_pretty(&result).expect("serializable comparison");
    emit(a.out.as_deref(), "comparison.json", &text)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> CliResult<()> {
    match out {
        Some(dir) => {
            crossdiff_cli::output::ensure_dir(dir)?;
            crossdiff_cli::output::write_file(dir, name, text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn scan(a: ScanArgs) -> CliResult<()> {
    let spec = match (&a.kind, &a.preset) {
        (Some(k), _) => match k.as_str() {
            "bifurcation" => ScanSpec::Bifurcation {
                m1: a.m1,
                m2: a.m2,
                eps_min: a.eps_min,
                eps_max: a.eps_max,
                steps: a.steps,
            },
            "envelopes" => ScanSpec::Envelopes {
                m1: a.m1,
                m2: a.m2,
                eps_min: a.eps_min,
                eps_max: a.eps_max,
                steps: a.steps,
            },
            "critical" => ScanSpec::Critical {
                m_min: a.m_min,
                m_max: a.m_max,
                steps: a.steps,
            },
            other => {
                return Err(CliError::Usage(format!(
                    "unknown scan `{other}` (expected bifurcation, envelopes or critical)"
                )))
            }
        },
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            match (p.plan)() {
                Plan::Scan(s) => s,
                other => {
                    return Err(CliError::Usage(format!(
                        "preset `{name}` is a {} preset; use `crossdiff {}`",
                        other.kind(),
                        other.kind()
                    )))
                }
            }
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let table = commands::scan(&spec, a.out.as_deref())?;
    if a.out.is_none() {
        if a.format.json() {
            println!("{}", serde_json::to_string_pretty(&table).expect("serializable table"));
        } else {
            print!("{}", table.to_csv());
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&table.summary).expect("serializable summary"));
    }
    Ok(())
}
