//! The four verbs, callable without the argument parser.

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{self, AtomicFile, RecordingSink};
use crate::presets::{self, Plan};
use crate::profile::ProfileSpec;
use crate::scan::{run_scan, ScanSpec, ScanTable};
use crossdiff_core::analytic::{Profile, ProfileDocument};
use crossdiff_core::diagnostics::{
    extract_support, interior_overlap_cells, measure_speed, shared_cells, ProfileComparison, DEFAULT_SUPPORT_THRESHOLD,
};
use crossdiff_core::{DiagnosticsReport, Grid, Simulator, SystemState, Termination};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct Supports {
    pub rho: Vec<(f64, f64)>,
    pub eta: Vec<(f64, f64)>,
}

impl Supports {
    pub fn of(state: &SystemState, threshold: f64) -> crossdiff_core::Result<Self> {
        Ok(Self {
            rho: extract_support(&state.rho, &state.grid, threshold)?,
            eta: extract_support(&state.eta, &state.grid, threshold)?,
        })
    }
}

/// Everything a simulation produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub label: String,
    pub termination: Termination,
    pub steps: usize,
    pub last_rate: f64,
    pub final_time: f64,
    pub measured_speed: Option<f64>,
    pub comparison: Option<ProfileComparison>,
    pub supports: Supports,
    pub shared_cells: usize,
    pub interior_overlap_cells: usize,
    pub series: Vec<DiagnosticsReport>,
    #[serde(skip)]
    pub final_state: SystemState,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn rejected(&self) -> bool {
        matches!(self.termination, Termination::StepRejected { .. })
    }
}

/// Runs one config, writing files into `out` when given.
///
/// The output directory is created before the run starts, and every file is
/// written under a temporary name and renamed once complete.
pub fn simulate(config: &RunConfig, out: Option<&Path>, format: OutputFormat, gnuplot: bool) -> CliResult<RunOutcome> {
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
    }
    let built = config.reference()?;
    let reference: Option<&dyn Profile> = built.as_ref().map(|b| b.profile.as_ref() as &dyn Profile);
    let state0 = config.initial_state()?;
    let sim = Simulator::new(config.model.clone(), config.grid());
    let csv = match out {
        Some(dir) if format.csv() => Some(AtomicFile::create(dir.join(output::SNAPSHOTS))?),
        _ => None,
    };
    let mut sink = RecordingSink::new(csv, reference)?;
    log::info!("{}: running to t = {}", config.label, config.controls.t_end);
    let summary = sim.run_with_sink(&state0, &config.controls, &mut sink)?;
    let measured_speed = sink.speed();
    let (csv_path, mut series, _, _) = sink.finish()?;
    if let Some(last) = series.last_mut() {
        last.measured_speed = measured_speed;
    }
    let fin = summary.final_state;
    let comparison = reference.map(|p| output::final_comparison(&fin, p)).transpose()?;
    let outcome = RunOutcome {
        label: config.label.clone(),
        termination: summary.termination,
        steps: summary.steps,
        last_rate: summary.last_rate,
        final_time: fin.time,
        measured_speed,
        comparison,
        supports: Supports::of(&fin, DEFAULT_SUPPORT_THRESHOLD)?,
        shared_cells: shared_cells(&fin, DEFAULT_SUPPORT_THRESHOLD),
        interior_overlap_cells: interior_overlap_cells(&fin, DEFAULT_SUPPORT_THRESHOLD),
        series,
        final_state: fin,
        files: csv_path.into_iter().collect(),
    };
    let Some(dir) = out else {
        return Ok(outcome);
    };
    let mut outcome = outcome;
    if format.csv() {
        outcome
            .files
            .push(output::write_file(dir, output::SUMMARY, &output::summary_csv(&outcome.series))?);
    }
    if format.json() {
        let doc = serde_json::json!({
            "config": config,
            "outcome": &outcome,
        });
        let text = serde_json::to_string_pretty(&doc).expect("serializable report");
        outcome.files.push(output::write_file(dir, output::REPORT, &text)?);
    }
    let shift = outcome.comparison.map(|c| c.shift).unwrap_or(0.0);
    let text = output::final_csv(&outcome.final_state, reference.map(|p| (p, shift)));
    outcome.files.push(output::write_file(dir, output::FINAL, &text)?);
    if gnuplot {
        let script = output::gnuplot_script(&config.label, reference.is_some());
        outcome.files.push(output::write_file(dir, output::PLOT, &script)?);
    }
    Ok(outcome)
}

/// Runs every config, in `out/<label>` when there is more than one.
pub fn simulate_all(
    configs: &[RunConfig],
    out: Option<&Path>,
    format: Option<OutputFormat>,
    gnuplot: bool,
) -> CliResult<Vec<RunOutcome>> {
    let mut outcomes = Vec::with_capacity(configs.len());
    for c in configs {
        let dir = out
            .map(Path::to_path_buf)
            .or_else(|| c.output.dir.clone())
            .map(|d| if configs.len() > 1 { d.join(&c.label) } else { d });
        let fmt = format.unwrap_or(c.output.format);
        outcomes.push(simulate(c, dir.as_deref(), fmt, gnuplot || c.output.gnuplot)?);
    }
    Ok(outcomes)
}

/// Written by `construct` and read by `compare`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileFile {
    pub spec: ProfileSpec,
    pub document: ProfileDocument,
}

pub fn default_half_width(spec: &ProfileSpec) -> f64 {
    match spec {
        ProfileSpec::TwoPulse { .. } | ProfileSpec::ThreePulse { .. } => 12.0,
        _ => 3.0,
    }
}

/// Solves for a profile and, with `out`, writes `profile.json` and a sampled `profile.csv`.
pub fn construct(spec: &ProfileSpec, out: Option<&Path>, grid: &Grid) -> CliResult<ProfileFile> {
    let built = spec.build()?;
    let file = ProfileFile {
        spec: spec.clone(),
        document: built.document,
    };
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        let json = serde_json::to_string_pretty(&file).expect("serializable profile");
        output::write_file(dir, "profile.json", &json)?;
        output::write_file(dir, "profile.csv", &sampled_csv(built.profile.as_ref(), grid))?;
    }
    Ok(file)
}

pub fn sampled_csv(profile: &dyn Profile, grid: &Grid) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("x,rho,eta\n");
    for &x in grid.centers() {
        let (r, e) = profile.eval(x);
        let _ = writeln!(s, "{x:?},{r:?},{e:?}");
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportMismatch {
    /// Largest endpoint distance per species, when the interval counts agree.
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub numeric: Supports,
    pub reference: Supports,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedMismatch {
    pub measured: f64,
    pub reference: f64,
    /// Relative to the reference speed, absolute when that is zero.
    pub mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub time: f64,
    pub dx: f64,
    pub l1: f64,
    pub linf: f64,
    pub l1_over_dx: f64,
    /// Translation applied to the reference.
    pub shift: f64,
    pub support: SupportMismatch,
    pub speed: Option<SpeedMismatch>,
}

fn endpoint_gap(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    (a.len() == b.len()).then(|| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p.0 - q.0).abs().max((p.1 - q.1).abs()))
            .fold(0.0, f64::max)
    })
}

fn mismatch(measured: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        measured.abs()
    } else {
        ((measured - reference) / reference).abs()
    }
}

fn trajectory_speed(snapshots: &[SystemState]) -> Option<f64> {
    let (t, x): (Vec<f64>, Vec<f64>) = snapshots
        .iter()
        .filter_map(|s| crossdiff_core::diagnostics::center_of_mass(&s.rho, &s.grid).map(|c| (s.time, c)))
        .unzip();
    if t.len() < 2 * crossdiff_core::diagnostics::MIN_SPEED_SAMPLES {
        return None;
    }
    measure_speed(&t, &x).ok()
}

/// Last snapshot of a run against an analytic profile.
pub fn compare_to_profile(snapshots: &[SystemState], profile: &dyn Profile, threshold: f64) -> CliResult<Comparison> {
    let fin = snapshots.last().ok_or_else(|| CliError::Usage("no snapshots to compare".into()))?;
    let c = output::final_comparison(fin, profile)?;
    let dx = fin.grid.dx();
    let numeric = Supports::of(fin, threshold)?;
    let moved = profile.speed() * fin.time + c.shift;
    let s = profile.supports();
    let shift = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| (a + moved, b + moved)).collect::<Vec<_>>();
    let reference = Supports {
        rho: shift(&s.rho),
        eta: shift(&s.eta),
    };
    let speed = trajectory_speed(snapshots).map(|v| SpeedMismatch {
        measured: v,
        reference: profile.speed(),
        mismatch: mismatch(v, profile.speed()),
    });
    Ok(Comparison {
        time: fin.time,
        dx,
        l1: c.l1,
        linf: c.linf,
        l1_over_dx: c.l1 / dx,
        shift: c.shift,
        support: SupportMismatch {
            rho: endpoint_gap(&numeric.rho, &reference.rho),
            eta: endpoint_gap(&numeric.eta, &reference.eta),
            numeric,
            reference,
        },
        speed,
    })
}

/// Last snapshots of two runs against each other, without translation.
pub fn compare_runs(a: &[SystemState], b: &[SystemState], threshold: f64) -> CliResult<Comparison> {
    let (fa, fb) = match (a.last(), b.last()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(CliError::Usage("no snapshots to compare".into())),
    };
    if !fa.grid.matches(&fb.grid) {
        return Err(CliError::Domain(crossdiff_core::Error::InvalidArgument(format!(
            "grid mismatch: {} cells on [-{}, {}] against {} cells on [-{}, {}]",
            fa.grid.len(),
            fa.grid.half_width(),
            fa.grid.half_width(),
            fb.grid.len(),
            fb.grid.half_width(),
            fb.grid.half_width()
        ))));
    }
    let dx = fa.grid.dx();
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for (x, y) in [(&fa.rho, &fb.rho), (&fa.eta, &fb.eta)] {
        let mut m: f64 = 0.0;
        for (p, q) in x.values().iter().zip(y.values()) {
            l1 += dx * (p - q).abs();
            m = m.max((p - q).abs());
        }
        linf += m;
    }
    let sa = Supports::of(fa, threshold)?;
    let sb = Supports::of(fb, threshold)?;
    let speed = trajectory_speed(a).zip(trajectory_speed(b)).map(|(va, vb)| SpeedMismatch {
        measured: va,
        reference: vb,
        mismatch: mismatch(va, vb),
    });
    Ok(Comparison {
        time: fa.time,
        dx,
        l1,
        linf,
        l1_over_dx: l1 / dx,
        shift: 0.0,
        support: SupportMismatch {
            rho: endpoint_gap(&sa.rho, &sb.rho),
            eta: endpoint_gap(&sa.eta, &sb.eta),
            numeric: sa,
            reference: sb,
        },
        speed,
    })
}

pub fn load_run(dir: &Path) -> CliResult<Vec<SystemState>> {
    let p = if dir.is_dir() { dir.join(output::SNAPSHOTS) } else { dir.to_path_buf() };
    output::read_snapshots(&p)
}

pub fn load_profile(path: &Path) -> CliResult<ProfileFile> {
    let p = if path.is_dir() { path.join("profile.json") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(&p, e.to_string()))
}

pub fn scan(spec: &ScanSpec, out: Option<&Path>) -> CliResult<ScanTable> {
    let table = run_scan(spec)?;
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_file(dir, "scan.csv", &table.to_csv())?;
        let json = serde_json::to_string_pretty(&serde_json::json!({ "spec": spec, "summary": table.summary }))
            .expect("serializable summary");
        output::write_file(dir, "scan_summary.json", &json)?;
    }
    Ok(table)
}

/// Lines for `preset list`.
pub fn preset_listing() -> String {
    let mut s = String::new();
    for p in presets::all() {
        s.push_str(&format!("{:<22} {:<9} {}\n", p.name, (p.plan)().kind(), p.summary));
    }
    s
}

/// The expanded preset: config text per run, profile parameters, or scan spec.
pub fn preset_text(name: &str) -> CliResult<String> {
    let p = presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
    let mut s = format!("# {}: {}\n", p.name, p.summary);
    match (p.plan)() {
        Plan::Simulate(runs) => {
            for r in runs {
                s.push_str(&format!("\n# variant {}\npreset = {}\nvariant = {}\n", r.label, p.name, r.label));
                for line in r.to_text().lines() {
                    s.push_str(&format!("# {line}\n"));
                }
            }
        }
        Plan::Construct(list) => {
            for (label, spec) in list {
                s.push_str(&format!("\n# {label}\nfamily = {}\n", spec.family()));
                for (k, v) in spec.to_pairs() {
                    s.push_str(&format!("{k} = {v}\n"));
                }
            }
        }
        Plan::Scan(spec) => {
            s.push_str(&serde_json::to_string_pretty(&spec).expect("serializable scan"));
            s.push('\n');
        }
    }
    Ok(s)
}
