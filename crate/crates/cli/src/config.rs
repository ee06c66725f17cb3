//! `section.key = value` run configuration.
//!
//! ```text
//! # Batman run
//! preset = batman_fig4_1        # optional base; later keys override it
//! variant = main                # selects one run of a multi-run preset
//! grid.half_width = 3
//! grid.cells = 800
//! model.epsilon = 0.12
//! model.interaction = attractive_attractive   # or attractive_repulsive
//! model.w12 = abs                             # quadratic | abs | power:P | power_norm:P | morse:P, optional leading -
//! initial.rho = -0.5:0:1.2                    # lo:hi:density pieces separated by ;
//! initial.eta = 0:0.5:0.2
//! initial.rho_mass = 0.6                      # optional rescaling to a total mass
//! initial.from_reference = false              # start from the reference profile instead
//! initial.shift = 0
//! reference.family = batman                   # analytic profile to compare against
//! reference.m1 = 0.6
//! reference.m2 = 0.1
//! controls.t_end = 100
//! controls.steady_tol = 1e-8
//! controls.cfl_safety = 0.9
//! controls.dt_max = 0.1
//! controls.snapshot_interval = 1
//! controls.diffusion_limit = true
//! output.dir = out/batman
//! output.format = both                        # csv | json | both
//! output.gnuplot = true
//! ```

use crate::error::{ConfigErrors, ConfigIssue};
use crate::presets::{self, Plan};
use crate::profile::{Built, ProfileSpec};
use crossdiff_core::projection::project_segments;
use crossdiff_core::{CellField, Grid, ModelParams, PotentialSpec, Segment, StepControls, SystemState};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_CELLS: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub half_width: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialConfig {
    Segments { rho: Vec<Segment>, eta: Vec<Segment> },
    /// The reference profile translated by `shift`.
    Reference { shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            format: OutputFormat::Both,
            gnuplot: false,
        }
    }
}

/// A fully validated simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub label: String,
    pub grid: GridConfig,
    pub model: ModelParams,
    pub initial: InitialConfig,
    /// Always carries an explicit epsilon once validated.
    pub reference: Option<ProfileSpec>,
    pub controls: StepControls,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.half_width, self.grid.cells).expect("validated grid")
    }

    pub fn reference(&self) -> crossdiff_core::Result<Option<Built>> {
        self.reference.as_ref().map(|r| r.build()).transpose()
    }

    pub fn initial_state(&self) -> crossdiff_core::Result<SystemState> {
        let g = self.grid();
        match &self.initial {
            InitialConfig::Segments { rho, eta } => {
                SystemState::new(g.clone(), project_segments(rho, &g)?, project_segments(eta, &g)?, 0.0)
            }
            InitialConfig::Reference { shift } => {
                let built = self.reference()?.ok_or_else(|| {
                    crossdiff_core::Error::InvalidArgument("initial data refers to a missing reference".into())
                })?;
                crossdiff_core::analytic::project_profile(built.profile.as_ref(), &g, *shift)
            }
        }
    }

    /// The config in the text format; `parse_config` of the result gives it back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("label", self.label.clone());
        kv("grid.half_width", self.grid.half_width.to_string());
        kv("grid.cells", self.grid.cells.to_string());
        kv("model.epsilon", self.model.epsilon.to_string());
        kv("model.w11", self.model.w11.to_string());
        kv("model.w12", self.model.w12.to_string());
        kv("model.w21", self.model.w21.to_string());
        kv("model.w22", self.model.w22.to_string());
        match &self.initial {
            InitialConfig::Segments { rho, eta } => {
                kv("initial.rho", format_segments(rho));
                kv("initial.eta", format_segments(eta));
            }
            InitialConfig::Reference { shift } => {
                kv("initial.from_reference", "true".into());
                kv("initial.shift", shift.to_string());
            }
        }
        if let Some(r) = &self.reference {
            kv("reference.family", r.family().into());
            for (k, v) in r.to_pairs() {
                kv(&format!("reference.{k}"), v);
            }
        }
        let c = &self.controls;
        kv("controls.t_end", c.t_end.to_string());
        kv("controls.steady_tol", c.steady_tol.to_string());
        kv("controls.cfl_safety", c.cfl_safety.to_string());
        kv("controls.dt_max", c.dt_max.to_string());
        kv("controls.snapshot_interval", c.snapshot_interval.to_string());
        kv("controls.diffusion_limit", c.diffusion_limit.to_string());
        if let Some(d) = &self.output.dir {
            kv("output.dir", d.display().to_string());
        }
        kv("output.format", self.output.format.as_str().into());
        kv("output.gnuplot", self.output.gnuplot.to_string());
        s
    }
}

pub fn format_segments(segs: &[Segment]) -> String {
    if segs.is_empty() {
        return "none".into();
    }
    segs.iter()
        .map(|s| format!("{}:{}:{}", s.lo, s.hi, s.value))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn parse_segments(text: &str) -> Result<Vec<Segment>, String> {
    let t = text.trim();
    if t == "none" || t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(';')
        .map(|piece| {
            let parts: Vec<&str> = piece.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("expected lo:hi:density, got `{}`", piece.trim()));
            }
            let mut v = [0.0; 3];
            for (slot, p) in v.iter_mut().zip(&parts) {
                *slot = p
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("`{p}` is not a finite number"))?;
            }
            if !(v[0] < v[1]) {
                return Err(format!("segment {}:{} has lo >= hi", v[0], v[1]));
            }
            if v[2] < 0.0 {
                return Err(format!("segment density {} is negative", v[2]));
            }
            Ok(Segment::new(v[0], v[1], v[2]))
        })
        .collect()
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn strip_quotes(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

fn tokenize(text: &str, issues: &mut Vec<ConfigIssue>) -> Vec<Entry> {
    let mut out: Vec<Entry> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            issues.push(ConfigIssue {
                line: Some(line),
                key: body.to_string(),
                message: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim().to_string();
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            issues.push(ConfigIssue {
                line: Some(line),
                key: key.clone(),
                message: format!("duplicate key (first set on line {})", prev.line),
            });
            continue;
        }
        out.push(Entry {
            line,
            key,
            value: strip_quotes(value).to_string(),
        });
    }
    out
}

/// Mutable draft filled from a preset and then from the file's keys.
struct Draft {
    label: String,
    half_width: f64,
    cells: usize,
    epsilon: Option<f64>,
    w: [PotentialSpec; 4],
    rho: Option<Vec<Segment>>,
    eta: Option<Vec<Segment>>,
    rho_mass: Option<f64>,
    eta_mass: Option<f64>,
    from_reference: bool,
    shift: f64,
    ref_family: Option<String>,
    ref_pairs: BTreeMap<String, String>,
    controls: StepControls,
    output: OutputConfig,
    lines: BTreeMap<String, usize>,
}

impl Draft {
    fn empty() -> Self {
        let aa = ModelParams::attractive_attractive(1.0).expect("valid");
        Self {
            label: "run".into(),
            half_width: DEFAULT_HALF_WIDTH,
            cells: DEFAULT_CELLS,
            epsilon: None,
            w: [aa.w11, aa.w12, aa.w21, aa.w22],
            rho: None,
            eta: None,
            rho_mass: None,
            eta_mass: None,
            from_reference: false,
            shift: 0.0,
            ref_family: None,
            ref_pairs: BTreeMap::new(),
            controls: StepControls::default(),
            output: OutputConfig::default(),
            lines: BTreeMap::new(),
        }
    }

    fn from_config(c: &RunConfig) -> Self {
        let mut d = Self::empty();
        d.label = c.label.clone();
        d.half_width = c.grid.half_width;
        d.cells = c.grid.cells;
        d.epsilon = Some(c.model.epsilon);
        d.w = [c.model.w11, c.model.w12, c.model.w21, c.model.w22];
        match &c.initial {
            InitialConfig::Segments { rho, eta } => {
                d.rho = Some(rho.clone());
                d.eta = Some(eta.clone());
            }
            InitialConfig::Reference { shift } => {
                d.from_reference = true;
                d.shift = *shift;
            }
        }
        if let Some(r) = &c.reference {
            d.ref_family = Some(r.family().to_string());
            d.ref_pairs = r.to_pairs();
            // a preset reference follows later epsilon overrides
            if r.epsilon() == Some(c.model.epsilon) {
                d.ref_pairs.remove("epsilon");
            }
        }
        d.controls = c.controls;
        d.output = c.output.clone();
        d
    }

    fn issue(&self, key: &str, message: impl Into<String>) -> ConfigIssue {
        ConfigIssue {
            line: self.lines.get(key).copied(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn apply(&mut self, e: &Entry) -> Result<(), String> {
        let v = e.value.as_str();
        let num = || -> Result<f64, String> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("expected a number, got `{v}`"))
        };
        let boolean = || -> Result<bool, String> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(format!("expected true or false, got `{v}`")),
            }
        };
        let pot = || -> Result<PotentialSpec, String> { v.parse::<PotentialSpec>().map_err(|e| e.to_string()) };
        match e.key.as_str() {
            "label" => self.label = v.to_string(),
            "grid.half_width" => self.half_width = num()?,
            "grid.cells" => {
                self.cells = v
                    .parse::<usize>()
                    .map_err(|_| format!("expected a whole number, got `{v}`"))?
            }
            "model.epsilon" => self.epsilon = Some(num()?),
            "model.interaction" => {
                let p = match v {
                    "attractive_attractive" => ModelParams::attractive_attractive(1.0),
                    "attractive_repulsive" => ModelParams::attractive_repulsive(1.0),
                    _ => return Err(format!("expected attractive_attractive or attractive_repulsive, got `{v}`")),
                }
                .expect("valid");
                self.w = [p.w11, p.w12, p.w21, p.w22];
            }
            "model.w11" => self.w[0] = pot()?,
            "model.w12" => self.w[1] = pot()?,
            "model.w21" => self.w[2] = pot()?,
            "model.w22" => self.w[3] = pot()?,
            "initial.rho" => self.rho = Some(parse_segments(v)?),
            "initial.eta" => self.eta = Some(parse_segments(v)?),
            "initial.rho_mass" => self.rho_mass = Some(num()?),
            "initial.eta_mass" => self.eta_mass = Some(num()?),
            "initial.from_reference" => self.from_reference = boolean()?,
            "initial.shift" => self.shift = num()?,
            "reference.family" => {
                if self.ref_family.as_deref() != Some(v) {
                    self.ref_pairs.clear();
                }
                self.ref_family = Some(v.to_string());
            }
            "controls.t_end" => self.controls.t_end = num()?,
            "controls.steady_tol" => self.controls.steady_tol = num()?,
            "controls.cfl_safety" => self.controls.cfl_safety = num()?,
            "controls.dt_max" => self.controls.dt_max = num()?,
            "controls.snapshot_interval" => self.controls.snapshot_interval = num()?,
            "controls.diffusion_limit" => self.controls.diffusion_limit = boolean()?,
            "output.dir" => self.output.dir = Some(PathBuf::from(v)),
            "output.format" => {
                self.output.format = match v {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    "both" => OutputFormat::Both,
                    _ => return Err(format!("expected csv, json or both, got `{v}`")),
                }
            }
            "output.gnuplot" => self.output.gnuplot = boolean()?,
            k => match k.strip_prefix("reference.") {
                Some(p) if !p.is_empty() => {
                    self.ref_pairs.insert(p.to_string(), v.to_string());
                }
                _ => return Err("unknown key".into()),
            },
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig, Vec<ConfigIssue>> {
        let mut issues = Vec::new();
        if !(self.half_width > 0.0) {
            issues.push(self.issue("grid.half_width", format!("must be positive, got {}", self.half_width)));
        }
        if self.cells < 2 {
            issues.push(self.issue("grid.cells", format!("need at least 2 cells, got {}", self.cells)));
        }
        let model = match self.epsilon {
            None => {
                issues.push(self.issue("model.epsilon", "required"));
                None
            }
            Some(eps) => match ModelParams::new(eps, self.w[0], self.w[1], self.w[2], self.w[3]) {
                Ok(m) => Some(m),
                Err(e) => {
                    issues.push(self.issue("model.epsilon", e.to_string()));
                    None
                }
            },
        };
        let reference = match &self.ref_family {
            None => {
                for k in self.ref_pairs.keys() {
                    let key = format!("reference.{k}");
                    issues.push(self.issue(&key, "reference.family is not set"));
                }
                None
            }
            Some(fam) => match ProfileSpec::from_pairs(fam, &self.ref_pairs) {
                Ok(spec) => {
                    let spec = match &model {
                        Some(m) => spec.with_default_epsilon(m.epsilon),
                        None => spec,
                    };
                    if spec.epsilon().is_some() {
                        if let Err(e) = spec.build() {
                            issues.push(self.issue("reference.family", e.to_string()));
                        }
                    }
                    Some(spec)
                }
                Err(list) => {
                    for (k, msg) in list {
                        let key = if k == "family" { k } else { format!("reference.{k}") };
                        issues.push(self.issue(&key, msg));
                    }
                    None
                }
            },
        };
        let initial = if self.from_reference {
            if self.ref_family.is_none() {
                issues.push(self.issue("initial.from_reference", "needs reference.family"));
            }
            for k in ["initial.rho", "initial.eta", "initial.rho_mass", "initial.eta_mass"] {
                if self.lines.contains_key(k) {
                    issues.push(self.issue(k, "conflicts with initial.from_reference = true"));
                }
            }
            Some(InitialConfig::Reference { shift: self.shift })
        } else {
            let mut species = |key: &str, segs: &Option<Vec<Segment>>, mass_key: &str, mass: Option<f64>| {
                let Some(segs) = segs else {
                    issues.push(self.issue(key, "required (or set initial.from_reference = true)"));
                    return None;
                };
                let l = self.half_width;
                for s in segs {
                    if s.lo < -l - 1e-12 || s.hi > l + 1e-12 {
                        issues.push(self.issue(key, format!("segment {}:{} leaves the domain [-{l}, {l}]", s.lo, s.hi)));
                        return None;
                    }
                }
                let total: f64 = segs.iter().map(|s| s.mass()).sum();
                match mass {
                    None => Some(segs.clone()),
                    Some(m) if !(m >= 0.0) => {
                        issues.push(self.issue(mass_key, format!("must be non-negative, got {m}")));
                        None
                    }
                    Some(m) if total <= 0.0 && m > 0.0 => {
                        issues.push(self.issue(mass_key, "cannot rescale a zero density"));
                        None
                    }
                    Some(m) => {
                        let f = if total > 0.0 { m / total } else { 0.0 };
                        Some(segs.iter().map(|s| Segment::new(s.lo, s.hi, s.value * f)).collect())
                    }
                }
            };
            let rho = species("initial.rho", &self.rho, "initial.rho_mass", self.rho_mass);
            let eta = species("initial.eta", &self.eta, "initial.eta_mass", self.eta_mass);
            rho.zip(eta).map(|(rho, eta)| InitialConfig::Segments { rho, eta })
        };
        let c = &self.controls;
        if !(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0) {
            issues.push(self.issue("controls.cfl_safety", format!("must lie in (0, 1], got {}", c.cfl_safety)));
        }
        for (k, v) in [
            ("controls.t_end", c.t_end),
            ("controls.steady_tol", c.steady_tol),
            ("controls.dt_max", c.dt_max),
        ] {
            if !(v > 0.0) {
                issues.push(self.issue(k, format!("must be positive, got {v}")));
            }
        }
        if !(c.snapshot_interval >= 0.0) {
            issues.push(self.issue("controls.snapshot_interval", "must be non-negative"));
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        Ok(RunConfig {
            label: self.label,
            grid: GridConfig {
                half_width: self.half_width,
                cells: self.cells,
            },
            model: model.expect("checked"),
            initial: initial.expect("checked"),
            reference,
            controls: self.controls,
            output: self.output,
        })
    }
}

/// Parses and validates a config, reporting every problem with its line.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let entries = tokenize(text, &mut issues);
    let find = |k: &str| entries.iter().find(|e| e.key == k);
    let mut draft = match find("preset") {
        None => {
            if let Some(v) = find("variant") {
                issues.push(ConfigIssue {
                    line: Some(v.line),
                    key: "variant".into(),
                    message: "only meaningful together with preset".into(),
                });
            }
            Draft::empty()
        }
        Some(p) => match preset_base(&p.value, find("variant").map(|v| v.value.as_str())) {
            Ok(c) => Draft::from_config(&c),
            Err(msg) => {
                let (line, key) = match find("variant") {
                    Some(v) if msg.contains("variant") => (v.line, "variant"),
                    _ => (p.line, "preset"),
                };
                issues.push(ConfigIssue {
                    line: Some(line),
                    key: key.into(),
                    message: msg,
                });
                Draft::empty()
            }
        },
    };
    for e in &entries {
        draft.lines.insert(e.key.clone(), e.line);
    }
    for e in &entries {
        if e.key == "preset" || e.key == "variant" {
            continue;
        }
        if let Err(message) = draft.apply(e) {
            issues.push(ConfigIssue {
                line: Some(e.line),
                key: e.key.clone(),
                message,
            });
        }
    }
    let had_syntax_issues = !issues.is_empty();
    match draft.finish() {
        Ok(c) if !had_syntax_issues => Ok(c),
        Ok(_) => Err(ConfigErrors(issues)),
        Err(more) => {
            // keep one message per key, syntax problems first
            for m in more {
                if !issues.iter().any(|i| i.key == m.key) {
                    issues.push(m);
                }
            }
            issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
            Err(ConfigErrors(issues))
        }
    }
}

fn preset_base(name: &str, variant: Option<&str>) -> Result<RunConfig, String> {
    let preset = presets::find(name).ok_or_else(|| {
        format!(
            "unknown preset `{name}` (available: {})",
            presets::all().iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
        )
    })?;
    let Plan::Simulate(runs) = (preset.plan)() else {
        return Err(format!("preset `{name}` does not describe a simulation"));
    };
    match variant {
        None => Ok(runs.into_iter().next().expect("non-empty preset")),
        Some(v) => {
            let labels: Vec<String> = runs.iter().map(|r| r.label.clone()).collect();
            runs.into_iter()
                .find(|r| r.label == v)
                .ok_or_else(|| format!("unknown variant `{v}` (available: {})", labels.join(", ")))
        }
    }
}

/// Initial state of `config` with the per-species cell fields.
pub fn initial_fields(config: &RunConfig) -> crossdiff_core::Result<(CellField, CellField)> {
    let s = config.initial_state()?;
    Ok((s.rho, s.eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model.epsilon = 0.3\ninitial.rho = -0.5:0:1\ninitial.eta = 0:0.5:1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.controls.cfl_safety, 0.9);
        assert_eq!(c.controls.steady_tol, 1e-8);
        assert_eq!(c.grid.half_width, DEFAULT_HALF_WIDTH);
        assert_eq!(c.grid.cells, DEFAULT_CELLS);
        assert_eq!(c.model, ModelParams::attractive_attractive(0.3).unwrap());
        assert!(c.reference.is_none());
        assert_eq!(c.output.format, OutputFormat::Both);
    }

    #[test]
    fn negative_epsilon_names_the_key_and_line() {
        let e = parse_config("initial.rho = -0.5:0:1\nmodel.epsilon = -1\ninitial.eta = 0:0.5:1\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].key, "model.epsilon");
        assert_eq!(e.0[0].line, Some(2));
        assert!(e.to_string().contains("line 2: model.epsilon"));
    }

    #[test]
    fn every_violation_is_reported() {
        let text = "grid.cells = many\nmodel.epsilon = 0.2\nmodel.colour = red\ncontrols.cfl_safety = 1.5\ninitial.rho = 1:0:1\ninitial.eta = 0:0.5:1\nbroken line\n";
        let e = parse_config(text).unwrap_err();
        let keys: Vec<(Option<usize>, &str)> = e.0.iter().map(|i| (i.line, i.key.as_str())).collect();
        assert_eq!(
            keys,
            [
                (Some(1), "grid.cells"),
                (Some(3), "model.colour"),
                (Some(4), "controls.cfl_safety"),
                (Some(5), "initial.rho"),
                (Some(7), "broken line"),
            ]
        );
        assert!(e.0[1].message.contains("unknown key"));
    }

    #[test]
    fn duplicate_and_missing_keys() {
        let e = parse_config("model.epsilon = 1\nmodel.epsilon = 2\n").unwrap_err();
        assert!(e.0.iter().any(|i| i.line == Some(2) && i.message.contains("duplicate")));
        assert!(e.0.iter().any(|i| i.key == "initial.rho" && i.line.is_none()));
    }

    #[test]
    fn preset_expands_and_accepts_overrides() {
        let c = parse_config("preset = \"two_pulse_fig4_10\"\n").unwrap();
        match c.reference {
            Some(ProfileSpec::TwoPulse { m, x0, .. }) => {
                assert_eq!(m, 1.0);
                assert_eq!(x0, 3.0);
            }
            ref other => panic!("{other:?}"),
        }
        match &c.initial {
            InitialConfig::Segments { rho, eta } => {
                let mass = |s: &[Segment]| s.iter().map(|x| x.mass()).sum::<f64>();
                assert!((mass(rho) - 1.0).abs() < 1e-15 && (mass(eta) - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.grid.half_width, 12.0);
        let o = parse_config("preset = two_pulse_fig4_10\ngrid.cells = 400\nmodel.epsilon = 0.2\n").unwrap();
        assert_eq!(o.grid.cells, 400);
        assert_eq!(o.reference.unwrap().epsilon(), Some(0.2));
    }

    #[test]
    fn preset_variants() {
        let c = parse_config("preset = eps_sweep_fig4_9\nvariant = eps_0.5\n").unwrap();
        assert_eq!(c.model.epsilon, 0.5);
        let e = parse_config("preset = eps_sweep_fig4_9\nvariant = nope\n").unwrap_err();
        assert_eq!(e.0[0].key, "variant");
        let e = parse_config("preset = bifurcation_fig4_4\n").unwrap_err();
        assert_eq!(e.0[0].key, "preset");
        let e = parse_config("preset = nothing\n").unwrap_err();
        assert!(e.0[0].message.contains("unknown preset"));
    }

    #[test]
    fn mass_rescaling_and_reference_initial_data() {
        let c = parse_config(&format!("{MINIMAL}initial.rho_mass = 0.6\n")).unwrap();
        let (rho, _) = initial_fields(&c).unwrap();
        let g = c.grid();
        assert!((crossdiff_core::diagnostics::total_mass(&rho, &g) - 0.6).abs() < 1e-12);
        let r = parse_config(
            "model.epsilon = 0.12\ninitial.from_reference = true\nreference.family = batman\nreference.m1 = 0.6\nreference.m2 = 0.1\n",
        )
        .unwrap();
        assert_eq!(r.reference.as_ref().unwrap().epsilon(), Some(0.12));
        let (rho, eta) = initial_fields(&r).unwrap();
        let g = r.grid();
        assert!((crossdiff_core::diagnostics::total_mass(&rho, &g) - 0.6).abs() < 1e-8);
        assert!((crossdiff_core::diagnostics::total_mass(&eta, &g) - 0.1).abs() < 1e-8);
    }

    #[test]
    fn reference_errors_are_keyed() {
        let e = parse_config(&format!("{MINIMAL}reference.family = segregated\nreference.m1 = 1\nreference.m2 = 1\nreference.M2 = 5\n"))
            .unwrap_err();
        assert_eq!(e.0[0].key, "reference.family");
        assert!(e.0[0].message.contains("fails"), "{}", e);
        let e = parse_config(&format!("{MINIMAL}reference.m1 = 1\n")).unwrap_err();
        assert_eq!(e.0[0].key, "reference.m1");
    }

    #[test]
    fn text_round_trip_for_every_preset_run() {
        for p in presets::all() {
            if let Plan::Simulate(runs) = (p.plan)() {
                for r in runs {
                    let back = parse_config(&r.to_text()).unwrap_or_else(|e| panic!("{}: {e}", p.name));
                    assert_eq!(back, r, "{}", p.name);
                }
            }
        }
    }
}
