//! Scenario configuration: the TOML document, command-line overrides and the
//! validated [`ScenarioConfig`].
//!
//! ```toml
//! mode = "sweep2d"            # evolve | steady | sweep2d | figure-preset
//! preset = "fig3c"            # optional base scenario
//! output = "fig3c.csv"        # stdout when absent
//! format = "csv"              # csv | json
//!
//! [params]
//! gamma = 0.1
//! kappa = 2.0
//!
//! [time]
//! t_max = 200.0
//! dt = 0.02
//! stride = 10
//!
//! [[axes]]
//! name = "n_t"                # n_t | m_t | gamma | kappa | n_t=m_t
//! start = 0.0
//! stop = 5.0
//! count = 26
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cavity_discord::dynamics::{DEFAULT_DT, DEFAULT_T_MAX};
use cavity_discord::model::ModelParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::de::{DeTable, DeValue};
use toml::{Table, Value};

use crate::preset::Preset;

/// Evolve mode keeps every `stride`-th step of the `dt` grid.
pub const DEFAULT_STRIDE: usize = 10;
/// Axes per scenario.
pub const MAX_AXES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "evolve")]
    Evolve,
    #[serde(rename = "steady")]
    Steady,
    #[serde(rename = "sweep2d")]
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Steady => "steady",
            Mode::Sweep => "sweep2d",
        }
    }
}

/// Parameter swept along an axis. `Noise` drives `n_t` and `m_t` together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxisVar {
    #[serde(rename = "n_t")]
    NT,
    #[serde(rename = "m_t")]
    MT,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "n_t=m_t")]
    Noise,
}

impl AxisVar {
    pub const ALL: [AxisVar; 5] = [AxisVar::NT, AxisVar::MT, AxisVar::Gamma, AxisVar::Kappa, AxisVar::Noise];

    pub fn name(self) -> &'static str {
        match self {
            AxisVar::NT => "n_t",
            AxisVar::MT => "m_t",
            AxisVar::Gamma => "gamma",
            AxisVar::Kappa => "kappa",
            AxisVar::Noise => "n_t=m_t",
        }
    }

    pub fn apply(self, params: &mut ModelParams, value: f64) {
        match self {
            AxisVar::NT => params.n_t = value,
            AxisVar::MT => params.m_t = value,
            AxisVar::Gamma => params.gamma = value,
            AxisVar::Kappa => params.kappa = value,
            AxisVar::Noise => {
                params.n_t = value;
                params.m_t = value;
            }
        }
    }

    fn touches(self, other: AxisVar) -> bool {
        use AxisVar::*;
        self == other || matches!((self, other), (Noise, NT | MT) | (NT | MT, Noise))
    }
}

impl FromStr for AxisVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AxisVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown axis {s:?}; expected one of n_t, m_t, gamma, kappa, n_t=m_t"))
    }
}

impl fmt::Display for AxisVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evenly spaced values `start, …, stop` (both ends included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisVar,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: AxisVar, start: f64, stop: f64, count: usize) -> Self {
        Self { name, start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + k as f64 * step })
            .collect()
    }
}

/// Parses `name:start:stop:count`.
impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, start, stop, count] = parts[..] else {
            return Err(format!("expected name:start:stop:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Axis {
            name: name.trim().parse()?,
            start: num(start)?,
            stop: num(stop)?,
            count: count.trim().parse().map_err(|e| format!("{count:?}: {e}"))?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}; expected csv or json")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
    pub stride: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            dt: DEFAULT_DT,
            stride: DEFAULT_STRIDE,
        }
    }
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_states: Option<PathBuf>,
    pub params: ModelParams,
    pub time: TimeGrid,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<Axis>,
}

impl ScenarioConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            preset: None,
            output: None,
            format: Format::Csv,
            dump_states: None,
            params: ModelParams::default(),
            time: TimeGrid::default(),
            axes: Vec::new(),
        }
    }

    /// TOML rendering that [`parse_config`] reads back to the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// Every parameter point of the axes' Cartesian product, first axis outermost.
    pub fn points(&self) -> Vec<Vec<(AxisVar, f64)>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((axis.name, v));
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn params_at(&self, point: &[(AxisVar, f64)]) -> ModelParams {
        let mut p = self.params.clone();
        for &(var, value) in point {
            var.apply(&mut p, value);
        }
        p
    }
}

/// One violated constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Dotted path of the offending key, or the flag that set it.
    pub field: String,
    /// 1-based line in the configuration document.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ConfigError(pub Vec<Violation>);

impl ConfigError {
    fn single(field: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError(vec![Violation {
            field: field.to_owned(),
            line,
            message: message.into(),
        }])
    }

    pub fn violations(&self) -> &[Violation] {
        &self.0
    }

    /// Whether some violation concerns `field`.
    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Axis entry before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawAxis {
    pub name: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<i64>,
}

impl From<Axis> for RawAxis {
    fn from(a: Axis) -> Self {
        Self {
            name: Some(a.name.name().to_owned()),
            start: Some(a.start),
            stop: Some(a.stop),
            count: Some(a.count as i64),
        }
    }
}

/// Configuration fields as written, before defaults and validation. Documents
/// and command-line flags both produce one; [`RawConfig::merge`] layers them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub mode: Option<String>,
    pub preset: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub dump_states: Option<PathBuf>,
    pub g: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub n_t: Option<f64>,
    pub m_t: Option<f64>,
    pub cutoff: Option<i64>,
    pub omega_a: Option<f64>,
    pub omega_c: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub stride: Option<i64>,
    pub axes: Option<Vec<RawAxis>>,
    /// Line of each key, by dotted path, for documents.
    pub lines: BTreeMap<String, usize>,
}

impl RawConfig {
    /// Fields set in `over` replace those in `self`. A non-empty axis list
    /// replaces the whole list.
    pub fn merge(mut self, over: RawConfig) -> RawConfig {
        macro_rules! take {
            ($($f:ident => $path:literal),*) => {$(
                if over.$f.is_some() {
                    self.$f = over.$f;
                    self.lines.remove($path);
                }
            )*};
        }
        take!(
            mode => "mode", preset => "preset", output => "output", format => "format",
            dump_states => "dump_states", g => "params.g", gamma => "params.gamma",
            kappa => "params.kappa", n_t => "params.n_t", m_t => "params.m_t",
            cutoff => "params.cutoff", omega_a => "params.omega_a", omega_c => "params.omega_c",
            t_max => "time.t_max", dt => "time.dt", stride => "time.stride"
        );
        if over.axes.is_some() {
            self.axes = over.axes;
            self.lines.retain(|k, _| !k.starts_with("axes"));
        }
        self.lines.extend(over.lines);
        self
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn index_lines(table: &DeTable<'_>, prefix: &str, text: &str, out: &mut BTreeMap<String, usize>) {
    for (key, value) in table.iter() {
        let path = if prefix.is_empty() {
            key.get_ref().to_string()
        } else {
            format!("{prefix}.{}", key.get_ref())
        };
        out.insert(path.clone(), line_of(text, key.span().start));
        match value.get_ref() {
            DeValue::Table(t) => index_lines(t, &path, text, out),
            DeValue::Array(items) => {
                for (k, item) in items.iter().enumerate() {
                    let item_path = format!("{path}[{k}]");
                    out.insert(item_path.clone(), line_of(text, item.span().start));
                    if let DeValue::Table(t) = item.get_ref() {
                        index_lines(t, &item_path, text, out);
                    }
                }
            }
            _ => {}
        }
    }
}

struct Reader<'a> {
    lines: &'a BTreeMap<String, usize>,
    violations: Vec<Violation>,
}

impl Reader<'_> {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: path.to_owned(),
            line: self.lines.get(path).copied(),
            message: message.into(),
        });
    }

    fn check_keys(&mut self, table: &Table, prefix: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                self.fail(&path, format!("unknown key; expected one of {}", known.join(", ")));
            }
        }
    }

    fn float(&mut self, table: &Table, prefix: &str, key: &str) -> Option<f64> {
        let path = format!("{prefix}{key}");
        match table.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.fail(&path, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn int(&mut self, table: &Table, prefix: &str, key: &str) -> Option<i64> {
        let path = format!("{prefix}{key}");
        match table.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.fail(&path, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, table: &Table, prefix: &str, key: &str) -> Option<String> {
        let path = format!("{prefix}{key}");
        match table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.fail(&path, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn table<'t>(&mut self, table: &'t Table, key: &str) -> Option<&'t Table> {
        match table.get(key)? {
            Value::Table(t) => Some(t),
            other => {
                self.fail(key, format!("expected a table, found {}", other.type_str()));
                None
            }
        }
    }
}

const TOP_KEYS: [&str; 8] = ["mode", "preset", "output", "format", "dump_states", "params", "time", "axes"];
const PARAM_KEYS: [&str; 8] = ["g", "gamma", "kappa", "n_t", "m_t", "cutoff", "omega_a", "omega_c"];
const TIME_KEYS: [&str; 3] = ["t_max", "dt", "stride"];
const AXIS_KEYS: [&str; 4] = ["name", "start", "stop", "count"];

/// Reads a configuration document without applying defaults. Reports syntax
/// errors, unknown keys and type mismatches, each with its line.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let (raw, violations) = read_document(text)?;
    if violations.is_empty() {
        Ok(raw)
    } else {
        Err(ConfigError(violations))
    }
}

/// Fields that failed to read are left unset; their violations come back
/// alongside. Only syntax errors abort.
pub fn read_document(text: &str) -> Result<(RawConfig, Vec<Violation>), ConfigError> {
    let spanned = DeTable::parse(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        ConfigError::single("<document>", line, e.message().trim().to_owned())
    })?;
    let mut lines = BTreeMap::new();
    index_lines(spanned.get_ref(), "", text, &mut lines);
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::single("<document>", None, e.message().trim().to_owned()))?;

    let mut r = Reader {
        lines: &lines,
        violations: Vec::new(),
    };
    r.check_keys(&doc, "", &TOP_KEYS);
    let mut raw = RawConfig {
        mode: r.string(&doc, "", "mode"),
        preset: r.string(&doc, "", "preset"),
        output: r.string(&doc, "", "output").map(PathBuf::from),
        format: r.string(&doc, "", "format"),
        dump_states: r.string(&doc, "", "dump_states").map(PathBuf::from),
        ..RawConfig::default()
    };
    if let Some(p) = r.table(&doc, "params") {
        r.check_keys(p, "params", &PARAM_KEYS);
        raw.g = r.float(p, "params.", "g");
        raw.gamma = r.float(p, "params.", "gamma");
        raw.kappa = r.float(p, "params.", "kappa");
        raw.n_t = r.float(p, "params.", "n_t");
        raw.m_t = r.float(p, "params.", "m_t");
        raw.cutoff = r.int(p, "params.", "cutoff");
        raw.omega_a = r.float(p, "params.", "omega_a");
        raw.omega_c = r.float(p, "params.", "omega_c");
    }
    if let Some(t) = r.table(&doc, "time") {
        r.check_keys(t, "time", &TIME_KEYS);
        raw.t_max = r.float(t, "time.", "t_max");
        raw.dt = r.float(t, "time.", "dt");
        raw.stride = r.int(t, "time.", "stride");
    }
    match doc.get("axes") {
        None => {}
        Some(Value::Array(items)) => {
            let mut axes = Vec::new();
            for (k, item) in items.iter().enumerate() {
                let prefix = format!("axes[{k}]");
                let Value::Table(t) = item else {
                    r.fail(&prefix, format!("expected a table, found {}", item.type_str()));
                    continue;
                };
                r.check_keys(t, &prefix, &AXIS_KEYS);
                let dotted = format!("{prefix}.");
                axes.push(RawAxis {
                    name: r.string(t, &dotted, "name"),
                    start: r.float(t, &dotted, "start"),
                    stop: r.float(t, &dotted, "stop"),
                    count: r.int(t, &dotted, "count"),
                });
            }
            raw.axes = Some(axes);
        }
        Some(other) => r.fail("axes", format!("expected an array of tables, found {}", other.type_str())),
    }
    let violations = r.violations;
    raw.lines = lines;
    Ok((raw, violations))
}

/// Applies defaults (or the preset's values) under `raw` and validates the
/// result, reporting every violation.
pub fn resolve(raw: &RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let line = |path: &str| raw.lines.get(path).copied();
    let mut violations = Vec::new();
    let mut fail = |path: &str, message: String| {
        violations.push(Violation {
            field: path.to_owned(),
            line: line(path),
            message,
        })
    };

    let preset = match raw.preset.as_deref().map(Preset::from_str) {
        None => None,
        Some(Ok(p)) => Some(p),
        Some(Err(e)) => {
            fail("preset", e);
            None
        }
    };
    let mut cfg = match preset {
        Some(p) => p.config(),
        None => ScenarioConfig::new(Mode::Steady),
    };
    match raw.mode.as_deref() {
        None if preset.is_none() && raw.preset.is_none() => fail(
            "mode",
            "missing; expected evolve, steady, sweep2d or figure-preset".into(),
        ),
        None | Some("figure-preset") if preset.is_some() => {}
        Some("figure-preset") => {
            if raw.preset.is_none() {
                fail("preset", "required when mode is figure-preset".into());
            }
        }
        None => {}
        Some("evolve") => cfg.mode = Mode::Evolve,
        Some("steady") => cfg.mode = Mode::Steady,
        Some("sweep2d" | "sweep") => cfg.mode = Mode::Sweep,
        Some(other) => fail(
            "mode",
            format!("unknown mode {other:?}; expected evolve, steady, sweep2d or figure-preset"),
        ),
    }

    if let Some(f) = &raw.format {
        match f.parse() {
            Ok(f) => cfg.format = f,
            Err(e) => fail("format", e),
        }
    }
    if raw.output.is_some() {
        cfg.output = raw.output.clone();
    }
    if raw.dump_states.is_some() {
        cfg.dump_states = raw.dump_states.clone();
    }

    let p = &mut cfg.params;
    for (slot, value) in [
        (&mut p.g, raw.g),
        (&mut p.gamma, raw.gamma),
        (&mut p.kappa, raw.kappa),
        (&mut p.n_t, raw.n_t),
        (&mut p.m_t, raw.m_t),
    ] {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if raw.omega_a.is_some() {
        p.omega_a = raw.omega_a;
    }
    if raw.omega_c.is_some() {
        p.omega_c = raw.omega_c;
    }
    match raw.cutoff {
        Some(c) if c < 1 => fail("params.cutoff", format!("must be >= 1, got {c}")),
        Some(c) => p.cutoff = c as usize,
        None => {}
    }
    for v in p.violations() {
        if v.field != "cutoff" {
            fail(&format!("params.{}", v.field), v.message);
        }
    }

    if let Some(t) = raw.t_max {
        cfg.time.t_max = t;
    }
    if let Some(dt) = raw.dt {
        cfg.time.dt = dt;
    }
    match raw.stride {
        Some(s) if s < 1 => fail("time.stride", format!("must be >= 1, got {s}")),
        Some(s) => cfg.time.stride = s as usize,
        None => {}
    }
    let TimeGrid { t_max, dt, .. } = cfg.time;
    if !(dt.is_finite() && dt > 0.0) {
        fail("time.dt", format!("must be > 0, got {dt}"));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        fail("time.t_max", format!("must be > 0, got {t_max}"));
    } else if dt.is_finite() && dt > 0.0 && t_max < dt {
        fail("time.t_max", format!("must be >= dt = {dt}, got {t_max}"));
    }

    if let Some(axes) = &raw.axes {
        cfg.axes.clear();
        for (k, a) in axes.iter().enumerate() {
            let at = |key: &str| format!("axes[{k}].{key}");
            let name = match a.name.as_deref().map(AxisVar::from_str) {
                Some(Ok(n)) => Some(n),
                Some(Err(e)) => {
                    fail(&at("name"), e);
                    None
                }
                None => {
                    fail(&at("name"), "missing".into());
                    None
                }
            };
            let (Some(start), Some(stop), Some(count)) = (a.start, a.stop, a.count) else {
                for (key, present) in [("start", a.start.is_some()), ("stop", a.stop.is_some()), ("count", a.count.is_some())] {
                    if !present {
                        fail(&at(key), "missing".into());
                    }
                }
                continue;
            };
            if count < 2 {
                fail(&at("count"), format!("must be >= 2, got {count}"));
            }
            if !(start.is_finite() && stop.is_finite() && start < stop) {
                fail(&at("stop"), format!("range must satisfy start < stop, got [{start}, {stop}]"));
            }
            if start < 0.0 {
                fail(&at("start"), format!("rates and intensities must be >= 0, got {start}"));
            }
            if let Some(name) = name {
                if count >= 2 {
                    cfg.axes.push(Axis::new(name, start, stop, count as usize));
                }
            }
        }
    }
    if cfg.axes.len() > MAX_AXES {
        fail("axes", format!("at most {MAX_AXES} axes, got {}", cfg.axes.len()));
    }
    for (i, a) in cfg.axes.iter().enumerate() {
        for b in &cfg.axes[..i] {
            if a.name.touches(b.name) {
                fail(&format!("axes[{i}].name"), format!("{} overlaps the {} axis", a.name, b.name));
            }
        }
    }
    // Count axes as declared so an invalid one is not also reported as missing.
    let declared = raw.axes.as_ref().map_or(cfg.axes.len(), Vec::len);
    match cfg.mode {
        Mode::Steady if declared > 0 => {
            fail("axes", "steady mode solves a single point; use sweep2d for axes".into())
        }
        Mode::Sweep if declared == 0 => fail("axes", "sweep2d needs at least one axis".into()),
        _ => {}
    }

    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError(violations))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let (raw, violations) = read_document(text)?;
    resolve_with(&raw, violations)
}

/// [`resolve`], reporting `earlier` violations (from reading a document)
/// together with its own.
pub fn resolve_with(raw: &RawConfig, mut earlier: Vec<Violation>) -> Result<ScenarioConfig, ConfigError> {
    match resolve(raw) {
        Ok(cfg) if earlier.is_empty() => Ok(cfg),
        Ok(_) => Err(ConfigError(earlier)),
        Err(ConfigError(more)) => {
            earlier.extend(more);
            Err(ConfigError(earlier))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_evolve_config_gets_documented_defaults() {
        let cfg = parse_config("mode = \"evolve\"\n").unwrap();
        assert_eq!(cfg.mode, Mode::Evolve);
        assert_eq!(cfg.params.cutoff, 5);
        assert_eq!(cfg.time.dt, 0.02);
        assert_eq!(cfg.time.t_max, 200.0);
        assert_eq!(cfg.time.stride, DEFAULT_STRIDE);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn negative_intensity_names_field_and_line() {
        let err = parse_config("mode = \"steady\"\n[params]\ngamma = 0.1\nn_t = -1\n").unwrap_err();
        let v = &err.violations()[0];
        assert_eq!((v.field.as_str(), v.line), ("params.n_t", Some(4)));
        assert!(err.to_string().contains("line 4: params.n_t"));
    }

    #[test]
    fn every_violation_is_reported() {
        let text = r#"
mode = "sweep2d"
colour = "blue"
[params]
gamma = -0.5
kappa = "fast"
[time]
dt = 0
[[axes]]
name = "n_t"
start = 3.0
stop = 1.0
count = 1
"#;
        let err = parse_config(text).unwrap_err();
        for field in ["colour", "params.kappa", "params.gamma", "time.dt", "axes[0].count", "axes[0].stop"] {
            assert!(err.mentions(field), "missing {field} in {err}");
        }
        assert_eq!(err.violations().len(), 6, "{err}");
        let line = |f: &str| err.violations().iter().find(|v| v.field == f).unwrap().line;
        assert_eq!((line("colour"), line("params.gamma"), line("axes[0].count")), (Some(3), Some(5), Some(13)));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_config("mode = \"evolve\"\n[params\n").unwrap_err();
        assert_eq!(err.violations()[0].line, Some(2), "{err}");
    }

    #[test]
    fn mode_and_axis_rules() {
        assert!(parse_config("mode = \"sweep2d\"").unwrap_err().mentions("axes"));
        let two_noise = "mode = \"sweep2d\"\n[[axes]]\nname = \"n_t=m_t\"\nstart = 0\nstop = 1\ncount = 3\n[[axes]]\nname = \"m_t\"\nstart = 0\nstop = 1\ncount = 3\n";
        assert!(parse_config(two_noise).unwrap_err().mentions("axes[1].name"));
        assert!(parse_config("mode = \"teleport\"").unwrap_err().mentions("mode"));
        assert!(parse_config("").unwrap_err().mentions("mode"));
        assert!(parse_config("mode = \"figure-preset\"").unwrap_err().mentions("preset"));
    }

    #[test]
    fn preset_document_round_trips() {
        for preset in Preset::ALL {
            let cfg = preset.config();
            assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg, "{}", preset.name());
        }
        let cfg = parse_config("preset = \"fig2\"\n[params]\ncutoff = 7\n").unwrap();
        assert_eq!(cfg.params.cutoff, 7);
        assert_eq!(cfg.preset, Some(Preset::Fig2));
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis::new(AxisVar::Kappa, 0.05, 3.0, 30);
        let v = a.values();
        assert_eq!((v.len(), v[0], v[29]), (30, 0.05, 3.0));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let parsed: Axis = "n_t=m_t:0:5:26".parse().unwrap();
        assert_eq!(parsed, Axis::new(AxisVar::Noise, 0.0, 5.0, 26));
        assert!("n_t:0:5".parse::<Axis>().is_err());
    }

    #[test]
    fn points_cover_the_product_in_order() {
        let mut cfg = ScenarioConfig::new(Mode::Sweep);
        cfg.axes = vec![Axis::new(AxisVar::NT, 0.0, 1.0, 2), Axis::new(AxisVar::Gamma, 1.0, 3.0, 3)];
        let pts = cfg.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![(AxisVar::NT, 0.0), (AxisVar::Gamma, 2.0)]);
        let p = cfg.params_at(&pts[5]);
        assert_eq!((p.n_t, p.gamma), (1.0, 3.0));
        let mut noise = ModelParams::default();
        AxisVar::Noise.apply(&mut noise, 0.5);
        assert_eq!((noise.n_t, noise.m_t), (0.5, 0.5));
    }

    #[test]
    fn flags_override_documents() {
        let doc = parse_raw("mode = \"steady\"\n[params]\ngamma = 0.1\nkappa = 1\n").unwrap();
        let flags = RawConfig {
            kappa: Some(2.0),
            ..RawConfig::default()
        };
        let merged = doc.merge(flags);
        assert_eq!((merged.lines.get("params.gamma"), merged.lines.get("params.kappa")), (Some(&3), None));
        let cfg = resolve(&merged).unwrap();
        assert_eq!((cfg.params.gamma, cfg.params.kappa), (0.1, 2.0));
    }
}
