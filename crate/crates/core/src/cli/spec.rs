//! Sectioned key-value job files.
//!
//! ```text
//! # comment
//! [operator]
//! kind = toeplitz
//! family = log_example
//! params = [65536]
//!
//! [task]
//! task = rates
//! n = 100..10000
//! ```
//!
//! Values are numbers, `true`/`false`, bare identifiers, ranges `lo..hi` or
//! lists `[a, b, ...]`. Every key must be used by the chosen kinds; anything
//! else is rejected with its line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::operators::{OperatorModel, Resolution};
use crate::operators::SECTION_VALIDITY_DIVISOR;
use crate::verify::DEFAULT_N_PER_DECADE;

use super::CliError;

pub const DEFAULT_N_MIN: u64 = 100;
pub const DEFAULT_N_MAX: u64 = 10_000;
pub const DEFAULT_EPS_RANGE: (f64, f64) = (1e-4, 1.0);
pub const DEFAULT_EPS_PER_DECADE: usize = 16;
pub const DEFAULT_ENVELOPE_EPS_MIN: f64 = 1e-8;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Rates,
    Resolvent,
    Envelope,
    Verify,
    Compare,
    Fit,
}

impl Task {
    pub const ALL: [Task; 6] = [Task::Rates, Task::Resolvent, Task::Envelope, Task::Verify, Task::Compare, Task::Fit];

    pub fn name(self) -> &'static str {
        match self {
            Task::Rates => "rates",
            Task::Resolvent => "resolvent",
            Task::Envelope => "envelope",
            Task::Verify => "verify",
            Task::Compare => "compare",
            Task::Fit => "fit",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Family { name: String, params: Vec<f64> },
    Coefficients { coeffs: Vec<f64>, tail: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Identity,
    Diagonal { points: Vec<f64>, contains_one: bool },
    Curve { coeff: f64, power: f64 },
    Toeplitz(DensitySpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateSpec {
    PowerLaw { scale: f64, exponent: f64 },
    PowerLog { scale: f64, exponent: f64, log_exponent: f64 },
    Table { eps: Vec<f64>, values: Vec<f64> },
    /// Tabulated resolvent envelope of the operator down to `eps_min`.
    FromEnvelope { eps_min: f64 },
    /// Smallest `C·ε^{−exponent}` above the envelope on `[eps_min, eps_max]`.
    EnvelopeMajorant { exponent: f64, eps_min: f64, eps_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    UpperMlog,
    UpperPosinc,
    Lower,
    Sandwich,
    Comparisons,
    Necessity,
}

impl Claim {
    const ALL: [Claim; 6] = [
        Claim::UpperMlog,
        Claim::UpperPosinc,
        Claim::Lower,
        Claim::Sandwich,
        Claim::Comparisons,
        Claim::Necessity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::UpperMlog => "upper_mlog",
            Claim::UpperPosinc => "upper_posinc",
            Claim::Lower => "lower",
            Claim::Sandwich => "sandwich",
            Claim::Comparisons => "comparisons",
            Claim::Necessity => "necessity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitSpec {
    PowerLog,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionMethod {
    Exact,
    Section { dimension: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NSpec {
    Range { min: u64, max: u64 },
    List(Vec<u64>),
}

impl NSpec {
    pub fn max(&self) -> u64 {
        match self {
            NSpec::Range { max, .. } => *max,
            NSpec::List(v) => v.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn min(&self) -> u64 {
        match self {
            NSpec::Range { min, .. } => *min,
            NSpec::List(v) => v.iter().copied().min().unwrap_or(0),
        }
    }
}

/// `ε`/`θ` samples: explicit list or log grid over a range.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Range { lo: f64, hi: f64 },
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskParams {
    pub n: NSpec,
    pub n_per_decade: usize,
    pub grid: GridSpec,
    pub grid_per_decade: usize,
    pub claim: Option<Claim>,
    pub c: Option<f64>,
    pub c_list: Option<Vec<f64>>,
    /// Search mode: sweep `c` over a log grid with this many points per decade.
    pub c_sweep: Option<(f64, f64, usize)>,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub c_prime: Option<f64>,
    pub alpha: Option<f64>,
    pub fit: FitSpec,
    pub method: SectionMethod,
}

impl TaskParams {
    pub fn grid_values(&self) -> Vec<f64> {
        match &self.grid {
            GridSpec::Range { lo, hi } => crate::numeric::log_grid(*lo, *hi, self.grid_per_decade),
            GridSpec::List(v) => v.clone(),
        }
    }

    pub fn n_values(&self) -> Vec<u64> {
        match &self.n {
            NSpec::Range { min, max } => crate::numeric::integer_log_grid(*min, *max, self.n_per_decade),
            NSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub operator: Option<OperatorSpec>,
    pub resolution: Resolution,
    pub rate: Option<(RateSpec, Option<(f64, f64)>)>,
    pub task: Task,
    pub params: TaskParams,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Bool(bool),
    Ident(String),
    Range(f64, f64),
    List(Vec<f64>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Ident(_) => "identifier",
            Value::Range(..) => "range",
            Value::List(_) => "list",
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_value(raw: &str) -> Result<Value, String> {
    let s = raw.trim();
    if s.is_empty() {
        return Err("missing value".into());
    }
    if let Some(inner) = s.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner
            .split(',')
            .map(|x| parse_number(x).ok_or_else(|| format!("list entry '{}' is not a number", x.trim())))
            .collect::<Result<_, _>>()
            .map(Value::List);
    }
    if let Some((a, b)) = s.split_once("..") {
        if let (Some(lo), Some(hi)) = (parse_number(a), parse_number(b)) {
            return Ok(Value::Range(lo, hi));
        }
    }
    if let Some(x) = parse_number(s) {
        return Ok(Value::Num(x));
    }
    match s {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    let ident = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || matches!(c, '_' | '/' | '.'))
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' || c == '/');
    if ident {
        Ok(Value::Ident(s.to_string()))
    } else {
        Err(format!("cannot parse value '{s}'"))
    }
}

const SECTIONS: [&str; 4] = ["operator", "rate", "task", "output"];

/// Key-value pairs of one section, tracking which were consumed.
struct Section {
    name: &'static str,
    header_line: usize,
    entries: BTreeMap<String, (usize, Value)>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Section {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            header_line: 0,
            entries: BTreeMap::new(),
            used: Default::default(),
        }
    }

    fn present(&self) -> bool {
        self.header_line > 0
    }

    fn take(&self, key: &str) -> Option<&(usize, Value)> {
        let v = self.entries.get(key);
        if v.is_some() {
            self.used.borrow_mut().push(key.to_string());
        }
        v
    }

    fn type_error(&self, key: &str, line: usize, want: &str, got: &Value) -> CliError {
        CliError::Parse {
            line,
            message: format!("[{}] {key}: expected {want}, got {}", self.name, got.kind()),
        }
    }

    fn missing(&self, key: &str, context: &str) -> CliError {
        CliError::Parse {
            line: self.header_line,
            message: format!("[{}] missing key '{key}' ({context})", self.name),
        }
    }

    fn num(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::Num(x))) => Ok(Some(*x)),
            Some((line, v)) => Err(self.type_error(key, *line, "number", v)),
        }
    }

    fn req_num(&self, key: &str, context: &str) -> Result<f64, CliError> {
        self.num(key)?.ok_or_else(|| self.missing(key, context))
    }

    fn int(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, Value::Num(x))) => as_int(*x)
                .map(Some)
                .ok_or_else(|| parse_err(*line, format!("[{}] {key}: expected a nonnegative integer, got {x}", self.name))),
            Some((line, v)) => Err(self.type_error(key, *line, "integer", v)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::Bool(b))) => Ok(Some(*b)),
            Some((line, v)) => Err(self.type_error(key, *line, "true/false", v)),
        }
    }

    fn ident(&self, key: &str) -> Result<Option<(usize, String)>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, Value::Ident(s))) => Ok(Some((*line, s.clone()))),
            Some((line, v)) => Err(self.type_error(key, *line, "identifier", v)),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::List(v))) => Ok(Some(v.clone())),
            Some((_, Value::Num(x))) => Ok(Some(vec![*x])),
            Some((line, v)) => Err(self.type_error(key, *line, "list", v)),
        }
    }

    fn range(&self, key: &str) -> Result<Option<(usize, f64, f64)>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, Value::Range(a, b))) => Ok(Some((*line, *a, *b))),
            Some((line, v)) => Err(self.type_error(key, *line, "range lo..hi", v)),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.header_line, |e| e.0)
    }

    fn reject_unused(&self, context: &str) -> Result<(), CliError> {
        let used = self.used.borrow();
        for (key, (line, _)) in &self.entries {
            if !used.contains(key) {
                return Err(parse_err(*line, format!("[{}] unknown key '{key}' for {context}", self.name)));
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: String) -> CliError {
    CliError::Parse { line, message }
}

fn as_int(x: f64) -> Option<u64> {
    (x >= 0.0 && x.fract() == 0.0 && x <= 9.0e15).then_some(x as u64)
}

fn split_sections(text: &str) -> Result<Vec<Section>, CliError> {
    let mut sections: Vec<Section> = SECTIONS.iter().map(|s| Section::new(s)).collect();
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(h) = content.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            let idx = SECTIONS
                .iter()
                .position(|s| *s == h.trim())
                .ok_or_else(|| parse_err(line, format!("unknown section [{}]", h.trim())))?;
            if sections[idx].present() {
                return Err(parse_err(line, format!("duplicate section [{}]", h.trim())));
            }
            sections[idx].header_line = line;
            current = Some(idx);
            continue;
        }
        let idx = current.ok_or_else(|| parse_err(line, "key outside of any section".into()))?;
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(parse_err(line, format!("invalid key '{key}'")));
        }
        let value = parse_value(value).map_err(|m| parse_err(line, format!("{key}: {m}")))?;
        let sec = &mut sections[idx];
        if sec.entries.insert(key.to_string(), (line, value)).is_some() {
            return Err(parse_err(line, format!("[{}] duplicate key '{key}'", sec.name)));
        }
    }
    Ok(sections)
}

fn parse_operator(sec: &Section) -> Result<(Option<OperatorSpec>, Resolution), CliError> {
    let mut resolution = Resolution::default();
    if let Some(p) = sec.int("grid_per_decade")? {
        resolution.points_per_decade = p as usize;
    }
    if let Some(t) = sec.num("tolerance")? {
        resolution.tolerance = t;
    }
    if !sec.present() {
        return Ok((None, resolution));
    }
    let (line, kind) = sec.ident("kind")?.ok_or_else(|| sec.missing("kind", "operator kind"))?;
    let op = match kind.as_str() {
        "identity" => OperatorSpec::Identity,
        "diagonal" => OperatorSpec::Diagonal {
            points: sec.list("points")?.ok_or_else(|| sec.missing("points", "diagonal operator"))?,
            contains_one: sec.boolean("contains_one")?.unwrap_or(true),
        },
        "curve" => OperatorSpec::Curve {
            coeff: sec.num("coeff")?.unwrap_or(1.0),
            power: sec.num("power")?.unwrap_or(2.0),
        },
        "toeplitz" => {
            if let Some((_, name)) = sec.ident("family")? {
                OperatorSpec::Toeplitz(DensitySpec::Family {
                    name,
                    params: sec.list("params")?.unwrap_or_default(),
                })
            } else if let Some(coeffs) = sec.list("coefficients")? {
                OperatorSpec::Toeplitz(DensitySpec::Coefficients {
                    coeffs,
                    tail: sec.num("tail")?.unwrap_or(0.0),
                })
            } else {
                return Err(sec.missing("family", "toeplitz needs 'family' or 'coefficients'"));
            }
        }
        other => {
            return Err(parse_err(
                line,
                format!("unknown operator kind '{other}' (identity, diagonal, curve, toeplitz)"),
            ))
        }
    };
    sec.reject_unused(&format!("kind = {kind}"))?;
    Ok((Some(op), resolution))
}

fn parse_rate(sec: &Section) -> Result<Option<(RateSpec, Option<(f64, f64)>)>, CliError> {
    if !sec.present() {
        return Ok(None);
    }
    let (line, form) = sec.ident("form")?.ok_or_else(|| sec.missing("form", "rate form"))?;
    let spec = match form.as_str() {
        "power_law" => RateSpec::PowerLaw {
            scale: sec.num("scale")?.unwrap_or(1.0),
            exponent: sec.req_num("exponent", "power_law")?,
        },
        "power_log" => RateSpec::PowerLog {
            scale: sec.num("scale")?.unwrap_or(1.0),
            exponent: sec.req_num("exponent", "power_log")?,
            log_exponent: sec.req_num("log_exponent", "power_log")?,
        },
        "table" => RateSpec::Table {
            eps: sec.list("eps")?.ok_or_else(|| sec.missing("eps", "table"))?,
            values: sec.list("values")?.ok_or_else(|| sec.missing("values", "table"))?,
        },
        "from_envelope" => RateSpec::FromEnvelope {
            eps_min: sec.num("eps_min")?.unwrap_or(DEFAULT_ENVELOPE_EPS_MIN),
        },
        "envelope_majorant" => RateSpec::EnvelopeMajorant {
            exponent: sec.req_num("exponent", "envelope_majorant")?,
            eps_min: sec.num("eps_min")?.unwrap_or(DEFAULT_ENVELOPE_EPS_MIN),
            eps_max: sec.num("eps_max")?.unwrap_or(std::f64::consts::PI),
        },
        other => {
            return Err(parse_err(
                line,
                format!("unknown rate form '{other}' (power_law, power_log, table, from_envelope, envelope_majorant)"),
            ))
        }
    };
    let domain = match (sec.num("domain_min")?, sec.num("domain_max")?) {
        (None, None) => None,
        (lo, hi) => Some((
            lo.unwrap_or(crate::ratefun::DEFAULT_DOMAIN_MIN),
            hi.unwrap_or(std::f64::consts::PI),
        )),
    };
    sec.reject_unused(&format!("form = {form}"))?;
    Ok(Some((spec, domain)))
}

fn parse_task(sec: &Section, verb: Option<Task>) -> Result<(Task, TaskParams), CliError> {
    let task = match (sec.ident("task")?, verb) {
        (Some((line, name)), v) => {
            let t = Task::from_name(&name).ok_or_else(|| parse_err(line, format!("unknown task '{name}'")))?;
            if let Some(v) = v {
                if v != t {
                    return Err(parse_err(
                        line,
                        format!("job declares task '{}' but '{}' was requested", t.name(), v.name()),
                    ));
                }
            }
            t
        }
        (None, Some(v)) => v,
        (None, None) => return Err(sec.missing("task", "no task given on the command line")),
    };
    let n = match sec.take("n") {
        None => NSpec::Range {
            min: DEFAULT_N_MIN,
            max: DEFAULT_N_MAX,
        },
        Some((line, Value::Range(a, b))) => match (as_int(*a), as_int(*b)) {
            (Some(min), Some(max)) if min >= 1 && max > min => NSpec::Range { min, max },
            _ => return Err(parse_err(*line, format!("n range {a}..{b} must be integers with 1 ≤ lo < hi"))),
        },
        Some((line, Value::List(v))) => NSpec::List(
            v.iter()
                .map(|x| as_int(*x))
                .collect::<Option<Vec<_>>>()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| parse_err(*line, "n list must hold nonnegative integers".into()))?,
        ),
        Some((line, Value::Num(x))) => NSpec::List(vec![
            as_int(*x).ok_or_else(|| parse_err(*line, "n must be a nonnegative integer".into()))?
        ]),
        Some((line, v)) => return Err(sec.type_error("n", *line, "range or list", v)),
    };
    let grid_key = if task == Task::Resolvent { "theta" } else { "eps" };
    let grid = match sec.take(grid_key) {
        None => GridSpec::Range {
            lo: DEFAULT_EPS_RANGE.0,
            hi: DEFAULT_EPS_RANGE.1,
        },
        Some((line, Value::Range(a, b))) => {
            if !(*a > 0.0 && b > a) {
                return Err(parse_err(*line, format!("{grid_key} range must satisfy 0 < lo < hi")));
            }
            GridSpec::Range { lo: *a, hi: *b }
        }
        Some((_, Value::List(v))) => GridSpec::List(v.clone()),
        Some((_, Value::Num(x))) => GridSpec::List(vec![*x]),
        Some((line, v)) => return Err(sec.type_error(grid_key, *line, "range or list", v)),
    };
    let claim = match sec.ident("claim")? {
        None => None,
        Some((line, name)) => Some(
            Claim::ALL
                .into_iter()
                .find(|c| c.name() == name)
                .ok_or_else(|| parse_err(line, format!("unknown claim '{name}'")))?,
        ),
    };
    let fit = match sec.ident("model")? {
        None => FitSpec::PowerLog,
        Some((_, m)) if m == "power_log" => FitSpec::PowerLog,
        Some((_, m)) if m == "power" => FitSpec::Power,
        Some((line, m)) => return Err(parse_err(line, format!("unknown fit model '{m}' (power_log, power)"))),
    };
    let method = match sec.ident("method")? {
        None => SectionMethod::Exact,
        Some((_, m)) if m == "exact" => SectionMethod::Exact,
        Some((line, m)) if m == "section" => SectionMethod::Section {
            dimension: sec
                .int("section_dim")?
                .ok_or_else(|| parse_err(line, "method = section needs section_dim".into()))? as usize,
        },
        Some((line, m)) => return Err(parse_err(line, format!("unknown method '{m}' (exact, section)"))),
    };
    let c_sweep = match sec.range("c_sweep")? {
        None => None,
        Some((line, lo, hi)) => {
            if !(lo > 0.0 && hi > lo) {
                return Err(parse_err(line, "c_sweep must satisfy 0 < lo < hi".into()));
            }
            Some((lo, hi, sec.int("c_sweep_per_decade")?.unwrap_or(4) as usize))
        }
    };
    let params = TaskParams {
        n,
        n_per_decade: sec.int("n_per_decade")?.map_or(DEFAULT_N_PER_DECADE, |x| x as usize),
        grid,
        grid_per_decade: sec.int("grid_points_per_decade")?.map_or(DEFAULT_EPS_PER_DECADE, |x| x as usize),
        claim,
        c: sec.num("c")?,
        c_list: sec.list("c_list")?,
        c_sweep,
        delta: sec.num("delta")?,
        delta_prime: sec.num("delta_prime")?,
        c_prime: sec.num("c_prime")?,
        alpha: sec.num("alpha")?,
        fit,
        method,
    };
    sec.reject_unused(&format!("task = {}", task.name()))?;
    Ok((task, params))
}

/// Parse and validate a job file.
pub fn parse_spec(text: &str) -> Result<JobSpec, CliError> {
    parse_spec_for(text, None)
}

/// Parse a job file for a given verb; the file's `task` key, if present, must agree.
pub fn parse_spec_for(text: &str, verb: Option<Task>) -> Result<JobSpec, CliError> {
    let sections = split_sections(text)?;
    let (operator, resolution) = parse_operator(&sections[0])?;
    let rate = parse_rate(&sections[1])?;
    let (task, params) = parse_task(&sections[2], verb)?;
    let out = &sections[3];
    let output = OutputSpec {
        dir: out
            .ident("dir")?
            .map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), |(_, d)| PathBuf::from(d)),
        plot: out.boolean("plot")?.unwrap_or(true),
    };
    out.reject_unused("output")?;
    let job = JobSpec {
        operator,
        resolution,
        rate,
        task,
        params,
        output,
    };
    job.validate().map_err(|e| match e {
        CliError::Invalid(m) => parse_err(sections[2].line_of("n").max(1), m),
        other => other,
    })?;
    Ok(job)
}

impl JobSpec {
    /// Cross-field checks; run again after command-line overrides.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        let needs_operator = !matches!(self.task, Task::Compare)
            && !(self.task == Task::Verify && p.claim == Some(Claim::Comparisons));
        if needs_operator && self.operator.is_none() {
            return Err(CliError::Invalid(format!("task '{}' needs an [operator] section", self.task.name())));
        }
        if needs_operator {
            self.resolution
                .check(p.n.max())
                .map_err(|e| CliError::Invalid(e.to_string()))?;
        }
        if let SectionMethod::Section { dimension } = p.method {
            if !matches!(self.operator, Some(OperatorSpec::Toeplitz(_))) {
                return Err(CliError::Invalid("method = section needs a toeplitz operator".into()));
            }
            let limit = (dimension / SECTION_VALIDITY_DIVISOR) as u64;
            if p.n.max() > limit {
                return Err(CliError::Invalid(format!(
                    "section validity rule n ≤ N/{SECTION_VALIDITY_DIVISOR} violated: n_max = {} > {limit} for N = {dimension}",
                    p.n.max()
                )));
            }
        }
        let needs_rate = match self.task {
            Task::Compare => true,
            Task::Verify => !matches!(p.claim, Some(Claim::Sandwich)),
            _ => false,
        };
        if needs_rate && self.rate.is_none() {
            return Err(CliError::Invalid(format!("task '{}' needs a [rate] section", self.task.name())));
        }
        if self.task == Task::Fit || self.task == Task::Verify {
            if !matches!(p.n, NSpec::Range { .. }) {
                return Err(CliError::Invalid(format!("task '{}' needs an n range lo..hi", self.task.name())));
            }
        }
        if self.task == Task::Verify {
            let claim = p.claim.ok_or_else(|| CliError::Invalid("verify needs 'claim'".into()))?;
            let need = |name: &str, v: Option<f64>| {
                v.map(|_| ()).ok_or_else(|| CliError::Invalid(format!("claim {} needs '{name}'", claim.name())))
            };
            match claim {
                Claim::UpperMlog => need("c", p.c)?,
                Claim::UpperPosinc => {}
                Claim::Lower => {
                    if p.c_list.is_none() && p.c_sweep.is_none() {
                        return Err(CliError::Invalid("claim lower needs 'c_list' or 'c_sweep'".into()));
                    }
                }
                Claim::Sandwich => {
                    need("delta", p.delta)?;
                    if let Some(dp) = p.delta_prime {
                        need("c", p.c)?;
                        let d = p.delta.unwrap_or(0.0);
                        if !(dp > d && dp < 1.0) {
                            return Err(CliError::Invalid(format!(
                                "sandwich lower bound requires δ′ ∈ (δ, 1): got δ = {d}, δ′ = {dp}"
                            )));
                        }
                        if !(p.c.unwrap_or(0.0) > 1.0) {
                            return Err(CliError::Invalid("sandwich lower bound requires c > 1".into()));
                        }
                    }
                }
                Claim::Comparisons => {
                    need("alpha", p.alpha)?;
                    need("c", p.c)?;
                    need("c_prime", p.c_prime)?;
                }
                Claim::Necessity => {
                    need("c", p.c)?;
                    need("delta", p.delta)?;
                }
            }
        }
        Ok(())
    }

    /// Replace the top of the `n` window.
    pub fn override_n_max(&mut self, n_max: u64) -> Result<(), CliError> {
        match &mut self.params.n {
            NSpec::Range { min, max } => {
                if n_max <= *min {
                    return Err(CliError::Invalid(format!("--n-max {n_max} must exceed n_min = {min}")));
                }
                *max = n_max;
            }
            NSpec::List(v) => v.retain(|&n| n <= n_max),
        }
        Ok(())
    }

    /// Canonical job-file text; parsing it yields the same job.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| format!("[{}]", v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "));
        s.push_str("[operator]\n");
        match &self.operator {
            None => {}
            Some(OperatorSpec::Identity) => s.push_str("kind = identity\n"),
            Some(OperatorSpec::Diagonal { points, contains_one }) => {
                let _ = writeln!(s, "kind = diagonal\npoints = {}\ncontains_one = {contains_one}", list(points));
            }
            Some(OperatorSpec::Curve { coeff, power }) => {
                let _ = writeln!(s, "kind = curve\ncoeff = {coeff:?}\npower = {power:?}");
            }
            Some(OperatorSpec::Toeplitz(DensitySpec::Family { name, params })) => {
                let _ = writeln!(s, "kind = toeplitz\nfamily = {name}\nparams = {}", list(params));
            }
            Some(OperatorSpec::Toeplitz(DensitySpec::Coefficients { coeffs, tail })) => {
                let _ = writeln!(s, "kind = toeplitz\ncoefficients = {}\ntail = {tail:?}", list(coeffs));
            }
        }
        let _ = writeln!(
            s,
            "grid_per_decade = {}\ntolerance = {:?}",
            self.resolution.points_per_decade, self.resolution.tolerance
        );
        if let Some((rate, domain)) = &self.rate {
            s.push_str("\n[rate]\n");
            match rate {
                RateSpec::PowerLaw { scale, exponent } => {
                    let _ = writeln!(s, "form = power_law\nscale = {scale:?}\nexponent = {exponent:?}");
                }
                RateSpec::PowerLog {
                    scale,
                    exponent,
                    log_exponent,
                } => {
                    let _ = writeln!(
                        s,
                        "form = power_log\nscale = {scale:?}\nexponent = {exponent:?}\nlog_exponent = {log_exponent:?}"
                    );
                }
                RateSpec::Table { eps, values } => {
                    let _ = writeln!(s, "form = table\neps = {}\nvalues = {}", list(eps), list(values));
                }
                RateSpec::FromEnvelope { eps_min } => {
                    let _ = writeln!(s, "form = from_envelope\neps_min = {eps_min:?}");
                }
                RateSpec::EnvelopeMajorant {
                    exponent,
                    eps_min,
                    eps_max,
                } => {
                    let _ = writeln!(
                        s,
                        "form = envelope_majorant\nexponent = {exponent:?}\neps_min = {eps_min:?}\neps_max = {eps_max:?}"
                    );
                }
            }
            if let Some((lo, hi)) = domain {
                let _ = writeln!(s, "domain_min = {lo:?}\ndomain_max = {hi:?}");
            }
        }
        let p = &self.params;
        let _ = writeln!(s, "\n[task]\ntask = {}", self.task.name());
        match &p.n {
            NSpec::Range { min, max } => {
                let _ = writeln!(s, "n = {min}..{max}");
            }
            NSpec::List(v) => {
                let _ = writeln!(s, "n = [{}]", v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", "));
            }
        }
        let _ = writeln!(s, "n_per_decade = {}", p.n_per_decade);
        let grid_key = if self.task == Task::Resolvent { "theta" } else { "eps" };
        match &p.grid {
            GridSpec::Range { lo, hi } => {
                let _ = writeln!(s, "{grid_key} = {lo:?}..{hi:?}");
            }
            GridSpec::List(v) => {
                let _ = writeln!(s, "{grid_key} = {}", list(v));
            }
        }
        let _ = writeln!(s, "grid_points_per_decade = {}", p.grid_per_decade);
        if let Some(c) = p.claim {
            let _ = writeln!(s, "claim = {}", c.name());
        }
        for (name, v) in [
            ("c", p.c),
            ("delta", p.delta),
            ("delta_prime", p.delta_prime),
            ("c_prime", p.c_prime),
            ("alpha", p.alpha),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "{name} = {v:?}");
            }
        }
        if let Some(v) = &p.c_list {
            let _ = writeln!(s, "c_list = {}", list(v));
        }
        if let Some((lo, hi, k)) = p.c_sweep {
            let _ = writeln!(s, "c_sweep = {lo:?}..{hi:?}\nc_sweep_per_decade = {k}");
        }
        let _ = writeln!(
            s,
            "model = {}",
            match p.fit {
                FitSpec::PowerLog => "power_log",
                FitSpec::Power => "power",
            }
        );
        match p.method {
            SectionMethod::Exact => s.push_str("method = exact\n"),
            SectionMethod::Section { dimension } => {
                let _ = writeln!(s, "method = section\nsection_dim = {dimension}");
            }
        }
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\nplot = {}",
            self.output.dir.display(),
            self.output.plot
        );
        s
    }

    /// Build the operator model with the job's resolution.
    pub fn build_operator(&self) -> Result<OperatorModel, CliError> {
        let op = self
            .operator
            .as_ref()
            .ok_or_else(|| CliError::Invalid("no [operator] section".into()))?;
        let model = match op {
            OperatorSpec::Identity => OperatorModel::identity(),
            OperatorSpec::Diagonal { points, contains_one } => OperatorModel::diagonal_real(points, *contains_one)?,
            OperatorSpec::Curve { coeff, power } => OperatorModel::radial_curve(*coeff, *power)?,
            OperatorSpec::Toeplitz(d) => {
                let density = match d {
                    DensitySpec::Family { name, params } => crate::density::Density::builtin_family(name, params)?,
                    DensitySpec::Coefficients { coeffs, tail } => {
                        crate::density::Density::from_prefix(coeffs.clone(), *tail)?
                    }
                };
                OperatorModel::toeplitz(density)?
            }
        };
        Ok(model.with_resolution(self.resolution))
    }
}

/// Documented defaults, printed by `--show-config` without a job file.
pub fn defaults_text() -> String {
    let r = Resolution::default();
    format!(
        "[operator]\n\
         grid_per_decade = {}\n\
         tolerance = {:?}\n\
         \n[rate]\n\
         scale = 1.0\n\
         domain_min = {:?}\n\
         eps_min = {:?}\n\
         \n[task]\n\
         n = {DEFAULT_N_MIN}..{DEFAULT_N_MAX}\n\
         n_per_decade = {DEFAULT_N_PER_DECADE}\n\
         eps = {:?}..{:?}\n\
         grid_points_per_decade = {DEFAULT_EPS_PER_DECADE}\n\
         model = power_log\n\
         method = exact\n\
         \n[output]\n\
         dir = {DEFAULT_OUTPUT_DIR}\n\
         plot = true\n",
        r.points_per_decade,
        r.tolerance,
        crate::ratefun::DEFAULT_DOMAIN_MIN,
        DEFAULT_ENVELOPE_EPS_MIN,
        DEFAULT_EPS_RANGE.0,
        DEFAULT_EPS_RANGE.1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_rates_job() {
        let job = parse_spec(
            "[operator]\nkind = toeplitz\nfamily = log_example\n\n[task]\ntask = rates\nn = 100..10000\n",
        )
        .unwrap();
        assert_eq!(job.task, Task::Rates);
        assert_eq!(job.params.n, NSpec::Range { min: 100, max: 10000 });
        assert_eq!(job.resolution, Resolution::default());
        assert_eq!(parse_spec(&job.to_text()).unwrap(), job);
    }

    #[test]
    fn diagonal_job_round_trips() {
        let job = parse_spec("[operator]\nkind = diagonal\npoints = [1, 0.9]\n[task]\ntask = rates\nn = [1,2,3]\n").unwrap();
        assert_eq!(
            job.operator,
            Some(OperatorSpec::Diagonal {
                points: vec![1.0, 0.9],
                contains_one: true
            })
        );
        assert_eq!(parse_spec(&job.to_text()).unwrap(), job);
    }

    #[test]
    fn unknown_keys_report_line() {
        let err = parse_spec("[operator]\nkind = identity\nbogus = 3\n[task]\ntask = rates\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = parse_spec("[operator]\nkind = diagonal\npoints = [0.5]\nfamily = log_example\n[task]\ntask = rates\n")
            .unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 4, .. }), "{err}");
        let err = parse_spec("[weird]\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }));
    }

    #[test]
    fn sandwich_delta_prime_rejected() {
        let text = "[operator]\nkind = curve\n[task]\ntask = verify\nclaim = sandwich\ndelta = 0.2\ndelta_prime = 0.1\nc = 1.5\n";
        let err = parse_spec(text).unwrap_err().to_string();
        assert!(err.contains("δ′ ∈ (δ, 1)"), "{err}");
    }

    #[test]
    fn resolution_rule_named() {
        let text = "[operator]\nkind = identity\ngrid_per_decade = 10\n[task]\ntask = rates\n";
        let err = parse_spec(text).unwrap_err().to_string();
        assert!(err.contains("spectral-resolution rule"), "{err}");
        let text = "[operator]\nkind = toeplitz\nfamily = lazy_bernoulli\n[task]\ntask = rates\nn = 1..100\nmethod = section\nsection_dim = 512\n";
        let err = parse_spec(text).unwrap_err().to_string();
        assert!(err.contains("section validity rule"), "{err}");
    }

    #[test]
    fn task_must_match_verb() {
        let text = "[operator]\nkind = identity\n[task]\ntask = rates\n";
        assert!(parse_spec_for(text, Some(Task::Fit)).is_err());
        assert!(parse_spec_for("[operator]\nkind = identity\n", Some(Task::Rates)).is_ok());
    }
}
